"""Never-selected recurrences for the warmup and improved correlated selectors.

``f_k`` bounds the warmup selector, ``g_k(p)`` the improved selector with
sender probability ``p``.  Both satisfy ``x_0 = x_1 = 1`` and
``x_k = x_{k-1} - c * x_{k-2}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError

K_MAX = 64
WARMUP_COEFF = 1.0 / 16.0


def _check_probability(p: float) -> None:
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")


def gamma_from_p(p: float) -> float:
    """Correlation level of the improved selector with sender probability ``p``."""
    _check_probability(p)
    return p * (1.0 - p) * (4.0 - p) / 8.0


def optimal_p() -> tuple[float, float]:
    """Return the sender probability maximizing ``gamma_from_p`` and its value.

    The derivative of ``p(1-p)(4-p)`` is ``3p^2 - 10p + 4``, whose root in
    ``[0, 1]`` is ``(5 - sqrt(13)) / 3``.
    """
    p = (5.0 - math.sqrt(13.0)) / 3.0
    return p, gamma_from_p(p)


@lru_cache(maxsize=None)
def _table(coeff: float) -> tuple[float, ...]:
    values = [1.0, 1.0]
    for _ in range(2, K_MAX + 1):
        values.append(values[-1] - coeff * values[-2])
    return tuple(values)


def _lookup(coeff: float, k: int) -> float:
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    if k > K_MAX:
        raise DomainError(f"k is capped at {K_MAX}, got {k}")
    return _table(coeff)[k]


def eval_f(k: int) -> float:
    return _lookup(WARMUP_COEFF, k)


def eval_g(k: int, p: float) -> float:
    return _lookup(gamma_from_p(p), k)


@dataclass(frozen=True)
class RecurrenceTable:
    """Values ``x_0..x_{k_max}`` of one recurrence.

    ``p`` is ``None`` for the warmup recurrence.
    """

    kind: str
    values: tuple[float, ...]
    p: float | None = None

    @classmethod
    def warmup(cls, k_max: int = K_MAX) -> "RecurrenceTable":
        return cls("warmup", tuple(eval_f(k) for k in range(k_max + 1)))

    @classmethod
    def improved(cls, p: float | None = None, k_max: int = K_MAX) -> "RecurrenceTable":
        if p is None:
            p = optimal_p()[0]
        return cls("improved", tuple(eval_g(k, p) for k in range(k_max + 1)), p)

    @property
    def coefficient(self) -> float:
        return WARMUP_COEFF if self.kind == "warmup" else gamma_from_p(self.p)

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)
