"""Piecewise-constant functions of the weight-level ``w > 0``."""
from __future__ import annotations

import bisect
import math
from typing import Callable, Iterator


class StepFunction:
    """Left-open, right-closed pieces ``(0, w_1], (w_1, w_2], ..., (w_t, inf)``.

    ``values[t]`` holds the value on the piece ending at ``breakpoints[t]``;
    ``tail`` is the value on ``(w_t, inf)``.
    """

    __slots__ = ("breakpoints", "values", "tail")

    def __init__(self, tail=0.0, breakpoints=(), values=()):
        self.breakpoints = list(breakpoints)
        self.values = list(values)
        self.tail = tail
        if len(self.breakpoints) != len(self.values):
            raise ValueError("need exactly one value per breakpoint")
        if any(not (lo < hi) for lo, hi in zip([0.0] + self.breakpoints, self.breakpoints)):
            raise ValueError("breakpoints must be positive and strictly increasing")

    def copy(self) -> "StepFunction":
        return StepFunction(self.tail, self.breakpoints, self.values)

    def __call__(self, w: float):
        if w <= 0:
            raise ValueError("weight-levels are strictly positive")
        t = bisect.bisect_left(self.breakpoints, w)
        return self.values[t] if t < len(self.values) else self.tail

    def split(self, w: float) -> None:
        """Make ``w`` a breakpoint without changing the function."""
        if w <= 0:
            return
        t = bisect.bisect_left(self.breakpoints, w)
        if t < len(self.breakpoints) and self.breakpoints[t] == w:
            return
        value = self.values[t] if t < len(self.values) else self.tail
        self.breakpoints.insert(t, w)
        self.values.insert(t, value)

    def pieces(self) -> Iterator[tuple[float, float, object]]:
        """Yield ``(lo, hi, value)`` for every piece, the tail last with ``hi = inf``."""
        lo = 0.0
        for hi, v in zip(self.breakpoints, self.values):
            yield lo, hi, v
            lo = hi
        yield lo, math.inf, self.tail

    def integral(self, lo: float = 0.0, hi: float = math.inf, fn: Callable | None = None) -> float:
        """Exact integral of ``fn(value)`` (or the value itself) over ``[lo, hi]``."""
        total = []
        for a, b, v in self.pieces():
            a, b = max(a, lo), min(b, hi)
            if b <= a:
                continue
            y = v if fn is None else fn(v)
            if y == 0:
                continue
            if math.isinf(b):
                return math.copysign(math.inf, y)
            total.append((b - a) * y)
        return math.fsum(total)

    def is_nonincreasing(self) -> bool:
        seq = self.values + [self.tail]
        return all(x >= y for x, y in zip(seq, seq[1:]))

    def __eq__(self, other) -> bool:
        """Equal as functions: same value on every piece, whatever the breakpoints."""
        if not isinstance(other, StepFunction) or self.tail != other.tail:
            return False
        levels = sorted(set(self.breakpoints) | set(other.breakpoints))
        return all(self(w) == other(w) for w in levels)

    def __repr__(self) -> str:
        return f"StepFunction(tail={self.tail!r}, breakpoints={self.breakpoints!r}, values={self.values!r})"
