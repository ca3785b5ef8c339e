"""Gain-sharing tables for the edge-weighted and unweighted engines.

The published tables are shipped verbatim.  Their printed digits are
rounded, so a few gain-split constraints are violated by up to ~3e-8.  The
engines therefore default to :meth:`GainTable.repaired` /
:meth:`UnweightedDualTable.repaired`, which shave the offending online share
just enough to make every reverse-weak-duality constraint hold exactly.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

from .errors import DomainError
from .recurrences import optimal_p, eval_g

INF = math.inf

GAMMA_WARMUP = 1.0 / 16.0
GAMMA_IMPROVED = (13.0 * math.sqrt(13.0) - 35.0) / 108.0


def _is_inf(k) -> bool:
    return k == INF


@dataclass(frozen=True)
class GainTable:
    """Gain-sharing parameters ``a(k)``, ``b(k)`` for ``k = 0..k_max``.

    ``a(k) = b(k) = 0`` beyond ``k_max``; at ``k = inf`` the offline share is
    the full sum and the online share is zero.
    """

    gamma: float
    kappa: float
    Gamma: float
    a: tuple[float, ...]
    b: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.a) != len(self.b) or not self.a:
            raise DomainError("a and b must have the same nonzero length")
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 1.0 <= self.kappa <= 2.0:
            raise DomainError(f"kappa must lie in [1, 2], got {self.kappa}")
        if min(self.a) < 0 or min(self.b) < 0:
            raise DomainError("gain-sharing entries must be nonnegative")
        # prepaid amounts at higher weight-levels need a(0) >= gamma/2
        if self.a[0] < self.gamma / 2 - 1e-12:
            raise DomainError(f"a(0) = {self.a[0]} is below gamma/2 = {self.gamma / 2}")

    @property
    def k_max(self) -> int:
        return len(self.a) - 1

    def a_at(self, k) -> float:
        return 0.0 if _is_inf(k) or k > self.k_max else self.a[k]

    def b_at(self, k) -> float:
        return 0.0 if _is_inf(k) or k > self.k_max else self.b[k]

    def a_prefix(self, k) -> float:
        """``sum_{l < k} a(l)``; the full sum when ``k`` is infinite."""
        return math.fsum(self.a) if _is_inf(k) else math.fsum(self.a[: min(k, self.k_max + 1)])

    def a_suffix(self, k) -> float:
        """``sum_{l >= k} a(l)``; zero when ``k`` is infinite."""
        return 0.0 if _is_inf(k) else math.fsum(self.a[k:])

    def prepay(self, k) -> float:
        """Amount moved into ``alpha`` above the edge weight when ``k >= 1``."""
        if k == 0 or _is_inf(k):
            return 0.0
        return 2.0 ** (-k - 1) * (1.0 - self.gamma) ** (k - 1) * self.gamma

    def unmatched_lower_bound(self, k) -> float:
        """Lower bound on ``1 - ybar`` after ``k`` randomized rounds."""
        if _is_inf(k):
            return 0.0
        return 2.0 ** (-k) * (1.0 - self.gamma) ** max(k - 1, 0)

    def certified_gamma(self) -> float:
        """Smallest left-hand side among the dual-feasibility constraints."""
        lhs = [math.fsum(self.a)]
        for k in range(self.k_max + 1):
            lhs.append(self.a_prefix(k) + 2.0 * self.b[k])
            lhs.append(self.a_prefix(k + 1) + self.kappa * self.b[k])
        return min(lhs)

    def repaired(self, margin: float = 1e-12) -> "GainTable":
        """Shrink ``b`` until the gain-split constraints hold with ``margin`` to spare."""
        g = self.gamma
        b = list(self.b)
        for k in range(self.k_max + 1):
            det_excess = self.a_suffix(k) + self.kappa * b[k] - self.unmatched_lower_bound(k)
            if k == 0:
                rnd_excess = self.a[0] + b[0] - 0.5
            else:
                rnd_excess = self.a[k] + b[k] - 2.0 ** (-k - 1) * (1 - g) ** (k - 1) * (1 + g)
            cut = max(det_excess / self.kappa, rnd_excess, -margin) + margin
            b[k] = max(b[k] - cut, 0.0) if cut > 0 else b[k]
        fixed = replace(self, b=tuple(b))
        return replace(fixed, Gamma=min(self.Gamma, fixed.certified_gamma()), name=self.name + "*")


@dataclass(frozen=True)
class UnweightedDualTable:
    """Dual increments ``dalpha(k)``, ``dbeta(k)`` for the two-choice greedy engine."""

    Gamma: float
    dalpha: tuple[float, ...]
    dbeta: tuple[float, ...]
    p: float
    name: str = ""

    def __post_init__(self):
        if len(self.dalpha) != len(self.dbeta) or not self.dalpha:
            raise DomainError("dalpha and dbeta must have the same nonzero length")
        if min(self.dalpha) < 0 or min(self.dbeta) < 0:
            raise DomainError("dual increments must be nonnegative")

    @property
    def k_max(self) -> int:
        return len(self.dalpha) - 1

    def g(self, k: int) -> float:
        return eval_g(k, self.p)

    def dalpha_at(self, k) -> float:
        return 0.0 if _is_inf(k) or k > self.k_max else self.dalpha[k]

    def dbeta_at(self, k) -> float:
        return 0.0 if _is_inf(k) or k > self.k_max else self.dbeta[k]

    def alpha_prefix(self, k) -> float:
        return math.fsum(self.dalpha) if _is_inf(k) else math.fsum(self.dalpha[: min(k, self.k_max + 1)])

    def alpha_suffix(self, k) -> float:
        return 0.0 if _is_inf(k) else math.fsum(self.dalpha[k:])

    def gain(self, k: int) -> float:
        """Primal increment of one candidate in a randomized round at count ``k``."""
        return 2.0 ** (-k) * self.g(k) - 2.0 ** (-k - 1) * self.g(k + 1)

    def certified_gamma(self) -> float:
        lhs = [math.fsum(self.dalpha)]
        lhs += [self.alpha_prefix(k) + 2.0 * self.dbeta[k] for k in range(self.k_max + 1)]
        return min(lhs)

    def repaired(self, margin: float = 1e-12) -> "UnweightedDualTable":
        dbeta = list(self.dbeta)
        for k in range(self.k_max + 1):
            excess = self.dalpha[k] + dbeta[k] - self.gain(k)
            if excess > -margin:
                dbeta[k] = max(dbeta[k] - excess - margin, 0.0)
        for k in range(1, self.k_max + 1):
            dbeta[k] = min(dbeta[k], dbeta[k - 1])
        fixed = replace(self, dbeta=tuple(dbeta))
        return replace(fixed, Gamma=min(self.Gamma, fixed.certified_gamma()), name=self.name + "*")


_A_1A = (0.24748256, 0.13684883, 0.06415997, 0.03009310, 0.01413332,
         0.00666576, 0.00318572, 0.00158503, 0.00088057)
_B_1A = (0.25251744, 0.12877617, 0.06035174, 0.02827176, 0.01322521,
         0.00615855, 0.00282566, 0.00123280, 0.00044028)
_A_1B = (0.24566361, 0.14597716, 0.06497349, 0.02892807, 0.01289279,
         0.00576587, 0.00260819, 0.00122399, 0.00063960)
_B_1B = (0.25433639, 0.13150459, 0.05851601, 0.02602926, 0.01156523,
         0.00511883, 0.00223589, 0.00093180, 0.00031980)
_G_T3 = (1.00000000, 1.00000000, 0.89007253, 0.78014506, 0.68230164,
         0.59654227, 0.52153858, 0.45596220, 0.39863078)
_DA_T3 = (0.24550678, 0.14574204, 0.06613120, 0.02907108, 0.01273424,
          0.00559236, 0.00248248, 0.00114193, 0.00058431)
_DB_T3 = (0.25449322, 0.13173982, 0.05886880, 0.02580320, 0.01126766,
          0.00490054, 0.00210436, 0.00086312, 0.00029216)

TABLE_1A = GainTable(GAMMA_WARMUP, 1.5, 0.50503484, _A_1A, _B_1A, "1a")
TABLE_1B = GainTable(GAMMA_IMPROVED, 1.5, 0.508672, _A_1B, _B_1B, "1b")
TABLE_3 = UnweightedDualTable(0.508986, _DA_T3, _DB_T3, optimal_p()[0], "t3")
TABLE_3_G = _G_T3

PUBLISHED = {"1a": TABLE_1A, "1b": TABLE_1B, "t3": TABLE_3}


def builtin_table(name: str, repaired: bool = True):
    """Look up a published table by name (``1a``, ``1b``, ``t3``)."""
    try:
        table = PUBLISHED[name]
    except KeyError:
        raise DomainError(f"unknown table {name!r}; choose from {sorted(PUBLISHED)}") from None
    return table.repaired() if repaired else table


def table_to_csv(table: GainTable | UnweightedDualTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(table, GainTable):
        w.writerow(["k", "a(k)", "b(k)"])
        for k in range(table.k_max + 1):
            w.writerow([k, f"{table.a[k]:.8f}", f"{table.b[k]:.8f}"])
    else:
        w.writerow(["k", "g_k", "dalpha(k)", "beta(k)"])
        for k in range(table.k_max + 1):
            w.writerow([k, f"{table.g(k):.8f}", f"{table.dalpha[k]:.8f}", f"{table.dbeta[k]:.8f}"])
    return buf.getvalue()


def table_from_csv(text: str, **params) -> GainTable | UnweightedDualTable:
    """Read a table written by :func:`table_to_csv`.

    Edge-weighted tables need ``gamma``, ``kappa`` and ``Gamma`` keywords;
    unweighted ones need ``Gamma`` (``p`` defaults to the optimum).
    """
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    if header[:3] == ["k", "a(k)", "b(k)"]:
        a = tuple(float(r[1]) for r in body)
        b = tuple(float(r[2]) for r in body)
        return GainTable(params["gamma"], params["kappa"], params["Gamma"], a, b, params.get("name", "file"))
    da = tuple(float(r[2]) for r in body)
    db = tuple(float(r[3]) for r in body)
    return UnweightedDualTable(params["Gamma"], da, db, params.get("p", optimal_p()[0]), params.get("name", "file"))
