"""Instance generators and seeded, reproducible experiment drivers."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .instance import Instance
from .ocs import RandomSource, SelectorKind, make_selector
from .oracle import offline_optimum, run_structure
from .primal_dual import TranscriptRecord, realized_values
from .unweighted import perfect_correlation_sim

ENGINES = ("edge_weighted", "unweighted", "perfect_correlation", "independent_greedy")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int = 0
    m: int = 0
    p_edge: float = 0.0
    max_weight: float = 10.0
    density: float = 1.0
    seed: int = 0
    path: str = ""

    def __post_init__(self):
        if self.kind not in ("upper_triangular", "er_upper_triangular", "nine_vertex_triangular",
                             "random_bipartite", "file"):
            raise ValueError(f"unknown generator {self.kind!r}")
        if self.kind in ("upper_triangular", "er_upper_triangular", "random_bipartite") and self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if self.kind == "random_bipartite" and self.m < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")
        if not 0.0 <= self.p_edge <= 1.0:
            raise ValueError(f"edge probability {self.p_edge} outside [0, 1]")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError(f"density {self.density} outside [0, 1]")
        if self.kind == "random_bipartite" and not (self.max_weight > 0 and math.isfinite(self.max_weight)):
            raise ValueError(f"max_weight must be positive, got {self.max_weight}")

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        """Parse ``ut:N``, ``er_ut:N:P[:SEED]``, ``nine``, ``random:N:M[:MAXW[:DENSITY[:SEED]]]`` or ``file:PATH``."""
        head, _, rest = text.partition(":")
        args = rest.split(":") if rest else []
        try:
            if head == "ut" and len(args) == 1:
                return cls("upper_triangular", n=int(args[0]))
            if head == "er_ut" and len(args) in (2, 3):
                seed = int(args[2]) if len(args) == 3 else 0
                return cls("er_upper_triangular", n=int(args[0]), p_edge=float(args[1]), seed=seed)
            if head == "nine" and not args:
                return cls("nine_vertex_triangular")
            if head == "random" and 2 <= len(args) <= 5:
                extra = [float(a) for a in args[2:4]]
                return cls("random_bipartite", n=int(args[0]), m=int(args[1]),
                           max_weight=extra[0] if extra else 10.0,
                           density=extra[1] if len(extra) > 1 else 1.0,
                           seed=int(args[4]) if len(args) == 5 else 0)
            if head == "file" and rest:
                return cls("file", path=rest)
        except ValueError as exc:
            raise ValueError(f"bad generator spec {text!r}: {exc}") from None
        raise ValueError(f"bad generator spec {text!r}")


def upper_triangular(n: int) -> Instance:
    return generate(GeneratorSpec("upper_triangular", n=n))


def er_upper_triangular(n: int, p_edge: float, seed: int = 0) -> Instance:
    return generate(GeneratorSpec("er_upper_triangular", n=n, p_edge=p_edge, seed=seed))


def random_bipartite(n: int, m: int, max_weight: float = 10.0, density: float = 1.0, seed: int = 0) -> Instance:
    return generate(GeneratorSpec("random_bipartite", n=n, m=m, max_weight=max_weight, density=density, seed=seed))


def generate(spec: GeneratorSpec) -> Instance:
    """Build an instance; the output depends only on ``spec``."""
    if spec.kind == "file":
        return Instance.read(spec.path)
    if spec.kind == "nine_vertex_triangular":
        spec = GeneratorSpec("upper_triangular", n=9)
        name = "nine_vertex_triangular"
    else:
        name = ""
    n = spec.n
    meta = {"generator": spec.kind if not name else name, "seed": spec.seed}
    if spec.kind == "upper_triangular":
        arrivals = [[(i, 1) for i in range(j, n)] for j in range(n)]
        return Instance(n, arrivals, name or f"ut_{n}", meta)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "er_upper_triangular":
        arrivals = []
        for j in range(n):
            later = j + 1 + np.flatnonzero(rng.random(n - j - 1) < spec.p_edge)
            arrivals.append([(j, 1)] + [(int(i), 1) for i in later])
        meta["p_edge"] = spec.p_edge
        return Instance(n, arrivals, f"er_ut_{n}_{spec.p_edge}_{spec.seed}", meta)
    # random_bipartite: n offline, m online, each edge kept with probability density
    arrivals = []
    for _ in range(spec.m):
        keep = rng.random(spec.n) < spec.density
        weights = rng.uniform(0.0, spec.max_weight, spec.n)
        arrivals.append([(int(i), float(weights[i])) for i in np.flatnonzero(keep) if weights[i] > 0])
    meta.update(max_weight=spec.max_weight, density=spec.density)
    return Instance(spec.n, arrivals, f"random_{spec.n}x{spec.m}_{spec.seed}", meta)


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of how trials are scheduled."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, trial])))


@dataclass
class ExperimentResult:
    instance_name: str
    metadata: dict
    engine: str
    table: str
    selector: str
    master_seed: int
    opt: float
    values: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return len(self.values)

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.values)) / self.opt if self.opt else float("nan")

    @property
    def std_error(self) -> float:
        if self.trials < 2 or not self.opt:
            return 0.0
        return float(np.std(self.values / self.opt, ddof=1)) / math.sqrt(self.trials)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["trial", "value", "opt", "ratio"])
        for t, v in enumerate(self.values):
            out.writerow([t, repr(float(v)), repr(self.opt), repr(float(v) / self.opt if self.opt else float("nan"))])
        return buf.getvalue()

    def summary(self) -> str:
        return (f"{self.instance_name} engine={self.engine} selector={self.selector} table={self.table} "
                f"trials={self.trials} seed={self.master_seed} mean_ratio={self.mean_ratio:.6f} "
                f"std_error={self.std_error:.2e}")


def _replay(args) -> list[float]:
    """Values of a block of trials, each with its own selector and stream."""
    n_offline, outcomes, kind, master_seed, trials = args
    pairs = [o.pair for o in outcomes if o.kind == "randomized"]
    rows = []
    for t in trials:
        sel = make_selector(kind, RandomSource(trial_rng(master_seed, t)))
        rows.append([0 if sel.select(p) == p[0] else 1 for p in pairs])
    choices = np.array(rows, dtype=np.int8).reshape(len(rows), len(pairs))
    return realized_values(n_offline, outcomes, choices).tolist()


def run_experiment(
    spec: GeneratorSpec | Instance | str,
    engine: str = "unweighted",
    selector: SelectorKind | str | None = None,
    trials: int = 1,
    master_seed: int = 0,
    table=None,
    reverse: bool = True,
    workers: int = 1,
) -> ExperimentResult:
    """Run ``trials`` seeded realizations of an engine on one instance.

    The round structure of every engine here is independent of the random
    selections, so it is computed once and each trial only replays the pair
    sequence through a fresh selector.  ``reverse`` breaks ties among
    candidates toward larger ids in the unweighted engines; that order is the
    adversarial one on triangular instances.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    if isinstance(spec, str):
        spec = GeneratorSpec.parse(spec)
    inst = spec if isinstance(spec, Instance) else generate(spec)
    if isinstance(selector, str):
        selector = SelectorKind.parse(selector)

    if engine in ("unweighted", "perfect_correlation", "independent_greedy") and not inst.is_unweighted():
        raise ValueError(f"engine {engine!r} needs an unweighted instance; {inst.name!r} has weights")
    if engine == "independent_greedy":
        if selector is not None and selector.name != "independent":
            raise ValueError("independent_greedy always uses fresh fair bits; drop --selector or pass independent")
        selector = SelectorKind.independent()
    elif engine == "perfect_correlation":
        selector = None
    elif selector is None:
        # the default tables (1b, t3) certify the improved selector's guarantee
        selector = SelectorKind.improved()

    opt = offline_optimum(inst)
    table_name = ""
    if engine == "perfect_correlation":
        arrivals = [inst.neighbors(j) for j in range(inst.n_online)]
        value = perfect_correlation_sim(arrivals, inst.n_offline, reverse=reverse)
        values = np.full(trials, value)
    else:
        eng = run_structure(inst, engine, table, reverse)
        table_name = eng.table.name
        blocks = np.array_split(np.arange(trials), max(1, min(workers, trials)))
        jobs = [(inst.n_offline, eng.outcomes, selector, master_seed, b.tolist()) for b in blocks]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_replay, jobs))
        else:
            parts = [_replay(job) for job in jobs]
        values = np.array([v for part in parts for v in part])

    return ExperimentResult(inst.name, dict(inst.metadata), engine, table_name,
                            str(selector) if selector is not None else "perfect", master_seed, opt, values)


def run_instance(inst: Instance, engine: str, selector: SelectorKind | None, seed: int, table=None,
                 reverse: bool = False):
    """Run one realization with live selections; returns the engine with its transcript."""
    from .primal_dual import EdgeWeightedEngine
    from .unweighted import UnweightedEngine

    sel = make_selector(selector or SelectorKind.improved(), RandomSource(trial_rng(seed, 0)))
    if engine == "edge_weighted":
        eng = EdgeWeightedEngine(inst.n_offline, table)
        for j in range(inst.n_online):
            eng.arrive(inst.weight_dict(j), sel)
    elif engine in ("unweighted", "independent_greedy"):
        if not inst.is_unweighted():
            raise ValueError(f"engine {engine!r} needs an unweighted instance")
        if engine == "independent_greedy":
            sel = make_selector(SelectorKind.independent(), RandomSource(trial_rng(seed, 0)))
        eng = UnweightedEngine(inst.n_offline, table, reverse=reverse)
        for j in range(inst.n_online):
            eng.greedy_arrive(inst.neighbors(j), sel)
    else:
        raise ValueError(f"engine {engine!r} has no single-run transcript")
    return eng


def transcript_csv(records: list[TranscriptRecord]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["round", "type", "i1", "i2", "selected", "beta", "pbar", "dual"])
    for r in records:
        out.writerow([r.round, r.type, "" if r.i1 is None else r.i1, "" if r.i2 is None else r.i2,
                      "" if r.selected is None else r.selected, repr(r.beta), repr(r.pbar), repr(r.dual)])
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")
