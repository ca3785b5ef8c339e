"""Command-line entry point: ``ocsmatch <command> ...``.

Exit status is 0 on success, 1 when a requested check fails and 2 on usage
errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .errors import DomainError, SizeError
from .instance import Instance
from .lp import build_edge_weighted_lp, build_unweighted_lp, kappa_sweep, solve, verify_table
from .lp import gain_table_from_solution, unweighted_table_from_solution
from .ocs import SelectorKind, consecutive_decomposition, simulate_batch
from .oracle import exact_never_selected
from .primal_dual import check_invariants
from .recurrences import RecurrenceTable, eval_f, eval_g, optimal_p
from .tables import GainTable, PUBLISHED, builtin_table, table_from_csv, table_to_csv
from .unweighted import check_unweighted_invariants
from .workbench import ENGINES, GeneratorSpec, generate, run_experiment, run_instance, transcript_csv, write_text


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--trials", type=int, default=1000, help="Monte Carlo trials")
    common.add_argument("--table", default=None,
                        help="gain table: 1a, 1b, t3 or a CSV path written by 'lp solve --out'")
    common.add_argument("--table-gamma", type=float, default=None, help="gamma of a table read from CSV")
    common.add_argument("--table-kappa", type=float, default=1.5, help="kappa of a table read from CSV")
    common.add_argument("--table-ratio", type=float, default=None, help="competitive ratio of a table read from CSV")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=["csv"], default="csv")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="ocsmatch", description="Online matching with correlated selection.")
    sub = parser.add_subparsers(dest="command", required=True)

    lp = sub.add_parser("lp", help="factor-revealing linear programs").add_subparsers(dest="action", required=True)
    p = lp.add_parser("solve", parents=[common], help="solve the edge-weighted or unweighted LP")
    p.add_argument("--gamma", type=float, default=1.0 / 16.0)
    p.add_argument("--kappa", type=float, default=1.5)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--unweighted", action="store_true", help="solve the unweighted LP with g_k at --p")
    p.add_argument("--p", type=float, default=None, help="sender probability for g_k (default: optimal)")
    p.add_argument("--dump", action="store_true", help="print the LP before solving")
    p = lp.add_parser("verify", parents=[common], help="check a table against its LP constraints")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p = lp.add_parser("sweep", parents=[common], help="ratio as a function of kappa")
    p.add_argument("--gamma", type=float, default=1.0 / 16.0)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--kappas", default="1,1.25,1.5,1.75,1.9375,2")

    ocs = sub.add_parser("ocs", help="correlated selection checks").add_subparsers(dest="action", required=True)
    for name, text in (("montecarlo", "estimate never-selected probability"), ("enumerate", "exact never-selected probability")):
        p = ocs.add_parser(name, parents=[common], help=text)
        p.add_argument("--selector", default="warmup", help="independent, warmup, improved or improved:<p>")
        p.add_argument("--pairs", required=True, help="pairs as 'a,b;c,d;...'")
        p.add_argument("--element", type=int, required=True)
        p.add_argument("--indices", default=None, help="comma-separated pair indices (default: all containing element)")

    p = sub.add_parser("run", parents=[common], help="run one instance once and write its transcript")
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument("--engine", choices=["edge_weighted", "unweighted", "independent_greedy"], default="edge_weighted")
    p.add_argument("--selector", default="improved")
    p.add_argument("--lex", action="store_true", help="break unweighted ties toward smaller ids")
    p.add_argument("--check-invariants", action="store_true")

    p = sub.add_parser("experiment", parents=[common], help="seeded batch of trials, CSV of per-trial ratios")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--gen", help="generator spec, e.g. ut:2187, er_ut:8192:0.015625:1, nine, random:8:8:10:0.5:3")
    src.add_argument("--instance", help="instance JSON file")
    p.add_argument("--engine", choices=ENGINES, default="unweighted")
    p.add_argument("--selector", default=None)
    p.add_argument("--lex", action="store_true", help="break unweighted ties toward smaller ids")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("gen", parents=[common], help="write a generated instance as JSON")
    p.add_argument("spec", help="generator spec, e.g. ut:9 or er_ut:8192:0.015625:1")
    return parser


def _emit(args, text: str) -> None:
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _table(args, default: str):
    name = args.table or default
    if name in PUBLISHED:
        return builtin_table(name)
    path = Path(name)
    if not path.exists():
        raise UsageError(f"--table: {name!r} is neither 1a, 1b, t3 nor an existing file")
    if args.table_ratio is None:
        raise UsageError("--table-ratio is required with a table file")
    params = {"Gamma": args.table_ratio, "kappa": args.table_kappa, "name": path.stem}
    if args.table_gamma is not None:
        params["gamma"] = args.table_gamma
    try:
        return table_from_csv(path.read_text(encoding="utf-8"), **params)
    except KeyError as exc:
        raise UsageError(f"--table-{str(exc).strip(chr(39)).lower()} is required for this table file") from None


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    try:
        pairs = [tuple(int(x) for x in chunk.split(",")) for chunk in text.split(";") if chunk.strip()]
    except ValueError:
        raise UsageError(f"--pairs: cannot parse {text!r}") from None
    if any(len(pr) != 2 for pr in pairs):
        raise UsageError("--pairs: every pair needs exactly two elements")
    return pairs


def cmd_lp(args) -> int:
    if args.action == "solve":
        if args.unweighted:
            p = args.p if args.p is not None else optimal_p()[0]
            model = build_unweighted_lp(RecurrenceTable.improved(p, args.kmax + 1), args.kmax)
        else:
            model = build_edge_weighted_lp(args.gamma, args.kappa, args.kmax)
        if args.dump:
            sys.stdout.write(model.to_text())
        sol = solve(model)
        if sol.status != "optimal":
            print(f"status: {sol.status}")
            return 1
        print(f"Gamma = {sol.objective:.10f}")
        if args.out:
            if args.unweighted:
                table = unweighted_table_from_solution(sol, args.kmax, p)
            else:
                table = gain_table_from_solution(sol, args.gamma, args.kappa, args.kmax)
            write_text(args.out, table_to_csv(table))
        else:
            sys.stdout.write(sol.to_text())
        return 0
    if args.action == "verify":
        names = [args.table] if args.table else list(PUBLISHED)
        ok = True
        for name in names:
            table = PUBLISHED[name] if name in PUBLISHED else _table(args, name)
            report = verify_table(table, args.tolerance)
            print(f"{table.name}: max violation {report.max_violation:.3e} at {report.worst} "
                  f"-> {'pass' if report.passed else 'FAIL'}")
            ok &= report.passed
        return 0 if ok else 1
    try:
        kappas = [float(x) for x in args.kappas.split(",")]
    except ValueError:
        raise UsageError(f"--kappas: cannot parse {args.kappas!r}") from None
    lines = ["kappa,Gamma"] + [f"{k!r},{g!r}" for k, g in kappa_sweep(args.gamma, args.kmax, kappas)]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_ocs(args) -> int:
    pairs = _parse_pairs(args.pairs)
    kind = SelectorKind.parse(args.selector)
    e = args.element
    idx = [int(x) for x in args.indices.split(",")] if args.indices else [j for j, pr in enumerate(pairs) if e in pr]
    runs = consecutive_decomposition(pairs, e, idx)
    if kind.name == "improved":
        bound = math.prod(2.0 ** -k * eval_g(k, kind.p) for k in runs)
    elif kind.name == "warmup":
        bound = math.prod(2.0 ** -k * eval_f(k) for k in runs)
    else:
        bound = 2.0 ** -sum(runs)
    if args.action == "enumerate":
        value = exact_never_selected(kind, pairs, e, idx)
        print(f"runs={runs} exact={value:.12f} bound={bound:.12f}")
        return 0 if value <= bound + 1e-10 else 1
    choices = simulate_batch(kind, pairs, args.trials, np.random.default_rng(args.seed))
    hit = np.zeros(args.trials, dtype=bool)
    for j in idx:
        hit |= choices[:, j] == pairs[j].index(e)
    freq = 1.0 - hit.mean()
    se = math.sqrt(max(bound * (1 - bound), 1e-300) / args.trials)
    print(f"runs={runs} frequency={freq:.6f} bound={bound:.6f} se={se:.2e}")
    return 0 if freq <= bound + 4 * se else 1


def cmd_run(args) -> int:
    inst = Instance.read(args.instance)
    default = "1b" if args.engine == "edge_weighted" else "t3"
    table = _table(args, default)
    if isinstance(table, GainTable) != (args.engine == "edge_weighted"):
        raise UsageError(f"--table {table.name} does not fit engine {args.engine}")
    eng = run_instance(inst, args.engine, SelectorKind.parse(args.selector), args.seed, table, reverse=not args.lex)
    _emit(args, transcript_csv(eng.transcript))
    print(f"value={eng.algorithm_value()!r} pbar={eng.surrogate_primal()!r} dual={eng.dual_objective()!r}",
          file=sys.stderr)
    if args.check_invariants:
        checker = check_invariants if args.engine == "edge_weighted" else check_unweighted_invariants
        report = checker(eng, table)
        for v in report.violations:
            print(v, file=sys.stderr)
        print(f"invariants: {report.checked} checks, {len(report.violations)} violations", file=sys.stderr)
        return 0 if report.ok else 1
    return 0


def cmd_experiment(args) -> int:
    spec = GeneratorSpec.parse(args.gen) if args.gen else Instance.read(args.instance)
    table = None
    if args.engine in ("edge_weighted", "unweighted", "independent_greedy"):
        table = _table(args, "1b" if args.engine == "edge_weighted" else "t3")
        if isinstance(table, GainTable) != (args.engine == "edge_weighted"):
            raise UsageError(f"--table {table.name} does not fit engine {args.engine}")
    result = run_experiment(spec, args.engine, args.selector, args.trials, args.seed, table,
                            reverse=not args.lex, workers=args.workers)
    _emit(args, result.to_csv())
    print(result.summary(), file=sys.stderr)
    return 0


def cmd_gen(args) -> int:
    _emit(args, generate(GeneratorSpec.parse(args.spec)).to_json())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"lp": cmd_lp, "ocs": cmd_ocs, "run": cmd_run, "experiment": cmd_experiment, "gen": cmd_gen}
    try:
        return handler[args.command](args)
    except (UsageError, DomainError, SizeError, ValueError, IndexError, FileNotFoundError) as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
