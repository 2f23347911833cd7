"""Command-line front end: solve, generate, stats, and selfcheck.

Solver output follows competition conventions: an "s" status line, a "v"
value line (signed literals for SAT, a bitstring for MaxSAT), monotone
"o" cost lines in MaxSAT mode, and a trailing "c stats" comment block.
Exit codes: 10 = solution found, 0 = unknown, 1 = usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, bench, selfcheck
from .bdd import build_formula, stats as bdd_stats
from .formula import Formula, ParseError, parse_dimacs_cnf, parse_hybrid, parse_wcnf, to_hbf
from .optimizer import OptimizerConfig
from .solver import (MODE_MAXSAT, MODE_SAT, STATUS_SAT, SolverConfig,
                     solve_maxsat, solve_sat)

EXIT_SAT = 10
EXIT_UNKNOWN = 0
EXIT_ERROR = 1

_PARSERS = {
    "hbf": parse_hybrid,
    "cnf": parse_dimacs_cnf,
    "wcnf": parse_wcnf,
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the documented contract is 1
    def error(self, message):
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hybsat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hybsat {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    solve = sub.add_parser("solve", help="solve a formula file")
    solve.add_argument("input", help="path to the instance")
    solve.add_argument("--format", choices=sorted(_PARSERS),
                       help="input format (default: by file extension)")
    solve.add_argument("--mode", choices=(MODE_SAT, MODE_MAXSAT),
                       help="search mode (default: maxsat for wcnf, else sat)")
    solve.add_argument("--seed", type=int, help="RNG seed (default: system entropy)")
    solve.add_argument("--timeout", type=float, help="wall-clock budget in seconds")
    solve.add_argument("--restarts", type=int, default=100, metavar="J")
    solve.add_argument("--trials", type=int, default=8, metavar="T")
    solve.add_argument("--weight-factor", type=float, default=2.0, metavar="R")
    solve.add_argument("--roundings", type=int, default=10, metavar="K")
    solve.add_argument("--threads", type=int, default=1, metavar="N")
    solve.add_argument("--grad-tol", type=float, default=1e-8)
    solve.add_argument("--max-iters", type=int, default=None)

    gen = sub.add_parser("generate", help="emit random benchmark instances")
    gen.add_argument("--family", choices=bench.FAMILIES, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--rc", type=float, default=0.0, help="clause density")
    gen.add_argument("--rx", type=float, default=0.0, help="XOR density")
    gen.add_argument("--rp", type=float, default=0.0, help="card/PB density")
    gen.add_argument("--delta", type=float, default=0.0, help="threshold fraction")
    gen.add_argument("--rv", type=float, default=0.0, help="variable fraction")
    gen.add_argument("--clause-width", type=int, default=3)
    gen.add_argument("--coef-mode", choices=(bench.COEF_PER_OCCURRENCE,
                                             bench.COEF_PER_VARIABLE),
                     default=bench.COEF_PER_OCCURRENCE)
    gen.add_argument("--count", type=int, default=10)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--plant", action="store_true")
    gen.add_argument("--outdir", default=".")

    st = sub.add_parser("stats", help="print BDD sharing statistics")
    st.add_argument("input")
    st.add_argument("--format", choices=sorted(_PARSERS))

    sc = sub.add_parser("selfcheck", help="run randomized oracle cross-checks")
    sc.add_argument("--seed", type=int, help="suite seed (default: system entropy)")

    return parser


def _detect_format(path: str, override: str | None) -> str:
    if override:
        return override
    suffix = Path(path).suffix.lstrip(".").lower()
    if suffix in _PARSERS:
        return suffix
    raise CliError(f"cannot infer format from {path!r}; pass --format")


def _load_formula(path: str, fmt: str) -> Formula:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    return _PARSERS[fmt](text)


def _draw_seed() -> int:
    return int.from_bytes(os.urandom(8), "little")


def _fmt_cost(cost: float) -> str:
    if cost == int(cost):
        return str(int(cost))
    return repr(cost)


def run_solve(args, out=None, on_trial=None) -> int:
    """Solve one instance; ``on_trial`` is a programmatic per-trial hook."""
    out = sys.stdout if out is None else out
    fmt = _detect_format(args.input, args.format)
    f = _load_formula(args.input, fmt)
    mode = args.mode or (MODE_MAXSAT if fmt == "wcnf" else MODE_SAT)
    seed = args.seed if args.seed is not None else _draw_seed()
    opt = OptimizerConfig(grad_tol=args.grad_tol, max_iters=args.max_iters)
    cfg = SolverConfig(restarts=args.restarts, trials_per_restart=args.trials,
                       weight_factor=args.weight_factor, seed=seed,
                       timeout=args.timeout, mode=mode,
                       roundings_per_trial=args.roundings, optimizer=opt,
                       workers=args.threads)
    mrbdd = build_formula(f)
    print(f"c hybsat mode={mode} n={f.n} m={f.m}", file=out)
    print(f"c seed {seed}", file=out)
    if mode == MODE_SAT:
        sol = solve_sat(f, cfg, on_trial=on_trial, mrbdd=mrbdd)
    else:
        def on_best(cost: float) -> None:
            print(f"o {_fmt_cost(cost)}", file=out, flush=True)
        sol = solve_maxsat(f, cfg, on_trial=on_trial, on_best=on_best, mrbdd=mrbdd)
    found = sol.status == STATUS_SAT
    if found:
        print("s SATISFIABLE", file=out)
        b = sol.assignment
        if mode == MODE_SAT:
            lits = " ".join(str(i + 1 if b[i] == -1 else -(i + 1)) for i in range(f.n))
            print(f"v {lits}", file=out)
        else:
            bits = "".join("1" if v == -1 else "0" for v in b)
            print(f"v {bits}", file=out)
    else:
        print("s UNKNOWN", file=out)
    st = bdd_stats(mrbdd, f)
    print(f"c stats trials {sol.trials_used}", file=out)
    print(f"c stats restarts {sol.restarts_used}", file=out)
    print(f"c stats shared_nodes {st.shared_nodes}", file=out)
    print(f"c stats sum_individual_nodes {st.sum_individual_nodes}", file=out)
    print(f"c stats gradient_calls {sol.gradient_calls}", file=out)
    print(f"c stats wall_time {sol.wall_time:.3f}", file=out)
    return EXIT_SAT if found else EXIT_UNKNOWN


def run_generate(args, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        spec = bench.GenSpec(family=args.family, n=args.n, r_c=args.rc,
                             r_x=args.rx, r_p=args.rp, delta=args.delta,
                             r_v=args.rv, clause_width=args.clause_width,
                             coef_mode=args.coef_mode, count=args.count,
                             seed=args.seed, plant=args.plant)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    instances = bench.generate_batch(spec)
    manifest = {
        "family": spec.family,
        "n": spec.n,
        "r_c": spec.r_c, "r_x": spec.r_x, "r_p": spec.r_p,
        "delta": spec.delta, "r_v": spec.r_v,
        "clause_width": spec.clause_width, "coef_mode": spec.coef_mode,
        "count": spec.count, "seed": spec.seed, "plant": spec.plant,
        "instances": [],
    }
    for inst in instances:
        (outdir / inst.name).write_text(to_hbf(inst.formula))
        manifest["instances"].append({
            "name": inst.name,
            "hidden": None if inst.hidden is None else [int(v) for v in inst.hidden],
        })
    base = instances[0].name.rsplit("_", 1)[0]
    manifest_path = outdir / f"{base}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(instances)} instances and {manifest_path.name} to {outdir}",
          file=out)
    return EXIT_UNKNOWN


def run_stats(args, out=None) -> int:
    out = sys.stdout if out is None else out
    fmt = _detect_format(args.input, args.format)
    f = _load_formula(args.input, fmt)
    mrbdd = build_formula(f)
    st = bdd_stats(mrbdd, f)
    print(f"shared_nodes {st.shared_nodes}", file=out)
    print(f"sum_individual_nodes {st.sum_individual_nodes}", file=out)
    print(f"reduction_ratio {st.reduction_ratio:.2f}", file=out)
    for kind in sorted(st.per_kind):
        count, nodes = st.per_kind[kind]
        print(f"kind {kind} count {count} nodes {nodes}", file=out)
    return EXIT_UNKNOWN


def run_selfcheck(args, out=None) -> int:
    out = sys.stdout if out is None else out
    seed = args.seed if args.seed is not None else _draw_seed()
    ok = selfcheck.run_all(seed, write=lambda line: print(line, file=out))
    return EXIT_UNKNOWN if ok else EXIT_ERROR


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand == "solve":
            return run_solve(args)
        if args.subcommand == "generate":
            return run_generate(args)
        if args.subcommand == "stats":
            return run_stats(args)
        return run_selfcheck(args)
    except (CliError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
