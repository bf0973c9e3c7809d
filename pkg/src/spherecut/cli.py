"""Command-line interface.

Exit codes: 0 on success, 1 for bad input, 2 when the instance has no solution.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from .decomp import (
    DecompositionError,
    export_decomposition,
    import_decomposition,
    radial_bfs_decomposition,
    sweep_decomposition,
)
from .dp import COUNT, MODES, SEMIRINGS
from .gadgets import BinPackingInstance, binpacking_gadget, bp_feasible, grid
from .graph import GraphError, InfeasibleSpec, ProblemSpec, load_graph
from .oracle import TooLarge, enumerate_all
from .solve import NoSolution, Plan, Solver, validate_plan

log = logging.getLogger("spherecut")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2


class InputError(Exception):
    pass


def _emit(data: Any, out: str | None) -> None:
    text = data if isinstance(data, str) else json.dumps(data, indent=1)
    if out:
        Path(out).write_text(text + "\n")
        log.info("wrote %s", out)
    else:
        print(text)


def _spec(args: argparse.Namespace, g) -> ProblemSpec:
    if args.k is None or args.min_weight is None or args.max_weight is None:
        raise InputError("--k, --min-weight and --max-weight are required")
    S = g.total_cost + 1 if args.max_cost in (None, "auto") else int(args.max_cost)
    return ProblemSpec(args.k, args.min_weight, args.max_weight, S)


def _cost_filter(args: argparse.Namespace):
    if getattr(args, "cost", None) is not None and getattr(args, "cost_range", None):
        raise InputError("use either --cost or --cost-range")
    if getattr(args, "cost_range", None):
        lo, hi = args.cost_range
        return (lo, hi)
    return getattr(args, "cost", None)


def _decomposition(args: argparse.Namespace, g):
    if args.builder == "import":
        if not args.decomposition:
            raise InputError("--builder import needs --decomposition FILE")
        return import_decomposition(args.decomposition, g)
    return None


def _solver(args: argparse.Namespace, semiring: str = COUNT) -> tuple[Solver, Any]:
    g = load_graph(args.graph)
    spec = _spec(args, g)
    if args.threads and args.threads > 1:
        log.info("--threads=%d: tables are filled sequentially", args.threads)
    s = Solver(
        g,
        spec,
        semiring=semiring,
        mode=args.mode,
        builder="sweep" if args.builder == "import" else args.builder,
        decomposition=_decomposition(args, g),
    )
    if s.decomposition is not None:
        log.info("decomposition width %d", s.decomposition.width)
    return s, g


def cmd_gen(args: argparse.Namespace) -> int:
    g = grid(args.rows, args.cols, args.weight, args.cost_value)
    _emit(g.to_dict(), args.output)
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    if args.builder == "import":
        if not args.decomposition:
            raise InputError("--builder import needs --decomposition FILE")
        try:
            d = import_decomposition(args.decomposition, g)
        except DecompositionError as exc:
            for v in exc.violations or [str(exc)]:
                print(f"violation: {v}", file=sys.stderr)
            return EXIT_INPUT
    else:
        d = (sweep_decomposition if args.builder == "sweep" else radial_bfs_decomposition)(g)
    print(f"width {d.width}", file=sys.stderr)
    print(f"theta certified {d.certified_fraction():.3f}", file=sys.stderr)
    _emit(export_decomposition(d), args.output)
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    s, g = _solver(args, args.semiring)
    cost, plan = s.optimize()
    problems = validate_plan(g, s.spec, plan)
    assert not problems, problems
    print(f"cost {cost}", file=sys.stderr)
    _emit(plan.to_dict(), args.output)
    return EXIT_OK


def cmd_count(args: argparse.Namespace) -> int:
    s, _ = _solver(args)
    n = s.count(_cost_filter(args))
    if args.histogram:
        hist = [
            {"weights": list(w), "cost": c, "count": k} for (w, c), k in sorted(s.histogram().items())
        ]
        _emit({"total": n, "histogram": hist}, args.output)
    else:
        _emit(str(n), args.output)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    s, g = _solver(args)
    flt = _cost_filter(args)
    if args.rank is not None:
        plan = s.unrank(args.rank, flt)
    else:
        plan = s.sample(flt, args.seed)
    problems = validate_plan(g, s.spec, plan)
    assert not problems, problems
    _emit(plan.to_dict(), args.output)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    res = enumerate_all(g, _spec(args, g))
    out = res.to_dict()
    if args.plans:
        out["plans"] = [
            {"assignment": {str(v): d for v, d in sorted(p.assignment().items())}, "cost": p.cost}
            for p in res.plans
        ]
    _emit(out, args.output)
    return EXIT_OK


def cmd_gadget(args: argparse.Namespace) -> int:
    bp = BinPackingInstance(tuple(args.values), args.k, args.B)
    padded = bp.padded()
    if padded.n < 2:
        # one item fits iff it is the only bin's entire load
        print(f"trivial instance: feasible={bp_feasible(padded) is not None}", file=sys.stderr)
        return EXIT_OK
    gi = binpacking_gadget(padded)
    labels = args.labels or str(Path(args.output).with_suffix(".labels.json"))
    gi.save(args.output, labels)
    print(
        f"gadget: {len(gi.graph.weights)} vertices, k={gi.spec.k}, "
        f"weight interval [{gi.spec.L}, {gi.spec.U})",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    problems: list[str] = []
    if args.plan:
        data = json.loads(Path(args.plan).read_text())
        problems += validate_plan(g, _spec(args, g), Plan.from_dict(data))
    if args.decomposition:
        try:
            import_decomposition(args.decomposition, g)
        except DecompositionError as exc:
            problems += exc.violations or [str(exc)]
    if not args.plan and not args.decomposition:
        raise InputError("give --plan and/or --decomposition")
    for p in problems:
        print(f"violation: {p}")
    if not problems:
        print("ok")
    return EXIT_INPUT if problems else EXIT_OK


def _add_spec(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, help="number of districts")
    p.add_argument("--min-weight", type=int, help="inclusive lower district weight L")
    p.add_argument("--max-weight", type=int, help="exclusive upper district weight U")
    p.add_argument("--max-cost", default="auto", help="exclusive cost bound S (default: total cost + 1)")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph")
    _add_spec(p)
    p.add_argument("--mode", choices=MODES, default="auto")
    p.add_argument("--builder", choices=("sweep", "radial", "import"), default="sweep")
    p.add_argument("--decomposition", help="decomposition file for --builder import")
    p.add_argument("--threads", type=int, default=1, help="worker bound (results never depend on it)")
    p.add_argument("-o", "--output")


def _add_cost_filter(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cost", type=int, help="exact plan cost")
    p.add_argument("--cost-range", type=int, nargs=2, metavar=("LO", "HI"), help="inclusive cost range")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spherecut", description="Exact planar districting by sphere-cut DP.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate instances")
    gsub = p.add_subparsers(dest="kind", required=True)
    q = gsub.add_parser("grid")
    q.add_argument("rows", type=int)
    q.add_argument("cols", type=int)
    q.add_argument("--weight", type=int, default=1)
    q.add_argument("--cost", dest="cost_value", type=int, default=1)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", help="build or import a decomposition")
    p.add_argument("graph")
    p.add_argument("--builder", choices=("sweep", "radial", "import"), default="sweep")
    p.add_argument("--decomposition")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("optimize", help="minimum-cost plan")
    _add_solver(p)
    p.add_argument("--semiring", choices=SEMIRINGS, default="feasibility")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("count", help="number of plans")
    _add_solver(p)
    _add_cost_filter(p)
    p.add_argument("--histogram", action="store_true", help="emit counts per (weights, cost)")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("sample", help="exactly uniform random plan")
    _add_solver(p)
    _add_cost_filter(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank", type=int, help="return the plan of this rank instead of sampling")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("oracle", help="brute-force enumeration (small graphs only)")
    p.add_argument("graph")
    _add_spec(p)
    p.add_argument("--plans", action="store_true", help="include every plan")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gadget", help="hardness gadgets")
    gsub = p.add_subparsers(dest="kind", required=True)
    q = gsub.add_parser("binpacking")
    q.add_argument("--values", type=int, nargs="+", required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--B", type=int, required=True)
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--labels", help="labels sidecar (default: OUTPUT with .labels.json)")
    q.set_defaults(func=cmd_gadget)

    p = sub.add_parser("validate", help="check a plan or decomposition")
    p.add_argument("graph")
    _add_spec(p)
    p.add_argument("--plan")
    p.add_argument("--decomposition")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (InfeasibleSpec, NoSolution) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, GraphError, DecompositionError, TooLarge, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
