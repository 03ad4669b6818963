"""Command-line front end: instance generation, oracles, relaxations and the experiment sweeps."""

import argparse
import logging
import os
import sys
import time

from bdsep.models import TrsError
from bdsep.oracle import separate
from conicsolver.models import OPTIMAL, PRIMAL_INFEASIBLE, SolverError
from gcpp.bruteforce import misocp_bruteforce
from gcpp.burer import burer_reformulate
from gcpp.models import MISOCP, RELAXATIONS, SOLVE_VARIANTS, ExchangeError, MisocpInstance
from gcpp.relaxations import solve_relaxation
from gdnn.membership import check_membership
from gdnn.models import MEMBERSHIP_TOL, VARIANTS
from harness.fig1 import run_fig1
from harness.instances import generate_instance, run_m44
from harness.io import dumps, load_matrix_input, load_params, write_csv
from harness.models import DEFAULT_WORKERS
from harness.tables import run_tables

logger = logging.getLogger("gdnn")

EXIT_OK = 0
EXIT_NON_MEMBER = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3


def _emit(args, payload):
    text = dumps(payload)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _store(args, report):
    if not (args.db or os.getenv("GDNN_REPORT_DB")):
        return
    from harness import store

    if args.db:
        store.DB_PATH = args.db
        store.init_db()
    store.save_report(report)
    logger.info("report %s saved to %s", report.id, store.DB_PATH)


def cmd_gen(args) -> int:
    inst = generate_instance(args.n, args.seed)
    _emit(args, inst.to_dict())
    return EXIT_OK


def cmd_solve(args) -> int:
    opts, params = load_params(args.params)
    inst = MisocpInstance.from_file(args.instance)
    variants = SOLVE_VARIANTS if args.variant == "all" else [args.variant]
    results, code = [], EXIT_OK
    g = burer_reformulate(inst) if any(v in RELAXATIONS for v in variants) else None
    for variant in variants:
        if variant == MISOCP:
            start = time.perf_counter()
            value, x = misocp_bruteforce(inst, opts, workers=args.workers)
            results.append({"variant": MISOCP, "value": value, "x": x,
                             "time": time.perf_counter() - start,
                             "status": OPTIMAL if x is not None else PRIMAL_INFEASIBLE})
            if x is None:
                code = EXIT_SOLVER
            continue
        res = solve_relaxation(g, variant, opts=opts, params=params)
        results.append(res.to_dict(include_matrix=args.matrix))
        if res.status != OPTIMAL:
            code = EXIT_SOLVER
    _emit(args, {"instance": inst.to_dict(), "results": results})
    return code


def cmd_membership(args) -> int:
    opts, _ = load_params(args.params)
    spec, X = load_matrix_input(args.input)
    result = check_membership(spec, X, args.variant, tol=args.tol, level=args.level, opts=opts)
    _emit(args, result.to_dict())
    return EXIT_OK if result.member else EXIT_NON_MEMBER


def cmd_separate(args) -> int:
    spec, X = load_matrix_input(args.input)
    outcome = separate(spec, X, gamma=args.gamma)
    _emit(args, outcome.to_dict(include_matrix=True))
    return EXIT_OK


def cmd_fig1(args) -> int:
    report = run_fig1(count=args.count, seed=args.seed, max_draws=args.max_draws)
    _store(args, report)
    _emit(args, report.to_dict())
    return EXIT_OK


def cmd_tables(args) -> int:
    opts, params = load_params(args.params)
    report = run_tables(args.n, seeds_per_n=args.seeds_per_n, variants=args.variants, seed=args.seed,
                        workers=args.workers, opts=opts, params=params)
    if args.csv:
        write_csv(report, args.csv)
    _store(args, report)
    _emit(args, report.to_dict())
    return EXIT_OK


def cmd_m44(args) -> int:
    report = run_m44(count=args.count, seed=args.seed)
    _store(args, report)
    _emit(args, report.to_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gdnn", description="GDNN cone toolkit")
    parser.add_argument("--seed", type=int, default=0, help="seed of the Philox generator")
    parser.add_argument("--tol", type=float, default=MEMBERSHIP_TOL, help="membership tolerance")
    parser.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    parser.add_argument("--out", help="write JSON here instead of stdout")
    parser.add_argument("--params", help="YAML/JSON file with 'solver' and 'exchange' sections")
    parser.add_argument("--db", help="SQLite file for experiment reports")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="random mixed 0-1 SOCP instance")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve an instance or one of its relaxations")
    p.add_argument("instance")
    p.add_argument("--variant", choices=SOLVE_VARIANTS + ["all"], default="all")
    p.add_argument("--matrix", action="store_true", help="include the relaxation matrix Y")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("membership", help="cone membership of a symmetric matrix")
    p.add_argument("input")
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--level", type=int, default=0, help="hierarchy level r for knn")
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("separate", help="BD separation oracle")
    p.add_argument("input")
    p.add_argument("--gamma", type=float, default=0.0)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("fig1", help="TRS phase values on sampled moment vectors")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--max-draws", type=int, default=None)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("tables", help="relaxation sweep over random instances")
    p.add_argument("--n", type=int, nargs="+", default=[5, 10])
    p.add_argument("--seeds-per-n", type=int, default=5)
    p.add_argument("--variants", nargs="+", choices=RELAXATIONS, default=list(RELAXATIONS))
    p.add_argument("--csv", help="write the value/time table here")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("m44", help="acceptance rate of the moment-vector sampler")
    p.add_argument("--count", type=int, default=10000)
    p.set_defaults(func=cmd_m44)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(name)s %(levelname)s %(message)s")

    try:
        return args.func(args)
    except (SolverError, ExchangeError, TrsError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(dumps({"error": str(exc)}))
        return EXIT_SOLVER
    except (ValueError, OSError) as exc:
        print(dumps({"error": str(exc)}))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
