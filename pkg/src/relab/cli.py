"""Command-line interface.

Exit codes: 0 success, 2 usage (argparse), 3 input/format error,
4 verification failure, 5 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import sys

from . import bounds, certificates, family, relax, sim, speedup, zeroround
from .errors import (
    BudgetExceededError,
    ChainVerificationError,
    ProblemFormatError,
    RelabError,
)
from .problems import BLACK, WHITE, parse_problem, render_problem

EXIT_FORMAT = 3
EXIT_VERIFY = 4
EXIT_BUDGET = 5


def _read_problem(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _cmd_speedup(args) -> int:
    p = _read_problem(args.file)
    step = speedup.re_black(p) if args.side == BLACK else speedup.re_white(p)
    sys.stdout.write(speedup.render_step_result(step))
    return 0


def _cmd_diagram(args) -> int:
    p = _read_problem(args.file)
    sys.stdout.write(relax.render_diagram(relax.diagram(p, args.side)))
    return 0


def _cmd_zeroround(args) -> int:
    p = _read_problem(args.file)
    for side in (WHITE, BLACK):
        verdict = zeroround.zero_round(p, side)
        line = f"{side}: solvable" if verdict.solvable else f"{side}: not solvable"
        if verdict.witness:
            cfg, _ = verdict.witness
            line += f" (witness {' '.join(cfg)})"
        print(line)
    return 0


def _cmd_chain(args) -> int:
    if args.verify:
        chain = family.verify_chain(args.delta, args.x, args.y)
        for i, problem in enumerate(chain.problems):
            print(f"# problem {i}")
            sys.stdout.write(render_problem(problem))
        print(f"verified lower bound: {chain.claimed_bound}")
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(certificates.render_chain(chain))
    else:
        for i, entry in enumerate(family.chain_expected(args.delta, args.x, args.y)):
            print(f"# problem {i}")
            sys.stdout.write(render_problem(family.materialize(entry)))
        print(f"expected bound: {family.t_bound(args.delta, args.x, args.y).value}")
    return 0


def _cmd_autobound(args) -> int:
    p = _read_problem(args.file)
    strategy = family.SearchStrategy(time_limit=args.time_limit)
    chain = family.auto_bound(p, args.max_labels, args.max_steps, strategy)
    if chain.unbounded:
        print("lower bound: unbounded (fixed point)")
        return 0
    flag = "" if chain.complete else " (search incomplete)"
    print(f"lower bound: {chain.claimed_bound}{flag}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(certificates.render_chain(chain))
        print(f"certificate written to {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    g = sim.gen_regular_bipartite(args.n, args.delta, args.seed)
    labels, transcript = sim.run_proposal(g, args.x, args.y)
    verdict = sim.check_xy_matching(g, labels, args.x, args.y)
    print(f"rounds: {transcript.rounds_used}, valid: {str(verdict.ok).lower()}")
    return 0 if verdict.ok else EXIT_VERIFY


def _cmd_bound(args) -> int:
    params = bounds.LiftParams(delta=args.delta, n=args.n, k=args.k)
    report = bounds.lift_report(params, args.x, args.y, log2_n=args.log2_n)
    print(f"T_{args.delta}({args.x},{args.y}) = {report.t}")
    if report.floor is not None:
        print(f"failure floor: 2^-{report.floor.neg_log2}")
    print(f"randomized: {report.randomized.verdict} (threshold {report.randomized.threshold:.3f})")
    print(f"deterministic: {report.deterministic.verdict} (min {report.deterministic.value:.3f})")
    return 0


def _cmd_verify_cert(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        report = certificates.verify_certificate(fh.read())
    if report.ok:
        print(f"certificate OK: bound {report.bound}")
        return 0
    for message in report.messages:
        print(f"certificate INVALID: {message}")
    return EXIT_VERIFY


def _cmd_serve(args) -> int:
    from .service import serve

    server = serve(args.port)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relab",
        description="Round-elimination laboratory for locally checkable labelings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("speedup", help="apply one speedup step to a problem file")
    p.add_argument("--side", choices=(WHITE, BLACK), required=True)
    p.add_argument("-f", "--file", required=True)
    p.set_defaults(func=_cmd_speedup)

    p = sub.add_parser("diagram", help="print the strength diagram")
    p.add_argument("--side", choices=(WHITE, BLACK), required=True)
    p.add_argument("-f", "--file", required=True)
    p.set_defaults(func=_cmd_diagram)

    p = sub.add_parser("zeroround", help="zero-round solvability of both sides")
    p.add_argument("-f", "--file", required=True)
    p.set_defaults(func=_cmd_zeroround)

    p = sub.add_parser("chain", help="print or verify a lower-bound chain")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--out", help="write the chain certificate here")
    p.set_defaults(func=_cmd_chain)

    p = sub.add_parser("autobound", help="bounded automatic lower-bound search")
    p.add_argument("-f", "--file", required=True)
    p.add_argument("--max-labels", type=int, required=True)
    p.add_argument("--max-steps", type=int, required=True)
    p.add_argument("--time-limit", type=float, default=270.0)
    p.add_argument("--out", help="write the chain certificate here")
    p.set_defaults(func=_cmd_autobound)

    p = sub.add_parser("simulate", help="run the proposal algorithm on a random graph")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="nodes per side")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("bound", help="exact bound, failure floor and regimes")
    p.add_argument("--n", type=int)
    p.add_argument("--log2-n", type=float, dest="log2_n", help="for node counts beyond float range")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("verify-cert", help="replay and check a chain certificate")
    p.add_argument("file")
    p.set_defaults(func=_cmd_verify_cert)

    p = sub.add_parser("serve", help="run the local session service")
    p.add_argument("--port", type=int, default=8343)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ProblemFormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ChainVerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except RelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
