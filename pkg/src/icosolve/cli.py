"""Command line: derive, solve, verify, basins.

Exit codes: 0 success, 1 failed verification, 2 non-convergence,
3 degenerate parameter, 4 cache error, 64 bad usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from gmpy2 import mpc, mpq

from .basins import DEFAULT_RES, DEFAULT_VIEWPORT, render_basins, save_image
from .binform import PrecisionContext
from .map31 import reference_map
from .param import CacheError, DegenerateParameterError, SampleConfig, s_matrix, y_for_z
from .pipeline import NonConvergenceError, RunConfig, derive, load, resolvent, save, solve

EXIT_OK, EXIT_VERIFY, EXIT_NONCONV, EXIT_DEGENERATE, EXIT_CACHE = 0, 1, 2, 3, 4
EXIT_USAGE = 64

log = logging.getLogger("icosolve")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2, which is taken by non-convergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_z(text, ctx):
    """``"1+0i"``, ``"-0.5-2i"``, ``"3"``, ``"1/1728"``; ``j`` works as well as ``i``."""
    s = text.strip().replace(" ", "").replace("I", "j").replace("i", "j")
    with ctx.workprec():
        try:
            if "/" in s and "j" not in s:
                return mpc(mpq(s))
            return mpc(s)
        except ValueError:
            pass
        try:
            return mpc(complex(s))
        except ValueError:
            raise UsageError(f"cannot parse Z literal {text!r}") from None


def _floats(text, n, sep=","):
    parts = [float(x) for x in text.lower().replace("x", sep).split(sep)]
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {text!r}")
    return parts


def _solver(args, ctx):
    if args.cache:
        return load(args.cache, ctx)
    log.info("no --cache given; deriving in memory")
    return derive(ctx, check_maps=False)


def cmd_derive(args):
    ctx = PrecisionContext(args.digits)
    solver = derive(ctx, SampleConfig(samples=args.samples))
    bad = solver.info["fz_reference_mismatch"]
    log.info("F_Z reference check: %s", "all 13 rows match" if not bad else f"rows {bad} differ")
    save(solver, args.out)
    log.info("wrote %s (%.1f s)", args.out, solver.info["derive_seconds"])
    return EXIT_OK


def cmd_solve(args):
    ctx = PrecisionContext(args.digits)
    Z = parse_z(args.z, ctx)
    cfg = RunConfig(digits=args.digits, seed=args.seed, max_iter=args.max_iter,
                    cycle_tol=args.tol, cache=args.cache)
    resolvent(Z, cfg.guard)
    try:
        rep = solve(Z, cfg, solver=_solver(args, ctx))
    except NonConvergenceError as exc:
        if args.json and exc.report is not None:
            print(json.dumps(exc.report.to_json(), indent=1))
        raise
    if args.json:
        print(json.dumps(rep.to_json(), indent=1))
    else:
        print(f"Z = {complex(rep.Z)}")
        for r, res in zip(rep.roots, rep.residuals):
            print(f"  {complex(r):.15g}   |R_Z| = {float(res):.2e}")
        print(f"iterations {rep.iterations}, retries {rep.retries}, "
              f"oracle distance {float(rep.matchDistance):.2e}")
    return EXIT_OK


def cmd_verify(args):
    from .acceptance import run_all

    ctx = PrecisionContext(args.digits)
    results = run_all(_solver(args, ctx), args.level)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"first failure: {failed[0].number}. {failed[0].name}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_basins(args):
    ctx = PrecisionContext(args.digits)
    params, g, cs = reference_map(ctx)
    cycles = [[cs.points[i] for i in c] for c in cs.cycles]
    m = g
    if args.z is not None:
        Z = parse_z(args.z, ctx)
        resolvent(Z)
        solver = _solver(args, ctx)
        with ctx.workprec():
            m = solver.g_at(Z)
            # the cycles of g_Z are the critical cycles of g pulled back through S_y
            Sinv = s_matrix(y_for_z(Z, ctx), ctx).inverse()
            cycles = [[Sinv(p) for p in cyc] for cyc in cycles]
    img = render_basins(m, cycles, tuple(args.viewport), tuple(args.res))
    save_image(args.out, img.rgb)
    log.info("wrote %s: %.2f%% captured", args.out, 100 * img.captured_fraction)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="icosolve", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive", help="derive the Z-forms and extractor, write a cache")
    d.add_argument("--digits", type=int, default=60)
    d.add_argument("--samples", type=int, default=0, help="0 picks the minimum needed")
    d.add_argument("--out", default="cache.json")
    d.set_defaults(fn=cmd_derive)

    s = sub.add_parser("solve", help="solve R_Z for one parameter")
    s.add_argument("--z", required=True, help='complex literal such as "1+0i"')
    s.add_argument("--cache")
    s.add_argument("--digits", type=int, default=60)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-iter", type=int, default=RunConfig.max_iter)
    s.add_argument("--tol", type=float, default=RunConfig.cycle_tol)
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_solve)

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--cache")
    v.add_argument("--digits", type=int, default=60)
    v.add_argument("--level", choices=("quick", "full"), default="quick")
    v.set_defaults(fn=cmd_verify)

    b = sub.add_parser("basins", help="render basins of the five-cycles")
    b.add_argument("--z", help="render g_Z instead of the reference map g")
    b.add_argument("--cache")
    b.add_argument("--digits", type=int, default=60)
    b.add_argument("--viewport", type=lambda t: _floats(t, 4), default=list(DEFAULT_VIEWPORT))
    b.add_argument("--res", type=lambda t: [int(x) for x in _floats(t, 2)],
                   default=list(DEFAULT_RES))
    b.add_argument("--out", default="basins.ppm")
    b.set_defaults(fn=cmd_basins)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose or args.command != "solve"
                        else logging.WARNING, format="%(message)s", stream=sys.stderr)
    try:
        return args.fn(args)
    except DegenerateParameterError as exc:
        print(f"degenerate parameter: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except CacheError as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except NonConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
