"""Solving R_Z(v) = v^5 - 40 Z v^2 - 5 Z v - Z by iterating g_Z.

Four steps: build the resolvent, instantiate g_Z, iterate from a random seed
until the orbit settles on a five-cycle, and read off the roots with the
extractor Gamma_Z.  The roots are then compared with a direct simultaneous
iteration on the quintic.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache

from gmpy2 import mpc, mpfr

from .binform import (
    DegeneratePointError,
    PrecisionContext,
    ProjPoint,
    aberth,
    chordal_distance,
    to_complex,
)
from .extractor import (
    EXTRA_DIGITS,
    ExtractionError,
    ExtractorData,
    derive_L,
    resolve_labeling,
    resolvent_value,
    tune_all,
)
from .map31 import MapParameters, candidate_labelings, reference_map
from .param import (
    DegenerateParameterError,
    ParamData,
    ParamMap,
    SampleConfig,
    cache_load,
    cache_store,
    compare_fz_reference,
    derive_all,
    g_param,
)

log = logging.getLogger(__name__)

GUARD_RADIUS = 1e-6
SPECIAL_Z = (0, mpfr(1) / 1728)


class NonConvergenceError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class ResolventQuintic:
    """``sum_j b[j] v^j`` with b = (-Z, -5Z, -40Z, 0, 0, 1)."""

    Z: object
    coeffs: tuple

    def __call__(self, v):
        return resolvent_value(self.Z, v)

    def descending(self):
        return list(reversed(self.coeffs))


def _guard(Z, guard):
    for special in SPECIAL_Z:
        if abs(Z - special) <= guard:
            raise DegenerateParameterError(
                f"Z = {complex(Z)} is within {guard} of the degenerate value "
                f"{'0' if special == 0 else '1/1728'}")


def resolvent(Z, guard=GUARD_RADIUS):
    Z = to_complex(Z)
    _guard(Z, guard)
    return ResolventQuintic(Z, (-Z, -5 * Z, -40 * Z, mpc(0), mpc(0), mpc(1)))


def direct_roots(r):
    """Roots of the quintic by simultaneous iteration on its coefficients."""
    return aberth(r.descending())


def hausdorff(a, b):
    d1 = max(min(abs(x - y) for y in b) for x in a)
    d2 = max(min(abs(x - y) for x in a) for y in b)
    return max(d1, d2)


@dataclass(frozen=True)
class RunConfig:
    digits: int = 60
    cycle_tol: float = 1e-12
    max_iter: int = 2000
    max_retries: int = 8
    seed: int = 0
    guard: float = GUARD_RADIUS
    cache: str = None
    polish: int = 5

    def __post_init__(self):
        if min(self.cycle_tol, self.guard) <= 0 or self.max_iter <= 0:
            raise ValueError("tolerances and iteration limits must be positive")

    @property
    def ctx(self):
        return PrecisionContext(self.digits)

    @property
    def residual_tol(self):
        return mpfr(10) ** (-self.digits / 2)


def random_seed_point(rng):
    """Uniform on the unit disk of a randomly chosen affine chart."""
    r = math.sqrt(rng.random())
    a = rng.uniform(0, 2 * math.pi)
    w = mpc(r * math.cos(a), r * math.sin(a))
    return ProjPoint(w, mpc(1)) if rng.random() < 0.5 else ProjPoint(mpc(1), w)


def iterate_to_cycle(gZ, p0, cfg=RunConfig(), ctx=None):
    """Five consecutive points of the cycle the orbit of p0 settles on.

    Stops once iterates n and n + 5 are within ``cfg.cycle_tol``, then runs
    ``cfg.polish`` further five-step rounds.  Returns (points, iterations).
    """
    ctx = ctx or cfg.ctx
    with ctx.workprec():
        hist = [p0]
        p = p0
        for n in range(1, cfg.max_iter + 1):
            p = gZ(p)
            hist.append(p)
            if len(hist) > 6:
                hist.pop(0)
            if n >= 5 and chordal_distance(hist[-1], hist[0]) < cfg.cycle_tol:
                break
        else:
            raise NonConvergenceError(f"no five-cycle after {cfg.max_iter} iterations")
        for _ in range(5 * cfg.polish):
            p = gZ(p)
            hist.append(p)
            hist.pop(0)
        cycle = hist[1:]
        closure = chordal_distance(gZ(cycle[-1]), cycle[0])
        if closure > ctx.tol(10):
            raise NonConvergenceError(f"cycle did not tighten (closure error {closure})")
        spread = min(chordal_distance(a, b) for i, a in enumerate(cycle) for b in cycle[:i])
        if spread < mpfr("1e-6"):
            raise NonConvergenceError("orbit settled on a cycle of period less than 5")
        return cycle, n + 5 * cfg.polish


@dataclass
class SolveReport:
    Z: object
    seedPoint: ProjPoint = None
    iterations: int = 0
    cycle: list = field(default_factory=list)
    roots: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    retries: int = 0
    oracleRoots: list = field(default_factory=list)
    matchDistance: object = None
    seconds: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def max_residual(self):
        return max(self.residuals) if self.residuals else mpfr("inf")

    def to_json(self, match_tol=1e-20):
        z = complex(self.Z)
        return {
            "z": [z.real, z.imag],
            "roots": [[str(r.real), str(r.imag)] for r in self.roots],
            "residuals": [float(x) for x in self.residuals],
            "iterations": self.iterations,
            "retries": self.retries,
            "oracle_match": (self.matchDistance is not None
                             and float(self.matchDistance) < match_tol),
            "match_distance": None if self.matchDistance is None else float(self.matchDistance),
            "seconds": round(self.seconds, 4),
            "failures": self.failures,
        }


# ---------------------------------------------------------------------------
# derived data


@dataclass(frozen=True)
class Solver:
    """Everything a solve needs: (alpha, beta), the Z-forms and the extractor."""

    params: MapParameters
    pd: ParamData
    ex: ExtractorData
    ctx: PrecisionContext
    info: dict = field(default_factory=dict, compare=False)

    def g_at(self, Z0):
        return g_param(self.params, self.pd)(Z0)


def _guarded(ctx):
    return PrecisionContext(ctx.digits + EXTRA_DIGITS)


def derive(ctx=PrecisionContext(), cfg=SampleConfig(), check_maps=True):
    """Full derivation: calibrate g, fit the Z-forms, resolve labels, fit L_Z."""
    t0 = time.perf_counter()
    params, g, cs = reference_map(ctx)
    log.info("calibrated beta/alpha = %s", complex(params.ratio))
    pd = derive_all(cfg, ctx, check_maps=check_maps)
    bad = compare_fz_reference(pd.F)
    if bad:
        log.warning("F_Z rows %s differ from the reference expansion", bad)
    else:
        log.info("F_Z matches the reference expansion in all 13 rows")
    cs, residuals = resolve_labeling(cs, pd.F, ctx)
    choice = candidate_labelings(cs, ctx).index(cs.labels)
    log.info("labelling residuals %s; using candidate %d",
             [float(r) for r in residuals], choice)
    tuning = tune_all(cs, ctx)
    L = derive_L(tuning, replace(cfg, rule="circle"), ctx)
    info = {
        "alpha": [str(params.alpha.real), str(params.alpha.imag)],
        "beta": [str(params.beta.real), str(params.beta.imag)],
        "tuning": tuning.record(),
        "labeling": choice,
        "labeling_residuals": [float(r) for r in residuals],
        "fz_reference_mismatch": bad,
        "derive_seconds": round(time.perf_counter() - t0, 2),
    }
    return Solver(params, pd, ExtractorData(L, pd.F, tuning, _guarded(ctx)), ctx, info)


def save(solver, path):
    pd = solver.pd
    forms = pd.forms() + [solver.ex.L]
    return cache_store(forms, path, solver.ctx, extra=solver.info)


def load(path, ctx=PrecisionContext()):
    forms, extra = cache_load(path, ctx)
    with ctx.workprec():
        params = MapParameters(mpc(*map(mpfr, extra["alpha"])), mpc(*map(mpfr, extra["beta"])))
    pd = ParamData(forms["F_Z"], forms["H_Z"],
                   ParamMap(forms["phi_Z1"], forms["phi_Z2"]),
                   ParamMap(forms["eta_Z1"], forms["eta_Z2"]))
    return Solver(params, pd, ExtractorData(forms["L_Z"], pd.F, work=_guarded(ctx)), ctx, extra)


@lru_cache(maxsize=None)
def default_solver(ctx=PrecisionContext()):
    return derive(ctx, check_maps=False)


# ---------------------------------------------------------------------------
# solving


def solve(Z, cfg=RunConfig(), solver=None):
    """Roots of R_Z from the cycle g_Z settles on; retries with fresh seeds."""
    t0 = time.perf_counter()
    ctx = cfg.ctx
    if solver is None:
        solver = load(cfg.cache, ctx) if cfg.cache else default_solver(ctx)
    with ctx.workprec():
        r = resolvent(Z, cfg.guard)
        Z = r.Z
        gZ = solver.g_at(Z)
        gamma = solver.ex.at(Z)
        oracle = direct_roots(r)
        rng = random.Random(cfg.seed)
        report = SolveReport(Z, oracleRoots=oracle)
        total = 0
        for attempt in range(cfg.max_retries + 1):
            p0 = random_seed_point(rng)
            report.seedPoint, report.retries = p0, attempt
            try:
                cycle, its = iterate_to_cycle(gZ, p0, cfg, ctx)
                total += its
                vals = [gamma(w) for w in cycle]
            except (NonConvergenceError, DegeneratePointError, ExtractionError) as exc:
                total += cfg.max_iter
                report.failures.append(f"seed {attempt}: {exc}")
                continue
            res = [abs(r(v)) for v in vals]
            if max(res) >= cfg.residual_tol:
                report.failures.append(f"seed {attempt}: residual {float(max(res)):.3e}")
                continue
            report.cycle, report.roots, report.residuals = cycle, vals, res
            report.iterations = its
            report.matchDistance = hausdorff(vals, oracle)
            report.seconds = time.perf_counter() - t0
            return report
    report.iterations = total
    report.seconds = time.perf_counter() - t0
    raise NonConvergenceError(
        f"no acceptable cycle for Z = {complex(Z)} after {cfg.max_retries + 1} seeds", report)
