"""The eight acceptance checks, shared by ``verify`` and the demos.

Each check returns a CheckResult; none of them raises on a failed criterion.
"""

from __future__ import annotations

import cmath
import hashlib
import random
import statistics
import time
from dataclasses import dataclass, replace

from gmpy2 import mpc, mpfr

from .basins import render_basins
from .binform import BinaryForm, PrecisionContext, ProjPoint, chordal_distance, evaluate, jacobian_form
from .extractor import tune_all
from .icosa import (
    T5_COEFFS,
    U5_COEFFS,
    canonical_data,
    divide,
    exact_forms,
    special_orbits,
)
from .map31 import PAPER_PARAMETERS, reference_map
from .param import SampleConfig, compare_fz_reference, derive_all, s_matrix, z_of
from .pipeline import RunConfig, SPECIAL_Z, solve


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        return (f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: "
                f"{self.detail} ({self.seconds:.2f} s)")


def _timed(number, name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(number, name, passed, detail, time.perf_counter() - t0)


def check_syzygies(ctx=PrecisionContext()):
    def run():
        t0 = time.perf_counter()
        F, H, T = exact_forms()
        t5, u5 = BinaryForm(T5_COEFFS), BinaryForm(U5_COEFFS)
        m5, rem = divide(H, u5)
        ok = ((T * T - H**3 + 1728 * F**5).is_zero()
              and (64 * m5 * m5 - 95 * t5 * t5 * m5 + 40 * t5**4 - 9 * u5**3).is_zero()
              and rem.is_zero() and u5 * m5 == H and m5.kind == "exact")
        dt = time.perf_counter() - t0
        return ok and dt < 1.0, f"identities exact={ok}, {dt:.3f} s"
    return _timed(1, "exact syzygies", run)


def check_fz(ctx=PrecisionContext(), cfg=SampleConfig()):
    def run():
        t0 = time.perf_counter()
        pd = derive_all(cfg, ctx, check_maps=True)
        dt = time.perf_counter() - t0
        bad = compare_fz_reference(pd.F)
        return (not bad and dt < 600,
                f"F_Z kind={pd.F.kind}, mismatched rows={bad}, derivation {dt:.1f} s")
    return _timed(2, "F_Z coefficient reproduction", run)


def check_map_structure(ctx=PrecisionContext()):
    def run():
        params, g, cs = reference_map(ctx)
        with ctx.workprec():
            worst = mpfr(0)
            for c in cs.points:
                p = c
                for _ in range(5):
                    p = g(p)
                worst = max(worst, chordal_distance(p, c))
            rel = params.distance(PAPER_PARAMETERS)
        ok = (len(cs.points) == 60 and len(cs.cycles) == 12
              and all(len(c) == 5 for c in cs.cycles)
              and worst < mpfr("1e-40") and rel < mpfr("1e-8"))
        return ok, (f"{len(cs.points)} critical points, {len(cs.cycles)} five-cycles, "
                    f"max |g^5(c) - c| = {float(worst):.2e}, "
                    f"beta/alpha relative deviation {float(rel):.2e}")
    return _timed(3, "map structure", run)


def check_selectors(ctx=PrecisionContext(), labels=None):
    def run():
        params, g, cs = reference_map(ctx)
        cs_ = replace(cs, labels=tuple(labels)) if labels is not None else cs
        data = canonical_data(ctx)
        tuning = tune_all(cs_, ctx)
        worst = mpfr(0)
        with ctx.workprec():
            for sel in tuning.selectors:
                for i, p in enumerate(cs_.points):
                    expect = 1 if cs_.labels[i] == sel.k else 0
                    worst = max(worst, abs(sel(p, data.F) - expect))
        return worst < mpfr("1e-40"), f"max |B_k - indicator| = {float(worst):.2e}"
    return _timed(4, "selector contract", run)


def random_admissible_z(rng, guard=1e-3):
    while True:
        z = cmath.rect(10 ** rng.uniform(-2, 2), rng.uniform(0, 2 * cmath.pi))
        if all(abs(z - complex(s)) > guard for s in SPECIAL_Z):
            return z


def check_solving(solver, n=100, seed=2024, digits=60):
    def run():
        rng = random.Random(seed)
        its, worst_match, worst_res, worst_t, fails = [], 0.0, 0.0, 0.0, 0
        for i in range(n):
            z = random_admissible_z(rng)
            try:
                rep = solve(z, RunConfig(digits=digits, seed=i), solver=solver)
            except Exception:
                fails += 1
                continue
            its.append(rep.iterations)
            worst_match = max(worst_match, float(rep.matchDistance))
            worst_res = max(worst_res, float(rep.max_residual))
            worst_t = max(worst_t, rep.seconds)
        med = statistics.median(its) if its else float("inf")
        ok = (fails == 0 and worst_match < 1e-20 and worst_res < 1e-20
              and med <= 500 and worst_t < 2.0)
        return ok, (f"{n - fails}/{n} solved, Hausdorff {worst_match:.2e}, residual "
                    f"{worst_res:.2e}, median {med} iterations, slowest {worst_t:.3f} s")
    return _timed(5, "end-to-end solving", run)


def check_semiconjugacy(solver, n=20, seed=11):
    ctx = solver.ctx

    def run():
        params, g, cs = reference_map(ctx)
        rng = random.Random(seed)
        worst = mpfr(0)
        with ctx.workprec():
            for _ in range(n):
                y = ProjPoint(mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)), mpc(1))
                w = ProjPoint(mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)), mpc(1))
                S = s_matrix(y, ctx)
                lhs = g(S(w))
                rhs = S(solver.g_at(z_of(y, ctx))(w))
                worst = max(worst, chordal_distance(lhs, rhs))
        return worst < mpfr("1e-45"), f"max chordal distance {float(worst):.2e} over {n} pairs"
    return _timed(6, "semiconjugacy", run)


def check_basins(ctx=PrecisionContext(), resolution=(512, 512)):
    def run():
        params, g, cs = reference_map(ctx)
        cycles = [[cs.points[i] for i in c] for c in cs.cycles]
        digests, frac = [], 0.0
        for _ in range(2):
            img = render_basins(g, cycles, resolution=resolution)
            digests.append(hashlib.sha256(img.rgb.tobytes()).hexdigest())
            frac = img.captured_fraction
        ok = frac >= 0.99 and digests[0] == digests[1]
        return ok, (f"{frac:.4%} of {resolution[0]}x{resolution[1]} pixels captured, "
                    f"renders identical={digests[0] == digests[1]}")
    return _timed(7, "basin render", run)


def check_phi_period2(ctx=PrecisionContext()):
    def run():
        data = canonical_data(ctx)
        faces = special_orbits(ctx).faces20
        with ctx.workprec():
            J = jacobian_form(data.phi)
            crit = max(abs(evaluate(J, f)) for f in faces) / J.norm()
            fix = max(chordal_distance(data.phi(data.phi(f)), f) for f in faces)
        ok = len(faces) == 20 and crit < mpfr("1e-40") and fix < mpfr("1e-40")
        return ok, (f"{len(faces)} face-centers, max |J_phi|/||J_phi|| = {float(crit):.2e}, "
                    f"max chordal |phi^2(f) - f| = {float(fix):.2e}")
    return _timed(8, "phi period two", run)


def run_all(solver, level="full"):
    """Checks in order; ``quick`` uses 10 parameters and skips the slow ones."""
    ctx = solver.ctx
    out = [check_syzygies(ctx)]
    if level == "full":
        out.append(check_fz(ctx))
    out += [check_map_structure(ctx), check_selectors(ctx),
            check_solving(solver, n=100 if level == "full" else 10, digits=ctx.digits),
            check_semiconjugacy(solver)]
    if level == "full":
        out.append(check_basins(ctx))
    out.append(check_phi_period2(ctx))
    return out
