"""The degree-31 equivariant map with period-five critical points.

``g = alpha * H * phi + beta * F * eta``.  Its Jacobian is a degree-60
invariant, hence a combination ``a F^5 + b H^3``; the critical set is the
group orbit on which ``F^5 / H^3`` equals ``-b / a``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpfr

from .binform import (
    PrecisionContext,
    ProjPoint,
    _poly_and_deriv,
    chordal_distance,
    jacobian_form,
    roots,
    to_complex,
    working_eps,
)
from .icosa import canonical_data, nearest, tetra_system, tetrahedral_subgroup


class CalibrationError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CriticalSetError(RuntimeError):
    pass


class LabelingError(RuntimeError):
    pass


@dataclass(frozen=True)
class MapParameters:
    alpha: object
    beta: object

    @property
    def ratio(self):
        return to_complex(self.beta) / self.alpha

    def normalized(self, alpha=19):
        """Same projective parameters rescaled to the given alpha."""
        return MapParameters(mpc(alpha), self.ratio * alpha)

    def distance(self, other):
        """Relative distance between the two ratios beta / alpha."""
        return abs(self.ratio - other.ratio) / abs(other.ratio)


PAPER_PARAMETERS = MapParameters(mpc(19), mpc("-10.825358425-1.091443283j"))


def build_g(params, ctx=PrecisionContext()):
    data = canonical_data(ctx)
    with ctx.workprec():
        return (data.H * data.phi) * to_complex(params.alpha) + \
            (data.F * data.eta) * to_complex(params.beta)


@lru_cache(maxsize=None)
def _powers(ctx):
    data = canonical_data(ctx)
    return data.F**5, data.H**3


def critical_value(g, ctx=PrecisionContext()):
    """``Z_c`` with Jacobian(g) proportional to ``F^5 - Z_c H^3``.

    Also returns the relative residual of that decomposition.
    """
    F5, H3 = _powers(ctx)
    with ctx.workprec():
        J = jacobian_form(g)
        b = J[0]
        a = (J[5] - b * H3[5]) / F5[5]
        res = (J - (F5 * a + H3 * b)).norm() / J.norm()
        return -b / a, res


def z_value(p, ctx=PrecisionContext()):
    data = canonical_data(ctx)
    return data.F(p) ** 5 / data.H(p) ** 3


def _refine_on_level(coeffs, s, ctx, steps=80):
    tol = 64 * working_eps()
    for _ in range(steps):
        p, dp = _poly_and_deriv(coeffs, s)
        ds = p / dp
        s -= ds
        if abs(ds) <= tol * max(1, abs(s)):
            break
    return s


def _closure_residual(ratio, s, ctx):
    """Relative mismatch of Z(g(c)) against Z_c at the tracked critical point."""
    F5, H3 = _powers(ctx)
    g = build_g(MapParameters(mpc(1), ratio), ctx)
    zc, _ = critical_value(g, ctx)
    s = _refine_on_level(list((F5 - H3 * zc).coeffs), s, ctx)
    c = ProjPoint(s, mpc(1))
    return z_value(g(c), ctx) / zc - 1, s


def periodicity_residual(g, points, ctx=PrecisionContext()):
    """max |J_g(g(c))| / ||J_g|| over the given critical points."""
    with ctx.workprec():
        J = jacobian_form(g)
        nrm = J.norm()
        return max(abs(J(g(c))) for c in points) / nrm


def calibrate(seed=PAPER_PARAMETERS, ctx=PrecisionContext(), max_iter=40):
    """Refine beta / alpha so that g maps its critical set into itself.

    Secant iteration on one complex unknown, following the critical point
    nearest the affine point 0.3 + 0.1i.  Alpha is kept from the seed.
    """
    F5, H3 = _powers(ctx)
    with ctx.workprec():
        t1 = seed.ratio
        g = build_g(MapParameters(mpc(1), t1), ctx)
        zc, _ = critical_value(g, ctx)
        target = mpc("0.3+0.1j")
        start = min(roots(F5 - H3 * zc), key=lambda p: abs(p.affine() - target))
        s = start.affine()
        f1, s = _closure_residual(t1, s, ctx)
        t2 = t1 * (1 + mpfr(10) ** -12)
        f2, s = _closure_residual(t2, s, ctx)
        goal = ctx.tol(-10)
        for _ in range(max_iter):
            if abs(f2) < goal:
                break
            if f2 == f1:
                raise CalibrationError("secant step stalled", residual=abs(f2))
            t1, t2 = t2, t2 - f2 * (t2 - t1) / (f2 - f1)
            f1 = f2
            f2, s = _closure_residual(t2, s, ctx)
            if not gmpy2.is_finite(abs(f2)) or abs(f2) > 1:
                raise CalibrationError("calibration diverged", residual=abs(f2))
        else:
            raise CalibrationError("calibration did not converge", residual=abs(f2))
        params = MapParameters(to_complex(seed.alpha), t2 * seed.alpha)
        g = build_g(params, ctx)
        zc, _ = critical_value(g, ctx)
        c = ProjPoint(s, mpc(1))
        res = periodicity_residual(g, [c], ctx)
        if res >= ctx.tol(8):
            raise CalibrationError(f"periodicity residual {res} too large", residual=res)
    return params


@dataclass(frozen=True)
class CriticalSet:
    points: tuple
    cycles: tuple
    successor: tuple
    labels: tuple = None

    def __len__(self):
        return len(self.points)

    def label_class(self, k):
        return [i for i, lab in enumerate(self.labels) if lab == k]

    def cycle_of(self, i):
        return next(j for j, cyc in enumerate(self.cycles) if i in cyc)


def _sort_key(p):
    z = p.affine() if p.w2 != 0 else mpc(1e300)
    return (round(float(abs(z)), 12), round(float(gmpy2.phase(z)), 12))


def critical_set(g, ctx=PrecisionContext(), match_tol=None, period=5):
    """Roots of the Jacobian of g, with the cycle structure g induces on them."""
    with ctx.workprec():
        match_tol = match_tol if match_tol is not None else ctx.tol(10)
        J = jacobian_form(g)
        pts = sorted(roots(J), key=_sort_key)
        n = len(pts)
        sep = min(chordal_distance(pts[i], pts[j]) for i in range(n) for j in range(i))
        if sep < ctx.tol(20):
            raise CriticalSetError(f"critical points cluster (min separation {sep})")
        succ = []
        for p in pts:
            j, dist = nearest(pts, g(p))
            if dist > match_tol:
                raise CriticalSetError(
                    f"image of a critical point is {dist} from the critical set; "
                    "map is not calibrated")
            succ.append(j)
        if sorted(succ) != list(range(n)):
            raise CriticalSetError("g does not permute its critical points")
        cycles, seen = [], set()
        for i in range(n):
            if i in seen:
                continue
            cyc = [i]
            while succ[cyc[-1]] != i:
                cyc.append(succ[cyc[-1]])
            seen.update(cyc)
            cycles.append(tuple(cyc))
        if any(len(c) != period for c in cycles):
            raise CriticalSetError(
                f"cycle lengths {sorted(len(c) for c in cycles)} are not all {period}")
    return CriticalSet(tuple(pts), tuple(cycles), tuple(succ))


def tetra_orbits(cs, ctx=PrecisionContext()):
    """Partition of the critical points into the five orbits of the subgroup T_5."""
    sub = tetrahedral_subgroup(5, ctx)
    with ctx.workprec():
        tol = ctx.tol(20)
        orbits, seen = [], set()
        for i, p in enumerate(cs.points):
            if i in seen:
                continue
            orb = set()
            for A in sub:
                j, dist = nearest(cs.points, A(p))
                if dist > tol:
                    raise LabelingError("critical set is not closed under T_5")
                orb.add(j)
            seen |= orb
            orbits.append(tuple(sorted(orb)))
    return orbits


def candidate_labelings(cs, ctx=PrecisionContext()):
    """The five labelings obtained by declaring one T_5-orbit to be class 5.

    Class k is then P^(-k) applied to class 5, matching t_k = t_5 o P^k.
    """
    data = canonical_data(ctx)
    out = []
    with ctx.workprec():
        tol = ctx.tol(20)
        for orbit in tetra_orbits(cs, ctx):
            labels = [None] * len(cs.points)
            for k in range(1, 6):
                Pinv = data.P.power(-k) if k != 5 else None
                for i in orbit:
                    j = i
                    if Pinv is not None:
                        j, dist = nearest(cs.points, Pinv(cs.points[i]))
                        if dist > tol:
                            raise LabelingError("critical set is not closed under P")
                    if labels[j] is not None:
                        raise LabelingError("classes P^-k(C_5) overlap")
                    labels[j] = k
            out.append(tuple(labels))
    return out


def geometric_choice(cs, ctx=PrecisionContext()):
    """Index of the T_5-orbit holding the critical points nearest the roots of q_5."""
    q5 = tetra_system(5, ctx).q
    with ctx.workprec():
        tips = roots(q5)
        best = min(range(len(cs.points)),
                   key=lambda i: min(chordal_distance(cs.points[i], t) for t in tips))
    return next(n for n, orb in enumerate(tetra_orbits(cs, ctx)) if best in orb)


def tetra_label(cs, ctx=PrecisionContext(), choice=None):
    """Attach tetrahedral labels 1..5; ``choice`` picks among the five candidates."""
    cands = candidate_labelings(cs, ctx)
    if choice is None:
        choice = geometric_choice(cs, ctx)
    labels = cands[choice]
    check_labels(cs, labels, ctx)
    return replace(cs, labels=labels)


def check_labels(cs, labels, ctx=PrecisionContext()):
    if any(labels.count(k) != 12 for k in range(1, 6)):
        raise LabelingError("each label class must hold 12 critical points")
    for cyc in cs.cycles:
        if sorted(labels[i] for i in cyc) != [1, 2, 3, 4, 5]:
            raise LabelingError(f"cycle {cyc} does not visit all five labels")
    for k in range(1, 6):
        members = {i for i, lab in enumerate(labels) if lab == k}
        with ctx.workprec():
            for A in tetrahedral_subgroup(k, ctx):
                for i in members:
                    j, dist = nearest(cs.points, A(cs.points[i]))
                    if j not in members or dist > ctx.tol(20):
                        raise LabelingError(f"label class {k} is not T_{k}-invariant")


@lru_cache(maxsize=None)
def reference_map(ctx=PrecisionContext()):
    """Calibrated parameters, map and labelled critical set at this precision."""
    params = calibrate(PAPER_PARAMETERS, ctx)
    g = build_g(params, ctx)
    cs = tetra_label(critical_set(g, ctx), ctx)
    return params, g, cs
