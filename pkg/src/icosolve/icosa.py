"""Icosahedral invariants, equivariants, the rotation group and tetrahedral systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpq

from .binform import (
    BinaryForm,
    LinearAction,
    PlaneMap,
    PrecisionContext,
    chordal_distance,
    compose_linear,
    cross,
    roots,
)

GROUP_ORDER = 60

F_COEFFS = {1: 1, 6: -11, 11: -1}
H_COEFFS = {0: 1, 5: 228, 10: 494, 15: -228, 20: 1}
T_COEFFS = {0: 1, 5: -522, 10: -10005, 20: -10005, 25: 522, 30: 1}
T5_COEFFS = [1, -2, -5, 0, -5, 2, 1]
U5_COEFFS = [1, 1, 7, -7, 0, 7, 7, -1, 1]


class GroupClosureError(RuntimeError):
    pass


class RelationError(AssertionError):
    def __init__(self, report):
        super().__init__(report.summary())
        self.report = report


def exact_forms():
    F = BinaryForm.from_dict(12, F_COEFFS)
    H = BinaryForm.from_dict(20, H_COEFFS)
    T = BinaryForm.from_dict(30, T_COEFFS)
    return F, H, T


def divide(f, g):
    """Quotient and remainder of exact forms, dividing in descending x1 powers."""
    num = [mpq(c) for c in f.coeffs]
    den = [mpq(c) for c in g.coeffs]
    lead = next(i for i, c in enumerate(den) if c != 0)
    if lead:
        raise ValueError("divisor with leading zero coefficient")
    dq = f.degree - g.degree
    if dq < 0:
        raise ValueError("divisor degree exceeds dividend degree")
    quot = [mpq(0)] * (dq + 1)
    for i in range(dq + 1):
        c = num[i] / den[0]
        quot[i] = c
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    return BinaryForm(_intify(quot)), BinaryForm(_intify(num))


def _intify(cs):
    return [int(c) if c.denominator == 1 else c for c in cs]


def epsilon():
    """Primitive fifth root of unity e^(2 pi i / 5) at working precision."""
    return gmpy2.exp(mpc(0, 2 * gmpy2.const_pi() / 5))


def mobius_three_point(z, w):
    """LinearAction sending affine points z[i] -> w[i] (i = 0, 1, 2)."""

    def to_standard(p1, p2, p3):
        # sends p1, p2, p3 to 0, inf, 1
        return LinearAction(p2 - p3, -p1 * (p2 - p3), p1 - p3, -p2 * (p1 - p3))

    return to_standard(*w).inverse() @ to_standard(*z)


@dataclass(frozen=True)
class IcosahedralData:
    F: BinaryForm
    H: BinaryForm
    T: BinaryForm
    phi: PlaneMap
    eta: PlaneMap
    P: LinearAction
    W: LinearAction
    R: LinearAction
    group: tuple = field(repr=False)
    ctx: PrecisionContext = PrecisionContext()


@dataclass(frozen=True)
class TetrahedralSystem:
    k: int
    q: BinaryForm
    qhat: BinaryForm
    t: BinaryForm
    u: BinaryForm
    m: BinaryForm


@dataclass(frozen=True)
class SpecialOrbits:
    vertices12: tuple
    faces20: tuple
    edges30: tuple


def generate_group(*generators, ctx=None, tol=None):
    """Closure of the generators modulo scalars; raises unless it has 60 classes."""
    ctx = ctx or PrecisionContext()
    with ctx.workprec():
        tol = tol if tol is not None else 1000 * ctx.eps
        gens = [g.unimodular() for g in generators]
        elements = [LinearAction(mpc(1), mpc(0), mpc(0), mpc(1))]
        frontier = list(elements)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = (g @ a).unimodular()
                    if not any(b.projectively_equal(e, tol) for e in elements):
                        elements.append(b)
                        nxt.append(b)
                        if len(elements) > GROUP_ORDER:
                            raise GroupClosureError(
                                f"closure exceeded {GROUP_ORDER} elements; bad generators")
            frontier = nxt
    if len(elements) != GROUP_ORDER:
        raise GroupClosureError(
            f"closure stabilized at {len(elements)} elements, expected {GROUP_ORDER}")
    return tuple(elements)


def _face_rotation(F):
    """Order-3 rotation cycling the vertex 0 and two of its neighbours."""
    near = [p for p in roots(F) if p.w2 == 1 and 0 < abs(p.w1) < 1]
    near.sort(key=lambda p: gmpy2.phase(p.w1))
    a, b = near[0].w1, near[1].w1
    zero = mpc(0)
    return mobius_three_point((zero, a, b), (a, b, zero))


@lru_cache(maxsize=None)
def canonical_data(ctx=PrecisionContext()):
    F, H, T = exact_forms()
    with ctx.workprec():
        eps5 = epsilon()
        P = LinearAction(eps5**3, mpc(0), mpc(0), eps5**2)
        W = LinearAction(0, -1, 1, 0)
        R = _face_rotation(F)
        group = generate_group(P, W, R, ctx=ctx)
    return IcosahedralData(F=F, H=H, T=T, phi=cross(F), eta=cross(H),
                           P=P, W=W, R=R, group=group, ctx=ctx)


def tetra_printed(ctx=PrecisionContext()):
    """q5, qhat5 (floating, involve sqrt 15) and exact t5, u5, m5 = H / u5."""
    _, H, _ = exact_forms()
    t5 = BinaryForm(T5_COEFFS)
    u5 = BinaryForm(U5_COEFFS)
    m5, rem = divide(H, u5)
    if not rem.is_zero():
        raise RelationError(RelationReport([("H divisible by u5", False, "nonzero remainder")]))
    with ctx.workprec():
        r = mpc(0, 1) * gmpy2.sqrt(mpc(15))
        q5 = BinaryForm([mpc(4), 2 + 2 * r, 6 - 2 * r, -2 - 2 * r, mpc(4)]) / 4
        qhat5 = BinaryForm([mpc(2), 1 - r, 3 + r, -(1 - r), mpc(2)]) / 2
    return q5, qhat5, t5, u5, m5


@lru_cache(maxsize=None)
def tetra_system(k, ctx=PrecisionContext()):
    if k not in range(1, 6):
        raise ValueError(f"tetrahedral index must be in 1..5, got {k}")
    q5, qhat5, t5, u5, m5 = tetra_printed(ctx)
    if k == 5:
        return TetrahedralSystem(5, q5, qhat5, t5, u5, m5)
    data = canonical_data(ctx)
    with ctx.workprec():
        Pk = data.P.power(k)
        return TetrahedralSystem(
            k, compose_linear(q5, Pk), compose_linear(qhat5, Pk),
            compose_linear(t5, Pk), compose_linear(u5, Pk), compose_linear(m5, Pk))


@lru_cache(maxsize=None)
def special_orbits(ctx=PrecisionContext()):
    F, H, T = exact_forms()
    with ctx.workprec():
        return SpecialOrbits(tuple(roots(F)), tuple(roots(H)), tuple(roots(T)))


@lru_cache(maxsize=None)
def tetrahedral_subgroup(k, ctx=PrecisionContext()):
    """Elements of the group mapping the four roots of q_k onto themselves."""
    data = canonical_data(ctx)
    sysk = tetra_system(k, ctx)
    with ctx.workprec():
        pts = roots(sysk.q)
        tol = 1000 * ctx.eps
        out = []
        for A in data.group:
            if all(min(chordal_distance(A(p), q) for q in pts) < tol for p in pts):
                out.append(A)
    return tuple(out)


def nearest(points, p):
    """Index and chordal distance of the point in ``points`` closest to ``p``."""
    dists = [chordal_distance(p, q) for q in points]
    i = min(range(len(dists)), key=dists.__getitem__)
    return i, dists[i]


@dataclass
class RelationReport:
    checks: list

    @property
    def ok(self):
        return all(passed for _, passed, _ in self.checks)

    def failures(self):
        return [(name, detail) for name, passed, detail in self.checks if not passed]

    def summary(self):
        return "\n".join(f"{'PASS' if passed else 'FAIL'} {name}: {detail}"
                         for name, passed, detail in self.checks)


def _mismatch(form):
    """First nonzero coefficient of a difference form, as (index, delta)."""
    for k, c in enumerate(form.coeffs):
        if c != 0:
            return k, c
    return None


def verify_relations(ctx=PrecisionContext(), strict=False):
    F, H, T = exact_forms()
    q5, qhat5, t5, u5, m5 = tetra_printed(ctx)
    checks = []

    syzygy = T * T - H**3 + 1728 * F**5
    bad = _mismatch(syzygy)
    checks.append(("T^2 - H^3 + 1728 F^5 = 0", bad is None,
                   "exact zero" if bad is None else f"coefficient {bad[0]} is {bad[1]}"))

    deg24 = 64 * m5 * m5 - (95 * t5 * t5 * m5 - 40 * t5**4 + 9 * u5**3)
    bad = _mismatch(deg24)
    checks.append(("64 m5^2 = 95 t5^2 m5 - 40 t5^4 + 9 u5^3", bad is None,
                   "exact zero" if bad is None else f"coefficient {bad[0]} is {bad[1]}"))

    bad = _mismatch(u5 * m5 - H)
    checks.append(("u5 m5 = H", bad is None,
                   "exact" if bad is None else f"coefficient {bad[0]} is {bad[1]}"))

    with ctx.workprec():
        tol = ctx.eps * 100
        diff = max(abs(a - b) for a, b in zip((q5 * qhat5).coeffs, u5.coeffs))
        checks.append(("q5 qhat5 = u5", diff < tol, f"max delta {float(diff):.3e}"))

        data = canonical_data(ctx)
        faces = special_orbits(ctx).faces20
        worst = max(chordal_distance(data.phi(data.phi(f)), f) for f in faces)
        checks.append(("phi^2 fixes face-centers", worst < ctx.tol(20),
                       f"max chordal error {float(worst):.3e}"))

    report = RelationReport(checks)
    if strict and not report.ok:
        raise RelationError(report)
    return report
