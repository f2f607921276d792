import gmpy2
import mpmath
import pytest
import sympy as sp
from gmpy2 import mpc, mpfr, mpq
from hypothesis import given, settings, strategies as st

from icosolve.binform import (
    BinaryForm,
    LinearAction,
    PlaneMap,
    PrecisionContext,
    ProjPoint,
    RootFindingError,
    aberth,
    chordal_distance,
    compose_linear,
    cross,
    evaluate,
    from_roots,
    jacobian_form,
    multiply,
    resultant,
    roots,
)
from icosolve.icosa import exact_forms, tetra_printed

X, Y = sp.symbols("x y")
small = st.integers(-9, 9)
forms = st.lists(small, min_size=1, max_size=8).map(BinaryForm)


def to_sympy(f):
    d = f.degree
    return sum(sp.Integer(int(c)) * X ** (d - k) * Y**k for k, c in enumerate(f.coeffs))


def from_sympy(expr, d):
    poly = sp.Poly(sp.expand(expr), X, Y)
    return [int(poly.coeff_monomial(X ** (d - k) * Y**k)) for k in range(d + 1)]


# --- evaluation ---------------------------------------------------------------

def test_F_vanishes_at_infinity_and_H_is_one_there():
    F, H, _ = exact_forms()
    inf = ProjPoint.infinity()
    assert evaluate(F, inf) == 0
    assert evaluate(H, inf) == 1


@given(forms, small, st.integers(1, 9))
def test_evaluate_matches_sympy_at_rational_points(f, a, b):
    got = evaluate(f, (a, b))
    want = to_sympy(f).subs({X: a, Y: b})
    assert got == want


@given(forms, st.complex_numbers(max_magnitude=5, allow_nan=False),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False))
def test_homogeneity(f, z, lam):
    ctx = PrecisionContext(30)
    with ctx.workprec():
        p = (mpc(z), mpc(1))
        lp = (mpc(lam) * p[0], mpc(lam))
        a = evaluate(f, lp)
        b = evaluate(f, p) * mpc(lam) ** f.degree
        assert abs(a - b) <= ctx.tol(5) * max(1, abs(b))


def test_projpoint_normalization():
    p = ProjPoint(mpc(3), mpc(1))
    assert p.w1 == 1 and abs(p.w2 - mpc(1) / 3) < 1e-15
    with pytest.raises(ValueError):
        ProjPoint(0, 0)


# --- products and composition -------------------------------------------------

def test_q5_qhat5_is_u5(ctx):
    q5, qhat5, _, u5, m5 = tetra_printed(ctx)
    with ctx.workprec():
        diff = multiply(q5, qhat5) - u5.to_floating()
        assert diff.is_zero(ctx.tol(2))


def test_u5_m5_is_H(ctx):
    _, _, _, u5, m5 = tetra_printed(ctx)
    F, H, _ = exact_forms()
    assert u5 * m5 == H


def test_product_with_unit():
    f = BinaryForm([1, 2, 3])
    assert f * BinaryForm.constant(1) == f


@given(forms, forms)
def test_multiply_matches_sympy(f, g):
    got = multiply(f, g)
    assert list(got.coeffs) == from_sympy(to_sympy(f) * to_sympy(g), got.degree)


@given(forms, small, small, small, small)
def test_compose_linear_matches_sympy(f, a, b, c, d):
    if a * d - b * c == 0:
        return
    M = LinearAction(a, b, c, d)
    got = compose_linear(f, M)
    want = to_sympy(f).subs({X: a * X + b * Y, Y: c * X + d * Y}, simultaneous=True)
    assert list(got.coeffs) == from_sympy(want, f.degree)


def test_F_composed_with_identity_and_P(ctx):
    F, _, _ = exact_forms()
    assert compose_linear(F, LinearAction.identity()) == F
    with ctx.workprec():
        eps = gmpy2.exp(mpc(0, 2 * gmpy2.const_pi() / 5))
        P = LinearAction(eps**3, 0, 0, eps**2)
        assert (compose_linear(F, P) - F.to_floating()).is_zero(ctx.tol(2))


# --- cross operator -----------------------------------------------------------

def test_cross_of_F_is_printed_phi():
    F, _, _ = exact_forms()
    phi = cross(F)
    want1 = BinaryForm.from_dict(11, {0: -1, 5: 66, 10: 11})
    want2 = BinaryForm.from_dict(11, {1: 11, 6: -66, 11: -1})
    assert phi.first == want1 and phi.second == want2


def test_cross_of_H_is_printed_eta():
    _, H, _ = exact_forms()
    eta = cross(H)
    want1 = BinaryForm.from_dict(19, {4: -57 * 20, 9: -247 * 20, 14: 171 * 20, 19: -20})
    want2 = BinaryForm.from_dict(19, {0: 20, 5: 171 * 20, 10: 247 * 20, 15: -57 * 20})
    assert eta.first == want1 and eta.second == want2


def test_cross_of_xy():
    m = cross(BinaryForm([0, 1, 0]))
    assert m.first == BinaryForm([-1, 0]) and m.second == BinaryForm([0, 1])


@given(forms)
def test_cross_is_sympy_gradient_rotation(f):
    if f.degree < 1:
        with pytest.raises(ValueError):
            cross(f)
        return
    m = cross(f)
    e = to_sympy(f)
    assert list(m.first.coeffs) == from_sympy(-sp.diff(e, Y), f.degree - 1)
    assert list(m.second.coeffs) == from_sympy(sp.diff(e, X), f.degree - 1)


@settings(max_examples=25)
@given(st.lists(small, min_size=3, max_size=7), small, small, small, small)
def test_cross_operator_law(cs, a, b, c, d):
    # cross_x P = det(A)^-1 A (cross_w P(A w)), exactly over the rationals
    if a * d - b * c == 0:
        return
    P = BinaryForm(cs)
    A = LinearAction(a, b, c, d)
    lhs = cross(P)
    inner = cross(compose_linear(P, A))
    det = mpq(A.det)
    for w in [(1, 2), (3, -1), (2, 5)]:
        x = A.vec(*w)
        l1, l2 = evaluate(lhs.first, x), evaluate(lhs.second, x)
        i1, i2 = evaluate(inner.first, w), evaluate(inner.second, w)
        r1, r2 = A.vec(i1, i2)
        assert (l1, l2) == (r1 / det, r2 / det)


# --- Jacobian -----------------------------------------------------------------

def test_jacobian_degree_and_linear_case():
    assert jacobian_form(PlaneMap(BinaryForm([1] * 32), BinaryForm(range(32)))).degree == 60
    m = PlaneMap(BinaryForm([2, 3]), BinaryForm([5, 7]))
    assert jacobian_form(m) == BinaryForm.constant(2 * 7 - 3 * 5)


def test_jacobian_of_phi_vanishes_on_faces(ctx):
    F, H, _ = exact_forms()
    J = jacobian_form(cross(F))
    assert J.degree == 20
    # degree 20 and vanishing on the 20 roots of H: J is a multiple of H
    ratio = mpq(J.coeffs[0], H.coeffs[0])
    assert J == H * ratio


# --- roots --------------------------------------------------------------------

def test_roots_of_F_include_zero_and_infinity(ctx):
    F, _, _ = exact_forms()
    with ctx.workprec():
        pts = roots(F)
        assert len(pts) == 12
        assert any(p.w1 == 1 and p.w2 == 0 for p in pts)
        assert any(p.w1 == 0 for p in pts)


def test_roots_of_T_lie_on_level_set(ctx):
    F, H, T = exact_forms()
    with ctx.workprec():
        pts = roots(T)
        assert len(pts) == 30
        G = H**3 - 1728 * F**5
        for p in pts:
            assert abs(evaluate(G, p)) < ctx.tol(10) * G.norm()


def test_multiple_root(ctx):
    f = BinaryForm([1, -5, 10, -10, 5, -1])     # (x - y)^5
    with ctx.workprec():
        pts = roots(f)
        assert len(pts) == 5
        assert all(chordal_distance(p, ProjPoint(1, 1)) < 1e-10 for p in pts)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=2, max_size=9))
def test_aberth_against_mpmath(cs):
    coeffs = [complex(a, b) for a, b in cs]
    if coeffs[0] == 0 or all(c == 0 for c in coeffs[1:]):
        return
    ctx = PrecisionContext(40)
    with ctx.workprec():
        ours = aberth([mpc(c) for c in coeffs])
    mpmath.mp.dps = 40
    ref = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200)
    with ctx.workprec():
        ref = [mpc(mpfr(str(r.real)), mpfr(str(r.imag))) for r in ref]
        for r in ref:
            assert min(abs(r - z) for z in ours) < mpfr("1e-12") * max(1, abs(r))


def test_roots_roundtrip(ctx):
    with ctx.workprec():
        pts = [ProjPoint(mpc(z), mpc(1)) for z in ("0.5+0.25j", "-2+1j", "0.1-3j")]
        pts.append(ProjPoint.infinity())
        f = from_roots(pts)
        back = roots(f)
        for p in pts:
            assert min(chordal_distance(p, q) for q in back) < ctx.tol(10)


def test_aberth_reports_failure():
    with pytest.raises(RootFindingError):
        aberth([mpc(1), mpc(0), mpc(0), mpc(-1)], max_iter=1)


# --- metric and group elements -------------------------------------------------

def test_chordal_basics(ctx):
    with ctx.workprec():
        p = ProjPoint(mpc("0.3+0.4j"), mpc(1))
        assert chordal_distance(p, p) == 0
        assert chordal_distance(ProjPoint(1, 0), ProjPoint(0, 1)) == 1
        lam = mpc("2-7j")
        assert chordal_distance(p, p.scaled(lam)) < ctx.tol(0)


@given(st.complex_numbers(max_magnitude=10, allow_nan=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_chordal_triangle_inequality(a, b, c):
    ps = [ProjPoint(mpc(z), mpc(1)) for z in (a, b, c)]
    d = chordal_distance
    assert d(ps[0], ps[2]) <= d(ps[0], ps[1]) + d(ps[1], ps[2]) + 1e-12


def test_identity_map_fixes_points(ctx):
    ident = PlaneMap(BinaryForm([1, 0]), BinaryForm([0, 1]))
    with ctx.workprec():
        p = ProjPoint(mpc("0.7-0.2j"), mpc(1))
        assert chordal_distance(ident(p), p) == 0


def test_linear_action_inverse_and_singular():
    A = LinearAction(2, 1, 1, 1)
    assert (A @ A.inverse()).entries() == (1, 0, 0, 1)
    with pytest.raises(ValueError):
        LinearAction(1, 2, 2, 4)


def test_resultant_detects_common_root(ctx):
    with ctx.workprec():
        f = from_roots([ProjPoint(mpc(1), mpc(1)), ProjPoint(mpc(2), mpc(1))])
        g = from_roots([ProjPoint(mpc(1), mpc(1)), ProjPoint(mpc(-3), mpc(1))])
        h = from_roots([ProjPoint(mpc(5), mpc(1)), ProjPoint(mpc(-3), mpc(1))])
        assert abs(resultant(f, g)) < ctx.tol(5)
        assert abs(resultant(f, h)) > mpfr("0.1")
