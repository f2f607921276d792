"""Homogeneous binary forms over exact rationals or multiprecision complexes.

Coefficients of a degree-d form are stored as ``c[0..d]`` for the monomials
``x1**(d-k) * x2**k``.  Exact coefficients are ``int``/``gmpy2.mpq``; floating
coefficients are ``gmpy2.mpc`` at whatever precision is active in the gmpy2
context, which :class:`PrecisionContext` manages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr, mpq

GUARD_BITS = 64

_MPQ = type(mpq(0))
_MPC = type(mpc(0))


class RootFindingError(ArithmeticError):
    """Simultaneous iteration failed; carries the best iterate found."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class DegeneratePointError(ArithmeticError):
    """Both components of a map vanish at the requested point."""


@dataclass(frozen=True)
class PrecisionContext:
    """Decimal working precision for floating scalars.

    ``eps`` is the tolerance scale used throughout (``10**(2 - digits)``);
    arithmetic itself carries ``GUARD_BITS`` extra bits.
    """

    digits: int = 60

    def __post_init__(self):
        if self.digits < 16:
            raise ValueError(f"digits must be >= 16, got {self.digits}")

    @property
    def bits(self):
        return int(math.ceil(self.digits * math.log2(10))) + GUARD_BITS

    @property
    def eps(self):
        return mpfr(10) ** (2 - self.digits)

    def tol(self, shift):
        """``10**(-digits + shift)``, the spelling used for most tolerances."""
        return mpfr(10) ** (shift - self.digits)

    def workprec(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.bits)


def is_exact(c):
    return isinstance(c, (int, _MPQ))


def to_complex(c):
    return c if isinstance(c, _MPC) else mpc(c)


def working_eps():
    return mpfr(2) ** (-gmpy2.get_context().precision)


class BinaryForm:
    """``sum_k c[k] * x1**(d-k) * x2**k``.  Immutable."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("a binary form needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("BinaryForm is immutable")

    @classmethod
    def constant(cls, c=1):
        return cls((c,))

    @classmethod
    def from_dict(cls, degree, terms):
        """Build from ``{k: c}`` where k is the exponent of x2."""
        coeffs = [0] * (degree + 1)
        for k, c in terms.items():
            coeffs[k] = c
        return cls(coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def kind(self):
        return "exact" if all(is_exact(c) for c in self.coeffs) else "floating"

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        return f"BinaryForm(degree={self.degree}, kind={self.kind!r})"

    def __eq__(self, other):
        if not isinstance(other, BinaryForm):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self.kind == "exact":
            return hash(tuple(mpq(c) for c in self.coeffs))
        return id(self)

    def __neg__(self):
        return BinaryForm(-c for c in self.coeffs)

    def __add__(self, other):
        if not isinstance(other, BinaryForm):
            return NotImplemented
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch {self.degree} vs {other.degree}")
        return BinaryForm(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, BinaryForm):
            return multiply(self, other)
        if isinstance(other, PlaneMap):
            return PlaneMap(multiply(self, other.first), multiply(self, other.second))
        return BinaryForm(c * other for c in self.coeffs)

    def __rmul__(self, other):
        return BinaryForm(other * c for c in self.coeffs)

    def __truediv__(self, scalar):
        if is_exact(scalar) and self.kind == "exact":
            scalar = mpq(scalar)
            return BinaryForm(c / scalar for c in self.coeffs)
        return BinaryForm(c / scalar for c in self.coeffs)

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of a form")
        result = BinaryForm.constant(1)
        base = self
        while n:
            if n & 1:
                result = multiply(result, base)
            n >>= 1
            if n:
                base = multiply(base, base)
        return result

    def __call__(self, p):
        return evaluate(self, p)

    def norm(self):
        return max(abs(c) for c in self.coeffs)

    def to_floating(self):
        return BinaryForm(to_complex(c) for c in self.coeffs)

    def is_zero(self, tol=0):
        return all(abs(c) <= tol for c in self.coeffs)

    def d1(self):
        """Partial derivative in x1."""
        d = self.degree
        if d == 0:
            return BinaryForm.constant(0)
        return BinaryForm((d - k) * self.coeffs[k] for k in range(d))

    def d2(self):
        """Partial derivative in x2."""
        d = self.degree
        if d == 0:
            return BinaryForm.constant(0)
        return BinaryForm(k * self.coeffs[k] for k in range(1, d + 1))

    def __matmul__(self, action):
        return compose_linear(self, action)


def multiply(f, g):
    a, b = f.coeffs, g.coeffs
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return BinaryForm(out)


def _horner(coeffs, t):
    acc = coeffs[0]
    for c in coeffs[1:]:
        acc = acc * t + c
    return acc


def evaluate(f, p):
    """Value of ``f`` at a ProjPoint or a raw coordinate pair.

    The form is dehomogenized in whichever coordinate has the larger modulus.
    """
    if isinstance(p, ProjPoint):
        x1, x2 = p.w1, p.w2
    else:
        x1, x2 = p
    d = f.degree
    if d == 0:
        return f.coeffs[0]
    # f(1, t) = sum c_k t^k ; f(t, 1) = sum c_k t^(d-k)
    if abs(x1) >= abs(x2):
        if x1 == 1:
            return _horner(f.coeffs[::-1], x2)
        return _horner(f.coeffs[::-1], _div(x2, x1)) * x1**d
    if x2 == 1:
        return _horner(f.coeffs, x1)
    return _horner(f.coeffs, _div(x1, x2)) * x2**d


def _div(a, b):
    if is_exact(a) and is_exact(b):
        return mpq(a) / b
    return a / b


def _linear_powers(a, b, n):
    """Coefficient lists of (a*x1 + b*x2)**j for j = 0..n."""
    pows = [[1]]
    for _ in range(n):
        prev = pows[-1]
        nxt = [0] * (len(prev) + 1)
        for i, c in enumerate(prev):
            nxt[i] += c * a
            nxt[i + 1] += c * b
        pows.append(nxt)
    return pows


def compose_linear(f, M):
    """The form ``w -> f(M w)``."""
    d = f.degree
    p1 = _linear_powers(M.a, M.b, d)
    p2 = _linear_powers(M.c, M.d, d)
    out = [0] * (d + 1)
    for k, ck in enumerate(f.coeffs):
        if ck == 0:
            continue
        u, v = p1[d - k], p2[k]
        for i, ui in enumerate(u):
            s = ck * ui
            for j, vj in enumerate(v):
                out[i + j] += s * vj
    return BinaryForm(out)


def cross(f):
    """Equivariant ``(-d f/d x2, d f/d x1)`` of one lower degree."""
    if f.degree < 1:
        raise ValueError("cross operator needs a form of degree >= 1")
    return PlaneMap(-f.d2(), f.d1())


def jacobian_form(m):
    f, g = m.first, m.second
    return f.d1() * g.d2() - f.d2() * g.d1()


class ProjPoint:
    """Point of the projective line, stored with max(|w1|, |w2|) = 1.

    The larger coordinate is divided out, so one of the stored coordinates is
    exactly 1.
    """

    __slots__ = ("w1", "w2")

    def __init__(self, w1, w2=1):
        if w1 == 0 and w2 == 0:
            raise ValueError("(0, 0) is not a projective point")
        if abs(w1) >= abs(w2):
            w1, w2 = 1, _div(w2, w1)
        else:
            w1, w2 = _div(w1, w2), 1
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)

    def __setattr__(self, name, value):
        raise AttributeError("ProjPoint is immutable")

    @classmethod
    def infinity(cls):
        return cls(1, 0)

    def __iter__(self):
        yield self.w1
        yield self.w2

    def __repr__(self):
        return f"ProjPoint({self.w1!s}, {self.w2!s})"

    def affine(self):
        """``w1 / w2`` (``inf`` for the point (1, 0))."""
        if self.w2 == 0:
            return mpc("inf")
        return self.w1 / self.w2

    def scaled(self, lam):
        """Raw coordinate pair ``lam * (w1, w2)``."""
        return (lam * self.w1, lam * self.w2)

    def to_complex(self):
        return ProjPoint(to_complex(self.w1), to_complex(self.w2))


def chordal_distance(p, q):
    p1, p2 = p
    q1, q2 = q
    num = abs(p1 * q2 - p2 * q1)
    den = gmpy2.sqrt((abs(p1) ** 2 + abs(p2) ** 2) * (abs(q1) ** 2 + abs(q2) ** 2))
    return num / den


class PlaneMap:
    """Pair of equal-degree forms acting on the projective line."""

    __slots__ = ("first", "second")

    def __init__(self, first, second):
        if first.degree != second.degree:
            raise ValueError(f"component degrees differ: {first.degree} vs {second.degree}")
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "second", second)

    def __setattr__(self, name, value):
        raise AttributeError("PlaneMap is immutable")

    @property
    def degree(self):
        return self.first.degree

    def __repr__(self):
        return f"PlaneMap(degree={self.degree})"

    def __iter__(self):
        yield self.first
        yield self.second

    def __add__(self, other):
        return PlaneMap(self.first + other.first, self.second + other.second)

    def __mul__(self, scalar):
        return PlaneMap(self.first * scalar, self.second * scalar)

    __rmul__ = __mul__

    def __call__(self, p):
        return apply(self, p)

    def values(self, p):
        return evaluate(self.first, p), evaluate(self.second, p)

    def to_floating(self):
        return PlaneMap(self.first.to_floating(), self.second.to_floating())

    def resultant(self):
        """Sylvester resultant of the two components (floating)."""
        return resultant(self.first, self.second)


def apply(m, p):
    u, v = m.values(p)
    scale = max(m.first.norm(), m.second.norm())
    if abs(u) <= scale * working_eps() and abs(v) <= scale * working_eps():
        raise DegeneratePointError(f"both components vanish at {p!r}")
    return ProjPoint(u, v)


def resultant(f, g):
    """Determinant of the Sylvester matrix of two forms, at working precision."""
    m, n = f.degree, g.degree
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(f.coeffs) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(g.coeffs) + [0] * (size - n - 1 - i))
    return determinant([[to_complex(c) for c in row] for row in rows])


def determinant(rows):
    """Gaussian elimination with partial pivoting on a square list-of-lists."""
    a = [list(r) for r in rows]
    n = len(a)
    det = mpc(1)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            return mpc(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        pivot = a[col][col]
        det *= pivot
        for r in range(col + 1, n):
            factor = a[r][col] / pivot
            if factor != 0:
                row_r, row_c = a[r], a[col]
                for k in range(col + 1, n):
                    row_r[k] -= factor * row_c[k]
    return det


class LinearAction:
    """2x2 matrix ``[[a, b], [c, d]]`` acting by ``(x1, x2) -> (a x1 + b x2, c x1 + d x2)``."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        if a * d - b * c == 0:
            raise ValueError("singular linear action")
        for name, val in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, val)

    def __setattr__(self, name, value):
        raise AttributeError("LinearAction is immutable")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def from_columns(cls, col1, col2):
        return cls(col1[0], col2[0], col1[1], col2[1])

    def __repr__(self):
        return f"LinearAction({self.a!s}, {self.b!s}, {self.c!s}, {self.d!s})"

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other):
        if isinstance(other, LinearAction):
            return LinearAction(
                self.a * other.a + self.b * other.c,
                self.a * other.b + self.b * other.d,
                self.c * other.a + self.d * other.c,
                self.c * other.b + self.d * other.d,
            )
        return NotImplemented

    def __call__(self, p):
        """Image of a ProjPoint (normalized) or raw pair (raw)."""
        if isinstance(p, ProjPoint):
            return ProjPoint(*self.vec(p.w1, p.w2))
        return self.vec(*p)

    def vec(self, x1, x2):
        return (self.a * x1 + self.b * x2, self.c * x1 + self.d * x2)

    def inverse(self):
        det = self.det
        if is_exact(det):
            det = mpq(det)
        return LinearAction(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def adjugate(self):
        return LinearAction(self.d, -self.b, -self.c, self.a)

    def power(self, n):
        out = LinearAction.identity()
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            out = out @ base
        return out

    def unimodular(self):
        """Scalar multiple with determinant 1 (floating)."""
        s = gmpy2.sqrt(to_complex(self.det))
        return LinearAction(self.a / s, self.b / s, self.c / s, self.d / s)

    def projectively_equal(self, other, tol):
        """Entries agree up to a common scalar, within ``tol`` after scaling to det 1."""
        ea, eb = self.unimodular().entries(), other.unimodular().entries()
        return (max(abs(x - y) for x, y in zip(ea, eb)) <= tol
                or max(abs(x + y) for x, y in zip(ea, eb)) <= tol)


# ---------------------------------------------------------------------------
# root finding


def _poly_and_deriv(coeffs, z):
    """Horner for p and p' with ``coeffs`` in descending powers."""
    p = coeffs[0]
    dp = 0
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _abs_poly(abscoeffs, r):
    acc = abscoeffs[0]
    for c in abscoeffs[1:]:
        acc = acc * r + c
    return acc


def aberth(coeffs, max_iter=500, tol_factor=16):
    """All roots of the polynomial with descending coefficients ``coeffs``.

    Ehrlich-Aberth simultaneous iteration, Gauss-Seidel style.  A root stops
    moving once its backward error ``|p(z)| / sum |c_k| |z|^k`` drops to a few
    units of working precision, which also terminates on multiple roots.
    """
    coeffs = [to_complex(c) for c in coeffs]
    n = len(coeffs) - 1
    if n < 1:
        return []
    if coeffs[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    lead = coeffs[0]
    coeffs = [c / lead for c in coeffs]
    if n == 1:
        return [-coeffs[1]]
    abscoeffs = [abs(c) for c in coeffs]
    eps = working_eps()

    # starting circle from the geometric mean of root moduli, nudged off the axes
    r0 = abs(coeffs[-1]) ** (mpfr(1) / n) if coeffs[-1] != 0 else mpfr(1)
    if r0 == 0:
        r0 = mpfr(1)
    pi2 = 2 * gmpy2.const_pi()
    z = [r0 * gmpy2.exp(mpc(0, pi2 * k / n + mpfr("0.4"))) for k in range(n)]
    done = [False] * n
    berr = [mpfr("inf")] * n
    threshold = tol_factor * n * eps
    for _ in range(max_iter):
        moved = False
        for i in range(n):
            if done[i]:
                continue
            zi = z[i]
            p, dp = _poly_and_deriv(coeffs, zi)
            scale = _abs_poly(abscoeffs, abs(zi))
            berr[i] = abs(p) / scale
            if berr[i] <= threshold:
                done[i] = True
                continue
            s = 0
            for j in range(n):
                if j != i:
                    s += 1 / (zi - z[j])
            if dp == 0:
                corr = p / (1 - p * s) if p * s != 1 else mpc(eps)
            else:
                ratio = p / dp
                corr = ratio / (1 - ratio * s)
            z[i] = zi - corr
            moved = True
            if abs(corr) <= eps * abs(z[i]):
                done[i] = True
        if not moved:
            break
    # a couple of Newton polishing sweeps
    for _ in range(2):
        for i in range(n):
            p, dp = _poly_and_deriv(coeffs, z[i])
            if dp != 0 and p != 0:
                cand = z[i] - p / dp
                pc, _ = _poly_and_deriv(coeffs, cand)
                if abs(pc) < abs(p):
                    z[i] = cand
    for i in range(n):
        p, _ = _poly_and_deriv(coeffs, z[i])
        berr[i] = abs(p) / _abs_poly(abscoeffs, abs(z[i]))
    worst = max(berr)
    if worst > 1000 * threshold:
        raise RootFindingError(
            f"simultaneous iteration did not converge (backward error {worst})",
            best=z, residual=worst)
    return z


def roots(f, max_iter=500):
    """All ``degree`` projective roots of ``f`` with multiplicity.

    Leading zero coefficients yield roots at (1, 0), trailing ones roots at (0, 1).
    """
    d = f.degree
    if d < 1:
        raise ValueError("roots needs a form of degree >= 1")
    coeffs = list(f.coeffs)
    nrm = f.norm()
    if nrm == 0:
        raise ValueError("roots of the zero form are undefined")
    zero_tol = 0 if f.kind == "exact" else 64 * working_eps() * nrm
    lead = 0
    while abs(coeffs[lead]) <= zero_tol:
        lead += 1
    trail = 0
    while abs(coeffs[d - trail]) <= zero_tol:
        trail += 1
    out = [ProjPoint.infinity() for _ in range(lead)]
    out += [ProjPoint(mpc(0), mpc(1)) for _ in range(trail)]
    core = coeffs[lead:d + 1 - trail]
    # form c_k x1^(d-k) x2^k at x2 = 1 is a polynomial in s = x1/x2,
    # descending order matches the stored order
    for s in aberth(core, max_iter=max_iter):
        out.append(ProjPoint(s, mpc(1)))
    return out


def from_roots(points, lead=1):
    """``lead * prod (p2 x1 - p1 x2)`` over the points (inverse of :func:`roots`)."""
    f = BinaryForm.constant(lead)
    for p in points:
        f = multiply(f, BinaryForm((p.w2, -p.w1)))
    return f
