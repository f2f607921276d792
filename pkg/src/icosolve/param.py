"""Z-parametrized forms obtained through the coordinate change ``x = S_y w``.

Each coefficient of ``F(S_y w) / F(y)^31`` (and of the analogous H, phi, eta
pullbacks) is invariant under the group acting on y, so it is a Laurent
polynomial in ``Z = F(y)^5 / H(y)^3``.  We never manipulate that polynomial
symbolically: y is sampled, the w-coefficients are computed directly, and
each coefficient is interpolated in Z, exactly for rational samples or by a
discrete Fourier fit on a circle in the Z-plane for floating ones.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpfr, mpq

from .binform import (
    BinaryForm,
    LinearAction,
    PlaneMap,
    PrecisionContext,
    ProjPoint,
    _poly_and_deriv,
    chordal_distance,
    compose_linear,
    evaluate,
    is_exact,
    roots,
    to_complex,
    working_eps,
)
from .icosa import canonical_data, special_orbits

FORMAT_VERSION = 2
# floating forms are fitted and stored with this many digits beyond the request
GUARD_DIGITS = 40

TARGETS = {
    # name: (source, component, normalizer, w-degree)
    "F": ("F", None, "F", 12),
    "H": ("H", None, "H", 20),
    "phi1": ("phi", 0, "F", 11),
    "phi2": ("phi", 1, "F", 11),
    "eta1": ("eta", 0, "H", 19),
    "eta2": ("eta", 1, "H", 19),
}


class DegenerateParameterError(ValueError):
    pass


class FitError(RuntimeError):
    pass


class CacheError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# coordinate change


def _pair(y):
    return (y.w1, y.w2) if isinstance(y, ProjPoint) else tuple(y)


def s_matrix(y, ctx=PrecisionContext(), check=True):
    """Columns ``F(y) eta(y)`` and ``H(y) phi(y)``.

    This column order reproduces the published expansion of F_Z term by term
    (the opposite order merely exchanges w1 and w2).
    """
    data = canonical_data(ctx)
    y = _pair(y)
    with ctx.workprec():
        Fy, Hy = evaluate(data.F, y), evaluate(data.H, y)
        if check:
            p = ProjPoint(*y)
            if Fy == 0 or abs(data.F(p)) <= 100 * ctx.eps:
                raise DegenerateParameterError("F(y) = 0: y is a vertex")
            if Hy == 0 or abs(data.H(p)) <= 1000 * ctx.eps:
                raise DegenerateParameterError("H(y) = 0: y is a face-center")
        col1 = (Fy * evaluate(data.eta.first, y), Fy * evaluate(data.eta.second, y))
        col2 = (Hy * evaluate(data.phi.first, y), Hy * evaluate(data.phi.second, y))
        try:
            S = LinearAction.from_columns(col1, col2)
        except ValueError:
            raise DegenerateParameterError(f"S_y is singular at y = {y}") from None
        if check:
            norm = max(abs(e) for e in S.entries())
            if abs(S.det) <= ctx.eps * norm**2:
                raise DegenerateParameterError(f"S_y is numerically singular at y = {y}")
    return S


def z_of(y, ctx=PrecisionContext()):
    data = canonical_data(ctx)
    y = _pair(y)
    with ctx.workprec():
        Fy, Hy = evaluate(data.F, y), evaluate(data.H, y)
        if Hy == 0 or abs(data.H(ProjPoint(*y))) <= 1000 * ctx.eps:
            raise DegenerateParameterError("H(y) = 0: y is a face-center")
        if is_exact(Fy) and is_exact(Hy):
            return mpq(Fy) ** 5 / mpq(Hy) ** 3
        return Fy**5 / Hy**3


def pullback(name, y, ctx=PrecisionContext()):
    """Normalized w-form of a target at parameter y (list of coefficients).

    For the invariants this is ``F(S_y w) / F(y)^31`` (resp. H).  For a map
    component the pullback is ``adj(S_y) phi(S_y w) / F(y)^31``, which is the
    cross operator applied to F_Z.
    """
    source, comp, norm, _ = TARGETS[name]
    data = canonical_data(ctx)
    y = _pair(y)
    S = s_matrix(y, ctx, check=False)
    with ctx.workprec():
        N = evaluate(data.F if norm == "F" else data.H, y)
        N31 = mpq(N) ** 31 if is_exact(N) else N**31
        if comp is None:
            form = compose_linear(getattr(data, source), S)
        else:
            m = getattr(data, source)
            f1, f2 = compose_linear(m.first, S), compose_linear(m.second, S)
            adj = S.adjugate()
            row = (adj.a, adj.b) if comp == 0 else (adj.c, adj.d)
            form = f1 * row[0] + f2 * row[1]
        return [c / N31 for c in form.coeffs]


# ---------------------------------------------------------------------------
# Z-parametrized forms


def _horner_asc(cs, z):
    acc = cs[-1]
    for c in reversed(cs[:-1]):
        acc = acc * z + c
    return acc


@dataclass(frozen=True)
class ParamForm:
    """``sum_k Z^(-zshift) N_k(Z) w1^(d-k) w2^k`` with numerators ascending in Z."""

    name: str
    wdegree: int
    zshift: int
    coeffs: tuple

    @property
    def kind(self):
        return "exact" if all(is_exact(c) for row in self.coeffs for c in row) else "floating"

    @property
    def numerator_degree(self):
        return max(len(row) for row in self.coeffs) - 1

    def coefficient(self, k, Z):
        row = self.coeffs[k]
        if not row:
            return 0
        return _horner_asc(list(row), Z) / Z**self.zshift

    def instantiate(self, Z):
        if is_exact(Z) and self.kind == "exact":
            Z = mpq(Z)
        return BinaryForm(self.coefficient(k, Z) for k in range(self.wdegree + 1))

    def d1(self, name=None):
        d = self.wdegree
        rows = [tuple((d - k) * c for c in self.coeffs[k]) for k in range(d)]
        return ParamForm(name or f"d1({self.name})", d - 1, self.zshift, tuple(rows))

    def d2(self, name=None):
        d = self.wdegree
        rows = [tuple(k * c for c in self.coeffs[k]) for k in range(1, d + 1)]
        return ParamForm(name or f"d2({self.name})", d - 1, self.zshift, tuple(rows))

    def __neg__(self):
        return ParamForm(self.name, self.wdegree, self.zshift,
                         tuple(tuple(-c for c in row) for row in self.coeffs))

    def equals(self, other):
        return (self.wdegree == other.wdegree and self.zshift == other.zshift
                and all(tuple(a) == tuple(b) for a, b in zip(self.coeffs, other.coeffs)))


@dataclass(frozen=True)
class ParamMap:
    first: ParamForm
    second: ParamForm

    def instantiate(self, Z):
        return PlaneMap(self.first.instantiate(Z), self.second.instantiate(Z))


def cross_param(pf, name):
    return ParamMap(-pf.d2(f"{name}1"), pf.d1(f"{name}2"))


# Closed-form numerators (times Z^6) of the w1^(12-k) w2^k coefficients of
# F_Z, k = 0..12, in the nested form they are usually written in.
FZ_REFERENCE = (
    lambda Z: 4096000000000000 * Z**3 * (16 * Z * (432 * Z * (432 * Z - 95) - 437) + 57),
    lambda Z: -204800000000000 * Z**2 * (132 * Z * (864 * Z * (216 * Z + 5) - 47) - 1),
    lambda Z: -112640000000000 * Z**2 * (8 * Z * (864 * Z * (4104 * Z + 245) - 3443) - 11),
    lambda Z: -28160000000000 * Z**2 * (32 * Z * (216 * Z * (3456 * Z + 833) - 4961) - 121),
    lambda Z: -4224000000000 * Z**2 * (864 * Z * (20952 * Z - 1147) - 1331),
    lambda Z: -337920000000 * Z**2 * (432 * Z * (131328 * Z - 18053) - 18287),
    lambda Z: -704000000 * Z * (48 * Z * (432 * Z * (138240 * Z - 76183) - 140479) + 1),
    lambda Z: 211200000 * Z * (432 * Z * (3314304 * Z + 28501) - 11),
    lambda Z: 26400000 * Z * (432 * Z * (4202496 * Z + 89177) - 121),
    lambda Z: 1760000 * Z * (13824 * Z * (138240 * Z + 11477) - 1331),
    lambda Z: 8553600 * Z * (6027264 * Z - 113),
    lambda Z: 69120 * Z * (84049920 * Z - 3077) - 20,
    lambda Z: 1769472 * Z * (172800 * Z - 11) - 11,
)


def compare_fz_reference(FZ):
    """Indices of F_Z rows that differ from FZ_REFERENCE (empty when all match).

    Both sides are polynomials of degree <= 6 in Z once multiplied by Z^6, so
    agreement at the integers 1..12 is an exact identity.
    """
    if FZ.kind != "exact" or FZ.wdegree != 12:
        return list(range(13))
    bad = []
    for k, ref in enumerate(FZ_REFERENCE):
        row = list(FZ.coeffs[k])
        for z in range(1, 13):
            ours = _horner_asc(row, mpq(z)) * mpq(z) ** (6 - FZ.zshift) if row else 0
            if ours != ref(z):
                bad.append(k)
                break
    return bad

# ---------------------------------------------------------------------------
# sampling and fitting


@dataclass(frozen=True)
class SampleConfig:
    """How to sample y and the Laurent bounds to start from.

    ``rule`` is ``"rational"`` (integer y, exact fit) or ``"circle"`` (Z on a
    circle of the given radius, discrete Fourier fit).
    """

    rule: str = "rational"
    zshift: int = 6
    numerator_degree: int = 10
    holdout: int = 4
    samples: int = 0
    fit_tol: float = 0.0
    radius: float = 1.0
    seed: int = 20240531
    escalations: int = 2

    def scaled(self, wdegree):
        """Bounds proportional to the w-degree, relative to degree 12."""
        f = wdegree / 12
        return SampleConfig(self.rule, int(math.ceil(self.zshift * f)),
                            int(math.ceil(self.numerator_degree * f)), self.holdout,
                            self.samples, self.fit_tol, self.radius, self.seed,
                            self.escalations)

    @property
    def unknowns(self):
        return self.zshift + self.numerator_degree + 1

    def __post_init__(self):
        if self.samples and self.samples < self.numerator_degree + self.holdout + 1:
            raise ValueError("sample count must exceed degree bound plus holdouts")


def rational_samples(seed=SampleConfig.seed, ctx=PrecisionContext()):
    """Endless stream of integer points y with distinct Z away from special orbits."""
    data = canonical_data(ctx)
    orbits = special_orbits(ctx)
    special = orbits.vertices12 + orbits.faces20 + orbits.edges30
    rng = random.Random(seed)
    seen = set()
    bound = 1
    while True:
        shell = [(a, b) for a in range(-bound, bound + 1) for b in range(1, bound + 1)
                 if max(abs(a), b) == bound and math.gcd(a, b) == 1]
        rng.shuffle(shell)
        for y in shell:
            if evaluate(data.F, y) == 0:
                continue
            with ctx.workprec():
                p = ProjPoint(mpc(y[0]), mpc(y[1]))
                if min(chordal_distance(p, q) for q in special) < 1e-3:
                    continue
            z = z_of(y, ctx)
            if z in seen:
                continue
            seen.add(z)
            yield y, z
        bound += 1


def _newton_interpolate(xs, ys):
    """Exact monomial coefficients (ascending) of the interpolating polynomial."""
    n = len(xs)
    dd = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j])
    coeffs = [mpq(0)] * n
    for i in range(n - 1, -1, -1):
        # coeffs <- coeffs * (x - xs[i]) + dd[i]
        nxt = [mpq(0)] * n
        for k in range(n - 1):
            nxt[k + 1] += coeffs[k]
        for k in range(n):
            nxt[k] -= coeffs[k] * xs[i]
        nxt[0] += dd[i]
        coeffs = nxt
    return coeffs


def _trim(name, wdegree, laurent):
    """Laurent rows ``{power: coeff}`` to a ParamForm with minimal shift."""
    nonzero = [p for row in laurent for p, c in row.items() if c != 0]
    if not nonzero:
        return ParamForm(name, wdegree, 0, tuple(() for _ in laurent))
    shift = max(0, -min(nonzero))
    rows = []
    for row in laurent:
        top = max((p for p, c in row.items() if c != 0), default=None)
        if top is None:
            rows.append(())
            continue
        rows.append(tuple(row.get(p, 0) for p in range(-shift, top + 1)))
    return ParamForm(name, wdegree, shift, tuple(rows))


def _intify(c):
    return int(c) if is_exact(c) and mpq(c).denominator == 1 else c


def fit_exact(name, wdegree, sampler, cfg):
    """Exact Laurent fit over rational samples; ``sampler`` yields (y, Z, values)."""
    samples = []
    m, n = cfg.zshift, cfg.numerator_degree
    for attempt in range(cfg.escalations + 1):
        need = m + n + 1 + cfg.holdout
        while len(samples) < need:
            samples.append(next(sampler))
        fit, hold = samples[:m + n + 1], samples[m + n + 1:need]
        zs = [z for _, z, _ in fit]
        rows, ok = [], True
        for k in range(wdegree + 1):
            ys = [vals[k] * z**m for _, z, vals in fit]
            poly = _newton_interpolate(zs, ys)
            laurent = {p - m: c for p, c in enumerate(poly)}
            for _, z, vals in hold:
                if sum(c * z**p for p, c in laurent.items()) != vals[k]:
                    ok = False
                    break
            if not ok:
                break
            rows.append(laurent)
        if ok:
            pf = _trim(name, wdegree, rows)
            return ParamForm(pf.name, pf.wdegree, pf.zshift,
                             tuple(tuple(_intify(c) for c in row) for row in pf.coeffs))
        m, n = 2 * m, 2 * n
    raise FitError(f"{name}: exact fit failed after {cfg.escalations} escalations "
                   f"(last bounds shift={m // 2}, degree={n // 2})")


def y_for_z(Z, ctx=PrecisionContext(), start=None, max_steps=60):
    """A point y with ``z_of(y) = Z``: Newton from ``start`` or a full root solve."""
    data = canonical_data(ctx)
    with ctx.workprec():
        Z = to_complex(Z)
        F5, H3 = data.F**5, data.H**3
        level = list((F5 - H3 * Z).coeffs)
        if start is not None:
            s = to_complex(start.affine() if isinstance(start, ProjPoint) else start)
            for _ in range(max_steps):
                p, dp = _poly_and_deriv(level, s)
                if dp == 0:
                    break
                ds = p / dp
                s -= ds
                if abs(ds) <= 64 * working_eps() * max(1, abs(s)):
                    y = ProjPoint(s, mpc(1))
                    if abs(z_of(y, ctx) / Z - 1) < ctx.tol(0):
                        return y
                    break
        cands = [p for p in roots(F5 - H3 * Z) if p.w2 == 1]
        return min(cands, key=lambda p: abs(p.w1 - mpc("0.37+0.21j")))


def circle_nodes(N, radius, ctx):
    with ctx.workprec():
        r = mpfr(radius)
        tau = 2 * gmpy2.const_pi()
        return [r * gmpy2.exp(mpc(0, tau * j / N)) for j in range(N)]


def fit_circle(name, wdegree, value_at, cfg, ctx=PrecisionContext(), holdout_z=None):
    """Floating Laurent fit from values on a circle of Z values.

    ``value_at(Z, y_hint)`` returns ``(values, y)``.  Coefficients above the
    bound must alias to (numerically) zero and holdouts must agree to
    ``cfg.fit_tol`` relative error.
    """
    m, n = cfg.zshift, cfg.numerator_degree
    with ctx.workprec():
        tol = mpfr(cfg.fit_tol) if cfg.fit_tol else ctx.tol(20)
        for attempt in range(cfg.escalations + 1):
            N = m + n + 1 + 4
            nodes = circle_nodes(N, cfg.radius, ctx)
            vals, hint = [], None
            for z in nodes:
                v, hint = value_at(z, hint)
                vals.append([c * z**m for c in v])
            rows, worst_alias = [], mpfr(0)
            r = mpfr(cfg.radius)
            unity = [x / r for x in nodes]
            for k in range(wdegree + 1):
                col = [v[k] for v in vals]
                scale = max(abs(c) for c in col) or mpfr(1)
                laurent = {}
                for p in range(N):
                    acc = mpc(0)
                    for j, c in enumerate(col):
                        acc += c / unity[(j * p) % N]
                    acc /= N
                    if p <= m + n:
                        # below the rounding floor of the transform: not a coefficient
                        if abs(acc) <= 16 * N * ctx.eps * scale:
                            acc = mpc(0)
                        laurent[p - m] = acc / r**p
                    else:
                        worst_alias = max(worst_alias, abs(acc) / scale)
                rows.append(laurent)
            ok = worst_alias <= tol
            if ok and holdout_z:
                pf = _trim(name, wdegree, rows)
                hint = None
                for z in holdout_z:
                    v, hint = value_at(to_complex(z), hint)
                    inst = pf.instantiate(to_complex(z))
                    scale = max(abs(c) for c in v)
                    err = max(abs(a - b) for a, b in zip(inst.coeffs, v)) / scale
                    if err > tol:
                        ok = False
                        break
            if ok:
                return _trim(name, wdegree, rows)
            m, n = 2 * m, 2 * n
    raise FitError(f"{name}: floating fit failed after {cfg.escalations} escalations")


def derive_paramform(target, cfg=SampleConfig(), ctx=PrecisionContext()):
    """Fit one of the targets in ``TARGETS`` as a ParamForm in Z."""
    _, _, _, wdeg = TARGETS[target]
    cfg = cfg.scaled(wdeg)
    if cfg.rule == "rational":
        def sampler():
            for y, z in rational_samples(cfg.seed, ctx):
                yield y, z, pullback(target, y, ctx)
        return fit_exact(target + "_Z", wdeg, sampler(), cfg)

    def value_at(z, hint):
        y = y_for_z(z, ctx, start=hint)
        return pullback(target, y, ctx), y
    rng = random.Random(cfg.seed)
    holdouts = [cfg.radius * 10 ** rng.uniform(-1, 1) * complex(math.cos(a), math.sin(a))
                for a in (rng.uniform(0, 2 * math.pi) for _ in range(cfg.holdout))]
    return fit_circle(target + "_Z", wdeg, value_at, cfg, ctx, holdout_z=holdouts)


@dataclass
class ParamData:
    """The derived F_Z, H_Z and the equivariants obtained from them."""

    F: ParamForm
    H: ParamForm
    phi: ParamMap
    eta: ParamMap
    extra: dict = field(default_factory=dict)

    def forms(self):
        return [self.F, self.H, self.phi.first, self.phi.second,
                self.eta.first, self.eta.second]


def derive_all(cfg=SampleConfig(), ctx=PrecisionContext(), check_maps=True):
    """F_Z and H_Z by fitting; phi_Z and eta_Z by the cross operator.

    With ``check_maps`` the pullbacks of phi and eta are fitted too and must
    coincide exactly with the cross-operator versions.
    """
    FZ = derive_paramform("F", cfg, ctx)
    HZ = derive_paramform("H", cfg, ctx)
    phi = cross_param(FZ, "phi_Z")
    eta = cross_param(HZ, "eta_Z")
    if check_maps:
        for tname, pf in (("phi1", phi.first), ("phi2", phi.second),
                          ("eta1", eta.first), ("eta2", eta.second)):
            fitted = derive_paramform(tname, cfg, ctx)
            if not fitted.equals(pf):
                raise FitError(f"fitted {tname} pullback differs from the cross operator")
    return ParamData(FZ, HZ, phi, eta)


def g_param(params, pd):
    """``Z0 -> alpha H_Z phi_Z + beta F_Z eta_Z`` as a PlaneMap at Z0."""
    alpha, beta = to_complex(params.alpha), to_complex(params.beta)

    def at(Z0):
        F = pd.F.instantiate(Z0)
        H = pd.H.instantiate(Z0)
        phi = pd.phi.instantiate(Z0)
        eta = pd.eta.instantiate(Z0)
        g = (H * phi) * alpha + (F * eta) * beta
        scale = max(g.first.norm(), g.second.norm())
        return g * (1 / scale)
    return at


# ---------------------------------------------------------------------------
# cache


def _enc(c):
    if is_exact(c):
        q = mpq(c)
        return f"{q.numerator}/{q.denominator}"
    c = to_complex(c)
    # str() of an mpfr round-trips when parsed back at the same precision
    return [str(c.real), str(c.imag), c.precision[0]]


def _dec(c):
    if isinstance(c, str):
        num, den = c.split("/")
        q = mpq(int(num), int(den))
        return int(q) if q.denominator == 1 else q
    return mpc(mpfr(c[0], c[2]), mpfr(c[1], c[2]))


def _form_entry(pf):
    return {"name": pf.name, "wdegree": pf.wdegree, "zshift": pf.zshift,
            "coeffs": [[_enc(c) for c in row] for row in pf.coeffs]}


def _form_from(entry):
    return ParamForm(entry["name"], entry["wdegree"], entry["zshift"],
                     tuple(tuple(_dec(c) for c in row) for row in entry["coeffs"]))


def _checksum(doc):
    body = {k: v for k, v in doc.items() if k != "checksum"}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def cache_store(forms, path, ctx=PrecisionContext(), extra=None):
    """Write ParamForms (plus an optional JSON-able ``extra`` record) to ``path``."""
    with ctx.workprec():
        kinds = {pf.kind for pf in forms}
        doc = {
            "format_version": FORMAT_VERSION,
            "precision_digits": ctx.digits,
            "scalar_kind": kinds.pop() if len(kinds) == 1 else "mixed",
            "forms": [_form_entry(pf) for pf in forms],
        }
        if extra is not None:
            doc["extra"] = extra
    doc["checksum"] = _checksum(doc)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
    return path


def cache_load(path, ctx=PrecisionContext()):
    """Forms keyed by name, and the ``extra`` record; validates version/precision/checksum."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CacheError(f"cannot read cache {path}: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise CacheError(f"cache format {doc.get('format_version')} != {FORMAT_VERSION}; "
                         "re-run `derive`")
    if doc.get("checksum") != _checksum(doc):
        raise CacheError("cache integrity check failed (checksum mismatch)")
    if doc.get("precision_digits") != ctx.digits:
        raise CacheError(
            f"cache derived at {doc.get('precision_digits')} digits but {ctx.digits} "
            f"requested; re-run `derive --digits {ctx.digits}`")
    with PrecisionContext(ctx.digits + GUARD_DIGITS).workprec():
        forms = {e["name"]: _form_from(e) for e in doc["forms"]}
    return forms, doc.get("extra", {})


@lru_cache(maxsize=None)
def default_paramdata(ctx=PrecisionContext()):
    return derive_all(SampleConfig(), ctx, check_maps=False)
