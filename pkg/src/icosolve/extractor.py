"""Root selection: tuned tetrahedral invariants, selectors B_k and the extractor.

For each tetrahedral index k, ``h_k = gamma t_k^2 + theta m_k`` is tuned to
vanish on the twelve critical points labelled k.  The product of the other
four, divided by ``F^4`` and normalized, is 1 on label k and 0 on the rest of
the critical set.  Summing those selectors against the resolvent roots
``rho_k(y) = F(y) u_k(y) / H(y)`` and pulling back through ``S_y`` yields a
form ``L_Z`` of w-degree 48 with ``Gamma_Z = L_Z / F_Z^4``.
"""

from __future__ import annotations

import cmath
import contextlib
import random
from dataclasses import dataclass, replace

from gmpy2 import mpc, mpfr

from .binform import (
    BinaryForm,
    PrecisionContext,
    ProjPoint,
    compose_linear,
    evaluate,
)
from .icosa import canonical_data, tetra_system
from .map31 import LabelingError, candidate_labelings, check_labels, geometric_choice
from .param import (
    GUARD_DIGITS,
    ParamForm,
    SampleConfig,
    fit_circle,
    s_matrix,
    y_for_z,
    z_of,
)


class ExtractionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TunedInvariant:
    k: int
    gamma: object
    theta: object
    form: BinaryForm


@dataclass(frozen=True)
class RootSelector:
    k: int
    htilde: BinaryForm
    normalization: object

    def __call__(self, p, F):
        return self.normalization * evaluate(self.htilde, p) / evaluate(F, p) ** 4


@dataclass(frozen=True)
class Tuning:
    """Five tuned invariants and selectors for one labelling of the critical set."""

    labels: tuple
    tuned: tuple
    selectors: tuple

    def record(self):
        return {
            "labels": list(self.labels),
            "gamma": [[str(t.gamma.real), str(t.gamma.imag)] for t in self.tuned],
            "theta": [[str(t.theta.real), str(t.theta.imag)] for t in self.tuned],
            "normalization": [[str(s.normalization.real), str(s.normalization.imag)]
                              for s in self.selectors],
        }


def _tuned_form(k, theta, ctx):
    sysk = tetra_system(k, ctx)
    with ctx.workprec():
        return sysk.t * sysk.t + sysk.m * theta


def tune_h(k, witness, ctx=PrecisionContext()):
    """h_k vanishing at ``witness`` (and so on its whole T_k-orbit); gamma scaled to 1."""
    sysk = tetra_system(k, ctx)
    with ctx.workprec():
        t = evaluate(sysk.t, witness)
        m = evaluate(sysk.m, witness)
        scale = max(abs(t) ** 2, abs(m))
        if scale == 0:
            raise ExtractionError("t_k and m_k both vanish at the witness")
        if abs(m) <= ctx.eps * scale:
            raise ExtractionError("m_k vanishes at the witness; cannot normalize gamma = 1")
        theta = -(t * t) / m
    return TunedInvariant(k, mpc(1), theta, _tuned_form(k, theta, ctx))


def _htilde(k, tuned):
    out = BinaryForm.constant(mpc(1))
    for t in tuned:
        if t.k != k:
            out = out * t.form
    return out


def build_selector(k, tuned, cs, ctx=PrecisionContext(), tol=None, normalization=None):
    """B_k = N * prod_{l != k} h_l / F^4, normalized to 1 at a label-k point.

    Raises LabelingError unless B_k is 1 on label k and 0 on the other labels.
    """
    data = canonical_data(ctx)
    with ctx.workprec():
        tol = tol if tol is not None else ctx.tol(12)
        htilde = _htilde(k, tuned)
        if normalization is None:
            witness = cs.points[cs.label_class(k)[0]]
            normalization = evaluate(data.F, witness) ** 4 / evaluate(htilde, witness)
        sel = RootSelector(k, htilde, normalization)
        for i, p in enumerate(cs.points):
            expect = 1 if cs.labels[i] == k else 0
            val = sel(p, data.F)
            if abs(val - expect) > tol:
                raise LabelingError(
                    f"B_{k} = {complex(val):.3e} at critical point {i} (label "
                    f"{cs.labels[i]}), expected {expect}")
    return sel


def tune_all(cs, ctx=PrecisionContext()):
    """Tune on label 5 and share theta and N across k.

    h_k = h_5 o P^k and F o P = F, so theta and N are the same for every k;
    sharing them keeps Lambda exactly invariant on each fibre instead of
    only to the accuracy of five separate witnesses.
    """
    if cs.labels is None:
        raise LabelingError("critical set carries no labels")
    t5 = tune_h(5, cs.points[cs.label_class(5)[0]], ctx)
    tuned = tuple(TunedInvariant(k, t5.gamma, t5.theta, _tuned_form(k, t5.theta, ctx))
                  for k in range(1, 5)) + (t5,)
    for k in range(1, 5):
        # the shared theta must also annihilate label k
        alone = tune_h(k, cs.points[cs.label_class(k)[0]], ctx)
        with ctx.workprec():
            if abs(alone.theta - t5.theta) > ctx.tol(12) * abs(t5.theta):
                raise LabelingError(f"label {k} needs theta {complex(alone.theta)}, "
                                    f"not the shared {complex(t5.theta)}")
    s5 = build_selector(5, tuned, cs, ctx)
    selectors = tuple(build_selector(k, tuned, cs, ctx, normalization=s5.normalization)
                      for k in range(1, 5)) + (s5,)
    return Tuning(tuple(cs.labels), tuned, selectors)


def lift_tuning(tuning, ctx):
    """The same theta and N with the invariant forms rebuilt at ``ctx`` precision."""
    with ctx.workprec():
        tuned = tuple(TunedInvariant(t.k, t.gamma, t.theta, _tuned_form(t.k, t.theta, ctx))
                      for t in tuning.tuned)
        selectors = tuple(RootSelector(t.k, _htilde(t.k, tuned), s.normalization)
                          for t, s in zip(tuned, tuning.selectors))
    return Tuning(tuning.labels, tuned, selectors)


def lambda_form(tuning, y, ctx=PrecisionContext(), perm=None):
    """``sum_k N_k htilde_k(S_y w) u_k(y) / (F(y)^123 H(y))`` as a form in w.

    ``perm`` pairs selector ``perm[k]`` with u_k instead of selector k; it is
    only used to build negative controls.
    """
    data = canonical_data(ctx)
    y = ProjPoint(*y) if not isinstance(y, ProjPoint) else y
    with ctx.workprec():
        y = y.to_complex()
        S = s_matrix(y, ctx)
        pulled = [compose_linear(t.form, S) for t in tuning.tuned]
        total = None
        for k in range(5):
            j = perm[k] if perm else k
            prod = BinaryForm.constant(tuning.selectors[j].normalization)
            for ell in range(5):
                if ell != j:
                    prod = prod * pulled[ell]
            term = prod * evaluate(tetra_system(k + 1, ctx).u, y)
            total = term if total is None else total + term
        denom = evaluate(data.F, y) ** 123 * evaluate(data.H, y)
        return total / denom


def gamma_direct(tuning, y, w, FZ_form, ctx=PrecisionContext(), perm=None):
    """Extractor evaluated through a concrete y rather than the fitted L_Z."""
    with ctx.workprec():
        L = lambda_form(tuning, y, ctx, perm)
        return evaluate(L, w) / evaluate(FZ_form, w) ** 4


def resolvent_value(Z, v):
    return v**5 - 40 * Z * v * v - 5 * Z * v - Z


def rho_values(y, ctx=PrecisionContext()):
    """The five resolvent roots F(y) u_k(y) / H(y), k = 1..5."""
    data = canonical_data(ctx)
    with ctx.workprec():
        y = y if isinstance(y, ProjPoint) else ProjPoint(*y)
        Fy, Hy = data.F(y), data.H(y)
        return [Fy * tetra_system(k, ctx).u(y) / Hy for k in range(1, 6)]


# ---------------------------------------------------------------------------
# Z-parametrized extractor


@dataclass(frozen=True)
class ExtractorData:
    L: ParamForm
    F: ParamForm
    tuning: Tuning = None
    work: PrecisionContext = None

    def _prec(self):
        return self.work.workprec() if self.work else contextlib.nullcontext()

    def at(self, Z0):
        """Gamma at the fixed parameter Z0, as a function of w.

        The expanded degree-48 form loses digits to cancellation when S_y is
        poorly scaled, so evaluation runs at ``work`` precision when given.
        """
        with self._prec():
            L = self.L.instantiate(Z0)
            F = self.F.instantiate(Z0)
            scale = max(abs(c) for c in F.coeffs)
            F = F * (1 / scale)
            L = L * (1 / scale**4)

        def gamma(w):
            with self._prec():
                fw = evaluate(F, w)
                lw = evaluate(L, w)
                if abs(fw) == 0:
                    raise ExtractionError("F_Z vanishes at w; extraction undefined")
                return lw / fw**4
        return gamma


def extract_root(ex, Z0, w, ctx=PrecisionContext()):
    with ctx.workprec():
        F = ex.F.instantiate(Z0)
        fw = evaluate(F, w)
        norm = max(abs(c) for c in F.coeffs)
        if abs(fw) <= ctx.eps * norm:
            raise ExtractionError("F_Z(w) vanishes; extraction undefined at this point")
        return ex.at(Z0)(w)


EXTRA_DIGITS = GUARD_DIGITS


def derive_L(tuning, cfg=SampleConfig(rule="circle"), ctx=PrecisionContext(),
             extra_digits=EXTRA_DIGITS):
    """Fit L_Z (Laurent in Z) from samples on a circle of Z values.

    The coefficients of L_Z span about forty orders of magnitude on |Z| = 1,
    so samples are taken with ``extra_digits`` more digits than ``ctx``.
    Holdouts at |Z| = 0.01, |Z| = 100 and a few random radii must agree to
    ``ctx.tol(20)``.
    """
    work = PrecisionContext(ctx.digits + extra_digits)
    tuning = lift_tuning(tuning, work)
    cfg = replace(cfg.scaled(48), rule="circle", fit_tol=float(ctx.tol(20)))

    def value_at(z, hint):
        y = y_for_z(z, work, start=hint)
        return list(lambda_form(tuning, y, work).coeffs), y

    rng = random.Random(cfg.seed)
    holdouts = [0.01 * cmath.exp(0.7j), 100 * cmath.exp(-2.1j)]
    for _ in range(cfg.holdout):
        r = cfg.radius * 10 ** rng.uniform(-1.5, 1.5)
        holdouts.append(cmath.rect(r, rng.uniform(0, 2 * cmath.pi)))
    return fit_circle("L_Z", 48, value_at, cfg, work, holdout_z=holdouts)


def invariance_residual(tuning, y, ctx=PrecisionContext(), perm=None, elements=None):
    """Relative change of Lambda(y, .) when y moves within its fibre."""
    data = canonical_data(ctx)
    elements = elements or (data.P, data.W, data.R)
    with ctx.workprec():
        L = lambda_form(tuning, y, ctx, perm)
        nrm = L.norm()
        worst = mpfr(0)
        for A in elements:
            L2 = lambda_form(tuning, A(y), ctx, perm)
            worst = max(worst, max(abs(a - b) for a, b in zip(L.coeffs, L2.coeffs)) / nrm)
    return worst


def labeling_check(cs, labels, FZ, ctx=PrecisionContext(), n_params=3, seed=7,
                   perm=None):
    """End-to-end residual for one labelling at a few random parameters.

    For each parameter a point y is drawn and Z = z_of(y).  Gamma is evaluated
    through a second representative A y of the fibre at the points S_y^-1 of
    a critical cycle, and Lambda is compared across the fibre.  Returns the
    worst of |R_Z(Gamma)| and the relative invariance defect.
    """
    data = canonical_data(ctx)
    rng = random.Random(seed)
    cs = replace(cs, labels=labels)
    check_labels(cs, labels, ctx)
    tuning = tune_all(cs, ctx)
    worst = mpfr(0)
    with ctx.workprec():
        for _ in range(n_params):
            y = ProjPoint(mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)), mpc(1))
            Z = z_of(y, ctx)
            A = data.group[rng.randrange(1, len(data.group))]
            Sinv = s_matrix(y, ctx).inverse()
            FZ0 = FZ.instantiate(Z)
            cyc = cs.cycles[rng.randrange(len(cs.cycles))]
            for i in cyc:
                v = gamma_direct(tuning, A(y), Sinv(cs.points[i]), FZ0, ctx, perm)
                worst = max(worst, abs(resolvent_value(Z, v)))
            worst = max(worst, invariance_residual(tuning, y, ctx, perm))
    return worst, tuning


def resolve_labeling(cs, FZ, ctx=PrecisionContext(), threshold=mpfr("1e-20")):
    """Try the five candidate labelings; return the chosen one plus all residuals.

    Prefers the geometric candidate (critical points nearest the q_5 roots)
    when several pass.
    """
    cands = candidate_labelings(cs, ctx)
    results = []
    for labels in cands:
        try:
            res, _ = labeling_check(cs, labels, FZ, ctx)
        except (LabelingError, ExtractionError):
            res = mpfr("inf")
        results.append(res)
    passing = [i for i, r in enumerate(results) if r < threshold]
    if not passing:
        raise LabelingError(f"no candidate labelling passes (residuals {results})")
    geo = geometric_choice(cs, ctx)
    choice = geo if geo in passing else passing[0]
    return replace(cs, labels=cands[choice]), results
