import pytest
from dataclasses import replace
from gmpy2 import mpc, mpfr

from icosolve.binform import chordal_distance, jacobian_form
from icosolve.icosa import canonical_data, nearest, special_orbits
from icosolve.map31 import (
    PAPER_PARAMETERS,
    CriticalSetError,
    LabelingError,
    MapParameters,
    build_g,
    calibrate,
    candidate_labelings,
    check_labels,
    critical_set,
    critical_value,
    geometric_choice,
    periodicity_residual,
    tetra_orbits,
)

# printed expansion of g at alpha = 19: (index, value) pairs, first component
# is -19 x (x^30 - c5 x^25 y^5 - ...), second is s (x^30 y - ...)
_C1 = {0: 1, 5: -(487.5215055+65.4865970j), 10: -(10234.856630-436.577313j),
       15: -(1781.388882-3383.474177j), 20: -(9016.011606+1878.431334j),
       25: 618.7817389-183.8220266j, 30: 0.3951141318+1.1488876663j}
_S2 = -7.50716850-21.82886566j
_C2 = {1: 1, 6: -(22.5591063-530.8337230j), 11: -(3875.498123-6514.777510j),
       16: -(2156.676586+2292.236531j), 21: -(2399.877301-8083.149873j),
       26: 181.4721179-361.9320839j, 31: 0.2676819741-0.7783485674j}


def _printed(ctx):
    with ctx.workprec():
        first = {k: -19 * mpc(v) for k, v in _C1.items()}
        second = {k: mpc(_S2) * mpc(v) for k, v in _C2.items()}
    return first, second


def test_printed_expansion_of_g(ref, ctx):
    params, g, _ = ref
    first, second = _printed(ctx)
    with ctx.workprec():
        for comp, want in ((g.first, first), (g.second, second)):
            assert comp.degree == 31
            for k in range(32):
                if k in want:
                    assert abs(comp[k] - want[k]) < mpfr("2e-8") * abs(want[k]) + mpfr("1e-7")
                else:
                    assert abs(comp[k]) < ctx.tol(20)


def test_calibration_reproduces_printed_beta(ref):
    params, _, _ = ref
    assert params.alpha == 19
    assert params.distance(PAPER_PARAMETERS) < 1e-8


def test_calibration_from_perturbed_seed(ref, ctx):
    params, _, _ = ref
    seed = MapParameters(mpc(19), PAPER_PARAMETERS.beta * (1 + mpfr("1e-3")))
    again = calibrate(seed, ctx)
    with ctx.workprec():
        assert again.distance(params) < ctx.tol(15)


def test_critical_value_decomposition(ref, ctx):
    _, g, _ = ref
    zc, res = critical_value(g, ctx)
    assert res < ctx.tol(15)
    assert jacobian_form(g).degree == 60


def test_critical_set_shape(ref, ctx):
    _, g, cs = ref
    assert len(cs) == 60 and len(cs.cycles) == 12
    assert all(len(c) == 5 for c in cs.cycles)
    assert periodicity_residual(g, cs.points, ctx) < mpfr("1e-40")
    with ctx.workprec():
        for i, p in enumerate(cs.points):
            q = p
            for _ in range(5):
                q = g(q)
            assert chordal_distance(q, p) < mpfr("1e-40")
            assert cs.successor[i] == nearest(cs.points, g(p))[0]


def test_critical_set_is_a_group_orbit(ref, ctx):
    _, _, cs = ref
    data = canonical_data(ctx)
    with ctx.workprec():
        orbit = {nearest(cs.points, A(cs.points[0]))[0] for A in data.group}
        dists = [nearest(cs.points, A(cs.points[0]))[1] for A in data.group]
    assert orbit == set(range(60))
    assert max(dists) < ctx.tol(20)


def test_uncalibrated_map_is_rejected(ctx):
    g = build_g(MapParameters(mpc(19), mpc(-10)), ctx)
    with pytest.raises(CriticalSetError):
        critical_set(g, ctx)


def test_beta_zero_is_critical_at_face_centers(ctx):
    # 19 H phi: the Jacobian vanishes where phi is critical, at the roots of H
    g = build_g(MapParameters(mpc(19), mpc(0)), ctx)
    with ctx.workprec():
        J = jacobian_form(g)
        for f in special_orbits(ctx).faces20:
            assert abs(J(f)) < ctx.tol(10) * J.norm()


def test_labels(ref, ctx):
    _, _, cs = ref
    assert sorted(cs.labels) == sorted(list(range(1, 6)) * 12)
    for cyc in cs.cycles:
        assert sorted(cs.labels[i] for i in cyc) == [1, 2, 3, 4, 5]
    orbits = tetra_orbits(cs, ctx)
    assert len(orbits) == 5 and all(len(o) == 12 for o in orbits)
    assert set(cs.label_class(5)) == set(orbits[geometric_choice(cs, ctx)])


def test_every_candidate_labeling_is_consistent(ref, ctx):
    _, _, cs = ref
    cands = candidate_labelings(cs, ctx)
    assert len(set(cands)) == 5
    for labels in cands:
        check_labels(cs, labels, ctx)


def test_broken_labeling_is_rejected(ref, ctx):
    _, _, cs = ref
    labels = list(cs.labels)
    i = labels.index(1)
    j = labels.index(2)
    labels[i], labels[j] = 2, 1
    with pytest.raises(LabelingError):
        check_labels(cs, tuple(labels), ctx)
    with pytest.raises(LabelingError):
        check_labels(replace(cs), tuple([1] * 60), ctx)
