import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abconvex.core import PLUS_INF, EmptyIntersection, ExtFunction, Grid1D, Grids
from abconvex.duality import (
    DualUnboundedError,
    certificate_margin,
    certify_gap_ladder,
    certify_gap_at_point,
    decomposition_at,
    dual_value,
    grid_scale,
    primal_value,
    primal_via_conjugate,
    scaled_tol,
)
from abconvex.example import EXAMPLE, F1, F2, F3, ZERO_FN, phi_function
from abconvex.transforms import tabulate_conjugate

SMALL = Grids(Grid1D(-2.0, 2.0, 0.02), Grid1D(-5.0, 5.0, 0.05))


def tables(fs, g):
    return [tabulate_conjugate(f, g.a, g.x) for f in fs]


def test_primal_example(grids):
    v, x = primal_value(list(EXAMPLE), grids.x)
    assert v == pytest.approx(-1.0, abs=1e-12) and x == -1.0
    assert primal_via_conjugate(list(EXAMPLE), grids.x) == pytest.approx(-1.0, abs=1e-9)


def test_primal_errors(grids):
    with pytest.raises(DualUnboundedError):
        primal_value([F2, F3], grids.x)
    left = ExtFunction("left", lambda x: np.where(x < -1, 0.0, np.inf))
    right = ExtFunction("right", lambda x: np.where(x > 1, 0.0, np.inf))
    with pytest.raises(EmptyIntersection):
        primal_value([left, right], grids.x)


def test_dual_example(grids):
    v, witness, pruned = dual_value(tables(EXAMPLE, grids), grids.a)
    assert v == pytest.approx(-1.0, abs=1e-9) and not pruned
    assert tuple(w.a for w in witness) == (1.0, -1.0, 0.0)


def test_dual_all_pruned(grids):
    v, witness, pruned = dual_value(tables([F2, F2], grids), grids.a)
    assert pruned and witness is None and v == -PLUS_INF


def test_tol_scaling():
    assert scaled_tol(5e-3, Grids()) == 5e-3
    coarse = Grids(Grid1D(-3.0, 3.0, 0.1), Grid1D(-10.0, 10.0, 0.01))
    assert grid_scale(coarse) == pytest.approx(0.29)
    assert scaled_tol(5e-3, coarse) == pytest.approx(5e-3 * 0.29 / 0.092)


def test_ladder_certificate_example(grids):
    rep = certify_gap_ladder(list(EXAMPLE), None, (1.0, 0.3, 0.1, 0.03, 0.01), grids)
    assert rep.certified and rep.certified_depth == 5 and rep.min_certified_eps == 0.01
    assert rep.gap <= 5e-3 and rep.weak_duality
    conjs = tables(EXAMPLE, grids)
    for c in rep.eps_ladder_certificates:
        assert sum(c.decomposition) == 0.0
        assert certificate_margin(list(EXAMPLE), conjs, c.x_witness, c.decomposition, c.eps / 3) >= -1e-9


def test_ladder_reasons(grids):
    assert certify_gap_ladder([F2, F3], None, (1.0,), grids).reason == "unbounded"
    # f2 - f2 = 0, but every split of phi_0 hits a = 0 or a > 0 on one side
    neg = ExtFunction("negf2", lambda x: 2 * np.abs(x) - 1)
    rep = certify_gap_ladder([F2, neg], None, (1.0,), grids)
    assert rep.reason == "dual pruned" and rep.v_primal == 0.0 and rep.gap == PLUS_INF
    with pytest.raises(ValueError):
        certify_gap_ladder([F1], None, (1.0,), grids)


def test_f1_plus_zero(grids):
    rep = certify_gap_ladder([F1, ZERO_FN], None, (1.0, 0.1), grids)
    assert rep.v_primal == pytest.approx(-0.25, abs=1e-6) and rep.v_dual == pytest.approx(-0.25, abs=1e-6)
    assert rep.certified


@pytest.mark.parametrize("x", [1.0, -1.0])
def test_pointwise_certificate(x, grids):
    rep = certify_gap_at_point(list(EXAMPLE), None, x, (0.0, 0.1), grids)
    assert rep.certified
    assert rep.eps_ladder_certificates[0].decomposition == (1.0, -1.0, 0.0)
    assert rep.eps_ladder_certificates[0].slack >= -1e-9


def test_pointwise_fails_off_optimum(grids):
    rep = certify_gap_at_point(list(EXAMPLE), None, 0.0, (0.0,), grids)
    assert not rep.certified and rep.reason.startswith("no certificate")
    rep = certify_gap_at_point(list(EXAMPLE), None, 0.5, (1.0,), grids)
    assert not rep.certified


def test_pointwise_outside_domain(grids):
    ind = ExtFunction("ind", lambda x: np.where(x == 0, 0.0, np.inf))
    with pytest.raises(EmptyIntersection):
        certify_gap_at_point([F1, ind], None, 1.0, (0.0,), grids)


def test_decomposition_for_convex_pair(grids):
    # the only exact subgradient of phi_c is phi_c itself
    fs = [phi_function(1.0), phi_function(-1.0)]
    found = decomposition_at(fs, tables(fs, grids), 0.5, 0.0)
    assert found is not None and found[0] == (1.0, -1.0)


@settings(max_examples=20)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 3))
def test_weak_duality_random_samples(seed, m):
    rng = np.random.default_rng(seed)
    n = len(SMALL.x)
    fs = []
    for i in range(m):
        vals = rng.normal(size=n) + 0.5 * SMALL.x.points**2
        vals[rng.random(n) < 0.1] = np.inf
        fs.append(ExtFunction(f"s{i}", grid=SMALL.x, values=vals))
    try:
        vp, _ = primal_value(fs, SMALL.x)
    except EmptyIntersection:
        return
    vd, _, _ = dual_value(tables(fs, SMALL), SMALL.a)
    assert vd <= vp + 1e-9
