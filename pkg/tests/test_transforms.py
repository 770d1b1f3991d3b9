import numpy as np
import pytest
from hypothesis import given, strategies as st

from abconvex.core import PLUS_INF, EmptyDomain, ExtFunction, Grid1D
from abconvex.example import COS, F1, F2, F3, INDICATOR_ZERO, ZERO_FN, closed_conjugate, closed_support_contains
from abconvex.quadspace import QuadAffine, QuadLinear
from abconvex.transforms import (
    BICONJ_A_GRIDS,
    ConjugateFn,
    biconjugate,
    biconjugate_values,
    conjugate,
    conjugate_values,
    epi_conjugate_contains,
    inf_convolution,
    support_contains,
    support_region,
    support_sum_closure_check,
    tabulate_conjugate,
)

# Values below come from a plain numpy sweep over [-20, 20] with 4e6 points.
GOLDEN_CONJ = [
    (F1, 0.5, 0.5625),
    (F1, -3.0, 0.0),
    (F2, -0.5, 1.0),
    (F2, -4.0, -0.75),
    (F3, -1.0, -0.25),
    (F3, -3.0, -0.6666666667),
    (COS, -0.1, 0.1808983342),
    (COS, -1.0, -1.0),
]


@pytest.mark.parametrize("f,a,expected", GOLDEN_CONJ)
def test_conjugate_golden(f, a, expected, grids):
    assert conjugate(f, a, grids.x) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("f,a", [(F2, 0.0), (F2, 0.5), (F3, 0.01), (COS, 0.2), (ZERO_FN, 1.0)])
def test_conjugate_unbounded(f, a, grids):
    assert conjugate(f, a, grids.x) == PLUS_INF


def test_conjugate_of_indicator_is_zero(grids):
    assert conjugate(INDICATOR_ZERO, 7.0, grids.x) == 0.0


def test_empty_domain_raises(grids):
    nowhere = ExtFunction("nowhere", lambda x: np.full_like(x, np.inf))
    with pytest.raises(EmptyDomain):
        conjugate(nowhere, 0.0, grids.x)
    with pytest.raises(EmptyDomain):
        conjugate_values(nowhere, [0.0], grids.x)


def test_table_matches_pointwise_and_closed_form(grids):
    t = tabulate_conjugate(F3, grids.a, grids.x)
    assert t is tabulate_conjugate(F3, grids.a, grids.x)
    for a in (-9.5, -2.0, -0.37, 0.0):
        assert t(a) == pytest.approx(closed_conjugate("f3", a), abs=1e-6)
    assert t(0.01) == PLUS_INF and t(50.0) == PLUS_INF
    with pytest.raises(ValueError):
        t(-0.005)


def test_closed_form_conjugate_fn():
    c = ConjugateFn("f1", closed=lambda a: closed_conjugate("f1", a))
    assert c(1.0) == 1.0


@given(a=st.floats(-9.9, 9.9), x=st.floats(-3, 3))
def test_fenchel_young(a, x, coarse):
    for f in (F1, F2, F3, COS):
        fa = conjugate(f, a, coarse.x)
        assert fa + float(f.sample(np.array([x]))[0]) >= a * x * x - 1e-9


@given(a1=st.floats(-9, 9), a2=st.floats(-9, 9), t=st.floats(0, 1))
def test_conjugate_is_convex_in_a(a1, a2, t, coarse):
    vals = conjugate_values(F1, [a1, a2, t * a1 + (1 - t) * a2], coarse.x)
    assert vals[2] <= t * vals[0] + (1 - t) * vals[1] + 1e-9


def test_biconjugate_matches_for_h_convex():
    xs = np.array([-2.0, -1.0, -0.5, 0.3, 1.0, 2.5])
    x_grid = Grid1D(-3.0, 3.0, 0.01)
    for f in (F1, F2, F3):
        b = biconjugate_values(f, xs, BICONJ_A_GRIDS, x_grid)
        assert np.max(np.abs(b - f.sample(xs))) <= 5e-3


def test_biconjugate_of_cos_has_gap():
    # f**(2 pi) <= -1: any minorant a x^2 + b with a <= 0 is <= -1 at pi, hence at 2 pi
    xg = Grid1D(-8.0, 8.0, 0.01)
    assert biconjugate(COS, 2 * np.pi, BICONJ_A_GRIDS, xg) == pytest.approx(-1.0, abs=5e-3)
    assert biconjugate(COS, np.pi / 2, BICONJ_A_GRIDS, xg) == pytest.approx(0.0, abs=5e-3)
    assert biconjugate(COS, 0.0, BICONJ_A_GRIDS, xg) == pytest.approx(1.0, abs=5e-3)


def test_inf_convolution_example(grids):
    conjs = [tabulate_conjugate(f, grids.a, grids.x) for f in (F1, F2, F3)]
    r = inf_convolution(conjs, QuadLinear(0.0), grids.a)
    assert r.value == pytest.approx(1.0, abs=1e-9)
    assert tuple(q.a for q in r.witness) == (1.0, -1.0, 0.0)
    assert r.residual == 0.0


def test_inf_convolution_all_pruned(grids):
    c = tabulate_conjugate(F2, grids.a, grids.x)
    r = inf_convolution([c, c], QuadLinear(0.0), grids.a)
    assert r.value == PLUS_INF and r.witness is None
    with pytest.raises(ValueError):
        inf_convolution([c], QuadLinear(0.0), grids.a)


def test_support_membership(grids):
    assert support_contains(F2, QuadAffine(-1.0, 0.0), grids.x)
    assert not support_contains(F2, QuadAffine(-1.0, 0.01), grids.x)
    assert not support_contains(F2, QuadAffine(0.0, -100.0), grids.x)
    assert epi_conjugate_contains(F1, QuadLinear(1.0), 1.0, grids.x)
    assert not epi_conjugate_contains(F1, QuadLinear(1.0), 0.99, grids.x)
    reg = support_region(F1, grids.a, grids.x)
    assert reg.contains(-3.0, -1e-12) and not reg.contains(-3.0, 0.01)


@given(a=st.floats(-5, 2), b=st.floats(-3, 1.5))
def test_support_agrees_with_closed_form_off_boundary(a, b, grids):
    for w in ("f1", "f2", "f3"):
        inside = closed_support_contains(w, a, b)
        margin = -closed_conjugate(w, a) - b
        if abs(margin) > 1e-3 and abs(a) > 1e-3:
            f = {"f1": F1, "f2": F2, "f3": F3}[w]
            assert support_contains(f, QuadAffine(a, b), grids.x) == inside


def test_support_sum_closure(grids):
    probe = QuadAffine(-1.0, -0.5)
    r = support_sum_closure_check(F1, F2, probe, grids.a, grids.x)
    assert r.in_supp_sum == r.in_closure_of_minkowski
