import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from abconvex.core import EmptyIntersection, Grid1D, Grids, sum_functions
from abconvex.example import COS, EXAMPLE, F1, F2, F3, INDICATOR_ZERO, closed_subdiff
from abconvex.quadspace import QuadLinear
from abconvex.subdiff import (
    SubdiffQuery,
    SubdiffSet,
    check_inclusion_with_factor,
    check_sum_rule,
    domain_map,
    inner_members,
    membership_slack,
    minkowski_sum_subdiffs,
    simplex_lattice,
    subdiff_contains,
    subdiff_enumerate,
    within_dilation,
)
from abconvex.transforms import tabulate_conjugate

BY_NAME = {f.name: f for f in EXAMPLE}


def table(f, g):
    return tabulate_conjugate(f, g.a, g.x)


def window_distance(members, desc, lo, hi):
    """Two-sided distance from grid members to the closed form clipped to [lo, hi]."""
    d = desc.clip(lo, hi)
    if d.kind == "empty" or len(members) == 0:
        return 0.0 if (d.kind == "empty") == (len(members) == 0) else np.inf
    out = float(np.max(d.distance(members)))
    inn = max(0.0, members.min() - d.lo, d.hi - members.max())
    return max(out, inn)


@pytest.mark.parametrize("name", ["f1", "f2", "f3"])
@given(x=st.floats(-3, 3))
def test_exact_subdiff_matches_closed_form(name, x, grids):
    assume(abs(x) > 1e-3 or x == 0)
    f = BY_NAME[name]
    s = subdiff_enumerate(f, x, 0.0, table(f, grids))
    assert window_distance(s.members, closed_subdiff(name, x), -10.0, 10.0) <= grids.a.step + 1e-9


def test_emptiness_and_kinks(grids):
    for f in (F2, F3):
        s = subdiff_enumerate(f, 0.0, 0.0, table(f, grids))
        assert s.empty and s.emptiness_certified
    for x in (-0.5, 0.5):
        s = subdiff_enumerate(F3, x, 0.0, table(F3, grids))
        assert s.members.min() == pytest.approx(-2.0) and s.members.max() == pytest.approx(0.0)


def test_f1_ray_at_zero(grids):
    s = subdiff_enumerate(F1, 0.0, 0.0, table(F1, grids))
    assert s.members.min() == -10.0 and s.members.max() == pytest.approx(-1.0)
    assert len(s.strict) == len(s.members)


def test_eps_positive_is_nonempty_for_f2_at_zero(grids):
    # the 0.1-subdifferential of f2 at 0 is the ray a <= -10
    s = subdiff_enumerate(F2, 0.0, 0.1, table(F2, grids))
    assert s.strict.tolist() == [-10.0]
    wide = Grids(grids.x, Grid1D(-30.0, 10.0, 0.01))
    assert -20.0 in subdiff_enumerate(F2, 0.0, 0.1, table(F2, wide)).strict


def test_negative_eps_rejected(grids):
    with pytest.raises(ValueError):
        SubdiffQuery(F1, 0.0, -0.1)
    with pytest.raises(ValueError):
        subdiff_enumerate(F1, 0.0, -1e-3, table(F1, grids))


@given(x=st.floats(-2.5, 2.5), e1=st.floats(0, 0.5), e2=st.floats(0, 0.5))
def test_strict_members_grow_with_eps(x, e1, e2, coarse):
    lo, hi = sorted((e1, e2))
    for f in EXAMPLE:
        t = table(f, coarse)
        small = subdiff_enumerate(f, x, lo, t).strict
        big = subdiff_enumerate(f, x, hi, t).strict
        assert set(small.tolist()) <= set(big.tolist())


@given(x=st.floats(-3, 3), i=st.integers(0, 400), eps=st.floats(0, 1))
def test_contains_agrees_with_slack(x, i, eps, coarse):
    a = float(coarse.a.points[i])
    for f in EXAMPLE:
        t = table(f, coarse)
        slack = membership_slack(f, x, eps, QuadLinear(a), t)
        assert subdiff_contains(f, x, eps, QuadLinear(a), t) == (slack >= -1e-9)


@given(x=st.floats(-2, 2), e=st.tuples(st.floats(0, 0.3), st.floats(0, 0.3)), picks=st.tuples(st.floats(0, 1), st.floats(0, 1)))
def test_sum_of_members_is_member_of_sum(x, e, picks, coarse):
    fs = [F1, F3]
    sets = [subdiff_enumerate(f, x, ei, table(f, coarse)).strict for f, ei in zip(fs, e)]
    assume(all(len(s) for s in sets))
    a = sum(float(s[int(p * (len(s) - 1))]) for s, p in zip(sets, picks))
    assume(abs(a) <= 10)
    a = float(np.round(np.rint(a / coarse.a.step) * coarse.a.step, 12))
    total = sum_functions(fs)
    assert membership_slack(total, x, sum(e), QuadLinear(a), table(total, coarse)) >= -1e-9


def test_domain_map_f2(coarse):
    dom0 = domain_map(F2, 0.0, coarse.x, table(F2, coarse))
    assert 0.0 not in dom0
    # -1/|x| must lie in the a-window [-10, 10]
    assert dom0.min() == pytest.approx(-3.0) and np.all(np.abs(dom0) >= 0.1 - 1e-9)


def test_minkowski_and_dilation():
    s1 = SubdiffSet(np.array([0.0, 0.5]), False, 0.5, strict=np.array([0.0]))
    s2 = SubdiffSet(np.array([1.0]), False, 0.5, strict=np.array([1.0]))
    assert minkowski_sum_subdiffs([s1, s2]).tolist() == [1.0, 1.5]
    assert minkowski_sum_subdiffs([s1, s2], strict=True).tolist() == [1.0]
    assert minkowski_sum_subdiffs([]).size == 0
    assert within_dilation(np.array([0.0, 2.0]), np.array([0.4]), 0.5).tolist() == [True, False]
    assert within_dilation(np.array([1.0]), np.array([]), 0.5).tolist() == [False]
    assert inner_members(s1).tolist() == [0.0]
    assert inner_members(SubdiffSet(np.array([3.0]), False, 0.5)).tolist() == [3.0]


@given(m=st.integers(2, 3), total=st.floats(0.01, 2))
def test_simplex_lattice_sums(m, total):
    pts = simplex_lattice(m, total, 4)
    assert all(len(p) == m and min(p) >= 0 and sum(p) == pytest.approx(total) for p in pts)
    assert len(set(pts)) == len(pts)


def test_inclusion_with_factor(grids):
    assert check_inclusion_with_factor(list(EXAMPLE), 1.0, 0.1, 1.5, grids).holds
    with pytest.raises(ValueError):
        check_inclusion_with_factor(list(EXAMPLE), 1.0, 0.1, 1.0, grids)
    vac = check_inclusion_with_factor([F1, INDICATOR_ZERO], 1.0, 0.1, 2.0, grids)
    assert vac.holds and len(vac.lhs) == 0


def test_inclusion_fails_for_non_h_convex():
    neg = type(COS)("negcos", lambda x: -np.cos(x))
    g = Grids(Grid1D(-3.0, 3.0, 0.001), Grid1D(-10.0, 10.0, 0.01))
    x = float(g.x.points[g.x.lookup([np.pi / 2])[0]])
    assert not check_inclusion_with_factor([COS, neg], x, 0.01, 2.0, g).holds


def test_sum_rule_coarse(coarse):
    rep = check_sum_rule(list(EXAMPLE), 1.0, 0.0, (0.1,), coarse)
    assert rep.holds
    with pytest.raises(EmptyIntersection):
        check_sum_rule([F1, INDICATOR_ZERO], 1.0, 0.0, (0.1,), coarse)
