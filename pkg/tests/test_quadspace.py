import numpy as np
import pytest
from hypothesis import given, strategies as st

from abconvex.core import Grid1D
from abconvex.quadspace import ZERO, QuadAffine, QuadLinear, decompositions_of, lin_add, lin_eval, param_grid

coef = st.floats(-100, 100, allow_nan=False)


@given(a=coef, b=coef, x=st.floats(-10, 10))
def test_linear_structure(a, b, x):
    la, lb = QuadLinear(a), QuadLinear(b)
    assert lin_eval(lin_add(la, lb), x) == pytest.approx(lin_eval(la, x) + lin_eval(lb, x), rel=1e-12, abs=1e-9)
    assert (2.0 * la).a == 2 * a
    assert (-la).a == -a
    assert lin_eval(ZERO, x) == 0.0


@given(a=coef, b=coef, x=st.floats(-10, 10))
def test_affine_is_linear_plus_constant(a, b, x):
    h = QuadAffine(a, b)
    assert h(x) == pytest.approx(h.linear(x) + b, abs=1e-9)
    assert (h + QuadAffine(1.0, -1.0)) == QuadAffine(a + 1.0, b - 1.0)


def test_vector_eval():
    assert QuadLinear(2.0)(np.array([1.0, -3.0])).tolist() == [2.0, 18.0]


def test_param_grid_requires_zero():
    assert 0.0 in param_grid().points
    with pytest.raises(ValueError):
        param_grid(0.5, 2.0, 0.5)


@pytest.mark.parametrize("m", [2, 3])
def test_decompositions_close_exactly_and_restart(m):
    g = Grid1D(-1.0, 1.0, 0.5)
    target = QuadLinear(0.3)
    first = list(decompositions_of(target, m, g))
    assert first == list(decompositions_of(target, m, g))
    assert len(first) == len(g) ** (m - 1)
    for d in first:
        assert sum(q.a for q in d) == pytest.approx(0.3, abs=1e-15)
        assert all(q.a in g.points for q in d[:-1])


def test_decompositions_reject_other_m():
    with pytest.raises(ValueError):
        list(decompositions_of(ZERO, 4, Grid1D(-1.0, 1.0, 0.5)))
