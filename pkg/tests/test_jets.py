import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nkgeom import jets
from nkgeom.errors import JetDimensionError, JetDomainError, JetOrderError

from conftest import fd_grad, fd_hess

coords = st.floats(-1.5, 1.5, allow_nan=False)


def test_lift_coordinate_seed():
    x = jets.lift_coordinate([0.3, 1.2], 1)
    assert float(x.value) == 1.2
    np.testing.assert_array_equal(x.grad, [0.0, 1.0])
    np.testing.assert_array_equal(x.hess, np.zeros((2, 2)))


def test_lift_coordinate_one_dimensional_and_shift():
    x = jets.lift_coordinate([5.0], 0)
    assert float(x.value) == 5.0 and x.grad.tolist() == [1.0]
    y = x + 2
    assert float(y.value) == 7.0
    np.testing.assert_array_equal(y.grad, x.grad)
    np.testing.assert_array_equal(y.hess, x.hess)


def test_lift_coordinate_bad_index():
    with pytest.raises(IndexError):
        jets.lift_coordinate([0.0, 1.0], 2)


def test_square():
    x = jets.lift_coordinate([3.0], 0)
    y = jets.jet_arith("mul", x, x)
    assert (float(y.value), float(y.grad[0]), float(y.hess[0, 0])) == (9.0, 6.0, 2.0)


def test_reciprocal_of_cosh():
    t = jets.lift_coordinate([0.0], 0)
    y = jets.jet_arith("div", jets.constant(1.0, 1), jets.cosh(t) + 0.0)
    assert float(y.value) == pytest.approx(1.0)
    assert float(y.grad[0]) == pytest.approx(0.0)
    assert float(y.hess[0, 0]) == pytest.approx(-1.0)


def test_cosh_at_zero():
    y = jets.jet_apply("cosh", jets.lift_coordinate([0.0], 0))
    assert (float(y.value), float(y.grad[0]), float(y.hess[0, 0])) == (1.0, 0.0, 1.0)


def test_sine_cone_coordinate_at_zero():
    t = jets.lift_coordinate([0.0], 0)
    s = 2 * jets.jet_apply("atan", jets.jet_apply("exp", t))
    assert float(s.value) == pytest.approx(math.pi / 2, abs=1e-15)
    assert float(s.grad[0]) == pytest.approx(1.0, abs=1e-15)
    assert float(s.hess[0, 0]) == pytest.approx(0.0, abs=1e-15)


def test_log_cosh_at_one():
    y = jets.log(jets.cosh(jets.lift_coordinate([1.0], 0)))
    assert float(y.grad[0]) == pytest.approx(math.tanh(1.0), abs=1e-14)
    assert float(y.hess[0, 0]) == pytest.approx(1 / math.cosh(1.0) ** 2, abs=1e-14)
    assert float(y.grad[0]) == pytest.approx(0.76159, abs=1e-5)
    assert float(y.hess[0, 0]) == pytest.approx(0.41997, abs=1e-5)


def test_domain_errors():
    with pytest.raises(JetDomainError):
        jets.log(jets.lift_coordinate([-1.0], 0))
    with pytest.raises(JetDomainError):
        jets.sqrt(jets.lift_coordinate([-0.5], 0))
    with pytest.raises(ValueError):
        jets.jet_apply("gamma", jets.lift_coordinate([1.0], 0))
    with pytest.raises(ValueError):
        jets.jet_arith("mod", jets.lift_coordinate([1.0], 0), 2.0)


def test_dimension_mismatch():
    a = jets.seed([0.0, 1.0])[0]
    b = jets.seed([0.0, 1.0, 2.0])[0]
    with pytest.raises(JetDimensionError):
        a + b


def test_derivative_lowers_order():
    x = jets.seed([0.5, 0.2])
    y = jets.derivative(x * x[..., ::-1])
    assert y.order == 1
    np.testing.assert_allclose(y.value, [[0.2, 0.5], [0.2, 0.5]])
    np.testing.assert_allclose(y.grad, [[[0, 1], [1, 0]], [[0, 1], [1, 0]]])
    first = jets.derivative(jets.truncate(x))
    assert isinstance(first, np.ndarray)
    np.testing.assert_array_equal(first, np.eye(2))


def test_curvature_refuses_first_order_metric_jet():
    from nkgeom.tensor_core import curvature_from_jet

    G = jets.constant(np.eye(2), 2, order=1)
    with pytest.raises(JetOrderError):
        curvature_from_jet(G)


def _field(x):
    # a smooth vector-valued test function touching every elementary function
    u, v, w = x[..., 0], x[..., 1], x[..., 2]
    return jets.stack(
        [
            jets.sin(u * v) + jets.cos(w) * jets.exp(0.3 * u),
            jets.log(2.0 + jets.tanh(v)) / (1.5 + jets.cosh(w)),
            jets.atan(u - w) * jets.sqrt(3.0 + u * u) + jets.sinh(v) ** 3,
            (u + 2.5) ** 0.7 - jets.tan(0.3 * w) * v,
        ],
        axis=-1,
    )


def _values(p):
    return jets.value_of(_field(jets.seed(p)))


@given(st.tuples(coords, coords, coords))
def test_jet_matches_finite_differences(p):
    p = np.array(p)
    J = _field(jets.seed(p))
    np.testing.assert_allclose(J.grad, fd_grad(_values, p), atol=1e-7)
    np.testing.assert_allclose(J.hess, fd_hess(_values, p), atol=2e-5)


@given(st.tuples(coords, coords, coords))
def test_batched_evaluation_matches_pointwise(p):
    p = np.array(p)
    batch = np.stack([p, p * 0.5, p - 0.2])
    J = _field(jets.seed(batch))
    for k, q in enumerate(batch):
        single = _field(jets.seed(q))
        np.testing.assert_allclose(J.value[k], single.value, atol=1e-14)
        np.testing.assert_allclose(J.hess[k], single.hess, atol=1e-12)


@given(st.tuples(coords, coords))
def test_einsum_leibniz_rule(p):
    x = jets.seed(np.array(p))
    A = jets.stack([jets.stack([x[0] * x[1], jets.sin(x[0])]), jets.stack([jets.exp(x[1]), x[0]])])
    B = jets.inv(A + 3.0 * jets.constant(np.eye(2), 2))
    prod = jets.einsum("ij,jk->ik", A, B)

    def vals(q):
        X = jets.seed(q)
        A = jets.stack([jets.stack([X[0] * X[1], jets.sin(X[0])]), jets.stack([jets.exp(X[1]), X[0]])])
        return jets.value_of(jets.einsum("ij,jk->ik", A, jets.inv(A + 3.0 * jets.constant(np.eye(2), 2))))

    np.testing.assert_allclose(prod.grad, fd_grad(vals, np.array(p)), atol=1e-7)
    np.testing.assert_allclose(prod.hess, fd_hess(vals, np.array(p)), atol=2e-5)


@pytest.mark.parametrize("fn", ["sin", "cos", "sinh", "cosh", "tanh", "exp", "ln", "sqrt", "atan"])
def test_named_functions_against_numpy(fn):
    ref = {"sin": np.sin, "cos": np.cos, "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
           "exp": np.exp, "ln": np.log, "sqrt": np.sqrt, "atan": np.arctan}[fn]
    p = 0.7
    y = jets.jet_apply(fn, jets.lift_coordinate([p], 0))
    assert float(y.value) == pytest.approx(ref(p), abs=1e-15)
    h = 1e-5
    assert float(y.grad[0]) == pytest.approx((ref(p + h) - ref(p - h)) / (2 * h), abs=1e-8)
    assert float(y.hess[0, 0]) == pytest.approx(
        (ref(p + 1e-4) - 2 * ref(p) + ref(p - 1e-4)) / 1e-8, abs=1e-5
    )
