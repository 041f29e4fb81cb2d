import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nkgeom import jets
from nkgeom.conformal_einstein import (
    SplitConformalFactor,
    case1_solution,
    case1_split,
    case3_separation_residuals,
    conformal_ricci,
    einstein_check,
    mixed_ricci_residual,
    obata_residual,
    system_sy_residual,
)
from nkgeom.fixtures import get_fixture
from nkgeom.metric_builders import (
    ambient_coordinate,
    conformal_rescale,
    product_cylinder,
    round_sphere,
    sample_points,
    scale_metric,
)
from nkgeom.tensor_core import ScalarField, curvature

from conftest import random_conformal_factor

S5 = round_sphere(5)
BALL5 = [(-1.0, 1.0)] * 5


def _s5_points(count=15, seed=0):
    return sample_points(BALL5, count, seed)


def test_conformal_ricci_with_zero_factor_is_ricci():
    g = round_sphere(4)
    zero = ScalarField(4, lambda x: 0.0 * x[..., 0])
    p = [0.2, -0.3, 0.1, 0.4]
    np.testing.assert_array_equal(conformal_ricci(g, zero, p), curvature(g, p).ricci)


@pytest.mark.parametrize("name", ["euclidean_3", "cylinder_s5", "round_sphere_6"])
@pytest.mark.parametrize("seed", [0, 1])
def test_conformal_ricci_two_paths(name, seed):
    e = get_fixture(name)
    f = random_conformal_factor(e.metric.dim, seed)
    h = conformal_rescale(e.metric, f)
    for p in e.points(10, seed):
        np.testing.assert_allclose(conformal_ricci(e.metric, f, p), curvature(h, p).ricci, atol=1e-9)


def test_conformal_ricci_case1_is_five_times_metric():
    e = get_fixture("case1_cylinder")
    cyl, f = e.data["cylinder"], e.data["f"]
    for p in e.points(10):
        np.testing.assert_allclose(conformal_ricci(cyl, f, p), 5.0 * e.metric.value(p), atol=1e-12)


def test_mixed_ricci_vanishes_for_split_factor():
    b = ambient_coordinate(S5)
    split = SplitConformalFactor(lambda t: 2.0 + jets.cosh(t), ScalarField(5, lambda x: 0.3 * b(x)))
    f = split.f()
    for p in sample_points(BALL5 + [(-1.5, 1.5)], 10):
        assert np.max(np.abs(mixed_ricci_residual(f, p))) <= 1e-12


def test_mixed_ricci_detects_non_split_factor():
    f = ScalarField(3, lambda x: x[..., 0] * x[..., 2])
    # residual in the x1 slot is 1 - t x1
    r = mixed_ricci_residual(f, [1.0, 0.0, 0.0])
    assert r[0] == pytest.approx(1.0)
    assert r[0] > 0.1
    assert mixed_ricci_residual(f, [1.0, 0.3, 1.0])[0] == pytest.approx(0.0, abs=1e-15)


def test_mixed_ricci_zero_for_t_only_factor():
    f = ScalarField(3, lambda x: jets.sin(x[..., 2]))
    assert np.max(np.abs(mixed_ricci_residual(f, [0.3, 0.4, 0.5]))) == 0.0


@given(st.floats(-1.5, 1.5))
def test_system_sy_case1_closed_form(t):
    prof, _ = case1_solution(5.0, 5, 1.0, 0.0)
    split = case1_split(prof, S5)
    for p in _s5_points(3):
        res = system_sy_residual(split, S5, 5.0, p, t)
        assert abs(res.scalar) <= 1e-7
        assert res.matrix_norm <= 1e-7


def test_system_sy_scalar_is_linear_in_r():
    prof, _ = case1_solution(5.0, 5, 1.0, 0.0)
    split = case1_split(prof, S5)
    res = system_sy_residual(split, S5, 7.0, [0.1, 0.2, 0.3, -0.1, 0.0], 0.4)
    assert res.scalar == pytest.approx(-2.0, abs=1e-12)


def test_system_sy_detects_non_eigen_base_function():
    b = ambient_coordinate(S5)
    split = SplitConformalFactor(jets.cosh, ScalarField(5, lambda x: 0.2 * b(x) ** 2))
    res = system_sy_residual(split, S5, 5.0, [0.3, -0.2, 0.1, 0.4, 0.5], 0.2)
    assert res.matrix_norm > 1e-3


def test_system_sy_height_function_pairs_consistently():
    # a = cosh t, b = 0.2 x6 satisfies the matrix equation on the unit S^5
    b = ambient_coordinate(S5)
    split = SplitConformalFactor(jets.cosh, ScalarField(5, lambda x: 0.2 * b(x)))
    res = system_sy_residual(split, S5, 5.0, [0.3, -0.2, 0.1, 0.4, 0.5], 0.2)
    assert res.matrix_norm <= 1e-12


@pytest.mark.parametrize("r,n,beta,gamma", [(5.0, 5, 1.0, 0.0), (6.0, 6, 1.0, 0.0), (3.0, 5, 2.0, 0.3)])
def test_case1_profile(r, n, beta, gamma):
    prof, f = case1_solution(r, n, beta, gamma)
    assert prof.alpha_sq == pytest.approx(n * beta**2 / r)
    ts = np.linspace(-2, 2, 21)
    assert prof.ode_residual(ts) <= 1e-12
    if (r, n, beta, gamma) in ((5.0, 5, 1.0, 0.0), (6.0, 6, 1.0, 0.0)):
        for t in ts:
            x = np.zeros(n + 1)
            x[-1] = t
            assert math.exp(2 * float(f.value(x))) == pytest.approx(1 / math.cosh(t) ** 2, rel=1e-13)


@pytest.mark.parametrize("bad", [dict(r=0.0), dict(beta=0.0), dict(n=1)])
def test_case1_rejects_degenerate_parameters(bad):
    kw = dict(r=5.0, n=5, beta=1.0, gamma=0.0)
    kw.update(bad)
    with pytest.raises(ValueError):
        case1_solution(**kw)


@pytest.mark.parametrize("beta,gamma", [(0.5, 0.0), (1.0, 0.7), (2.0, -0.3)])
def test_case1_family_over_matched_base(beta, gamma):
    n, r = 5, 4.0
    base = scale_metric(S5, 1.0 / beta)  # Ric = (n - 1) beta^2 g
    _, f = case1_solution(r, n, beta, gamma)
    g = conformal_rescale(product_cylinder(base), f)
    rep = einstein_check(g, sample_points(BALL5 + [(-1.5, 1.5)], 12, 2))
    assert rep.lambda_fit == pytest.approx(r, abs=1e-9)
    assert rep.max_residual <= 1e-8


def test_case3_sphere_eigenfunction():
    b = ambient_coordinate(S5)
    split = SplitConformalFactor(jets.cosh, b, delta=1.0, eps=0.0, eps_prime=0.0, da=jets.sinh)
    res = case3_separation_residuals(split, S5, _s5_points(10))
    assert max(res.values()) <= 1e-7


def test_case3_finite_difference_third_derivative():
    b = ambient_coordinate(S5)
    split = SplitConformalFactor(jets.cosh, b, delta=1.0, eps=0.0, eps_prime=0.0)
    res = case3_separation_residuals(split, S5, _s5_points(3), ts=[0.0, 0.5])
    assert res["a3"] <= 1e-6


def test_case3_non_eigenfunction_control():
    b = ambient_coordinate(S5)
    split = SplitConformalFactor(jets.cosh, ScalarField(5, lambda x: b(x) ** 2), 1.0, 0.0, 0.0)
    assert case3_separation_residuals(split, S5, _s5_points(10))["b_eigen"] > 0.5


def test_case3_requires_constants():
    with pytest.raises(ValueError):
        case3_separation_residuals(SplitConformalFactor(jets.cosh, ambient_coordinate(S5)), S5, _s5_points(1))


def test_shifted_split_keeps_factor():
    b = ambient_coordinate(S5)
    split = SplitConformalFactor(lambda t: 2.0 + jets.cosh(t), b, 1.0, 2.0, 0.0)
    moved = split.shifted(0.7)
    p = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    assert float(moved.f().value(p)) == pytest.approx(float(split.f().value(p)), abs=1e-15)


@pytest.mark.parametrize("n", [2, 5])
def test_obata_sphere(n):
    g = round_sphere(n)
    hres, eres = obata_residual(ambient_coordinate(g), g, 1.0, sample_points([(-1, 1)] * n, 10))
    assert hres <= 1e-7 and eres <= 1e-7


def test_obata_controls():
    b = ambient_coordinate(S5)
    hres, _ = obata_residual(ScalarField(5, lambda x: b(x) ** 2), S5, 1.0, _s5_points(10))
    assert hres > 0.5
    sq = get_fixture("squashed_s5").metric
    _, eres = obata_residual(ScalarField(5, lambda x: x[..., 0]), sq, 1.0, _s5_points(10))
    assert eres > 0.05
    with pytest.raises(ValueError):
        obata_residual(b, S5, 0.0, _s5_points(1))


@pytest.mark.parametrize(
    "name,lam,tol",
    [("round_sphere_6", 5.0, 1e-7), ("case1_cylinder", 5.0, 1e-6), ("euclidean_4", 0.0, 1e-12)],
)
def test_einstein_check_positive(name, lam, tol):
    e = get_fixture(name)
    rep = einstein_check(e.metric, e.points(20))
    assert rep.verdict
    assert rep.lambda_fit == pytest.approx(lam, abs=tol)
    assert rep.max_residual <= tol


@pytest.mark.parametrize("name", ["squashed_s5", "squashed_s5_sine_cone", "cylinder_s5"])
def test_einstein_check_controls(name):
    e = get_fixture(name)
    rep = einstein_check(e.metric, e.points(20))
    assert not rep.verdict
    assert rep.max_residual > 0.05


def test_einstein_check_needs_ten_points():
    with pytest.raises(ValueError):
        einstein_check(S5, _s5_points(9))


@pytest.mark.parametrize("c", [0.5, 3.0])
def test_scaling_r_scales_lambda(c):
    n, r = 5, 5.0
    p1, f1 = case1_solution(r, n, 1.0, 0.0)
    p2, f2 = case1_solution(c * r, n, 1.0, 0.0)
    assert p2.amplitude == pytest.approx(math.sqrt(c) * p1.amplitude)
    pts = sample_points(BALL5 + [(-1.5, 1.5)], 12, 6)
    shift = {round(float(f2.value(p) - f1.value(p)), 12) for p in pts}
    assert shift == {round(-0.5 * math.log(c), 12)}
    cyl = product_cylinder(S5)
    lam1 = einstein_check(conformal_rescale(cyl, f1), pts).lambda_fit
    lam2 = einstein_check(conformal_rescale(cyl, f2), pts).lambda_fit
    assert lam2 == pytest.approx(c * lam1, rel=1e-12)
