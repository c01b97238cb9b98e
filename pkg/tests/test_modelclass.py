import math

import numpy as np
import pytest

from conftest import random_spline
from optrec.errors import InvalidArgument, UnsupportedParameter
from optrec.modelclass import (FiniteModelClass, MemberDistance, SobolevBall, constant, dist_to_finite_class,
                               sobolev_norm, two_constant_class)
from optrec.splinespace import (PiecewiseLinear, interpolate, l2_distance, lp_norm, make_uniform_space, oracle_from_id,
                                pl_l2_distance, pl_sup_distance, quarter_sqrt, sobolev_seminorm)


def test_ball_validation():
    with pytest.raises(UnsupportedParameter):
        SobolevBall(1.0)
    with pytest.raises(InvalidArgument):
        SobolevBall(1.5, 0.0)
    assert SobolevBall(math.inf).p == math.inf


def test_sobolev_norm_zero():
    assert sobolev_norm(constant(0.0), SobolevBall(1.5)) == 0.0


def test_sobolev_norm_identity_p2():
    g = PiecewiseLinear.from_knots([0, 1], [0, 1])
    assert sobolev_norm(g, SobolevBall(2.0)) == pytest.approx(1.0, abs=1e-14)


def test_interpolant_of_target_in_unit_ball():
    f = quarter_sqrt()
    x = np.linspace(0, 1, 40)
    S = interpolate(x, f(x))
    ball = SobolevBall(1.5)
    assert lp_norm(S, 1.5) < 1 and sobolev_seminorm(S, 1.5) < 1
    assert ball.contains(S)


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0, math.inf])
def test_norm_axioms(rng, p):
    ball = SobolevBall(p)
    for _ in range(50):
        g = random_spline(rng, 15)
        f = PiecewiseLinear(g.space, rng.standard_normal(g.space.dim))
        a = rng.standard_normal() * 3
        assert sobolev_norm(g.scaled(a), ball) == pytest.approx(abs(a) * sobolev_norm(g, ball), rel=1e-9)
        s = PiecewiseLinear(g.space, g.coeffs + f.coeffs)
        assert sobolev_norm(s, ball) <= sobolev_norm(g, ball) + sobolev_norm(f, ball) + 1e-9


@pytest.mark.parametrize("mu", [0.0, 1e-3, 0.0046, 0.5])
def test_rescaling_contract(rng, mu):
    ball = SobolevBall(1.5)
    g = random_spline(rng, 20)
    g = g.scaled((1 + mu) / sobolev_norm(g, ball))
    assert sobolev_norm(g.scaled(1 / (1 + mu)), ball) == pytest.approx(1.0, abs=1e-12)


def test_finite_class_validation():
    with pytest.raises(InvalidArgument):
        FiniteModelClass(())
    with pytest.raises(InvalidArgument):
        FiniteModelClass((constant(0),), "L1")
    with pytest.raises(InvalidArgument):
        FiniteModelClass((lambda x: x,))


def test_singleton_class():
    g = PiecewiseLinear.from_knots([0, 0.3, 1], [1, -1, 2])
    assert dist_to_finite_class(g, FiniteModelClass((g,), "L2")) == (0.0, 0)
    assert dist_to_finite_class(g, FiniteModelClass((g,), "sup")) == (0.0, 0)


def test_two_constants_sup():
    K = FiniteModelClass((constant(0.0), constant(1.0)), "sup")
    d, k = dist_to_finite_class(constant(0.4), K)
    assert k == 0 and d == pytest.approx(0.4, abs=1e-15)
    assert dist_to_finite_class(constant(0.5), K)[1] == 0


def _spiky(width=1e-4):
    sites = np.linspace(0, 1, 11)
    knots = np.unique(np.clip(np.concatenate([sites - width, sites, sites + width]), 0, 1))
    vals = np.where(np.isin(knots, sites), 1.0, 0.0)
    return PiecewiseLinear.from_knots(knots, vals)


def test_metric_split_on_spiky_function():
    g = _spiky()
    zero, one = constant(0.0), constant(1.0)
    assert pl_l2_distance(g, zero) < 0.05
    assert pl_sup_distance(g, zero) == pytest.approx(1.0)
    assert dist_to_finite_class(g, two_constant_class("L2"))[1] == 1
    assert dist_to_finite_class(g, two_constant_class("sup")) == (pytest.approx(1.0), 0)
    assert pl_l2_distance(g, one) > 0.9


@pytest.mark.parametrize("metric", ["L2", "sup"])
def test_zero_iff_member(rng, metric):
    members = tuple(random_spline(rng, 8) for _ in range(3))
    K = FiniteModelClass(members, metric)
    for k, f in enumerate(members):
        assert dist_to_finite_class(f, K)[0] <= 1e-10
    for _ in range(20):
        g = random_spline(rng, 9)
        assert dist_to_finite_class(g, K)[0] > 1e-10


@pytest.mark.parametrize("metric", ["L2", "sup"])
def test_distance_is_lipschitz(rng, metric):
    K = FiniteModelClass(tuple(random_spline(rng, 6) for _ in range(3)), metric)
    dist = pl_l2_distance if metric == "L2" else pl_sup_distance
    for _ in range(50):
        g1, g2 = random_spline(rng, 10), random_spline(rng, 12)
        lhs = abs(dist_to_finite_class(g1, K)[0] - dist_to_finite_class(g2, K)[0])
        assert lhs <= dist(g1, g2) + 1e-12


@pytest.mark.parametrize("metric", ["L2", "sup"])
def test_member_distance_matches_spline_distance(rng, metric):
    space = make_uniform_space(17)
    f = random_spline(rng, 7)
    md = MemberDistance(space, f, metric)
    dist = pl_l2_distance if metric == "L2" else pl_sup_distance
    for _ in range(30):
        c = rng.standard_normal(space.dim)
        g = PiecewiseLinear(space, c)
        assert md.value(c) == pytest.approx(dist(g, f), rel=1e-10, abs=1e-14)
        v, grad = md.value_and_grad(c)
        assert v == pytest.approx(md.value(c), rel=1e-12)
        assert grad.shape == c.shape


def test_member_distance_l2_gradient(rng):
    space = make_uniform_space(9)
    md = MemberDistance(space, random_spline(rng, 5), "L2")
    c = rng.standard_normal(space.dim)
    _, grad = md.value_and_grad(c)
    e = 1e-6
    fd = [(md.value(c + e * u) - md.value(c - e * u)) / (2 * e) for u in np.eye(space.dim)]
    np.testing.assert_allclose(grad, fd, rtol=1e-6, atol=1e-9)


def test_l2_distance_to_oracle_agrees():
    g = _spiky(0.01)
    assert pl_l2_distance(g, constant(0.0)) == pytest.approx(l2_distance(g, oracle_from_id("constant:0")), rel=1e-8)
