import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optrec.errors import DomainError, InvalidArgument, UnsupportedParameter
from optrec.measurements import mesh_gap, nested_sites
from optrec.splinespace import (FunctionOracle, PiecewiseLinear, SplineSpace, evaluate, interpolate,
                                l2_distance, lp_norm, make_merged_space, make_uniform_space, oracle_from_id,
                                pl_l2_distance, pl_sup_distance, quarter_sqrt, sobolev_seminorm, sup_distance)

from conftest import random_sites, random_spline

# ||f'||_{L_{3/2}} for f = sqrt(x)/4: (4 * 8**-1.5)**(2/3) = 4**(2/3) / 8
QS_DERIV_NORM = 4 ** (2 / 3) / 8
HAT = PiecewiseLinear.from_knots([0, 0.5, 1], [0, 1, 0])
PS = [1.2, 1.5, 2.0, 3.0, math.inf]


def lemma_s(p):
    return 1.0 - max(1.0 / p - 0.5, 0.0)


class TestSpaces:
    def test_uniform_small(self):
        assert np.array_equal(make_uniform_space(1).knots, [0, 1])
        assert np.array_equal(make_uniform_space(2).knots, [0, 0.5, 1])

    def test_uniform_80(self):
        s = make_uniform_space(80)
        assert s.dim == 81 and s.n == 80
        assert np.allclose(s.widths, 0.0125, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("n", [0, -3, 2.5])
    def test_uniform_invalid(self, n):
        with pytest.raises(InvalidArgument):
            make_uniform_space(n)

    def test_merged(self):
        assert np.array_equal(make_merged_space([0, 1], 2).knots, [0, 0.5, 1])
        assert np.array_equal(make_merged_space([0, 0.3, 1], 2).knots, [0, 0.3, 0.5, 1])

    def test_merged_dedups(self):
        s = make_merged_space([0.5 + 1e-14, 0.25], 2)
        assert np.array_equal(s.knots, [0, 0.25, 0.5, 1])

    def test_merged_empty(self):
        with pytest.raises(InvalidArgument):
            make_merged_space([], 4)

    @pytest.mark.parametrize("knots", [[0, 0.5], [0.1, 1], [0, 0.6, 0.4, 1], [0, 0.5, 0.5, 1]])
    def test_space_invariants(self, knots):
        with pytest.raises(InvalidArgument):
            SplineSpace(knots)


class TestEvaluate:
    def test_linear(self):
        assert evaluate(PiecewiseLinear.from_knots([0, 1], [0, 1]), 0.25) == 0.25

    def test_hat(self):
        assert evaluate(HAT, 0.25) == 0.5

    def test_nodal(self, rng):
        for _ in range(50):
            g = random_spline(rng)
            assert np.array_equal(g(g.knots), g.coeffs)

    def test_domain(self):
        with pytest.raises(DomainError):
            evaluate(HAT, 1.01)
        with pytest.raises(DomainError):
            HAT(np.array([-0.2, 0.3]))

    def test_linear_in_coeffs(self, rng):
        for _ in range(50):
            g = random_spline(rng)
            c1, c2 = rng.standard_normal((2, g.space.dim))
            a, b = rng.standard_normal(2)
            x = rng.random(20)
            lhs = PiecewiseLinear(g.space, a * c1 + b * c2)(x)
            rhs = a * PiecewiseLinear(g.space, c1)(x) + b * PiecewiseLinear(g.space, c2)(x)
            assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)


class TestInterpolate:
    def test_linear_reproduction(self):
        S = interpolate([0, 0.5, 1], [0, 0.5, 1])
        assert l2_distance(S, oracle_from_id("linear")) < 1e-15

    def test_hat(self):
        assert interpolate([0, 0.5, 1], [0, 1, 0]) == HAT

    def test_needs_endpoints(self):
        with pytest.raises(InvalidArgument):
            interpolate([0.1, 0.5, 1], [0, 1, 0])

    def test_nodal_bit_exact(self, rng):
        for _ in range(50):
            x = random_sites(rng, int(rng.integers(2, 60)))
            w = rng.standard_normal(x.size)
            S = interpolate(x, w)
            assert all(evaluate(S, xj) == wj for xj, wj in zip(x, w))

    def test_quarter_sqrt_40_sites_in_ball(self):
        x = nested_sites([40], 0xDEC0DE)[0]
        f = quarter_sqrt()
        S = interpolate(x, f(x))
        assert QS_DERIV_NORM == pytest.approx(0.3150, abs=5e-5)
        assert sobolev_seminorm(S, 1.5) <= QS_DERIV_NORM
        assert l2_distance(S, f) <= QS_DERIV_NORM * mesh_gap(x) ** (5 / 6)


class TestNorms:
    def test_seminorm_constant(self):
        assert sobolev_seminorm(PiecewiseLinear.from_knots([0, 0.3, 1], [2, 2, 2]), 1.5) == 0.0

    @pytest.mark.parametrize("p", PS)
    def test_seminorm_identity(self, p, rng):
        knots = random_sites(rng, 9)
        assert sobolev_seminorm(PiecewiseLinear.from_knots(knots, knots), p) == pytest.approx(1.0, rel=1e-14)

    def test_seminorm_hat(self):
        assert sobolev_seminorm(HAT, 1.5) == pytest.approx(2.0, rel=1e-14)

    @pytest.mark.parametrize("p", [1.0, 0.5, -1])
    def test_p_rejected(self, p):
        with pytest.raises(UnsupportedParameter):
            sobolev_seminorm(HAT, p)
        with pytest.raises(UnsupportedParameter):
            lp_norm(HAT, p)

    @pytest.mark.parametrize("p", PS)
    def test_lp_constant_one(self, p):
        assert lp_norm(PiecewiseLinear.from_knots([0, 0.2, 1], [1, 1, 1]), p) == pytest.approx(1.0, rel=1e-14)

    def test_lp_linear_p2(self):
        assert lp_norm(PiecewiseLinear.from_knots([0, 1], [0, 1]), 2) == pytest.approx(1 / math.sqrt(3), rel=1e-15)

    def test_lp_hat_inf(self):
        assert lp_norm(HAT, math.inf) == 1.0

    @pytest.mark.parametrize("p", [1.2, 1.5, 3.0, 4.5])
    def test_lp_against_fine_quadrature(self, p, rng):
        # independent check: midpoint rule on a fine grid
        for _ in range(5):
            g = random_spline(rng, 8)
            x = (np.arange(200_000) + 0.5) / 200_000
            ref = np.mean(np.abs(g(x)) ** p) ** (1 / p)
            assert lp_norm(g, p) == pytest.approx(ref, rel=2e-4)

    def test_gauss_exact_for_even_integer_p(self, rng):
        # |v|^4 is a polynomial of degree 4, integrated exactly by order 8
        g = random_spline(rng, 10)
        a, b, h = g.coeffs[:-1], g.coeffs[1:], g.space.widths
        exact = np.sum(h * (a**4 + a**3 * b + a**2 * b**2 + a * b**3 + b**4) / 5) ** 0.25
        assert lp_norm(g, 4.0) == pytest.approx(exact, rel=1e-13)


class TestDistances:
    def test_l2_self(self, rng):
        g = random_spline(rng)
        assert l2_distance(g, FunctionOracle.from_spline(g)) < 1e-12

    def test_l2_quarter_sqrt_from_zero(self):
        zero = PiecewiseLinear.from_knots([0, 1], [0, 0])
        assert l2_distance(zero, quarter_sqrt()) == pytest.approx(0.25 / math.sqrt(2), rel=1e-10)

    def test_l2_matches_closed_form(self, rng):
        for _ in range(50):
            g, f = random_spline(rng), random_spline(rng)
            assert l2_distance(g, FunctionOracle.from_spline(f)) == pytest.approx(pl_l2_distance(g, f),
                                                                                 rel=1e-10, abs=1e-12)

    def test_l2_singular_accuracy(self):
        # ||sqrt(x)/4 - c||^2 = 1/32 - c/3 + c^2, so the quadrature is checked against closed form
        for c in [0.0, 0.1, 0.3]:
            g = PiecewiseLinear.from_knots([0, 1], [c, c])
            exact = math.sqrt(1 / 32 - c / 3 + c * c)
            assert l2_distance(g, quarter_sqrt()) == pytest.approx(exact, rel=1e-8)

    def test_sup_examples(self):
        zero = PiecewiseLinear.from_knots([0, 1], [0, 0])
        assert sup_distance(zero, oracle_from_id("constant:1")) == 1.0
        assert sup_distance(HAT, FunctionOracle.from_spline(HAT)) == 0.0

    def test_sup_remark_uniform(self):
        x = np.linspace(0, 1, 5)
        f = quarter_sqrt()
        S = interpolate(x, f(x))
        # the largest deviation of a concave function's chord sits on the first interval
        err = sup_distance(S, f)
        first = 0.25 * np.sqrt(np.linspace(0, 0.25, 2001)) - S(np.linspace(0, 0.25, 2001))
        assert err == pytest.approx(np.abs(first).max(), rel=1e-6)
        assert err <= 0.25 ** (1 / 3) * QS_DERIV_NORM

    def test_sup_matches_exact_for_splines(self, rng):
        for _ in range(30):
            g, f = random_spline(rng), random_spline(rng)
            assert sup_distance(g, FunctionOracle.from_spline(f)) == pytest.approx(pl_sup_distance(g, f), rel=1e-12)


class TestOracles:
    def test_ids(self, tmp_path):
        assert oracle_from_id("quarter_sqrt")(0.25) == 0.125
        assert oracle_from_id("linear")(0.3) == 0.3
        assert oracle_from_id("constant:2.5")(0.7) == 2.5
        path = tmp_path / "g.csv"
        path.write_text(HAT.to_csv())
        assert oracle_from_id(f"spline:{path}")(0.25) == 0.5

    @pytest.mark.parametrize("bad", ["nope", "constant:x", "spline:/does/not/exist.csv"])
    def test_bad_ids(self, bad):
        with pytest.raises(InvalidArgument):
            oracle_from_id(bad)

    def test_domain(self):
        with pytest.raises(DomainError):
            quarter_sqrt()(-0.5)


class TestSerialization:
    def test_csv(self, rng):
        g = random_spline(rng)
        text = g.to_csv()
        assert text.startswith("knot,coeff\n")
        assert PiecewiseLinear.from_csv(text) == g

    def test_json(self, rng, tmp_path):
        g = random_spline(rng)
        assert PiecewiseLinear.from_json(g.to_json()) == g
        path = tmp_path / "g.json"
        path.write_text(g.to_json())
        assert PiecewiseLinear.load(path) == g


def _lemma_corpus(seed=7, count=200):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        f = random_spline(rng, int(rng.integers(20, 200)), scale=rng.uniform(0.1, 3))
        x = random_sites(rng, int(rng.integers(2, 40)))
        yield f, x, interpolate(x, f(x))


@pytest.mark.parametrize("p", PS)
def test_interpolant_lemma(p):
    """Seminorm contraction, the h^s L2 bound and the sup-norm bound on 200 random targets."""
    for f, x, S in _lemma_corpus():
        h = mesh_gap(x)
        df = sobolev_seminorm(f, p)
        assert sobolev_seminorm(S, p) <= df + 1e-9
        assert pl_l2_distance(f, S) <= df * h ** lemma_s(p) + 1e-9
        bound = df * h ** (1 - 1 / p)
        assert pl_sup_distance(f, S) <= bound + 1e-9
        assert sup_distance(S, FunctionOracle.from_spline(f)) <= bound + 1e-6


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.001, 0.999), min_size=1, max_size=20, unique=True), st.integers(1, 50))
def test_merged_space_contains_both(sites, n):
    s = make_merged_space(sites, n)
    for v in list(sites) + list(np.linspace(0, 1, n + 1)):
        assert np.min(np.abs(s.knots - v)) <= 1e-12
