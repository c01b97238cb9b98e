import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from optrec.errors import DomainError, InvalidArgument
from optrec.measurements import (DataSample, NoiseVector, add_noise, apply_point_measurements, empirical_norm,
                                 mesh_gap, nested_sites)
from optrec.splinespace import PiecewiseLinear, pl_sup_distance, quarter_sqrt

from conftest import random_sites

finite = st.floats(-1e6, 1e6, allow_nan=False)
vectors = st.integers(1, 30).flatmap(lambda k: arrays(float, k, elements=finite))


class TestEmpiricalNorm:
    def test_zero(self):
        assert empirical_norm([0, 0, 0]) == 0.0

    def test_ones(self):
        assert empirical_norm([1, 1, 1, 1]) == 1.0

    def test_three_four(self):
        assert empirical_norm([3, 4]) == pytest.approx(math.sqrt(12.5), rel=1e-15)

    def test_empty(self):
        with pytest.raises(InvalidArgument):
            empirical_norm([])

    def test_zero_only_for_zero_vector(self):
        assert empirical_norm([0, 0, 1e-300]) > 0

    @settings(max_examples=100, deadline=None)
    @given(vectors, finite)
    def test_homogeneous(self, v, c):
        assert empirical_norm(c * v) == pytest.approx(abs(c) * empirical_norm(v), rel=1e-12, abs=1e-300)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 30).flatmap(lambda k: st.tuples(arrays(float, k, elements=finite),
                                                          arrays(float, k, elements=finite))))
    def test_triangle(self, pair):
        u, v = pair
        assert empirical_norm(u + v) <= empirical_norm(u) + empirical_norm(v) + 1e-9 * (1 + empirical_norm(u))


class TestPointMeasurements:
    def test_zero_function(self):
        out = apply_point_measurements(lambda x: np.zeros_like(x), [0.1, 0.7, 1.0])
        assert np.array_equal(out, np.zeros(3))

    def test_identity(self):
        assert np.array_equal(apply_point_measurements(lambda x: x, [0, 0.5, 1]), [0, 0.5, 1])

    def test_quarter_sqrt(self):
        out = apply_point_measurements(quarter_sqrt(), [0, 0.25, 1])
        assert np.allclose(out, [0, 0.125, 0.25], rtol=0, atol=1e-15)

    def test_scalar_only_callable(self):
        out = apply_point_measurements(lambda x: math.sqrt(x), [0.25, 1.0])
        assert np.allclose(out, [0.5, 1.0])

    @pytest.mark.parametrize("bad", [[-0.1, 0.5], [0.5, 1.0001], [float("nan")]])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            apply_point_measurements(lambda x: x, bad)

    def test_lipschitz_against_sup_distance(self, rng):
        from optrec.splinespace import SplineSpace

        for _ in range(100):
            knots = np.unique(np.concatenate(([0, 1], rng.random(12))))
            g = PiecewiseLinear(SplineSpace(knots), rng.standard_normal(knots.size))
            h = PiecewiseLinear(SplineSpace(knots), rng.standard_normal(knots.size))
            x = rng.random(int(rng.integers(2, 30)))
            lhs = empirical_norm(apply_point_measurements(g, x) - apply_point_measurements(h, x))
            assert lhs <= pl_sup_distance(g, h) + 1e-12


class TestDataSample:
    def test_sorts(self):
        s = DataSample([1.0, 0.0, 0.5], [3.0, 1.0, 2.0])
        assert np.array_equal(s.sites, [0, 0.5, 1]) and np.array_equal(s.values, [1, 2, 3])

    def test_dedup_same_value(self):
        s = DataSample([0.0, 0.5, 0.5 + 1e-13, 1.0], [0, 1, 1, 2])
        assert s.m == 3

    def test_dedup_conflict(self):
        with pytest.raises(InvalidArgument):
            DataSample([0.0, 0.5, 0.5, 1.0], [0, 1, 2, 3])

    def test_needs_two_sites(self):
        with pytest.raises(InvalidArgument):
            DataSample([0.5], [1.0])

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            DataSample([0.0, 1.0], [1.0])

    def test_outside_unit_interval(self):
        with pytest.raises(DomainError):
            DataSample([0.0, 1.5], [1.0, 2.0])

    def test_immutable(self):
        s = DataSample([0.0, 1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_csv_round_trip(self, rng):
        s = DataSample(random_sites(rng, 17), rng.standard_normal(17))
        text = s.to_csv()
        assert text.startswith("site,value\n")
        assert DataSample.from_csv(text) == s

    def test_json_round_trip(self, rng):
        s = DataSample(random_sites(rng, 9), rng.standard_normal(9), 0.25)
        assert DataSample.from_json(s.to_json()) == s
        assert '"gamma": 0.25' in s.to_json()

    def test_json_null_gamma(self):
        s = DataSample([0.0, 1.0], [1.0, 2.0])
        assert '"gamma": null' in s.to_json()
        assert DataSample.from_json(s.to_json()).noise_bound is None


class TestNoise:
    def test_zero_noise(self):
        s = DataSample([0.0, 0.5, 1.0], [1.0, 2.0, 3.0])
        t = add_noise(s, NoiseVector(np.zeros(3), 0.0))
        assert np.array_equal(t.values, s.values) and np.array_equal(t.sites, s.sites)
        assert t.noise_bound == 0.0

    def test_example(self):
        s = DataSample([0.0, 1.0], [1.0, 1.0])
        t = add_noise(s, NoiseVector([0.1, -0.1], 0.1))
        assert np.allclose(t.values, [1.1, 0.9], rtol=0, atol=1e-15)
        assert t.noise_bound == pytest.approx(0.1, rel=1e-15)
        assert t.noise_bound >= empirical_norm([0.1, -0.1])

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            add_noise(DataSample([0.0, 1.0], [1.0, 1.0]), NoiseVector([0.1, 0.1, 0.1], 1.0))

    def test_bound_checked(self):
        with pytest.raises(InvalidArgument):
            NoiseVector([0.2, 0.2], 0.1)

    def test_norm_of_difference(self, rng):
        for _ in range(50):
            m = int(rng.integers(2, 50))
            s = DataSample(random_sites(rng, m), rng.standard_normal(m))
            eta = 0.1 * rng.standard_normal(m)
            t = add_noise(s, NoiseVector(eta, 1.0))
            assert empirical_norm(t.values - s.values) == pytest.approx(empirical_norm(eta), rel=1e-14)
            assert t.noise_bound >= empirical_norm(eta)


class TestMeshGap:
    def test_uniform(self):
        assert mesh_gap([0, 0.5, 1]) == 0.5

    def test_uneven(self):
        assert mesh_gap([0, 0.1, 1]) == pytest.approx(0.9, rel=1e-15)

    def test_unsorted(self):
        with pytest.raises(InvalidArgument):
            mesh_gap([0, 0.6, 0.5, 1])

    def test_too_short(self):
        with pytest.raises(InvalidArgument):
            mesh_gap([0.5])


class TestNestedSites:
    def test_nesting_and_endpoints(self):
        sets = nested_sites([10, 20, 40, 80], 7)
        for a, b in zip(sets, sets[1:]):
            assert set(a.tolist()) <= set(b.tolist())
        for s, m in zip(sets, [10, 20, 40, 80]):
            assert s.size == m and s[0] == 0.0 and s[-1] == 1.0 and np.all(np.diff(s) > 0)

    def test_prefix_independent_of_max(self):
        assert np.array_equal(nested_sites([40], 3)[0], nested_sites([10, 40, 320], 3)[1])

    def test_deterministic(self):
        assert all(np.array_equal(a, b) for a, b in zip(nested_sites([5, 9], 11), nested_sites([5, 9], 11)))

    def test_rejects_non_increasing(self):
        with pytest.raises(InvalidArgument):
            nested_sites([20, 10], 0)
