import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aoiq.distributions import (
    ServiceDistribution,
    deterministic,
    erlang,
    exponential,
    gamma,
    parse_distribution,
    transform_checks,
)

ALL_KINDS = [
    deterministic(1.0),
    exponential(1.0),
    erlang(3, 3.0),
    gamma(0.5, 0.5),
]


def service_dists():
    pos = st.floats(min_value=0.1, max_value=5.0, allow_nan=False, allow_infinity=False)
    return st.one_of(
        pos.map(deterministic),
        pos.map(exponential),
        st.tuples(st.integers(1, 6), pos).map(lambda t: erlang(*t)),
        st.tuples(pos, pos).map(lambda t: gamma(*t)),
    )


class TestClosedForms:
    def test_exponential_at_one(self):
        d = exponential(1.0)
        assert d.laplace(1.0) == pytest.approx(0.5, abs=0)
        assert d.laplace_d1(1.0) == pytest.approx(-0.25, abs=0)
        assert d.laplace_d2(1.0) == pytest.approx(0.25, abs=0)

    def test_deterministic_at_one(self):
        d = deterministic(1.0)
        assert d.laplace(1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
        assert d.laplace_d1(1.0) == pytest.approx(-math.exp(-1.0), rel=1e-15)

    @pytest.mark.parametrize("dist", ALL_KINDS)
    def test_normalization_at_zero(self, dist):
        assert dist.laplace(0.0) == 1.0

    @pytest.mark.parametrize("dist", ALL_KINDS)
    def test_second_derivative_at_zero_is_second_moment(self, dist):
        assert dist.laplace_d2(0.0) == pytest.approx(dist.second_moment(), rel=1e-12)

    @pytest.mark.parametrize("dist", ALL_KINDS)
    def test_negative_s_rejected(self, dist):
        for op in (dist.laplace, dist.laplace_d1, dist.laplace_d2):
            with pytest.raises(ValueError):
                op(-0.5)

    def test_jensen(self):
        for dist in ALL_KINDS:
            assert dist.second_moment() >= dist.mean() ** 2 - 1e-15


class TestValidation:
    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            exponential(0.0)
        with pytest.raises(ValueError):
            deterministic(-1.0)
        with pytest.raises(ValueError):
            erlang(0, 1.0)
        with pytest.raises(ValueError):
            ServiceDistribution("erlang", 2.5, 1.0)
        with pytest.raises(ValueError):
            gamma(1.0, 0.0)
        with pytest.raises(ValueError):
            ServiceDistribution("weibull", 1.0)


@settings(max_examples=80, deadline=None)
@given(dist=service_dists(), s=st.floats(min_value=1e-3, max_value=20.0))
def test_derivative_signs_and_bounds(dist, s):
    g = dist.laplace(s)
    g1 = dist.laplace_d1(s)
    g2 = dist.laplace_d2(s)
    assert 0.0 < g <= 1.0
    assert g1 < 0.0 < g2
    assert abs(g1) <= dist.mean() * (1.0 + 1e-12)
    # P(two arrivals within one service) at rate s lies in [0, 1]
    assert -1e-12 <= 1.0 - g + s * g1 <= 1.0 + 1e-12


@pytest.mark.parametrize("dist", ALL_KINDS)
def test_finite_differences_match_closed_derivatives(dist):
    h = 1e-5
    for s in np.linspace(0.1, 10.0, 34):
        fd1 = (dist.laplace(s + h) - dist.laplace(s - h)) / (2 * h)
        assert fd1 == pytest.approx(dist.laplace_d1(s), rel=1e-4)
        fd2 = (dist.laplace_d1(s + h) - dist.laplace_d1(s - h)) / (2 * h)
        assert fd2 == pytest.approx(dist.laplace_d2(s), rel=1e-4)


class TestSampling:
    def test_deterministic_is_point_mass(self):
        rng = np.random.default_rng(0)
        assert deterministic(2.5).sample(rng) == 2.5
        assert np.all(deterministic(2.5).sample(rng, 10) == 2.5)

    def test_same_seed_same_draws(self):
        for dist in ALL_KINDS:
            a = dist.sample(np.random.default_rng(42), 100)
            b = dist.sample(np.random.default_rng(42), 100)
            assert np.array_equal(a, b)

    @pytest.mark.parametrize(
        "dist", [exponential(1.0), erlang(3, 3.0)], ids=["exp:1", "erlang:3:3"]
    )
    def test_law_of_large_numbers(self, dist):
        rng = np.random.default_rng(7)
        draws = dist.sample(rng, 1_000_000)
        assert abs(np.mean(draws) - 1.0) < 0.01


class TestTransformChecks:
    def test_exponential_grid(self):
        report = transform_checks(exponential(1.0), [0.5, 1.0, 2.0], seed=3)
        assert report.max_rel_error < 0.01

    def test_deterministic_is_exact(self):
        report = transform_checks(deterministic(1.0), [0.3, 1.0, 4.0], n_samples=10_000)
        assert report.max_rel_error < 1e-12

    def test_heavy_gamma(self):
        report = transform_checks(gamma(0.5, 0.5), [1.0], seed=11)
        assert report.max_rel_error < 0.01


class TestSpecGrammar:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("det:1", deterministic(1.0)),
            ("exp:0.5", exponential(0.5)),
            ("erlang:3:3", erlang(3, 3.0)),
            ("gamma:0.5:0.5", gamma(0.5, 0.5)),
        ],
    )
    def test_parse(self, text, expected):
        assert parse_distribution(text) == expected

    @settings(max_examples=60, deadline=None)
    @given(dist=service_dists())
    def test_roundtrip(self, dist):
        assert parse_distribution(dist.spec_string()) == dist

    @pytest.mark.parametrize(
        "text", ["", "norm:1", "exp", "det:0", "erlang:2.5:1", "gamma:1", "exp:1:2"]
    )
    def test_bad_specs(self, text):
        with pytest.raises(ValueError):
            parse_distribution(text)
