import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from lcloc.errors import ArgumentError, CoverageError, DomainError
from lcloc.plcurve import (ExpLinearDensity, PLConcave, StepCDF, SymmetricPLConcave,
                           WeightedSample, convolve_gaussian, convolve_gaussian_cdf, eval_log,
                           hellinger, left_derivative, moments, quantile, right_derivative,
                           segment_cdf, wasserstein)

TENT = PLConcave([-1.0, 0.0, 1.0], [-1.0, 0.0, -1.0])


def uniform(a, b):
    return ExpLinearDensity.from_log(PLConcave([a, b], [0.0, 0.0]))


@st.composite
def concave_curves(draw, max_knots=8):
    n = draw(st.integers(2, max_knots))
    gaps = draw(st.lists(st.floats(0.05, 3.0), min_size=n - 1, max_size=n - 1))
    start = draw(st.floats(-5, 5))
    knots = start + np.concatenate([[0.0], np.cumsum(gaps)])
    s0 = draw(st.floats(-4, 4))
    drops = draw(st.lists(st.floats(0.0, 3.0), min_size=n - 2, max_size=n - 2))
    slopes = s0 - np.concatenate([[0.0], np.cumsum(drops)])
    values = np.concatenate([[0.0], np.cumsum(slopes * np.diff(knots))])
    return PLConcave(knots, values)


class TestEvaluation:
    def test_flat_segment(self):
        assert eval_log(PLConcave([0, 1], [0, 0]), 0.5) == 0.0

    def test_outside_is_minus_inf(self):
        assert eval_log(PLConcave([0, 1], [0, 0]), 2.0) == -np.inf

    def test_interpolation(self):
        assert eval_log(TENT, 0.5) == pytest.approx(-0.5)

    def test_right_derivative_examples(self):
        assert right_derivative(TENT, 0.0) == -1.0
        assert right_derivative(TENT, -0.5) == 1.0
        assert right_derivative(PLConcave([0, 1], [0, 0]), 0.3) == 0.0

    def test_right_derivative_at_last_knot_is_left_slope(self):
        assert right_derivative(TENT, 1.0) == -1.0
        assert left_derivative(TENT, 0.0) == 1.0

    def test_derivative_outside_domain(self):
        with pytest.raises(DomainError):
            right_derivative(TENT, 1.5)

    def test_rejects_convex_values(self):
        with pytest.raises(ArgumentError):
            PLConcave([0, 1, 2], [0, -1, 0])

    def test_rejects_unsorted_knots(self):
        with pytest.raises(ArgumentError):
            PLConcave([0, 0, 1], [0, 0, 0])

    def test_symmetric_curve_is_exactly_even(self):
        s = SymmetricPLConcave.from_half([0.0, 0.7, 2.0], [0.0, -0.3, -2.0])
        x = np.linspace(0, 2, 101) * np.pi / 3.2
        assert np.array_equal(s(x), s(-x))
        assert s.reflect() is s


class TestDensity:
    def test_uniform_cdf(self):
        u = uniform(0, 1)
        assert segment_cdf(u, 0.25) == pytest.approx(0.25, abs=1e-15)
        assert segment_cdf(u, -1.0) == 0.0
        assert segment_cdf(u, 2.0) == 1.0

    def test_tent_cdf_at_center(self):
        assert segment_cdf(ExpLinearDensity.from_log(TENT), 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_quantile_examples(self):
        u = uniform(0, 1)
        assert quantile(u, 0.5) == pytest.approx(0.5)
        assert quantile(u, 0.9) == pytest.approx(0.9)
        assert quantile(ExpLinearDensity.from_log(TENT), 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_quantile_domain(self):
        with pytest.raises(ArgumentError):
            quantile(uniform(0, 1), 1.0)

    def test_moments_uniform(self):
        assert moments(uniform(0, 1)) == pytest.approx((0.5, 1 / 12))
        assert moments(uniform(-1, 1)) == pytest.approx((0.0, 1 / 3))

    def test_moments_tent_against_quadrature(self):
        d = ExpLinearDensity.from_log(PLConcave([-5, 0, 5], [-5, 0, -5]))
        m, v = moments(d)
        q = integrate.quad(lambda t: t * t * d.pdf(t), -5, 5, points=[0])[0]
        assert m == pytest.approx(0.0, abs=1e-14)
        assert v == pytest.approx(q, rel=1e-10)

    @given(concave_curves())
    def test_normalized(self, pl):
        d = ExpLinearDensity.from_log(pl)
        tot = sum(integrate.quad(d.pdf, a, b, epsabs=1e-13)[0]
                  for a, b in zip(d.knots[:-1], d.knots[1:]))
        assert tot == pytest.approx(1.0, abs=1e-9)
        assert d.cdf(d.knots[-1]) == pytest.approx(1.0, abs=1e-12)

    @given(concave_curves(), st.floats(0.001, 0.999))
    def test_quantile_inverts_cdf(self, pl, p):
        d = ExpLinearDensity.from_log(pl)
        assert d.cdf(d.quantile(p)) == pytest.approx(p, abs=1e-10)

    @given(concave_curves())
    def test_partial_moments_match_totals(self, pl):
        d = ExpLinearDensity.from_log(pl)
        F, M1 = d.partial_moments(d.knots[-1])
        assert F == pytest.approx(1.0, abs=1e-12)
        assert M1 == pytest.approx(d.moments()[0], abs=1e-10)

    def test_nearly_flat_segment(self):
        d = ExpLinearDensity.from_log(PLConcave([0.0, 1.0], [0.0, -1e-10]))
        assert d.cdf(0.5) == pytest.approx(0.5, abs=1e-10)


class TestConvolution:
    def test_box_with_unit_gaussian(self):
        val, dl = convolve_gaussian(uniform(-1, 1), 1.0, 0.0)
        assert val == pytest.approx((stats.norm.cdf(1) - stats.norm.cdf(-1)) / 2, abs=1e-14)
        assert val == pytest.approx(0.341345, abs=1e-6)
        assert dl == pytest.approx(0.0, abs=1e-14)

    def test_box_with_narrow_gaussian(self):
        val, _ = convolve_gaussian(uniform(-1, 1), 0.5, 0.0)
        assert val == pytest.approx(0.477250, abs=1e-6)

    @given(concave_curves(max_knots=5), st.floats(0.05, 2.0))
    def test_matches_quadrature(self, pl, sigma):
        d = ExpLinearDensity.from_log(pl)
        xs = np.linspace(d.knots[0] - sigma, d.knots[-1] + sigma, 10)
        got, dl = convolve_gaussian(d, sigma, xs)
        for x, g in zip(xs, got):
            ref = sum(integrate.quad(lambda t: d.pdf(t) * stats.norm.pdf(x - t, scale=sigma),
                                     a, b, epsabs=1e-13)[0]
                      for a, b in zip(d.knots[:-1], d.knots[1:]))
            assert g == pytest.approx(ref, abs=1e-9)
        assert np.all(got > 0) and np.all(np.isfinite(dl))

    @given(concave_curves(max_knots=5), st.floats(0.05, 2.0))
    def test_cdf_integrates_density(self, pl, sigma):
        d = ExpLinearDensity.from_log(pl)
        lo = d.knots[0] - 9 * sigma
        for x in np.linspace(d.knots[0] - sigma, d.knots[-1] + sigma, 4):
            ref = integrate.quad(lambda t: convolve_gaussian(d, sigma, t)[0], lo, x,
                                 points=d.knots[(d.knots > lo) & (d.knots < x)], limit=200)[0]
            assert convolve_gaussian_cdf(d, sigma, x) == pytest.approx(ref, abs=1e-9)

    def test_log_derivative_symmetric_center(self):
        d = ExpLinearDensity.from_log(TENT)
        assert convolve_gaussian(d, 0.7, 0.0)[1] == pytest.approx(0.0, abs=1e-14)


class TestDistances:
    def test_wasserstein_self(self):
        F = StepCDF.from_sample([0.0, 1.0, 3.0])
        assert wasserstein(F, F) == 0.0

    def test_wasserstein_shift(self):
        x = np.array([0.0, 0.4, 1.5])
        assert wasserstein(StepCDF.from_sample(x), StepCDF.from_sample(x + 0.3)) == pytest.approx(0.3)

    def test_wasserstein_uniforms(self):
        assert wasserstein(uniform(0, 1), uniform(0, 2)) == pytest.approx(0.5, abs=1e-9)

    def test_wasserstein_step_vs_density(self):
        u = uniform(0, 1)
        F = StepCDF.from_sample([0.5])
        assert wasserstein(F, u) == pytest.approx(0.25, abs=1e-12)

    @given(st.lists(st.lists(st.floats(-5, 5), min_size=1, max_size=6), min_size=3, max_size=3))
    def test_triangle_inequality(self, samples):
        F, G, H = (StepCDF.from_sample(s) for s in samples)
        assert wasserstein(F, H) <= wasserstein(F, G) + wasserstein(G, H) + 1e-10

    def test_hellinger_examples(self):
        u1, u2 = uniform(0, 1), uniform(0, 2)
        assert hellinger(u1, u1, (0, 1)) == pytest.approx(0.0, abs=1e-8)
        assert hellinger(u1, uniform(2, 3), (0, 3)) == pytest.approx(1.0, abs=1e-8)
        assert hellinger(u1, u2, (0, 2)) == pytest.approx(np.sqrt(1 - 1 / np.sqrt(2)), abs=1e-6)

    def test_hellinger_coverage(self):
        with pytest.raises(CoverageError):
            hellinger(uniform(0, 1), uniform(0, 2), (0, 1))


class TestWeightedSample:
    def test_merges_duplicates(self):
        ws = WeightedSample.from_points([1.0, 0.0, 1.0, 1.0])
        assert list(ws.points) == [0.0, 1.0]
        assert ws.weights == pytest.approx([0.25, 0.75])

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ArgumentError):
            WeightedSample([0.0, 1.0], [0.5, 0.6])

    def test_reflect(self):
        ws = WeightedSample([0.0, 2.0], [0.25, 0.75]).reflect()
        assert list(ws.points) == [-2.0, 0.0]
        assert ws.weights == pytest.approx([0.75, 0.25])
