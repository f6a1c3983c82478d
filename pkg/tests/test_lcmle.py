import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from lcloc import lcmle
from lcloc.errors import ConvergenceError, DegenerateSampleError
from lcloc.plcurve import ExpLinearDensity, PLConcave, WeightedSample, wasserstein
from lcloc.refdist import Laplace, sample

samples = st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=40).filter(
    lambda v: np.ptp(v) > 1e-6)


def fit_points(x, **kw):
    return lcmle.fit(WeightedSample.from_points(x), **kw)


class TestObjective:
    def test_laplace_log_density(self):
        ws = WeightedSample([-1.0, 1.0], [0.5, 0.5])
        pl = PLConcave([-30.0, 0.0, 30.0], [-30 - np.log(2), -np.log(2), -30 - np.log(2)])
        assert lcmle.objective(ws, pl) == pytest.approx(-1 - np.log(2) - 1, abs=1e-12)

    def test_uniform_log_density(self):
        ws = WeightedSample.from_points([0.3, 1.0, 2.2])
        pl = PLConcave([0.0, 4.0], [-np.log(4), -np.log(4)])
        assert lcmle.objective(ws, pl) == pytest.approx(-np.log(4) - 1)

    def test_flat_zero(self):
        ws = WeightedSample([0.0, 1.0], [0.5, 0.5])
        assert lcmle.objective(ws, PLConcave([0, 1], [0, 0])) == pytest.approx(-1.0)

    def test_point_outside_domain(self):
        ws = WeightedSample([0.0, 3.0], [0.5, 0.5])
        assert lcmle.objective(ws, PLConcave([0, 1], [0, 0])) == -np.inf


class TestFit:
    def test_two_points_uniform(self):
        rep = fit_points([0.0, 1.0])
        assert np.allclose(rep.density.logpdf([0.0, 0.5, 1.0]), 0.0, atol=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            fit_points([2.0, 2.0, 2.0])

    def test_laplace_consistency(self):
        x = sample(Laplace(), 500, 11)
        d = fit_points(x).density
        l1 = 0.0
        grid = np.linspace(d.knots[0], d.knots[-1], 20001)
        l1 = np.trapezoid(np.abs(d.pdf(grid) - Laplace().pdf(grid)), grid)
        l1 += 1.0 - (Laplace().cdf(d.knots[-1]) - Laplace().cdf(d.knots[0]))
        assert l1 < 0.15

    def test_convergence_error_carries_best(self):
        x = sample(Laplace(), 200, 3)
        with pytest.raises(ConvergenceError) as err:
            fit_points(x, cfg=lcmle.FitConfig(max_iter=1))
        assert err.value.best is not None

    def test_monotone_ascent(self, rng):
        rep = fit_points(rng.standard_normal(300))
        h = np.asarray(rep.history)
        assert np.all(np.diff(h) >= -1e-12)

    def test_warm_start_same_optimum(self, rng):
        x = rng.standard_normal(200)
        cold = fit_points(x)
        warm = fit_points(x + 1e-3, init=cold.logf.shift(1e-3))
        assert warm.objective == pytest.approx(cold.objective, abs=1e-9)

    @given(samples)
    def test_certificate_and_structure(self, x):
        ws = WeightedSample.from_points(x)
        rep = lcmle.fit(ws)
        assert rep.converged
        D = lcmle.directional_derivatives(ws, rep.logf)
        assert np.max(D) <= 1e-7 * max(1.0, np.ptp(x))
        # pooled ulp-level clusters may sit at their mean
        gap = np.min(np.abs(rep.logf.knots[:, None] - ws.points[None, :]), axis=1)
        assert np.all(gap <= 1e-11 * max(1.0, np.ptp(x)))
        assert rep.logf.knots[0] == ws.points[0] and rep.logf.knots[-1] == ws.points[-1]
        s = rep.logf.slopes
        assert np.all(np.diff(s) <= 1e-12 * max(1.0, np.max(np.abs(s))))

    @given(samples)
    def test_mass_mean_and_objective(self, x):
        ws = WeightedSample.from_points(x)
        rep = lcmle.fit(ws)
        m, _ = rep.density.moments()
        assert m == pytest.approx(ws.mean(), abs=1e-8 * max(1.0, np.ptp(x)))
        inner = float(np.dot(ws.weights, rep.logf(ws.points)))
        assert rep.objective == pytest.approx(inner - 1.0, abs=1e-8)

    @given(samples)
    def test_reflection_equivariance(self, x):
        a = fit_points(x)
        b = fit_points(-np.asarray(x))
        assert a.objective == pytest.approx(b.objective, abs=1e-9)
        probe = np.linspace(min(x), max(x), 17)
        assert np.allclose(a.logf(probe), b.logf(-probe), atol=1e-6)

    def test_fixed_point(self, rng):
        ws = WeightedSample.from_points(rng.logistic(size=150))
        rep = lcmle.fit(ws)
        again = lcmle.fit(ws, init=rep.logf)
        assert again.objective == pytest.approx(rep.objective, abs=1e-9)


def brute_two_point(a, b):
    """Maximize the objective over log-linear densities on ``[a, b]``."""
    def neg(p):
        c, s = p
        pl = PLConcave([a, b], [c, c + s * (b - a)])
        return -lcmle.objective(WeightedSample([a, b], [0.5, 0.5]), pl)
    res = optimize.minimize(neg, [-np.log(b - a), 0.0], method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
    c, s = res.x
    return PLConcave([a, b], [c, c + s * (b - a)])


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (-3.0, 2.0), (10.0, 10.5)])
def test_two_point_brute_force(a, b):
    got = fit_points([a, b]).logf
    ref = brute_two_point(a, b)
    probe = np.linspace(a, b, 11)
    assert np.max(np.abs(got(probe) - ref(probe))) < 1e-5
    assert np.allclose(got(probe), -np.log(b - a), atol=1e-12)


def test_distance_to_truth_shrinks():
    ref = Laplace()
    w = [wasserstein(ExpLinearDensity.from_log(fit_points(sample(ref, n, 5)).logf), ref,
                     window=(-40, 40)) for n in (50, 2000)]
    assert w[1] < w[0]
