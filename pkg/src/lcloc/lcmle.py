"""Weighted log-concave maximum likelihood by an active-set method.

Maximizes ``omega(phi) = sum_i w_i phi(x_i) - int exp(phi)`` over concave
``phi``.  The maximizer is piecewise linear with knots among the data points,
so the search runs over knot sets:

* on a fixed knot set the objective is a smooth concave function of the
  values at the knots, with a tridiagonal Hessian; Newton's method with
  Armijo backtracking solves it exactly;
* if the unconstrained optimum on the knot set is not concave, step back
  towards the current feasible iterate until the first kink vanishes and
  drop that knot;
* once feasible, add the data point with the largest positive directional
  derivative along a hinge ``-(t - x)_+``; stop when none exceeds the
  activation threshold.

Work is done on standardized data (mean 0, sd 1) and mapped back at the end.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from .errors import ConvergenceError, DegenerateSampleError
from .plcurve import ExpLinearDensity, PLConcave, WeightedSample, _segment_integrals

__all__ = ["FitConfig", "FitReport", "fit", "objective", "directional_derivatives",
           "least_concave_majorant"]


@dataclass(frozen=True)
class FitConfig:
    """Solver settings.

    tol : sup-norm bound on the Newton gradient over knot values.
    max_iter : cap on active-set iterations (knot additions and removals).
    activation : a data point becomes a knot when its hinge directional
        derivative (standardized units) exceeds this.
    """

    tol: float = 1e-9
    max_iter: int = 500
    activation: float = 1e-10

    def __post_init__(self):
        if not (self.tol > 0 and self.max_iter > 0 and self.activation > 0):
            raise ValueError("FitConfig fields must be positive")


@dataclass(frozen=True)
class FitReport:
    density: ExpLinearDensity
    objective: float
    iterations: int
    converged: bool
    history: tuple = field(default=(), repr=False)
    certificate: float = float("nan")

    @property
    def logf(self) -> PLConcave:
        return self.density.logf


def objective(ws: WeightedSample, pl: PLConcave) -> float:
    """``sum_i w_i pl(x_i) - int exp(pl)``; ``-inf`` if a weighted point is off the domain."""
    vals = pl(ws.points)
    if np.any(~np.isfinite(vals)):
        return -np.inf
    return float(np.dot(ws.weights, vals) - np.exp(pl.log_mass()))


def least_concave_majorant(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the vertices of the least concave majorant of ``(x, y)``.

    Adjacent slopes are pooled until they are non-increasing.
    """
    keep: list[int] = []
    for i in range(len(x)):
        while len(keep) >= 2:
            a, b = keep[-2], keep[-1]
            s_ab = (y[b] - y[a]) / (x[b] - x[a])
            s_bi = (y[i] - y[b]) / (x[i] - x[b])
            if s_ab <= s_bi:
                keep.pop()
            else:
                break
        keep.append(i)
    return np.asarray(keep, dtype=int)


class _Problem:
    """Standardized weighted data plus the cumulative sums the solver reuses."""

    def __init__(self, z: np.ndarray, w: np.ndarray):
        self.z = z
        self.w = w
        self.m = z.size
        self.Wc = np.cumsum(w)
        self.Sx = np.cumsum(w * z)
        # int_{z_0}^{z_i} F_n
        self.E = np.concatenate([[0.0], np.cumsum(self.Wc[:-1] * np.diff(z))])

    def linear_term(self, K: np.ndarray) -> np.ndarray:
        """Coefficients ``b`` with ``sum_i w_i phi(z_i) = b . v`` for knot values ``v``."""
        z, Wc, Sx = self.z, self.Wc, self.Sx
        p, q = K[:-1], K[1:]
        S0 = Wc[q - 1] - Wc[p]
        S1 = Sx[q - 1] - Sx[p]
        to_q = (S1 - z[p] * S0) / (z[q] - z[p])
        b = self.w[K].copy()
        b[:-1] += S0 - to_q
        b[1:] += to_q
        return b

    def value(self, K, b, v) -> float:
        L = np.diff(self.z[K])
        with np.errstate(over="ignore", invalid="ignore"):
            (a,) = _segment_integrals(v[:-1], v[1:], L, order=0)
            out = float(np.dot(b, v) - np.sum(a))
        return out if np.isfinite(out) else -np.inf

    @staticmethod
    def _unit(b, v, L):
        """Objective and the unit-length segment integrals it was built from."""
        with np.errstate(over="ignore", invalid="ignore"):
            I = _segment_integrals(v[:-1], v[1:], 1.0, order=2)
            f = float(np.dot(b, v) - np.dot(L, I[0]))
        return (f if np.isfinite(f) else -np.inf), I

    @staticmethod
    def _grad_hess(b, L, I):
        I0, I1, I2 = I
        g = b.copy()
        g[:-1] -= L * (I0 - I1)
        g[1:] -= L * I1
        ab = np.empty((2, b.size))
        ab[1, :-1] = L * (I0 - 2.0 * I1 + I2)
        ab[1, -1] = 0.0
        ab[1, 1:] += L * I2
        ab[1] += 1e-12
        ab[0, 0] = 0.0
        ab[0, 1:] = L * (I1 - I2)
        return g, ab

    def newton(self, K, b, v, tol, max_steps=100):
        """Maximize over values at the knots in ``K``, starting from ``v``."""
        L = np.diff(self.z[K])
        f, I = self._unit(b, v, L)
        for _ in range(max_steps):
            g, ab = self._grad_hess(b, L, I)
            if np.max(np.abs(g)) <= tol:
                break
            try:
                step = solveh_banded(ab, g, check_finite=False)
            except np.linalg.LinAlgError:
                step = g / ab[1]
            slope = float(np.dot(g, step))
            t = 1.0
            while t > 1e-14:
                cand = v + t * step
                fc, Ic = self._unit(b, cand, L)
                if fc >= f + 1e-4 * t * slope:
                    break
                t *= 0.5
            else:
                break
            if fc <= f and t < 1.0:
                # no measurable progress left at machine precision
                v, f = cand, max(fc, f)
                break
            v, f, I = cand, fc, Ic
        return v, f

    def bend(self, K, b, v, pos):
        """Line search along the concave hinge at knot ``K[pos]``.

        A freshly inserted knot has zero kink; bending it first keeps the
        next Newton step from pushing it out again at once.
        """
        zK = self.z[K]
        L = np.diff(zK)
        d = -np.maximum(zK - zK[pos], 0.0)
        f, I = self._unit(b, v, L)
        g, ab = self._grad_hess(b, L, I)
        gd = float(np.dot(g, d))
        if not gd > 0:
            return v
        curv = float(np.dot(ab[1], d * d) + 2.0 * np.dot(ab[0, 1:], d[:-1] * d[1:]))
        t = gd / curv if curv > 0 else 1.0
        while t > 1e-14:
            cand = v + t * d
            fc, _ = self._unit(b, cand, L)
            if fc > f:
                return cand
            t *= 0.5
        return v

    def hinge_derivatives(self, K, v) -> np.ndarray:
        """Derivative of the objective along ``-(z_i - x)_+`` for every data point."""
        z = self.z
        zK = z[K]
        L = np.diff(zK)
        a_seg, b_seg = _segment_integrals(v[:-1], v[1:], L, order=1)
        C = np.concatenate([[0.0], np.cumsum(a_seg)])
        P = np.concatenate([[0.0], np.cumsum(zK[:-1] * a_seg + b_seg)])
        j = np.clip(np.searchsorted(zK, z, side="right") - 1, 0, K.size - 2)
        y = z - zK[j]
        s = (v[1:] - v[:-1]) / L
        a, b = _segment_integrals(v[j], v[j] + s[j] * y, y, order=1)
        F = C[j] + a
        M1 = P[j] + zK[j] * a + b
        return z * F - M1 - self.E


def _kinks(zK: np.ndarray, v: np.ndarray) -> np.ndarray:
    s = np.diff(v) / np.diff(zK)
    return np.diff(s)


def _kink_tol(zK, v) -> float:
    s = np.diff(v) / np.diff(zK)
    return 1e-12 * max(1.0, float(np.max(np.abs(s))))


def _initial(prob: _Problem, init: PLConcave | None, mu: float, sd: float):
    z, m = prob.z, prob.m
    if init is None:
        levels = np.linspace(0.0, 1.0, 7)[1:-1]
        idx = np.searchsorted(prob.Wc, levels)
        K = np.unique(np.concatenate([[0, m - 1], np.clip(idx, 0, m - 1)]))
        v = -0.5 * z[K] ** 2 - 0.5 * np.log(2.0 * np.pi)
        return K, v
    kz = (init.knots - mu) / sd
    near = np.clip(np.searchsorted(z, kz), 0, m - 1)
    left = np.clip(near - 1, 0, m - 1)
    pick = np.where(np.abs(z[left] - kz) <= np.abs(z[near] - kz), left, near)
    K = np.unique(np.concatenate([[0, m - 1], pick]))
    zk = z[K]
    vals = np.interp(zk, kz, init.values)
    s = np.diff(init.values) / np.diff(kz)
    vals = np.where(zk < kz[0], init.values[0] + s[0] * (zk - kz[0]), vals)
    vals = np.where(zk > kz[-1], init.values[-1] + s[-1] * (zk - kz[-1]), vals)
    vals = vals + np.log(sd)
    keep = least_concave_majorant(zk, vals)
    return K[keep], vals[keep]


def fit(ws: WeightedSample, cfg: FitConfig | None = None,
        init: PLConcave | None = None) -> FitReport:
    """Log-concave MLE of a weighted sample.

    ``init`` optionally warm-starts the solver from a previous fit on nearby
    data; it only changes the path, not the optimum.
    """
    cfg = cfg or FitConfig()
    x, w = ws.points, ws.weights
    if x.size < 2:
        raise DegenerateSampleError("log-concave MLE needs at least two distinct points")
    mu = float(np.dot(w, x))
    sd = float(np.sqrt(np.dot(w, (x - mu) ** 2)))
    z = (x - mu) / sd
    distinct = np.r_[True, np.diff(z) > 1e-12]
    if not distinct.all():
        # atoms a few ulps apart: pool them so segment lengths stay positive.
        # Interior groups sit at their weighted mean, which keeps mirrored
        # inputs mirrored; the end groups keep the extremes.
        grp = np.cumsum(distinct) - 1
        wg = np.bincount(grp, weights=w)
        xg = np.bincount(grp, weights=w * x) / wg
        xg[0], xg[-1] = x[0], x[-1]
        x, w = xg, wg
        z = (x - mu) / sd
    prob = _Problem(z, w)
    K, v = _initial(prob, init, mu, sd)
    zs = prob.z

    b = prob.linear_term(K)
    history = [prob.value(K, b, v)]
    converged = False
    certificate = np.inf
    last_added = np.array([], dtype=int)
    f_at_add = -np.inf
    multi = True
    it = 0
    for it in range(1, cfg.max_iter + 1):
        b = prob.linear_term(K)
        psi, fpsi = prob.newton(K, b, v, cfg.tol)
        kp = _kinks(zs[K], psi)
        ktol = _kink_tol(zs[K], psi)
        viol = kp > ktol
        if np.any(viol):
            kv = _kinks(zs[K], v)
            with np.errstate(divide="ignore", invalid="ignore"):
                tj = np.where(viol, -kv / (kp - kv), np.inf)
            tj = np.clip(tj, 0.0, 1.0)
            tstar = float(np.min(tj))
            v = v + tstar * (psi - v)
            drop = np.flatnonzero(tj <= tstar + 1e-14) + 1
            blocked = np.isin(K[drop], last_added).any()
            K = np.delete(K, drop)
            v = np.delete(v, drop)
            f_new = prob.value(K, prob.linear_term(K), v)
            # a new knot that leaves again without measurable gain is roundoff
            stalled = f_new <= f_at_add + 1e-13 * max(1.0, abs(f_at_add))
            if blocked and (tstar <= 1e-10 or stalled):
                if multi:
                    # a batch knot was blocked; continue one knot at a time
                    multi = False
                    last_added = np.array([], dtype=int)
                    continue
                # added knot cannot enter: its derivative was roundoff
                converged = True
                break
            history.append(f_new)
            continue
        v = psi
        history.append(fpsi)
        D = prob.hinge_derivatives(K, v)
        D[K] = -np.inf
        j = int(np.argmax(D))
        certificate = float(max(D[j], 0.0)) if np.isfinite(D[j]) else 0.0
        if not D[j] > cfg.activation:
            converged = True
            break
        if multi:
            # best candidate of every gap between knots
            gap = np.searchsorted(K, np.arange(zs.size))
            order = np.lexsort((-D, gap))
            first = order[np.r_[True, gap[order][1:] != gap[order][:-1]]]
            new = np.sort(first[D[first] > max(cfg.activation, 0.1 * D[j])])
        else:
            new = np.array([j])
        allK = np.union1d(K, new)
        v = np.interp(zs[allK], zs[K], v)
        K = allK
        b = prob.linear_term(K)
        for j in new:
            v = prob.bend(K, b, v, int(np.searchsorted(K, j)))
        last_added = new
        f_at_add = fpsi
    # drop knots whose kink is numerically zero so the curve is concave as stored
    while K.size > 2:
        kk = _kinks(zs[K], v)
        bad = np.flatnonzero(kk > -_kink_tol(zs[K], v))
        if bad.size == 0:
            break
        K = np.delete(K, bad[:1] + 1)
        v = np.delete(v, bad[:1] + 1)

    logf = PLConcave(x[K], v - np.log(sd))
    density = ExpLinearDensity.from_log(logf)
    obj = float(np.dot(w, density.logpdf(x)) - density.mass)
    report = FitReport(density, obj, it, converged, tuple(history), certificate)
    if not converged:
        raise ConvergenceError(f"active-set solver did not converge in {cfg.max_iter} iterations",
                               best=report)
    return report


def directional_derivatives(ws: WeightedSample, pl: PLConcave) -> np.ndarray:
    """Hinge directional derivatives of the objective at ``pl``, one per data point.

    In the data's own units.  Nonpositive everywhere (and zero at the knots)
    exactly when ``pl`` is the log-concave MLE of ``ws``.
    """
    x = ws.points
    if pl.lo > x[0] or pl.hi < x[-1]:
        raise ValueError("curve must cover the sample")
    grid = np.union1d(pl.knots, x)
    data = _Problem(x, ws.weights)
    sub = _Problem(grid, np.zeros_like(grid))
    # int F_n is piecewise linear between data points: 0 below x_1, slope 1 above x_m
    sub.E = np.where(grid > x[-1], data.E[-1] + (grid - x[-1]), np.interp(grid, x, data.E))
    D = sub.hinge_derivatives(np.arange(grid.size), pl(grid))
    return D[np.searchsorted(grid, x)]
