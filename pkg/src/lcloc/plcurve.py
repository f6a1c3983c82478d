"""Exact arithmetic for piecewise-linear concave log-densities.

A :class:`PLConcave` is a concave function that is linear between its knots
and ``-inf`` outside ``[knots[0], knots[-1]]``.  Its exponential, once
normalized, is an :class:`ExpLinearDensity`; every integral needed downstream
(mass, CDF, quantile, first two moments, Gaussian convolution) has a closed
form segment by segment.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .errors import ArgumentError, CoverageError, DomainError

__all__ = [
    "PLConcave",
    "SymmetricPLConcave",
    "ExpLinearDensity",
    "WeightedSample",
    "StepCDF",
    "eval_log",
    "right_derivative",
    "segment_cdf",
    "quantile",
    "moments",
    "convolve_gaussian",
    "convolve_gaussian_cdf",
    "wasserstein",
    "hellinger",
    "norm_cdf",
]

_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 16
# column k holds 1 / (m! (m + k + 1)), the series coefficients of J_k
_SERIES_COEF = np.array([[1.0 / (factorial(m) * (m + k + 1)) for k in range(3)]
                         for m in range(_SERIES_TERMS)])


def norm_cdf(x):
    """Standard normal CDF (erfc based, absolute error ~1e-16)."""
    return special.ndtr(x)


def _jk_all(d: np.ndarray, order: int) -> np.ndarray:
    """Rows ``k = 0..order`` of ``int_0^1 u^k exp(d u) du`` for ``d <= 0``."""
    d = np.asarray(d, dtype=float)
    out = np.empty((order + 1,) + d.shape)
    small = d > -_SERIES_CUTOFF
    if np.any(small):
        ds = d[small]
        out[:, small] = (np.vander(ds, _SERIES_TERMS, increasing=True) @ _SERIES_COEF[:, :order + 1]).T
    big = ~small
    if np.any(big):
        db = d[big]
        e = np.exp(db)
        out[0, big] = np.expm1(db) / db
        if order >= 1:
            out[1, big] = (e * (db - 1.0) + 1.0) / db**2
        if order >= 2:
            out[2, big] = (e * (db * db - 2.0 * db + 2.0) - 2.0) / db**3
    return out


def _jk(d: np.ndarray, k: int) -> np.ndarray:
    """``int_0^1 u^k exp(d u) du`` for ``d <= 0``."""
    return _jk_all(d, k)[k]


def _segment_integrals(v0, v1, length, order=2):
    """Integrals ``int_0^L y^k exp(v0 + (v1 - v0) y / L) dy`` for k = 0..order.

    Always evaluated from the higher endpoint so that no exponential
    exceeds ``exp(max(v0, v1))``.
    """
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    L = np.asarray(length, dtype=float)
    d = v1 - v0
    flip = d > 0
    base = np.exp(np.where(flip, v1, v0))
    J = _jk_all(-np.abs(d), order)
    a = base * L * J[0]
    if order == 0:
        return (a,)
    b = base * L**2 * J[1]
    out_b = np.where(flip, L * a - b, b)
    if order == 1:
        return a, out_b
    c = base * L**3 * J[2]
    out_c = np.where(flip, L * L * a - 2.0 * L * b + c, c)
    return a, out_b, out_c


@dataclass(frozen=True)
class PLConcave:
    """Concave, piecewise-linear function on ``[knots[0], knots[-1]]``."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.array(self.knots, dtype=float).ravel()
        v = np.array(self.values, dtype=float).ravel()
        if k.size < 2 or k.size != v.size:
            raise ArgumentError("need at least two knots with matching values")
        if not np.all(np.isfinite(k)) or not np.all(np.isfinite(v)):
            raise ArgumentError("knots and values must be finite")
        if np.any(np.diff(k) <= 0):
            raise ArgumentError("knots must be strictly increasing")
        s = np.diff(v) / np.diff(k)
        if s.size > 1:
            scale = max(1.0, float(np.max(np.abs(s))))
            if np.any(np.diff(s) > 1e-9 * scale):
                raise ArgumentError("values are not concave in the knots")
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    @property
    def lo(self) -> float:
        return float(self.knots[0])

    @property
    def hi(self) -> float:
        return float(self.knots[-1])

    @cached_property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.knots)

    def __call__(self, x):
        return eval_log(self, x)

    def right_derivative(self, x):
        return right_derivative(self, x)

    def reflect(self) -> "PLConcave":
        """The curve ``x -> self(-x)``."""
        return PLConcave(-self.knots[::-1], self.values[::-1])

    def shift(self, c: float) -> "PLConcave":
        """The curve ``x -> self(x - c)``."""
        return PLConcave(self.knots + c, self.values)

    def add_constant(self, c: float) -> "PLConcave":
        return PLConcave(self.knots, self.values + c)

    def log_mass(self) -> float:
        """``log int exp(self)``, computed without overflow."""
        top = float(np.max(self.values))
        (a,) = _segment_integrals(self.values[:-1] - top, self.values[1:] - top,
                                  np.diff(self.knots), order=0)
        return top + float(np.log(np.sum(a)))


class SymmetricPLConcave(PLConcave):
    """Even concave curve, evaluated through its half on ``[0, d]`` so that
    ``f(x) == f(-x)`` holds bit for bit."""

    @classmethod
    def from_half(cls, half_knots, half_values) -> "SymmetricPLConcave":
        hk = np.asarray(half_knots, dtype=float)
        hv = np.asarray(half_values, dtype=float)
        if hk[0] != 0.0 or hk.size < 2:
            raise ArgumentError("half curve must start at 0 and have a positive end")
        if hk[1] == 0.0:
            raise ArgumentError("duplicate knot at 0")
        knots = np.concatenate([-hk[:0:-1], hk])
        values = np.concatenate([hv[:0:-1], hv])
        obj = cls(knots, values)
        hk = hk.copy()
        hv = hv.copy()
        hk.setflags(write=False)
        hv.setflags(write=False)
        object.__setattr__(obj, "half_knots", hk)
        object.__setattr__(obj, "half_values", hv)
        return obj

    def reflect(self) -> "SymmetricPLConcave":
        return self

    def add_constant(self, c: float) -> "SymmetricPLConcave":
        return SymmetricPLConcave.from_half(self.half_knots, self.half_values + c)


def eval_log(pl: PLConcave, x):
    """Linear interpolation on the knots, ``-inf`` off the domain."""
    x = np.asarray(x, dtype=float)
    if isinstance(pl, SymmetricPLConcave):
        out = np.interp(np.abs(x), pl.half_knots, pl.half_values)
    else:
        out = np.interp(x, pl.knots, pl.values)
    out = np.where((x < pl.knots[0]) | (x > pl.knots[-1]), -np.inf, out)
    return out if out.ndim else float(out)


def _segment_index(knots: np.ndarray, x: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(knots, x, side="right") - 1
    return np.clip(idx, 0, knots.size - 2)


def right_derivative(pl: PLConcave, x):
    """Slope of the segment to the right of ``x``; left slope at the last knot."""
    x = np.asarray(x, dtype=float)
    if np.any((x < pl.knots[0]) | (x > pl.knots[-1])) or np.any(np.isnan(x)):
        raise DomainError("right_derivative evaluated outside the domain")
    out = pl.slopes[_segment_index(pl.knots, x)]
    return out if out.ndim else float(out)


def left_derivative(pl: PLConcave, x):
    """Slope to the left of ``x``; right slope at the first knot."""
    x = np.asarray(x, dtype=float)
    if np.any((x < pl.knots[0]) | (x > pl.knots[-1])) or np.any(np.isnan(x)):
        raise DomainError("left_derivative evaluated outside the domain")
    idx = np.clip(np.searchsorted(pl.knots, x, side="left") - 1, 0, pl.knots.size - 2)
    out = pl.slopes[idx]
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ExpLinearDensity:
    """``exp(logf)``, normalized so that it integrates to one."""

    logf: PLConcave
    mass: float = 1.0

    @classmethod
    def from_log(cls, pl: PLConcave) -> "ExpLinearDensity":
        """Normalize an arbitrary concave curve into a density."""
        logf = pl.add_constant(-pl.log_mass())
        obj = cls(logf, 1.0)
        object.__setattr__(obj, "mass", float(obj._seg[0].sum()))
        return obj

    @property
    def knots(self) -> np.ndarray:
        return self.logf.knots

    @property
    def support(self) -> tuple[float, float]:
        return self.logf.lo, self.logf.hi

    @cached_property
    def _seg(self):
        k, v = self.logf.knots, self.logf.values
        return _segment_integrals(v[:-1], v[1:], np.diff(k), order=2)

    @cached_property
    def _cum(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self._seg[0])])

    @cached_property
    def _cum_first(self) -> np.ndarray:
        k = self.logf.knots
        a, b, _ = self._seg
        return np.concatenate([[0.0], np.cumsum(k[:-1] * a + b)])

    def pdf(self, x):
        out = np.exp(eval_log(self.logf, x))
        return out

    def logpdf(self, x):
        return eval_log(self.logf, x)

    __call__ = pdf

    def score(self, x):
        """Right derivative of the log-density."""
        return right_derivative(self.logf, x)

    def cdf(self, x):
        return segment_cdf(self, x)

    def sf(self, x):
        """Upper tail ``1 - F(x)``, accumulated from the right end."""
        x = np.asarray(x, dtype=float)
        F, _ = self._partial(x)
        total = self._cum[-1]
        out = np.clip(total - F, 0.0, 1.0)
        return out if out.ndim else float(out)

    def quantile(self, p):
        return quantile(self, p)

    def moments(self) -> tuple[float, float]:
        return moments(self)

    def _partial(self, x):
        """``(int_lo^x f, int_lo^x t f(t) dt)`` for ``x`` clipped to the support."""
        k, v, s = self.logf.knots, self.logf.values, self.logf.slopes
        xc = np.clip(x, k[0], k[-1])
        j = _segment_index(k, xc)
        y = xc - k[j]
        vend = v[j] + s[j] * y
        a, b = _segment_integrals(v[j], vend, y, order=1)
        F = self._cum[j] + a
        M1 = self._cum_first[j] + k[j] * a + b
        return F, M1

    def partial_moments(self, x):
        """Mass and first moment of the density on ``(-inf, x]``."""
        F, M1 = self._partial(np.asarray(x, dtype=float))
        return F, M1

    def convolve_gaussian(self, sigma: float, x):
        return convolve_gaussian(self, sigma, x)


def segment_cdf(d: ExpLinearDensity, x):
    """Distribution function, exact per segment; clamps to 0/1 off the support."""
    x = np.asarray(x, dtype=float)
    F, _ = d._partial(x)
    F = np.where(x < d.knots[0], 0.0, F)
    F = np.where(x >= d.knots[-1], 1.0, F)
    out = np.clip(F, 0.0, 1.0)
    return out if out.ndim else float(out)


def quantile(d: ExpLinearDensity, p):
    """Closed-form inverse of :func:`segment_cdf` on ``(0, 1)``."""
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise ArgumentError("quantile level must lie in (0, 1)")
    k, v, s = d.logf.knots, d.logf.values, d.logf.slopes
    cum = d._cum
    j = np.clip(np.searchsorted(cum, p, side="right") - 1, 0, k.size - 2)
    r = np.maximum(p - cum[j], 0.0)
    L = k[j + 1] - k[j]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        rel = np.exp(np.log(r) - v[j])  # r * exp(-v_j), no overflow
        u = s[j] * rel
        ratio = np.where(np.abs(u) < 1e-12, 1.0 - u / 2.0, np.log1p(u) / u)
        y = np.where(u <= -1.0, L, rel * ratio)
    y = np.where(np.isfinite(y), y, L)
    out = k[j] + np.clip(y, 0.0, L)
    return out if out.ndim else float(out)


def moments(d: ExpLinearDensity) -> tuple[float, float]:
    """Mean and variance from closed-form segment integrals."""
    k = d.logf.knots
    a, b, _ = d._seg
    total = a.sum()
    mean = float(np.sum(k[:-1] * a + b) / total)
    # second moment re-centred at the mean to avoid cancellation
    v = d.logf.values
    _, b2, c2 = _segment_integrals(v[:-1], v[1:], np.diff(k), order=2)
    c = k[:-1] - mean
    var = float(np.sum(c * c * a + 2.0 * c * b2 + c2) / total)
    return mean, max(var, 0.0)


def _log_phi_diff(lo, hi):
    """``log(Phi(hi) - Phi(lo))`` for ``lo < hi``, stable in both tails."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    out = np.empty(np.broadcast(lo, hi).shape)
    lo, hi = np.broadcast_arrays(lo, hi)
    left = hi <= 0
    right = lo >= 0
    mid = ~(left | right)
    with np.errstate(divide="ignore"):
        if np.any(left):
            a, b = special.log_ndtr(lo[left]), special.log_ndtr(hi[left])
            out[left] = b + np.log(-np.expm1(a - b))
        if np.any(right):
            a, b = special.log_ndtr(-hi[right]), special.log_ndtr(-lo[right])
            out[right] = b + np.log(-np.expm1(a - b))
        if np.any(mid):
            out[mid] = np.log(special.ndtr(hi[mid]) - special.ndtr(lo[mid]))
    return out


_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def convolve_gaussian(d: ExpLinearDensity, sigma: float, x):
    """Value and log-derivative of ``(f * N(0, sigma^2))(x)``.

    Each linear piece ``exp(a + b t)`` on ``[k1, k2]`` contributes
    ``exp(a + b x + b^2 sigma^2 / 2) [Phi(u2) - Phi(u1)]`` with
    ``u = (k - x - b sigma^2) / sigma``.
    """
    if not sigma > 0:
        raise ArgumentError("sigma must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k, v, s = d.logf.knots, d.logf.values, d.logf.slopes
    icpt = v[:-1] - s * k[:-1]
    X = x[:, None]
    E = icpt + s * X + 0.5 * (s * sigma) ** 2
    shift = X + s * sigma**2
    u1 = (k[:-1] - shift) / sigma
    u2 = (k[1:] - shift) / sigma
    logT = E + _log_phi_diff(u1, u2)
    top = np.max(logT, axis=1, keepdims=True)
    T = np.exp(logT - top)
    dens_scaled = T.sum(axis=1)
    phi1 = np.exp(E - 0.5 * u1 * u1 - _LOG_SQRT_2PI - top)
    phi2 = np.exp(E - 0.5 * u2 * u2 - _LOG_SQRT_2PI - top)
    deriv_scaled = (s * T).sum(axis=1) + ((phi1 - phi2) / sigma).sum(axis=1)
    dens = dens_scaled * np.exp(top[:, 0])
    logder = deriv_scaled / dens_scaled
    if dens.size == 1:
        return float(dens[0]), float(logder[0])
    return dens, logder


def _antideriv_ndtr(t):
    """``int_{-inf}^t Phi``."""
    return t * special.ndtr(t) + np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi)


def convolve_gaussian_cdf(d: ExpLinearDensity, sigma: float, x):
    """Distribution function of ``f * N(0, sigma^2)`` at ``x``.

    Per segment, integration by parts against ``Phi((x - u)/sigma)`` reduces
    to the density pieces of :func:`convolve_gaussian`; nearly flat segments
    use the midpoint value and the antiderivative of ``Phi`` instead.
    """
    if not sigma > 0:
        raise ArgumentError("sigma must be positive")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    k, v, s = d.logf.knots, d.logf.values, d.logf.slopes
    L = np.diff(k)
    X = xa[:, None]
    icpt = v[:-1] - s * k[:-1]
    E = icpt + s * X + 0.5 * (s * sigma) ** 2
    shift = X + s * sigma**2
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        piece = np.exp(E + _log_phi_diff((k[:-1] - shift) / sigma, (k[1:] - shift) / sigma))
        piece = np.where(np.isfinite(piece), piece, 0.0)
        c1 = special.ndtr((X - k[:-1]) / sigma)
        c2 = special.ndtr((X - k[1:]) / sigma)
        steep = (np.exp(v[1:]) * c2 - np.exp(v[:-1]) * c1 + piece) / s
    flat_val = np.exp(0.5 * (v[:-1] + v[1:])) * sigma * (
        _antideriv_ndtr((X - k[:-1]) / sigma) - _antideriv_ndtr((X - k[1:]) / sigma))
    seg = np.where(np.abs(s * L) < 1e-4, flat_val, steep)
    out = np.clip(seg.sum(axis=1) / d.mass, 0.0, 1.0)
    return float(out[0]) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class WeightedSample:
    """Atoms with nonnegative weights summing to one, sorted and de-duplicated."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.points, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if x.size != w.size or x.size == 0:
            raise ArgumentError("points and weights must be nonempty and of equal length")
        if np.any(w < 0) or not np.all(np.isfinite(x)):
            raise ArgumentError("weights must be nonnegative and points finite")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ArgumentError(f"weights sum to {w.sum()!r}, expected 1")
        keep = w > 0
        x, w = x[keep], w[keep]
        ux, inv = np.unique(x, return_inverse=True)
        uw = np.bincount(inv, weights=w, minlength=ux.size)
        ux.setflags(write=False)
        uw.setflags(write=False)
        object.__setattr__(self, "points", ux)
        object.__setattr__(self, "weights", uw)

    @classmethod
    def from_points(cls, x: Sequence[float]) -> "WeightedSample":
        x = np.asarray(x, dtype=float).ravel()
        return cls(x, np.full(x.size, 1.0 / x.size))

    def __len__(self) -> int:
        return self.points.size

    def mean(self) -> float:
        return float(np.dot(self.points, self.weights))

    def reflect(self) -> "WeightedSample":
        return WeightedSample(-self.points, self.weights)

    def step_cdf(self) -> "StepCDF":
        return StepCDF(self.points, np.minimum(np.cumsum(self.weights), 1.0))


@dataclass(frozen=True)
class StepCDF:
    """Right-continuous step distribution function."""

    jumps: np.ndarray
    cum: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.jumps, dtype=float).ravel()
        c = np.asarray(self.cum, dtype=float).ravel()
        if j.size == 0 or j.size != c.size:
            raise ArgumentError("jumps and cumulative masses must match and be nonempty")
        if np.any(np.diff(j) <= 0) or np.any(np.diff(c) < 0):
            raise ArgumentError("jumps must increase and masses be nondecreasing")
        if abs(c[-1] - 1.0) > 1e-12:
            raise ArgumentError("final cumulative mass must be 1")
        object.__setattr__(self, "jumps", j)
        object.__setattr__(self, "cum", c)

    @classmethod
    def from_sample(cls, x) -> "StepCDF":
        return WeightedSample.from_points(x).step_cdf()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.jumps, x, side="right") - 1
        out = np.where(idx < 0, 0.0, self.cum[np.maximum(idx, 0)])
        return out if out.ndim else float(out)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.jumps[0]), float(self.jumps[-1])


def _integral_of_cdf(d: ExpLinearDensity, x):
    """``int_{lo}^{x} F(t) dt`` = ``x F(x) - int_lo^x t f(t) dt``."""
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, d.knots[0], d.knots[-1])
    F, M1 = d._partial(xc)
    return xc * F - M1 + np.maximum(x - d.knots[-1], 0.0)


def _w_step_step(F: StepCDF, G: StepCDF) -> float:
    pts = np.union1d(F.jumps, G.jumps)
    diff = np.abs(F(pts[:-1]) - G(pts[:-1]))
    return float(np.sum(diff * np.diff(pts)))


def _w_step_density(F: StepCDF, G: ExpLinearDensity) -> float:
    lo = min(F.jumps[0], G.knots[0])
    hi = max(F.jumps[-1], G.knots[-1])
    pts = np.union1d(np.union1d(F.jumps, G.knots), [lo, hi])
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        c = float(F(a))
        Ga, Gb = float(segment_cdf(G, a)), float(segment_cdf(G, b))
        IG = lambda t: float(_integral_of_cdf(G, t))  # noqa: E731
        if Ga >= c:
            total += IG(b) - IG(a) - c * (b - a)
        elif Gb <= c:
            total += c * (b - a) - (IG(b) - IG(a))
        else:
            q = float(np.clip(quantile(G, min(max(c, 1e-300), 1 - 1e-16)), a, b))
            total += c * (q - a) - (IG(q) - IG(a))
            total += IG(b) - IG(q) - c * (b - q)
    return max(total, 0.0)


def _support_of(F):
    if isinstance(F, StepCDF):
        return F.support
    if isinstance(F, ExpLinearDensity):
        return F.support
    return None


def _cdf_of(F) -> Callable:
    if isinstance(F, ExpLinearDensity):
        return F.cdf
    if isinstance(F, StepCDF):
        return F
    if hasattr(F, "cdf"):
        return F.cdf
    return F


def _breaks_of(F):
    if isinstance(F, StepCDF):
        return F.jumps
    if isinstance(F, ExpLinearDensity):
        return F.knots
    return np.array([])


def wasserstein(F, G, window: tuple[float, float] | None = None) -> float:
    """``int |F - G|`` between two distributions.

    Step/step and step/exp-linear pairs are integrated exactly between merged
    breakpoints.  Anything else (two densities, or an analytic CDF given as an
    object with ``.cdf`` or a callable) is integrated by adaptive quadrature on
    the merged breakpoints; analytic CDFs need an explicit ``window``.
    """
    if isinstance(F, StepCDF) and isinstance(G, StepCDF):
        return _w_step_step(F, G)
    if isinstance(F, StepCDF) and isinstance(G, ExpLinearDensity):
        return _w_step_density(F, G)
    if isinstance(G, StepCDF) and isinstance(F, ExpLinearDensity):
        return _w_step_density(G, F)
    supports = [s for s in (_support_of(F), _support_of(G)) if s is not None]
    if window is None:
        if len(supports) < 2:
            raise ArgumentError("an analytic CDF needs an explicit integration window")
        window = (min(s[0] for s in supports), max(s[1] for s in supports))
    lo, hi = window
    cf, cg = _cdf_of(F), _cdf_of(G)
    pts = np.union1d(_breaks_of(F), _breaks_of(G))
    pts = np.union1d(pts[(pts > lo) & (pts < hi)], [lo, hi])
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(lambda t: abs(float(cf(t)) - float(cg(t))), a, b,
                                limit=200, epsabs=1e-12, epsrel=1e-10)
        total += val
    return total


def _density_callable(f):
    if isinstance(f, ExpLinearDensity):
        return f.pdf
    if hasattr(f, "pdf"):
        return f.pdf
    return f


def hellinger(f, g, window: tuple[float, float], points: Sequence[float] = (),
              coverage: float = 1e-8) -> float:
    """Hellinger distance ``H`` with ``H^2 = (1/2) int (sqrt f - sqrt g)^2``.

    ``window`` must carry at least ``1 - coverage`` of each density's mass;
    ``points`` lists known discontinuities/kinks inside it.
    """
    lo, hi = map(float, window)
    if not hi > lo:
        raise ArgumentError("empty window")
    pf, pg = _density_callable(f), _density_callable(g)
    pts = np.asarray(list(points), dtype=float)
    pts = np.concatenate([pts, _breaks_of(f), _breaks_of(g)])
    pts = np.union1d(pts[(pts > lo) & (pts < hi)], [lo, hi])

    def piecewise(fun):
        tot = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            val, _ = integrate.quad(fun, a, b, limit=200, epsabs=1e-11, epsrel=1e-10)
            tot += val
        return tot

    for name, p in (("first", pf), ("second", pg)):
        m = piecewise(lambda t: float(p(t)))
        if m < 1.0 - coverage:
            raise CoverageError(f"window covers only {m:.12f} of the {name} density")
    h2 = 0.5 * piecewise(lambda t: (np.sqrt(float(pf(t))) - np.sqrt(float(pg(t)))) ** 2)
    return float(np.sqrt(min(max(h2, 0.0), 1.0)))
