"""One-step location estimators built on symmetric density estimates.

A preliminary center ``theta_bar`` is corrected by one Newton step on the
estimated score of the centered density:

    theta_tilde = theta_bar - (1/n) sum_{window} score(x_i - theta_bar) / info

where the window is ``|x_i - theta_bar| <= xi`` with ``xi`` the ``1 - eta``
quantile of the density estimate (all finite-score points when untruncated).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, stats

from . import lcmle, symmle
from .errors import ArgumentError, DegenerateInformationError, DomainError
from .plcurve import (ExpLinearDensity, SymmetricPLConcave, WeightedSample, convolve_gaussian,
                      convolve_gaussian_cdf, left_derivative)
from .refdist import RefDensity

__all__ = [
    "Preliminary",
    "DensityKind",
    "FisherVariant",
    "OneStepConfig",
    "OneStepReport",
    "SymmetricDensityModel",
    "SymModel",
    "SmoothedSymModel",
    "LogConcaveModel",
    "ReferenceModel",
    "preliminary",
    "estimate_density",
    "fisher_hat",
    "one_step",
    "raw_fit",
    "INFO_FLOOR",
]

INFO_FLOOR = 1e-12


@dataclass(frozen=True)
class Preliminary:
    """Preliminary center: ``mean``, ``median``, ``trimmed`` (with ``alpha``) or ``logistic``."""

    kind: str = "mean"
    alpha: float = 0.125

    def __post_init__(self):
        if self.kind not in ("mean", "median", "trimmed", "logistic"):
            raise ArgumentError(f"unknown preliminary estimator {self.kind!r}")
        if not 0.0 <= self.alpha < 0.5:
            raise ArgumentError("trimming fraction must lie in [0, 0.5)")

    @property
    def label(self) -> str:
        return {"mean": "mean", "median": "median", "trimmed": "trim", "logistic": "logis"}[
            self.kind]


class DensityKind(str, enum.Enum):
    SYM = "sym"
    SMOOTH = "smooth"
    PMLE = "pmle"
    GEO = "geo"


class FisherVariant(str, enum.Enum):
    EMPIRICAL = "empirical"
    MODEL = "model"
    UNTRUNCATED = "untruncated"


@dataclass(frozen=True)
class OneStepConfig:
    preliminary: Preliminary = field(default_factory=Preliminary)
    density: DensityKind = DensityKind.PMLE
    eta: float = 0.002
    truncated: bool = True
    fisher: FisherVariant = FisherVariant.EMPIRICAL

    def __post_init__(self):
        if not 0.0 < self.eta < 0.5:
            raise ArgumentError("eta must lie in (0, 1/2)")
        object.__setattr__(self, "density", DensityKind(self.density))
        object.__setattr__(self, "fisher", FisherVariant(self.fisher))

    @property
    def label(self) -> str:
        return f"os_{self.density.value}_{self.preliminary.label}_{'t' if self.truncated else 'u'}"


def _as_sample(sample) -> np.ndarray:
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size < 2 or not np.all(np.isfinite(x)):
        raise ArgumentError("need at least two finite observations")
    return x


def _logistic_center(x: np.ndarray) -> float:
    # sum tanh((x_i - t)/2) is strictly decreasing in t and changes sign on [x_1, x_n]
    fun = lambda t: float(np.sum(np.tanh(0.5 * (x - t))))  # noqa: E731
    lo, hi = float(x[0]), float(x[-1])
    if lo == hi:
        return lo
    return float(optimize.brentq(fun, lo, hi, xtol=1e-10))


def preliminary(sample, kind: Preliminary = Preliminary()) -> float:
    x = _as_sample(sample)
    if kind.kind == "mean":
        return math.fsum(x) / x.size
    if kind.kind == "median":
        return float(np.median(x))
    if kind.kind == "trimmed":
        k = int(np.floor(x.size * kind.alpha))
        if x.size - 2 * k < 1:
            raise ArgumentError("trimming leaves no observations")
        return float(stats.trim_mean(x, kind.alpha))
    return _logistic_center(x)


class SymmetricDensityModel:
    """Centered symmetric density estimate; ``z`` is measured from ``theta_bar``."""

    kind: DensityKind
    theta_bar: float

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([0.0])

    def pdf(self, z):
        raise NotImplementedError

    def score(self, z):
        raise NotImplementedError

    def cdf(self, z):
        raise NotImplementedError

    def score_at_data(self, x):
        """Score of ``x - theta_bar``; subclasses built on a raw fit avoid the round trip."""
        return self.score(np.asarray(x, dtype=float) - self.theta_bar)

    def quantile(self, p: float) -> float:
        """Upper quantile by root finding on the CDF (``p >= 1/2`` by symmetry)."""
        if not 0.0 < p < 1.0:
            raise ArgumentError("quantile level must lie in (0, 1)")
        if p < 0.5:
            return -self.quantile(1.0 - p)
        hi = self.support[1]
        if not np.isfinite(hi):
            hi = 1.0
            while self.cdf(hi) < p:
                hi *= 2.0
        if p == 0.5:
            return 0.0
        return float(optimize.brentq(lambda t: self.cdf(t) - p, 0.0, hi, xtol=1e-12))


def _out(a):
    a = np.asarray(a, dtype=float)
    return a if a.ndim else float(a)


_SNAP = 1e-11


def _snap(t: np.ndarray, knots: np.ndarray) -> np.ndarray:
    """Move points within rounding distance of a knot onto it.

    Knots sit at data points; a mirrored data point lands an ulp or so away
    and would otherwise pick up the slope of the wrong side.
    """
    if t.size == 0:
        return t
    tol = _SNAP * max(1.0, float(np.max(np.abs(knots))))
    i = np.clip(np.searchsorted(knots, t), 1, knots.size - 1)
    near = np.where(t - knots[i - 1] <= knots[i] - t, knots[i - 1], knots[i])
    return np.where(np.abs(t - near) <= tol, near, t)


@dataclass(frozen=True)
class LogConcaveModel(SymmetricDensityModel):
    """PartialMLE or GeoSym: an exactly symmetric exp-linear density."""

    kind: DensityKind
    theta_bar: float
    density: ExpLinearDensity
    normalizer: float = 1.0

    @property
    def support(self):
        return self.density.support

    @property
    def breakpoints(self):
        return self.density.knots

    def pdf(self, z):
        return self.density.pdf(z)

    def score(self, z):
        """Odd score: right derivative for ``z > 0`` (left at the end), mirrored below 0."""
        z = np.asarray(z, dtype=float)
        lo, hi = self.support
        inside = (z >= lo) & (z <= hi)
        out = np.full(z.shape, np.nan)
        if np.any(inside):
            zi = _snap(np.abs(z[inside]), self.density.knots)
            out[inside] = np.sign(z[inside]) * self.density.score(zi)
        return _out(out)

    def cdf(self, z):
        return self.density.cdf(z)

    def quantile(self, p: float) -> float:
        return float(self.density.quantile(p))


@dataclass(frozen=True)
class SymModel(SymmetricDensityModel):
    """Average of the raw log-concave fit and its reflection about ``theta_bar``."""

    theta_bar: float
    fhat: ExpLinearDensity
    kind: DensityKind = DensityKind.SYM

    @property
    def support(self):
        lo, hi = self.fhat.support
        d = max(hi - self.theta_bar, self.theta_bar - lo)
        return -d, d

    @property
    def breakpoints(self):
        k = self.fhat.knots - self.theta_bar
        return np.union1d(k, -k)

    def _parts(self, z):
        z = np.asarray(z, dtype=float)
        return self.theta_bar + z, self.theta_bar - z

    def pdf(self, z):
        a, b = self._parts(z)
        return _out(0.5 * (self.fhat.pdf(a) + self.fhat.pdf(b)))

    def _slopes(self, t, right):
        """One-sided slopes of ``log fhat``; ``right`` is a boolean mask."""
        lo, hi = self.fhat.support
        t = _snap(t, self.fhat.knots)
        inside = (t >= lo) & (t <= hi)
        out = np.zeros(t.shape)
        r = inside & right
        le = inside & ~right
        if np.any(r):
            out[r] = self.fhat.logf.right_derivative(t[r])
        if np.any(le):
            out[le] = left_derivative(self.fhat.logf, t[le])
        return out

    def score(self, z):
        """Odd score: right derivative of ``log g`` for ``z > 0``, mirrored for ``z < 0``."""
        a, b = self._parts(np.atleast_1d(np.asarray(z, dtype=float)))
        return self._score_ab(a, b, z)

    def score_at_data(self, x):
        # data sit on knots of the raw fit: keep them exact
        a = np.atleast_1d(np.asarray(x, dtype=float))
        return self._score_ab(a, 2.0 * self.theta_bar - a, a - self.theta_bar)

    def _score_ab(self, a, b, z):
        zf = np.atleast_1d(np.asarray(z, dtype=float)).ravel()
        a, b = a.ravel(), b.ravel()
        fa, fb = self.fhat.pdf(a), self.fhat.pdf(b)
        # slopes of fhat taken away from theta_bar, inward at the support ends
        at_end = np.abs(zf) == self.support[1]
        right_a = (zf > 0) != at_end
        num = fa * self._slopes(a, right_a) - fb * self._slopes(b, ~right_a)
        den = fa + fb
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(den > 0, num / den, np.nan)
        out[zf == 0] = 0.0
        return _out(out.reshape(np.shape(z)))

    def cdf(self, z):
        a, b = self._parts(z)
        return _out(0.5 * (self.fhat.cdf(a) + self.fhat.sf(b)))


@dataclass(frozen=True)
class SmoothedSymModel(SymmetricDensityModel):
    """Sym model convolved with ``N(0, b^2)``; ``b`` from the variance gap."""

    theta_bar: float
    fhat: ExpLinearDensity
    bandwidth: float
    clamped: bool = False
    kind: DensityKind = DensityKind.SMOOTH

    @property
    def _sym(self) -> SymModel:
        return SymModel(self.theta_bar, self.fhat)

    @property
    def support(self):
        if self.clamped:
            return self._sym.support
        return -np.inf, np.inf

    @property
    def breakpoints(self):
        return self._sym.breakpoints

    def _parts(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return self.theta_bar + z, self.theta_bar - z

    def pdf(self, z):
        if self.clamped:
            return self._sym.pdf(z)
        a, b = self._parts(z)
        fa, _ = convolve_gaussian(self.fhat, self.bandwidth, a)
        fb, _ = convolve_gaussian(self.fhat, self.bandwidth, b)
        return _out((0.5 * (np.atleast_1d(fa) + np.atleast_1d(fb))).reshape(np.shape(z)))

    def score(self, z):
        if self.clamped:
            return self._sym.score(z)
        a, b = self._parts(z)
        return self._score_ab(a, b, z)

    def score_at_data(self, x):
        if self.clamped:
            return self._sym.score_at_data(x)
        a = np.atleast_1d(np.asarray(x, dtype=float))
        return self._score_ab(a, 2.0 * self.theta_bar - a, a - self.theta_bar)

    def _score_ab(self, a, b, z):
        fa, la = (np.atleast_1d(v) for v in convolve_gaussian(self.fhat, self.bandwidth, a))
        fb, lb = (np.atleast_1d(v) for v in convolve_gaussian(self.fhat, self.bandwidth, b))
        den = fa + fb
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(den > 0, (fa * la - fb * lb) / den, np.nan)
        return _out(out.reshape(np.shape(z)))

    def cdf(self, z):
        if self.clamped:
            return self._sym.cdf(z)
        a, b = self._parts(z)
        Fa = np.atleast_1d(convolve_gaussian_cdf(self.fhat, self.bandwidth, a))
        Fb = np.atleast_1d(convolve_gaussian_cdf(self.fhat, self.bandwidth, b))
        return _out((0.5 * (Fa + 1.0 - Fb)).reshape(np.shape(z)))


@dataclass(frozen=True)
class ReferenceModel(SymmetricDensityModel):
    """Analytic density plugged in as the model; for checks against exact scores."""

    ref: RefDensity
    theta_bar: float = 0.0
    kind: str = "reference"

    @property
    def support(self):
        return self.ref.support

    @property
    def breakpoints(self):
        return np.asarray(self.ref.breakpoints)

    def pdf(self, z):
        return self.ref.pdf(z)

    def score(self, z):
        return self.ref.score(z)

    def cdf(self, z):
        return self.ref.cdf(z)

    def quantile(self, p):
        return float(self.ref.quantile(p))


def raw_fit(x: np.ndarray, cfg: lcmle.FitConfig | None = None) -> ExpLinearDensity:
    return lcmle.fit(WeightedSample.from_points(x), cfg).density


def _geo(fhat: ExpLinearDensity, theta_bar: float, x: np.ndarray) -> LogConcaveModel:
    m = min(x[-1] - theta_bar, theta_bar - x[0])
    if not m > 0:
        raise DomainError("geometric symmetrization needs theta_bar strictly inside the data range")
    k = np.abs(fhat.knots - theta_bar)
    half = np.append(np.union1d([0.0], k[k < m]), m)
    # mirrored knots land within rounding of each other: keep one of each cluster
    tol = _SNAP * max(1.0, m)
    keep = np.r_[True, np.diff(half) > tol]
    keep[-1] = True
    if half.size > 2 and half[-1] - half[-2] <= tol:
        keep[-2] = False
    half = half[keep]
    lo, hi = fhat.support
    # theta_bar +- m can miss the fitted support by an ulp
    vals = 0.5 * (fhat.logpdf(np.clip(theta_bar + half, lo, hi))
                  + fhat.logpdf(np.clip(theta_bar - half, lo, hi)))
    raw = SymmetricPLConcave.from_half(half, vals)
    log_c = -raw.log_mass()
    psi = SymmetricPLConcave.from_half(half, vals + log_c)
    return LogConcaveModel(DensityKind.GEO, theta_bar, ExpLinearDensity.from_log(psi),
                           float(np.exp(log_c)))


def estimate_density(sample, theta_bar: float, kind: DensityKind,
                     fhat: ExpLinearDensity | None = None,
                     cfg: lcmle.FitConfig | None = None) -> SymmetricDensityModel:
    """Symmetric estimate of the centered density.

    ``fhat`` (the raw log-concave MLE) may be passed in to share one fit
    across several centers or estimator kinds.
    """
    x = _as_sample(sample)
    kind = DensityKind(kind)
    theta_bar = float(theta_bar)
    if kind is DensityKind.PMLE:
        fit = symmle.fit_fixed_theta(x, theta_bar, cfg)
        return LogConcaveModel(kind, theta_bar, fit.density)
    if fhat is None:
        fhat = raw_fit(x, cfg)
    if kind is DensityKind.SYM:
        return SymModel(theta_bar, fhat)
    if kind is DensityKind.GEO:
        return _geo(fhat, theta_bar, x)
    _, var_fit = fhat.moments()
    b2 = float(np.var(x, ddof=1)) - var_fit
    if b2 <= 0:
        return SmoothedSymModel(theta_bar, fhat, 0.0, clamped=True)
    return SmoothedSymModel(theta_bar, fhat, float(np.sqrt(b2)))


def _model_weighted(model: SymmetricDensityModel, xi: float) -> float:
    if isinstance(model, LogConcaveModel):
        d = model.density
        k = d.knots
        edges = np.union1d(np.clip(k, -xi, xi), [-xi, xi])
        mid = 0.5 * (edges[:-1] + edges[1:])
        s = d.score(mid)
        return float(np.sum(s * s * np.diff(d.cdf(edges))))
    pts = [p for p in np.asarray(model.breakpoints) if -xi < p < xi]
    f = lambda t: float(model.score(t)) ** 2 * float(model.pdf(t))  # noqa: E731
    edges = [-xi, *sorted(set(pts)), xi]
    return float(sum(integrate.quad(f, a, b, limit=200)[0] for a, b in zip(edges[:-1], edges[1:])))


@dataclass(frozen=True)
class OneStepReport:
    theta_bar: float
    xi: float
    info: float
    window_count: int
    dropped: int
    label: str = ""


def _window(z, score, xi):
    finite = np.isfinite(score)
    inside = np.abs(z) <= xi if xi is not None else np.ones(z.shape, bool)
    use = finite & inside
    dropped = int(np.sum(inside & ~finite))
    return use, dropped


def fisher_hat(sample, model: SymmetricDensityModel, theta_bar: float, eta: float,
               variant: FisherVariant = FisherVariant.EMPIRICAL) -> float:
    """Plug-in Fisher information from the model score."""
    info, _, _ = _fisher(np.asarray(sample, dtype=float).ravel(), model, theta_bar, eta,
                         FisherVariant(variant))
    return info


def _fisher(x, model, theta_bar, eta, variant):
    if not 0.0 < eta < 0.5:
        raise ArgumentError("eta must lie in (0, 1/2)")
    z = x - theta_bar
    n = x.size
    if variant is FisherVariant.MODEL:
        xi = model.quantile(1.0 - eta)
        info = _model_weighted(model, xi)
        dropped = 0
    else:
        xi = None if variant is FisherVariant.UNTRUNCATED else model.quantile(1.0 - eta)
        sc = np.atleast_1d(model.score_at_data(x))
        use, dropped = _window(z, sc, xi)
        info = float(np.sum(sc[use] ** 2)) / n
        if dropped:
            warnings.warn(f"{dropped} observations with infinite score left out", RuntimeWarning,
                          stacklevel=3)
    if not info > INFO_FLOOR:
        raise DegenerateInformationError(f"estimated information {info:.3g} is degenerate")
    return info, xi, dropped


def one_step(sample, cfg: OneStepConfig = OneStepConfig(), theta_bar: float | None = None,
             model: SymmetricDensityModel | None = None,
             fhat: ExpLinearDensity | None = None) -> tuple[float, OneStepReport]:
    """One Newton step from the preliminary center.

    ``theta_bar`` and ``model`` override the configured preliminary and
    density estimate; ``fhat`` shares a raw fit between calls.
    """
    x = _as_sample(sample)
    tb = preliminary(x, cfg.preliminary) if theta_bar is None else float(theta_bar)
    if model is None:
        model = estimate_density(x, tb, cfg.density, fhat=fhat)
    variant = cfg.fisher if cfg.truncated else FisherVariant.UNTRUNCATED
    info, _, _ = _fisher(x, model, tb, cfg.eta, variant)
    z = x - tb
    xi = model.quantile(1.0 - cfg.eta) if cfg.truncated else None
    sc = np.atleast_1d(model.score_at_data(x))
    use, dropped = _window(z, sc, xi)
    theta = tb - float(np.sum(sc[use])) / (x.size * info)
    rep = OneStepReport(tb, float(xi) if xi is not None else float("inf"), info,
                        int(use.sum()), dropped, cfg.label)
    return theta, rep
