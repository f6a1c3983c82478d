"""Symmetric log-concave MLE: fixed-center fits, profile search and checks.

For a fixed center ``theta`` the symmetric fit is the ordinary log-concave
MLE of the reflected sample ``{+-|x_i - theta|}``, made exactly even.  The
joint estimate maximizes the profile criterion over ``theta``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import lcmle
from .errors import ArgumentError, DegenerateSampleError
from .plcurve import ExpLinearDensity, PLConcave, SymmetricPLConcave, WeightedSample

__all__ = [
    "SymFit",
    "MLEResult",
    "DiagnosticReport",
    "symmetrize",
    "fit_fixed_theta",
    "profile_criterion",
    "fit_mle",
    "characterization_h",
    "diagnostics",
    "knots_of",
    "h_at_knots",
]

_ASYM_WARN = 1e-4
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _as_sample(sample) -> np.ndarray:
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ArgumentError("sample must be a non-empty array of finite numbers")
    if x[-1] == x[0]:
        raise DegenerateSampleError("sample needs at least two distinct values")
    return x


@dataclass(frozen=True)
class SymFit:
    """Symmetric log-concave fit of the centered sample at a fixed ``theta``."""

    theta: float
    psi: SymmetricPLConcave
    profile: float
    report: lcmle.FitReport = field(repr=False, compare=False, default=None)

    @property
    def density(self) -> ExpLinearDensity:
        return ExpLinearDensity.from_log(self.psi)


@dataclass(frozen=True)
class MLEResult:
    theta_hat: float
    psi_hat: SymmetricPLConcave
    g_hat: ExpLinearDensity
    criterion: float
    grid: np.ndarray = field(repr=False)
    ties: tuple = ()

    @property
    def g_hat_located(self):
        """Fitted density of the data, ``g_hat(x - theta_hat)``."""
        return lambda x: self.g_hat.pdf(np.asarray(x, dtype=float) - self.theta_hat)


def symmetrize(sample, theta: float) -> WeightedSample:
    """Atoms ``+-|x_i - theta|``, each of weight ``1/(2n)``; merged when equal."""
    x = _as_sample(sample)
    a = np.abs(x - float(theta))
    pts = np.concatenate([-a, a])
    w = np.full(pts.size, 0.5 / x.size)
    return WeightedSample(pts, w)


def knots_of(pl, rel_tol: float = 1e-10) -> np.ndarray:
    """Endpoints plus the interior points where the slope actually drops."""
    s = pl.slopes
    scale = max(1.0, float(np.max(np.abs(s)))) if s.size else 1.0
    keep = np.concatenate([[True], np.diff(s) < -rel_tol * scale, [True]])
    return pl.knots[keep]


def _even_part(logf, d: float) -> SymmetricPLConcave:
    k = logf.knots
    half = np.union1d(np.abs(k), [0.0])
    half = np.append(half[half < d], d)
    # the fitted domain can miss +-d by an ulp when near-equal atoms were pooled
    left = logf(np.clip(-half, k[0], k[-1]))
    right = logf(np.clip(half, k[0], k[-1]))
    # L1 mass of the asymmetry: pointwise gaps on very short segments or in far
    # tails are ill-determined at the solver tolerance and carry no mass
    diff = np.abs(np.exp(left) - np.exp(right))
    gap = float(np.sum(0.5 * (diff[1:] + diff[:-1]) * np.diff(half)))
    if gap > _ASYM_WARN:
        warnings.warn(f"fit of reflected sample is asymmetric by {gap:.2e}", RuntimeWarning,
                      stacklevel=3)
    vals = 0.5 * (left + right)
    # the average is concave and non-increasing on [0, d] up to roundoff, which
    # matters on knots a few ulps from 0: take the concave majorant and flatten
    # any leading rise
    top = lcmle.least_concave_majorant(half, vals)
    vals = np.interp(half, half[top], vals[top])
    peak = int(np.argmax(vals))
    vals[:peak] = vals[peak]
    # prune interior half-knots that are not kinks (0 and d always stay)
    if half.size > 2:
        s = np.diff(vals) / np.diff(half)
        scale = max(1.0, float(np.max(np.abs(s))))
        keep = np.concatenate([[True], np.diff(s) < -1e-12 * scale, [True]])
        half, vals = half[keep], vals[keep]
    psi = SymmetricPLConcave.from_half(half, vals)
    return SymmetricPLConcave.from_half(half, vals - psi.log_mass())


def fit_fixed_theta(sample, theta: float, cfg: lcmle.FitConfig | None = None,
                    init=None) -> SymFit:
    """Symmetric log-concave MLE with the center held at ``theta``."""
    x = _as_sample(sample)
    ws = symmetrize(x, theta)
    rep = lcmle.fit(ws, cfg, init=init)
    psi = _even_part(rep.logf, float(ws.points[-1]))
    prof = float(np.mean(psi(x - theta))) - 1.0
    return SymFit(float(theta), psi, prof, rep)


def profile_criterion(sample, theta: float, cfg: lcmle.FitConfig | None = None) -> float:
    """``(1/n) sum psi_theta(x_i - theta) - 1`` at the fitted ``psi_theta``."""
    return fit_fixed_theta(sample, theta, cfg).profile


def _carry(fit: SymFit, x: np.ndarray, theta: float):
    """Warm start at ``theta``: every knot keeps its observation, moved to the new distance."""
    h = knots_of(fit.psi)
    h = h[h > 0]
    a_old = np.abs(x - fit.theta)
    j = np.argmin(np.abs(a_old[None, :] - h[:, None]), axis=1)
    pos = np.abs(x[j] - theta)
    vals = fit.psi(h)
    keep = pos > 0
    pos, vals = pos[keep], vals[keep]
    pts = np.concatenate([-pos, [0.0], pos])
    vv = np.concatenate([vals, [float(fit.psi(0.0))], vals])
    order = np.argsort(pts, kind="stable")
    pts, vv = pts[order], vv[order]
    uniq = np.r_[True, np.diff(pts) > 0]
    pts, vv = pts[uniq], vv[uniq]
    if pts.size < 2:
        return None
    hull = lcmle.least_concave_majorant(pts, vv)
    return PLConcave(pts[hull], vv[hull])


class _Profile:
    """Memoized profile evaluations, warm-started from the nearest earlier fit."""

    def __init__(self, x, cfg):
        self.x = x
        self.cfg = cfg
        self.fits: dict[float, SymFit] = {}

    def __call__(self, theta: float) -> SymFit:
        theta = float(theta)
        hit = self.fits.get(theta)
        if hit is not None:
            return hit
        init = None
        if self.fits:
            near = min(self.fits, key=lambda t: abs(t - theta))
            init = _carry(self.fits[near], self.x, theta)
        f = fit_fixed_theta(self.x, theta, self.cfg, init=init)
        self.fits[theta] = f
        return f


def _golden_max(prof: _Profile, a: float, b: float, tol: float) -> None:
    """Golden-section ascent on ``[a, b]``; every evaluation lands in ``prof.fits``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = prof(c).profile, prof(d).profile
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = prof(c).profile
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = prof(d).profile


def fit_mle(sample, grid_size: int = 201, refine_tol: float = 1e-7,
            cfg: lcmle.FitConfig | None = None) -> MLEResult:
    """Joint MLE of center and symmetric log-concave shape.

    The profile is scanned on a uniform grid over ``[x_(1), x_(n)]``, then
    refined by golden section over the best cell and its two neighbours.
    Ties go to the smallest center.
    """
    if grid_size < 3:
        raise ArgumentError("grid_size must be at least 3")
    if not refine_tol > 0:
        raise ArgumentError("refine_tol must be positive")
    x = _as_sample(sample)
    prof = _Profile(x, cfg)
    grid = np.linspace(x[0], x[-1], grid_size)
    vals = np.array([prof(t).profile for t in grid])
    i = int(np.argmax(vals))
    ties = tuple(float(t) for t in grid[vals >= vals[i] - 1e-12])
    _golden_max(prof, float(grid[max(i - 1, 0)]), float(grid[min(i + 1, grid_size - 1)]),
                refine_tol)
    thetas = np.array(sorted(prof.fits))
    pv = np.array([prof.fits[t].profile for t in thetas])
    best = prof.fits[float(thetas[int(np.argmax(pv))])]
    return MLEResult(
        theta_hat=best.theta,
        psi_hat=best.psi,
        g_hat=best.density,
        criterion=best.profile,
        grid=np.column_stack([grid, vals]),
        ties=ties,
    )


def characterization_h(result: MLEResult, sample, t):
    """``int_t^M [empirical upper tail of |X - theta| - 2 int_x^M g] dx``."""
    x = _as_sample(sample)
    a = np.sort(np.abs(x - result.theta_hat))
    M = a[-1]
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > M) or np.any(np.isnan(t)):
        raise ArgumentError("t must lie in [0, max |x_i - theta_hat|]")
    n = a.size
    csum = np.concatenate([[0.0], np.cumsum(a)])
    j = np.searchsorted(a, t, side="right")
    emp = ((csum[-1] - csum[j]) - t * (n - j)) / n
    g = result.g_hat
    F_M, M1_M = g.partial_moments(M)
    F_t, M1_t = g.partial_moments(t)
    model = 2.0 * ((M1_M - M1_t) - t * (F_M - F_t))
    out = emp - model
    return out if out.ndim else float(out)


@dataclass
class DiagnosticReport:
    checks: list = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append((name, bool(passed), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c[1]]


def diagnostics(result: MLEResult, sample, tol: float = 1e-6) -> DiagnosticReport:
    """Structural checks that every symmetric log-concave MLE must satisfy."""
    x = _as_sample(sample)
    n = x.size
    a = np.sort(np.abs(x - result.theta_hat))
    g = result.g_hat
    psi = result.psi_hat
    knots = knots_of(psi)
    rep = DiagnosticReport()

    pos = knots[knots > 0]
    # atoms closer than ``eps`` to a knot count as tied with it: the solver
    # cannot tell such neighbours apart at its objective tolerance
    eps = 1e-7 * max(1.0, float(a[-1]))
    F_le = np.searchsorted(a, pos + eps, side="right") / n
    F_lt = np.searchsorted(a, pos - eps, side="left") / n
    two_g = 2.0 * g.cdf(pos) - 1.0
    lower = np.minimum(F_le - 1.0 / n, F_lt)
    bad = (two_g < lower - tol) | (two_g > F_le + tol)
    rep.add("cdf_sandwich", not np.any(bad),
            f"{int(bad.sum())} of {pos.size} knots outside" if np.any(bad) else "")

    _, var = g.moments()
    msd = float(np.mean((x - result.theta_hat) ** 2))
    rep.add("variance_bound", var <= msd + 1e-8, f"var={var:.6g} msd={msd:.6g}")

    atoms = np.concatenate([[0.0], a])
    dist = np.min(np.abs(np.abs(knots)[:, None] - atoms[None, :]), axis=1)
    rep.add("knot_support", bool(np.all(dist <= 1e-9)), f"max offset {float(dist.max()):.2e}")

    if a[0] > 0:
        d0 = float(psi.right_derivative(0.0))
        rep.add("flat_at_center", abs(d0) <= 1e-7, f"psi'(0+)={d0:.2e}")

    probe = np.union1d(knots[knots > 0], a[a > 0])
    slack = -np.log(2.0 * probe) - psi(probe)
    rep.add("envelope", bool(np.all(slack >= -1e-9)), f"min slack {float(slack.min()):.2e}")
    return rep


def h_at_knots(result: MLEResult, sample) -> np.ndarray:
    """Characterization function at the positive knots of the fit."""
    k = knots_of(result.psi_hat)
    return characterization_h(result, sample, k[k > 0])

