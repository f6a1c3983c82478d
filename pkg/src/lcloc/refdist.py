"""Reference densities with exact scores, information functionals and projections.

All densities are symmetric about zero.  ``Normal``, ``Logistic``, ``Laplace``
and ``SymBeta(r > 2)`` are log-concave with finite Fisher information; the
rescaled Student t2 and the two bimodal mixtures are not log-concave, and
their log-concave projections are available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from .errors import ArgumentError, InfiniteMomentError, QuadratureError

__all__ = [
    "RefDensity",
    "Normal",
    "Logistic",
    "Laplace",
    "SymBeta",
    "StudentT2Rescaled",
    "GaussMixture",
    "LaplaceMixture",
    "ProjectionResult",
    "fisher_info",
    "truncated_info",
    "project",
    "misspec_info",
    "smoothed_misspec_info",
    "sample",
    "from_tag",
]

_SQRT2PI = np.sqrt(2.0 * np.pi)


def _out(a):
    a = np.asarray(a, dtype=float)
    return a if a.ndim else float(a)


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise ArgumentError("probability level must lie in (0, 1)")
    return p


def _quad(fun, a, b, points=(), epsrel=1e-10, limit=400):
    """Adaptive quadrature with explicit breakpoints; raises on poor accuracy."""
    pts = sorted(p for p in set(points) if a < p < b)
    edges = [a, *pts, b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(fun, lo, hi, epsabs=0.0, epsrel=epsrel, limit=limit)
        if not np.isfinite(val) or err > 1e-6 * max(abs(val), 1e-300) + 1e-13:
            raise QuadratureError(f"quadrature on [{lo}, {hi}] did not converge (err {err:.2e})")
        total += val
    return total


@dataclass(frozen=True)
class RefDensity:
    """Common interface; subclasses supply the closed forms."""

    @property
    def tag(self) -> str:
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        return -np.inf, np.inf

    @property
    def log_concave(self) -> bool:
        return True

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Points where the density or its score is not smooth."""
        return (0.0,)

    def pdf(self, x):
        return _out(np.exp(self.logpdf(x)))

    def logpdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        return _out(self.cdf(-np.asarray(x, dtype=float)))

    def score(self, x):
        raise NotImplementedError

    def quantile(self, p):
        """Monotone bisection on the CDF, absolute accuracy 1e-12."""
        p = _check_p(p)
        lo, hi = self.support
        lo = -1.0 if not np.isfinite(lo) else lo
        hi = 1.0 if not np.isfinite(hi) else hi
        flat = np.atleast_1d(p)
        out = np.empty_like(flat)
        for i, pi in enumerate(flat):
            a, b = lo, hi
            while np.isinf(self.support[0]) and self.cdf(a) > pi:
                a *= 2.0
            while np.isinf(self.support[1]) and self.cdf(b) < pi:
                b *= 2.0
            out[i] = optimize.brentq(lambda t: self.cdf(t) - pi, a, b, xtol=1e-12)
        return _out(out.reshape(p.shape))

    def variance(self) -> float:
        lo, hi = self.support
        return 2.0 * _quad(lambda t: t * t * self.pdf(t), 0.0, hi, self.breakpoints)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Normal(RefDensity):
    tag = "normal"

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return _out(-0.5 * x * x - np.log(_SQRT2PI))

    def cdf(self, x):
        return _out(special.ndtr(x))

    def quantile(self, p):
        return _out(special.ndtri(_check_p(p)))

    def score(self, x):
        return _out(-np.asarray(x, dtype=float))

    def variance(self) -> float:
        return 1.0

    def draw(self, rng, n):
        return rng.standard_normal(n)


@dataclass(frozen=True)
class Logistic(RefDensity):
    tag = "logistic"

    def logpdf(self, x):
        a = np.abs(np.asarray(x, dtype=float))
        return _out(-a - 2.0 * np.log1p(np.exp(-a)))

    def cdf(self, x):
        return _out(special.expit(x))

    def quantile(self, p):
        return _out(special.logit(_check_p(p)))

    def score(self, x):
        return _out(-np.tanh(0.5 * np.asarray(x, dtype=float)))

    def variance(self) -> float:
        return np.pi**2 / 3.0

    def draw(self, rng, n):
        return rng.logistic(size=n)


@dataclass(frozen=True)
class Laplace(RefDensity):
    tag = "laplace"

    def logpdf(self, x):
        return _out(-np.abs(np.asarray(x, dtype=float)) - np.log(2.0))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _out(np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0.0)),
                             1.0 - 0.5 * np.exp(-np.maximum(x, 0.0))))

    def quantile(self, p):
        p = _check_p(p)
        return _out(np.where(p < 0.5, np.log(2.0 * p), -np.log(2.0 * (1.0 - p))))

    def score(self, x):
        return _out(-np.sign(np.asarray(x, dtype=float)))

    def variance(self) -> float:
        return 2.0

    def draw(self, rng, n):
        return rng.laplace(size=n)


@dataclass(frozen=True)
class SymBeta(RefDensity):
    """Density proportional to ``(1 - x^2/r)^(r/2)`` on ``[-sqrt(r), sqrt(r)]``."""

    r: float = 4.0

    def __post_init__(self):
        if not self.r > 0:
            raise ArgumentError("SymBeta parameter r must be positive")

    @property
    def tag(self) -> str:
        return f"symbeta{self.r:g}"

    @property
    def support(self):
        s = float(np.sqrt(self.r))
        return -s, s

    @property
    def _a(self) -> float:
        return self.r / 2.0 + 1.0

    @property
    def log_norm(self) -> float:
        r = self.r
        return float(special.gammaln((3.0 + r) / 2.0) - 0.5 * np.log(np.pi * r)
                     - special.gammaln(1.0 + r / 2.0))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        u = 1.0 - x * x / self.r
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(u > 0, self.log_norm + 0.5 * self.r * np.log(np.maximum(u, 1e-300)),
                           -np.inf)
        return _out(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        s = np.sqrt(self.r)
        t = np.clip((1.0 + x / s) / 2.0, 0.0, 1.0)
        return _out(special.betainc(self._a, self._a, t))

    def quantile(self, p):
        p = _check_p(p)
        return _out(np.sqrt(self.r) * (2.0 * special.betaincinv(self._a, self._a, p) - 1.0))

    def score(self, x):
        """``-x / (1 - x^2/r)``; infinite (with the sign of ``-x``) off the open support."""
        x = np.asarray(x, dtype=float)
        u = 1.0 - x * x / self.r
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(u > 0, -x / u, -np.sign(x) * np.inf)
        return _out(out)

    def variance(self) -> float:
        # Var(sqrt(r)(2B - 1)) with B ~ Beta(a, a)
        a = self._a
        return self.r * 4.0 * a * a / ((2.0 * a) ** 2 * (2.0 * a + 1.0))

    def draw(self, rng, n):
        return np.sqrt(self.r) * (2.0 * rng.beta(self._a, self._a, size=n) - 1.0)


@dataclass(frozen=True)
class StudentT2Rescaled(RefDensity):
    """``g(x) = (1 + x^2)^(-3/2) / 2``: a t2 variable divided by sqrt(2)."""

    tag = "t2"

    @property
    def log_concave(self) -> bool:
        return False

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return _out(-np.log(2.0) - 1.5 * np.log1p(x * x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _out(0.5 * (1.0 + x / np.sqrt(1.0 + x * x)))

    def quantile(self, p):
        u = 2.0 * _check_p(p) - 1.0
        return _out(u / np.sqrt((1.0 - u) * (1.0 + u)))

    def score(self, x):
        x = np.asarray(x, dtype=float)
        return _out(-3.0 * x / (1.0 + x * x))

    def variance(self) -> float:
        return np.inf

    def draw(self, rng, n):
        return rng.standard_t(2, size=n) / np.sqrt(2.0)


@dataclass(frozen=True)
class GaussMixture(RefDensity):
    """Equal mixture of N(-2, 1) and N(2, 1)."""

    tag = "gaussmix"

    @property
    def log_concave(self) -> bool:
        return False

    @property
    def breakpoints(self):
        return (-2.0, 0.0, 2.0)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        # log(phi(x-2) + phi(x+2)) / 2 = -x^2/2 - 2 + log cosh(2x) - log sqrt(2 pi)
        a = np.abs(2.0 * x)
        logcosh = a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)
        return _out(-0.5 * x * x - 2.0 + logcosh - np.log(_SQRT2PI))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _out(0.5 * (special.ndtr(x - 2.0) + special.ndtr(x + 2.0)))

    def score(self, x):
        x = np.asarray(x, dtype=float)
        return _out(-x + 2.0 * np.tanh(2.0 * x))

    def variance(self) -> float:
        return 5.0

    def draw(self, rng, n):
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return 2.0 * sign + rng.standard_normal(n)


@dataclass(frozen=True)
class LaplaceMixture(RefDensity):
    """Equal mixture of Laplace(-2, 1) and Laplace(2, 1)."""

    tag = "laplacemix"

    @property
    def log_concave(self) -> bool:
        return False

    @property
    def breakpoints(self):
        return (-2.0, 0.0, 2.0)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = -np.abs(x - 2.0), -np.abs(x + 2.0)
        return _out(np.logaddexp(a, b) - np.log(4.0))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lap = Laplace()
        return _out(0.5 * (lap.cdf(x - 2.0) + lap.cdf(x + 2.0)))

    def score(self, x):
        x = np.asarray(x, dtype=float)
        a, b = -np.abs(x - 2.0), -np.abs(x + 2.0)
        m = np.maximum(a, b)
        ea, eb = np.exp(a - m), np.exp(b - m)
        return _out((-np.sign(x - 2.0) * ea - np.sign(x + 2.0) * eb) / (ea + eb))

    def variance(self) -> float:
        return 6.0

    def draw(self, rng, n):
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return 2.0 * sign + rng.laplace(size=n)


_TAGS: dict[str, Callable[[], RefDensity]] = {
    "normal": Normal,
    "logistic": Logistic,
    "laplace": Laplace,
    "t2": StudentT2Rescaled,
    "gaussmix": GaussMixture,
    "laplacemix": LaplaceMixture,
}


def from_tag(tag: str) -> RefDensity:
    """``normal``, ``logistic``, ``laplace``, ``symbeta<r>``, ``t2``, ``gaussmix``, ``laplacemix``."""
    tag = tag.strip().lower()
    if tag in _TAGS:
        return _TAGS[tag]()
    if tag.startswith("symbeta"):
        try:
            return SymBeta(float(tag[len("symbeta"):]))
        except ValueError:
            pass
    raise ArgumentError(f"unknown density tag {tag!r}")


def fisher_info(ref: RefDensity) -> float:
    """``int score^2 dF``; ``inf`` for SymBeta with ``r <= 2``."""
    if isinstance(ref, Normal):
        return 1.0
    if isinstance(ref, Logistic):
        return 1.0 / 3.0
    if isinstance(ref, Laplace):
        return 1.0
    if isinstance(ref, SymBeta):
        r = ref.r
        if r <= 2.0:
            return np.inf
        return float(r * np.exp(special.gammaln(r / 2.0 - 1.0) + special.gammaln((3.0 + r) / 2.0)
                                - special.gammaln(r / 2.0 + 1.0) - special.gammaln((1.0 + r) / 2.0))
                     / 2.0)
    hi = ref.support[1]
    return 2.0 * _quad(lambda t: ref.score(t) ** 2 * ref.pdf(t), 0.0, hi, ref.breakpoints)


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 < eta < 0.5:
        raise ArgumentError("eta must lie in (0, 1/2)")
    return eta


def truncated_info(ref: RefDensity, eta: float) -> float:
    """Fisher information restricted to the central ``1 - 2 eta`` probability."""
    eta = _check_eta(eta)
    xi = float(ref.quantile(1.0 - eta))
    if isinstance(ref, SymBeta):
        # substitute u = x^2 / r: the integrand becomes an incomplete beta integral
        c = float(np.exp(ref.log_norm))
        r = ref.r
        s = xi * xi / r
        # 2 c int_0^xi x^2 (1 - x^2/r)^(r/2 - 2) dx = c r^(3/2) B(s; 3/2, r/2 - 1)
        b = r / 2.0 - 1.0
        if b > 0:
            return float(c * r**1.5 * special.beta(1.5, b) * special.betainc(1.5, b, s))
        return 2.0 * c * _quad(lambda t: t * t * (1.0 - t * t / r) ** (r / 2.0 - 2.0), 0.0, xi,
                               epsrel=1e-12)
    return 2.0 * _quad(lambda t: ref.score(t) ** 2 * ref.pdf(t), 0.0, xi, ref.breakpoints)


@dataclass(frozen=True)
class ProjectionResult:
    """Log-concave projection of a reference density.

    ``kind`` is ``"identity"`` (already log-concave), ``"laplace"`` (the t2
    case) or ``"flattop"`` (density held constant on ``[-z, z]``).
    """

    kind: str
    source: RefDensity = field(repr=False)
    z: float | None = None

    @property
    def _flat_level(self) -> float:
        return float(self.source.pdf(self.z))

    def pdf(self, x):
        return _out(np.exp(self.logpdf(x)))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return self.source.logpdf(x)
        if self.kind == "laplace":
            return _out(-np.abs(x) - np.log(2.0))
        inside = np.abs(x) <= self.z
        return _out(np.where(inside, float(self.source.logpdf(self.z)), self.source.logpdf(x)))

    def score(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return self.source.score(x)
        if self.kind == "laplace":
            return _out(-np.sign(x))
        return _out(np.where(np.abs(x) <= self.z, 0.0, self.source.score(x)))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return self.source.cdf(x)
        if self.kind == "laplace":
            return Laplace().cdf(x)
        mid = 0.5 + x * self._flat_level
        return _out(np.where(np.abs(x) <= self.z, mid, self.source.cdf(x)))

    def quantile(self, p):
        p = _check_p(p)
        if self.kind == "identity":
            return self.source.quantile(p)
        if self.kind == "laplace":
            return Laplace().quantile(p)
        lvl = self._flat_level
        edge = 0.5 + self.z * lvl
        inner = (p - 0.5) / lvl
        flat = np.atleast_1d(p)
        out = np.where(np.abs(flat - 0.5) <= edge - 0.5, np.atleast_1d(inner), 0.0)
        tails = np.abs(flat - 0.5) > edge - 0.5
        if np.any(tails):
            out[tails] = np.atleast_1d(self.source.quantile(flat[tails]))
        return _out(out.reshape(p.shape))

    @property
    def breakpoints(self):
        pts = set(self.source.breakpoints)
        if self.z is not None:
            pts |= {-self.z, self.z}
        return tuple(sorted(pts))

    def variance(self) -> float:
        hi = self.source.support[1]
        if self.kind == "laplace":
            return 2.0
        return 2.0 * _quad(lambda t: t * t * self.pdf(t), 0.0, hi, self.breakpoints)


def _flat_top_z(ref: RefDensity) -> float:
    """Root of ``2 z f(z) + 2 (1 - F(z)) = 1`` on ``[2, 10]``."""
    fun = lambda z: 2.0 * z * ref.pdf(z) + 2.0 * ref.sf(z) - 1.0  # noqa: E731
    return float(optimize.bisect(fun, 2.0, 10.0, xtol=1e-12, maxiter=200))


def project(ref: RefDensity) -> ProjectionResult:
    """Closed-form log-concave projection."""
    if ref.log_concave:
        return ProjectionResult("identity", ref)
    if isinstance(ref, StudentT2Rescaled):
        return ProjectionResult("laplace", ref)
    if isinstance(ref, (GaussMixture, LaplaceMixture)):
        return ProjectionResult("flattop", ref, _flat_top_z(ref))
    raise ArgumentError(f"no closed-form projection for {ref.tag}")


def misspec_info(ref: RefDensity, eta: float) -> tuple[float, float]:
    """``(I_g(eta), gamma_eta)``: information and preliminary-dependence under the projection."""
    eta = _check_eta(eta)
    proj = project(ref)
    if proj.kind == "identity":
        return truncated_info(ref, eta), 1.0
    xi = float(proj.quantile(1.0 - eta))
    pts = proj.breakpoints
    ig = 2.0 * _quad(lambda t: proj.score(t) ** 2 * ref.pdf(t), 0.0, xi, pts)
    if ig <= 0:
        raise QuadratureError("projection score vanishes on the window")
    cross = 2.0 * _quad(lambda t: proj.score(t) * (proj.score(t) - ref.score(t)) * ref.pdf(t),
                        0.0, xi, pts)
    return ig, 1.0 - cross / ig


@dataclass(frozen=True)
class _Smoothed:
    """Projection convolved with ``N(0, b^2)``, evaluated by quadrature."""

    proj: ProjectionResult
    b: float

    def _conv(self, x, kernel):
        lo, hi = self.proj.source.support
        w = 12.0 * self.b
        a, c = max(lo, x - w), min(hi, x + w)
        pts = [p for p in self.proj.breakpoints] + [x]
        return _quad(lambda u: self.proj.pdf(u) * kernel(x - u), a, c, pts, epsrel=1e-11)

    def pdf(self, x: float) -> float:
        b = self.b
        return self._conv(x, lambda d: np.exp(-0.5 * (d / b) ** 2) / (b * _SQRT2PI))

    def score(self, x: float) -> float:
        b = self.b
        num = self._conv(x, lambda d: -d / b**2 * np.exp(-0.5 * (d / b) ** 2) / (b * _SQRT2PI))
        return num / self.pdf(x)

    def cdf(self, x: float) -> float:
        b = self.b
        w = 12.0 * b
        return _quad(lambda u: float(self.proj.cdf(x - u)) * np.exp(-0.5 * (u / b) ** 2)
                     / (b * _SQRT2PI), -w, w, [x - p for p in self.proj.breakpoints],
                     epsrel=1e-11)

    def quantile(self, p: float) -> float:
        a = float(self.proj.quantile(p))
        lo, hi = a - 1.0, a + 1.0
        while self.cdf(lo) > p:
            lo -= 1.0
        while self.cdf(hi) < p:
            hi += 1.0
        return float(optimize.brentq(lambda t: self.cdf(t) - p, lo, hi, xtol=1e-10))


def smoothed_misspec_info(ref: RefDensity, eta: float) -> tuple[float, float, float]:
    """``(I_g^sm(eta), gamma_eta^sm, b_tilde)`` for the Gaussian-smoothed projection."""
    eta = _check_eta(eta)
    var = ref.variance()
    if not np.isfinite(var):
        raise InfiniteMomentError(f"{ref.tag} has no finite second moment")
    proj = project(ref)
    if proj.kind == "identity":
        return truncated_info(ref, eta), 1.0, 0.0
    b2 = max(var - proj.variance(), 0.0)
    b = float(np.sqrt(b2))
    if b == 0.0:
        ig, gamma = misspec_info(ref, eta)
        return ig, gamma, 0.0
    sm = _Smoothed(proj, b)
    xi = sm.quantile(1.0 - eta)
    pts = ref.breakpoints
    opts = dict(epsrel=1e-7)
    ig = 2.0 * _quad(lambda t: sm.score(t) ** 2 * ref.pdf(t), 0.0, xi, pts, **opts)
    cross = 2.0 * _quad(lambda t: (lambda s: s * (s - ref.score(t)))(sm.score(t)) * ref.pdf(t),
                        0.0, xi, pts, **opts)
    return ig, 1.0 - cross / ig, b


def sample(ref: RefDensity, n: int, seed) -> np.ndarray:
    """``n`` independent draws; identical output for identical ``seed``."""
    if int(n) < 1:
        raise ArgumentError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    return ref.draw(rng, int(n))
