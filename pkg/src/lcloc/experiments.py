"""Monte-Carlo efficiency study, information-ratio curves and single-sample diagnostics."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import refdist, symmle
from .errors import ArgumentError, LcLocError
from .onestep import DensityKind, OneStepConfig, Preliminary, one_step, preliminary, raw_fit

__all__ = [
    "ExperimentConfig",
    "Table",
    "Estimator",
    "parse_estimator",
    "estimator_labels",
    "cell_seed",
    "run_efficiency",
    "run_info_curves",
    "run_diagnostics",
    "DEFAULT_ESTIMATORS",
    "EFFICIENCY_HEADER",
    "INFO_HEADER",
]

EFFICIENCY_HEADER = ("density", "estimator", "n", "reps", "failures", "mc_variance", "efficiency")
INFO_HEADER = ("density", "eta", "info_eta", "ratio")

_PRELIM = {"mean": "mean", "median": "median", "trim": "trimmed", "logis": "logistic"}
_BASELINES = {"mean": "mean", "median": "median", "trimmed": "trimmed", "logistic": "logistic"}

DEFAULT_ESTIMATORS = ("mean", "median", "trimmed", "logistic",
                      "os_sym_mean_t", "os_smooth_mean_t", "os_pmle_mean_t", "os_geo_mean_t")


@dataclass(frozen=True)
class ExperimentConfig:
    densities: tuple = ("normal", "logistic", "laplace", "symbeta2.1")
    sizes: tuple = (30, 100, 200, 500)
    reps: int = 300
    estimators: tuple = DEFAULT_ESTIMATORS
    eta: float = 0.002
    seed: int = 20240101
    out: str = "results"

    def __post_init__(self):
        for name in ("densities", "sizes", "estimators"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.reps < 2:
            raise ArgumentError("need at least two replications")
        if not self.sizes or any(int(n) < 5 for n in self.sizes):
            raise ArgumentError("sample sizes must be at least 5")
        if not self.densities or not self.estimators:
            raise ArgumentError("need at least one density and one estimator")
        if not 0.0 < self.eta < 0.5:
            raise ArgumentError("eta must lie in (0, 1/2)")
        if not 0 <= int(self.seed) < 2**64:
            raise ArgumentError("seed must be an unsigned 64-bit integer")
        for tag in self.densities:
            refdist.from_tag(tag)
        for lab in self.estimators:
            parse_estimator(lab, self.eta)

    def updated(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass
class Table:
    header: tuple
    rows: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]

    def lookup(self, **key) -> tuple:
        idx = {k: self.header.index(k) for k in key}
        for r in self.rows:
            if all(r[i] == key[k] for k, i in idx.items()):
                return r
        raise KeyError(key)


@dataclass(frozen=True)
class Estimator:
    label: str
    needs_fit: bool
    run: Callable = field(repr=False, compare=False)


def parse_estimator(label: str, eta: float = 0.002) -> Estimator:
    """``mean``, ``median``, ``trimmed``, ``logistic``, ``mle`` or ``os_<dens>_<prelim>_<t|u>``."""
    lab = label.strip().lower()
    if lab in _BASELINES:
        kind = Preliminary(_BASELINES[lab])
        return Estimator(lab, False, lambda x, fhat: preliminary(x, kind))
    if lab == "mle":
        return Estimator(lab, False, lambda x, fhat: symmle.fit_mle(x).theta_hat)
    parts = lab.split("_")
    if len(parts) == 4 and parts[0] == "os" and parts[2] in _PRELIM and parts[3] in ("t", "u"):
        try:
            dens = DensityKind(parts[1])
        except ValueError:
            raise ArgumentError(f"unknown estimator {label!r}") from None
        cfg = OneStepConfig(Preliminary(_PRELIM[parts[2]]), dens, eta, parts[3] == "t")
        shares = dens is not DensityKind.PMLE
        return Estimator(lab, shares, lambda x, fhat: one_step(x, cfg, fhat=fhat)[0])
    raise ArgumentError(f"unknown estimator {label!r}")


def estimator_labels() -> list:
    """Every label the parser accepts (``mle`` included)."""
    labs = list(_BASELINES) + ["mle"]
    for d in DensityKind:
        for p in _PRELIM:
            for t in ("t", "u"):
                labs.append(f"os_{d.value}_{p}_{t}")
    return labs


def cell_seed(seed: int, tag: str, n: int, rep: int) -> np.random.SeedSequence:
    """Seed from the cell identity only, so cells do not depend on iteration order.

    The estimator is left out on purpose: every estimator in a cell sees the
    same samples, which sharpens comparisons between them.
    """
    return np.random.SeedSequence([int(seed), zlib.crc32(tag.encode()), int(n), int(rep)])


def _efficiency(n: int, info: float, var: float):
    if not math.isfinite(info) or not var > 0:
        return ""
    return (1.0 / (n * info)) / var


def run_efficiency(cfg: ExperimentConfig) -> Table:
    """Monte-Carlo variance and efficiency for every (density, n, estimator) cell."""
    ests = [parse_estimator(lab, cfg.eta) for lab in cfg.estimators]
    table = Table(EFFICIENCY_HEADER)
    for tag in cfg.densities:
        ref = refdist.from_tag(tag)
        info = refdist.fisher_info(ref)
        for n in cfg.sizes:
            vals = {e.label: [] for e in ests}
            fails = {e.label: 0 for e in ests}
            for rep in range(cfg.reps):
                x = refdist.sample(ref, int(n), cell_seed(cfg.seed, ref.tag, n, rep))
                fhat = None
                for e in ests:
                    try:
                        if e.needs_fit and fhat is None:
                            fhat = raw_fit(np.sort(x))
                        v = float(e.run(x, fhat))
                        if not math.isfinite(v):
                            raise ArithmeticError("non-finite estimate")
                    except (LcLocError, ArithmeticError, ValueError):
                        fails[e.label] += 1
                        continue
                    vals[e.label].append(v)
            for e in ests:
                v = np.asarray(vals[e.label])
                var = float(np.var(v, ddof=1)) if v.size >= 2 else float("nan")
                table.rows.append((ref.tag, e.label, int(n), cfg.reps, fails[e.label], var,
                                   _efficiency(int(n), info, var)))
    return table


def run_info_curves(refs, etas) -> Table:
    """Rows ``(density, eta, I(eta), I(eta)/I)``; infinite information gives ratio 0."""
    etas = [float(e) for e in etas]
    if not etas or any(not 0.0 < e < 0.5 for e in etas):
        raise ArgumentError("eta grid must be a non-empty subset of (0, 1/2)")
    table = Table(INFO_HEADER)
    for r in refs:
        ref = refdist.from_tag(r) if isinstance(r, str) else r
        full = refdist.fisher_info(ref)
        for eta in etas:
            ie = refdist.truncated_info(ref, eta)
            table.rows.append((ref.tag, eta, ie, ie / full if math.isfinite(full) else 0.0))
    return table


@dataclass(frozen=True)
class DiagnosticsRun:
    result: symmle.MLEResult
    report: symmle.DiagnosticReport
    table: Table
    min_h: float
    max_abs_h_knots: float

    def summary_lines(self) -> list:
        lines = [f"theta_hat {self.result.theta_hat:.10g}",
                 f"min_h {self.min_h:.3e}",
                 f"max_abs_h_at_knots {self.max_abs_h_knots:.3e}"]
        for name, ok, detail in self.report.checks:
            lines.append(f"{name} {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        lines.append(f"overall {'PASS' if self.report.passed else 'FAIL'}")
        return lines


def run_diagnostics(sample, grid: int = 1000) -> DiagnosticsRun:
    """Fit the joint MLE, tabulate ``h`` on ``[0, M]`` and run the structural checks."""
    x = np.asarray(sample, dtype=float).ravel()
    res = symmle.fit_mle(x)
    M = float(np.max(np.abs(x - res.theta_hat)))
    t = np.linspace(0.0, M, grid)
    h = symmle.characterization_h(res, x, t)
    hk = symmle.h_at_knots(res, x)
    rep = symmle.diagnostics(res, x)
    table = Table(("t", "h"), [(float(a), float(b)) for a, b in zip(t, h)])
    return DiagnosticsRun(res, rep, table, float(np.min(h)),
                          float(np.max(np.abs(hk))) if np.size(hk) else 0.0)


def sample_for(tag: str, n: int, seed: int) -> np.ndarray:
    ref = refdist.from_tag(tag)
    return refdist.sample(ref, int(n), np.random.SeedSequence([int(seed), zlib.crc32(ref.tag.encode()),
                                                               int(n)]))


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
