"""Location estimation under symmetric log-concave shape constraints."""

from .errors import (ArgumentError, ConvergenceError, CoverageError, DegenerateInformationError,
                     DegenerateSampleError, DomainError, InfiniteMomentError, LcLocError,
                     QuadratureError)
from .lcmle import FitConfig, FitReport, fit
from .onestep import (DensityKind, FisherVariant, OneStepConfig, Preliminary, estimate_density,
                      fisher_hat, one_step, preliminary)
from .plcurve import ExpLinearDensity, PLConcave, SymmetricPLConcave, WeightedSample
from .symmle import characterization_h, diagnostics, fit_fixed_theta, fit_mle

__all__ = [
    "ArgumentError", "ConvergenceError", "CoverageError", "DegenerateInformationError",
    "DegenerateSampleError", "DomainError", "InfiniteMomentError", "LcLocError",
    "QuadratureError", "FitConfig", "FitReport", "fit", "DensityKind", "FisherVariant",
    "OneStepConfig", "Preliminary", "estimate_density", "fisher_hat", "one_step", "preliminary",
    "ExpLinearDensity", "PLConcave", "SymmetricPLConcave", "WeightedSample",
    "characterization_h", "diagnostics", "fit_fixed_theta", "fit_mle",
]
