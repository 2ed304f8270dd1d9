"""Python surface of the radiative-transfer diffusion-limit laboratory."""

from ._radiff import (
    AngularQuadrature,
    ConvergenceReport,
    ErrorRow,
    RateFit,
    RateResult,
    ResidualReport,
    ResidualRow,
    build_quadrature,
    compatible_root,
    fit_rate,
    layer_picard,
    normalize_config,
    relaxation_solve,
    residual_sweep,
    run_sweep,
    set_threads,
)

__all__ = [
    "AngularQuadrature",
    "ConvergenceReport",
    "ErrorRow",
    "RateFit",
    "RateResult",
    "ResidualReport",
    "ResidualRow",
    "build_quadrature",
    "compatible_root",
    "fit_rate",
    "layer_picard",
    "normalize_config",
    "relaxation_solve",
    "residual_sweep",
    "run_sweep",
    "set_threads",
]

__version__ = "0.1.0"
