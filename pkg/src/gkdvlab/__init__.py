"""Spectral laboratory for a generalized KdV equation on a periodic interval."""

__version__ = "0.1.0"

from .spectral import (
    Grid1D,
    SpectralField,
    airy_propagate,
    forward_transform,
    gaussian_profile,
    inverse_transform,
    littlewood_paley_block,
    make_grid,
    random_band_limited,
    riesz_potential,
)
from .norms import (
    NormSpec,
    besov_norm,
    holder_conjugate,
    lebesgue_norm,
    lhat_norm,
    norm,
    sobolev_norm,
    weighted_norm,
)
from .spacetime import (
    PairClass,
    TimeTrace,
    classify_pair,
    dual_exponent_map,
    exponent_map,
    free_evolution,
    mixed_norm,
    snorm,
    xnorm,
    ynorm,
)
from .solver import (
    GluedResult,
    NonlinearityG,
    NumericalBlowupError,
    SolveResult,
    SolverConfig,
    aux_smoothness,
    calibrate_delta,
    critical_exponent,
    critical_sobolev,
    energy,
    free_smallness,
    glued_solve,
    mass,
    picard_solve,
    reference_solve,
)
from .estimates import (
    ESTIMATE_IDS,
    EstimateReport,
    EstimateSpec,
    lip_norm_estimate,
    verify,
)
from .diagnostics import (
    MonitorReport,
    ScatteringReport,
    boundary_mass_fraction,
    monitor,
    nonpositive_energy_amplitude,
    scaling_transform,
    scattering_state,
    spectral_tail_fraction,
)
from .traceio import atomic_write_json, read_trace, write_trace

__all__ = [
    "ESTIMATE_IDS",
    "EstimateReport",
    "EstimateSpec",
    "GluedResult",
    "Grid1D",
    "MonitorReport",
    "NonlinearityG",
    "NormSpec",
    "NumericalBlowupError",
    "PairClass",
    "ScatteringReport",
    "SolveResult",
    "SolverConfig",
    "SpectralField",
    "TimeTrace",
    "airy_propagate",
    "atomic_write_json",
    "aux_smoothness",
    "besov_norm",
    "boundary_mass_fraction",
    "calibrate_delta",
    "classify_pair",
    "critical_exponent",
    "critical_sobolev",
    "dual_exponent_map",
    "energy",
    "exponent_map",
    "forward_transform",
    "free_evolution",
    "free_smallness",
    "gaussian_profile",
    "glued_solve",
    "holder_conjugate",
    "inverse_transform",
    "lebesgue_norm",
    "lhat_norm",
    "lip_norm_estimate",
    "littlewood_paley_block",
    "make_grid",
    "mass",
    "mixed_norm",
    "monitor",
    "nonpositive_energy_amplitude",
    "norm",
    "picard_solve",
    "random_band_limited",
    "read_trace",
    "reference_solve",
    "riesz_potential",
    "scaling_transform",
    "scattering_state",
    "snorm",
    "sobolev_norm",
    "spectral_tail_fraction",
    "verify",
    "weighted_norm",
    "write_trace",
    "xnorm",
    "ynorm",
]
