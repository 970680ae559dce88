"""Radial numerical lab for the generalized Jang equation with degenerate warping."""
from .asymptotics import BlowupFit, classify_rate, fit_blowup_exponent, fit_decay_exponent
from .barriers import (Barrier, MarginReport, build_integral_barrier, build_log_barrier, build_ode_barrier,
                       build_power_barrier, certify_barrier, verify_barrier)
from .config import RunConfig, load_config, parse_config
from .continuation import (EnclosureResult, blowup_profile, continuation_family1, continuation_family2,
                           enclosure_check, shooting_family2)
from .errors import (ConfigError, DegenerateError, DomainError, JangBenchError, NumericError, RegimeError,
                     SteepGraphError, UnsupportedError, ValidationError)
from .geometry import FoliatedData, Profile, extend_inward, flat_data, read_tabulated_csv, synthetic_data
from .graph import constraint_densities, graph_geometry, verify_scalar_curvature_identity
from .grid import Grid, extended_grid, geometric_grid, power_grid, uniform_grid
from .operator import OperatorParams, jang_linearization, jang_residual
from .schwarzschild import schwarzschild_data, schwarzschild_grid
from .solver import JangProfile, SolveReport, solve_regularized

__version__ = "0.1.0"

__all__ = [
    "Barrier", "BlowupFit", "ConfigError", "DegenerateError", "DomainError", "EnclosureResult", "FoliatedData",
    "Grid", "JangBenchError", "JangProfile", "MarginReport", "NumericError", "OperatorParams", "Profile",
    "RegimeError", "RunConfig", "SolveReport", "SteepGraphError", "UnsupportedError", "ValidationError",
    "blowup_profile", "build_integral_barrier", "build_log_barrier", "build_ode_barrier", "build_power_barrier", "certify_barrier",
    "classify_rate", "constraint_densities", "continuation_family1", "continuation_family2", "enclosure_check",
    "extend_inward", "extended_grid", "fit_blowup_exponent", "fit_decay_exponent", "flat_data",
    "geometric_grid", "graph_geometry", "jang_linearization", "jang_residual", "load_config", "parse_config",
    "power_grid", "read_tabulated_csv", "schwarzschild_data", "schwarzschild_grid", "shooting_family2",
    "solve_regularized", "synthetic_data", "uniform_grid", "verify_barrier", "verify_scalar_curvature_identity",
]
