"""Spreading speeds, invasion thresholds and steady states for two-density
KPP reaction-diffusion systems coupled through a balanced-flux interface."""

from .params import (
    ConfigError,
    DomainError,
    EigenResult,
    InfeasibleError,
    InstabilityError,
    Params,
    RadialSteady,
    Regime,
    SpeedResult,
    SteadyProfile,
    TangencyResult,
    UnsupportedDimensionError,
    logistic,
)
from .halfspace import (
    fisher_speeds,
    regime_diagram,
    speed_halfspace,
    speed_halfspace_mortality,
    steady_state_halfspace,
    truncated_speed_halfspace,
)
from .cylinder import (
    DispersionCurves,
    build_curves,
    enhancement_profile,
    enhancement_test,
    max_effect_dimension,
    rescaled_speed,
    road_field_speed,
    speed_cylinder,
    speed_limit_D,
    speed_limit_R,
)
from .mortality import (
    cg_upper_bound_check,
    radial_steady_mortality,
    robin_eigenvalue,
    robin_kappa,
    speed_cylinder_mortality,
    survival_threshold_D,
    survival_threshold_R,
)
from .simulate import InitSpec, SimConfig, SimResult, measure_speed, run_radial, run_strip

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DispersionCurves",
    "DomainError",
    "EigenResult",
    "InfeasibleError",
    "InitSpec",
    "InstabilityError",
    "Params",
    "RadialSteady",
    "Regime",
    "SimConfig",
    "SimResult",
    "SpeedResult",
    "SteadyProfile",
    "TangencyResult",
    "UnsupportedDimensionError",
    "build_curves",
    "cg_upper_bound_check",
    "enhancement_profile",
    "enhancement_test",
    "fisher_speeds",
    "logistic",
    "max_effect_dimension",
    "measure_speed",
    "radial_steady_mortality",
    "regime_diagram",
    "rescaled_speed",
    "road_field_speed",
    "robin_eigenvalue",
    "robin_kappa",
    "run_radial",
    "run_strip",
    "speed_cylinder",
    "speed_cylinder_mortality",
    "speed_halfspace",
    "speed_halfspace_mortality",
    "speed_limit_D",
    "speed_limit_R",
    "steady_state_halfspace",
    "survival_threshold_D",
    "survival_threshold_R",
    "truncated_speed_halfspace",
]
