"""Equation-free multiscale computation: projective integration and patch schemes."""

from .errors import (
    ConfigurationError,
    EqfreeError,
    NonFiniteStateError,
    NumericalError,
    StabilityError,
    StiffnessError,
)
from .integrators import CountedRhs, Trajectory, end_derivative, rk4_fixed, rk45_adaptive
from .patches1d import (
    MicroRhsError,
    PatchConfig1,
    config_patches1,
    full_domain_oracle,
    lagrange_weights,
    make_patch_rhs1,
    patch_edge_int1,
    patch_rhs1,
    spectral_edge_values,
)
from .patches2d import (
    PatchConfig2,
    config_patches2,
    full_domain_oracle2,
    make_patch_rhs2,
    nonlinear_diffusion_rhs2,
    patch_edge_int2,
    patch_rhs2,
)
from .projective import (
    BurstLength,
    PiConfig,
    PiResult,
    burst_length_min,
    constr_deriv,
    pig,
    pirk2,
    pirk4,
    rk4_burst,
    rk45_burst,
    suggest_macro_step,
)
from .systems import LinearSystem, exact_solution, make_slowfast, random_stiff_system, slowfast_rhs

__all__ = [name for name in dir() if not name.startswith("_")]
