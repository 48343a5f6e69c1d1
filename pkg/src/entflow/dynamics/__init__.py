from .core import (
    BACKEND,
    EvolveResult,
    LangevinConfig,
    LangevinError,
    Trajectory,
    diffusion_factor,
    diffusion_matrix,
    drift,
    evolve,
    init_lambda,
    r1_closed_form,
    r1_ode_rhs,
    step,
    var_large_lambda,
    var_ode_rhs,
)

__all__ = [
    "BACKEND", "EvolveResult", "LangevinConfig", "LangevinError", "Trajectory",
    "diffusion_factor", "diffusion_matrix", "drift", "evolve", "init_lambda",
    "r1_closed_form", "r1_ode_rhs", "step", "var_large_lambda", "var_ode_rhs",
]
