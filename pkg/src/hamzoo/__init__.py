"""Newton-equivalent Hamiltonian and Lagrangian families in one dimension."""

from .checks import (CheckRecord, Report, RunConfig, fit_loglog_slope,
                     limit_ladder, nh2_residual, nh3_from_nh2_check,
                     pde_residual, run_suite)
from .dynamics import (RescaleReport, StepFailure, Trajectory, compare_flows,
                       dt_k_factor, integrate, measure_period, newton_residual,
                       read_trajectory_csv, trajectory_to_csv, write_trajectory_csv)
from .expressions import (DomainError, Expr, ParseError, Potential, UnknownSymbol,
                          differentiate, eval_expr, parse, parse_potential, to_source)
from .families import (CoeffTable, FAMILIES, HamiltonianSpec, HDerivs, InvalidSpec,
                       OverflowRisk, PhasePoint, SystemParams, base_energy,
                       chain_factor, compose_series, eval_derivs, eval_h,
                       pascal_row, series_coeffs, sierpinski_mask)
from .lagrangians import (LagrangianSpec, VelocityPoint, dlagrangian_dv,
                          energy_kernel, euler_lagrange_residual, lagrangian,
                          legendre_residual, momentum, sho_series_lagrangian)
from .quadrature import QuadratureFailure, adaptive_simpson

__version__ = "0.1.0"

__all__ = [
    "CheckRecord", "CoeffTable", "DomainError", "Expr", "FAMILIES",
    "HDerivs", "HamiltonianSpec", "InvalidSpec", "LagrangianSpec",
    "OverflowRisk", "ParseError", "PhasePoint", "Potential",
    "QuadratureFailure", "Report", "RescaleReport", "RunConfig",
    "StepFailure", "SystemParams", "Trajectory", "UnknownSymbol",
    "VelocityPoint", "adaptive_simpson", "base_energy", "chain_factor",
    "compare_flows", "compose_series", "differentiate", "dlagrangian_dv",
    "dt_k_factor", "energy_kernel", "euler_lagrange_residual", "eval_derivs",
    "eval_expr", "eval_h", "fit_loglog_slope", "integrate", "lagrangian",
    "legendre_residual", "limit_ladder", "measure_period", "momentum",
    "newton_residual", "nh2_residual", "nh3_from_nh2_check", "parse",
    "parse_potential", "pascal_row", "pde_residual", "read_trajectory_csv",
    "run_suite", "series_coeffs", "sho_series_lagrangian", "sierpinski_mask",
    "to_source", "trajectory_to_csv", "write_trajectory_csv",
]
