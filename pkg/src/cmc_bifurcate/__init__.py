"""Stability spectra, critical lengths, and bulge-branch continuation for
cylindrical liquid interfaces pinned to a strip or resting in a right wedge."""

from ._kernels import BACKEND as kernel_backend
from .bifurcation import (BifurcationPoint, BranchState, branch_switch,
                          check_alexandrov_symmetry, continue_branch,
                          locate_bifurcation, residual, state_mesh)
from .geometry import (Convexity, CylinderConfig, Grid, ScalarField, Scenario,
                       SurfaceMesh, TMode, build_grid, index_form, jacobi_apply,
                       mean_curvature, mesh_to_obj, normal_graph)
from .oracle import (EigenResult, SturmProblem, critical_length_zero_crossing,
                     full_2d_jacobi_spectrum, modal_jacobi_spectrum, sturm_eigen,
                     sturm_problem_for)
from .spectrum import (Branch, CaseId, Classification, SpectrumEntry,
                       StabilityVerdict, TranscendentalCase, bifurcation_period,
                       planar_bifurcation_period, planar_critical_length,
                       planar_eigenvalue, planar_stability, solve_transcendental,
                       spectrum_entries, stability, wedge_bifurcation_period,
                       wedge_mode_constants, wedge_stability)

__version__ = "0.1.0"

__all__ = [
    "BifurcationPoint", "BranchState", "Branch", "CaseId", "Classification",
    "Convexity", "CylinderConfig", "EigenResult", "Grid", "ScalarField",
    "Scenario", "SpectrumEntry", "StabilityVerdict", "SturmProblem",
    "SurfaceMesh", "TMode", "TranscendentalCase", "bifurcation_period",
    "branch_switch", "build_grid", "check_alexandrov_symmetry",
    "continue_branch", "critical_length_zero_crossing",
    "full_2d_jacobi_spectrum", "index_form", "jacobi_apply", "kernel_backend",
    "locate_bifurcation", "mean_curvature", "mesh_to_obj",
    "modal_jacobi_spectrum", "normal_graph", "planar_bifurcation_period",
    "planar_critical_length", "planar_eigenvalue", "planar_stability",
    "residual", "solve_transcendental", "spectrum_entries", "stability",
    "state_mesh", "sturm_eigen", "sturm_problem_for",
    "wedge_bifurcation_period", "wedge_mode_constants", "wedge_stability",
]
