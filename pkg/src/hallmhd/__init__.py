"""Spectral Galerkin simulation of density-dependent incompressible Hall-MHD on a periodic box."""
__version__ = "0.1.0"

from .config import SimConfig, load_config, parse_config
from .diagnostics import check_cancellations, divergence_residual, total_energy, weak_residuals
from .fixedpoint import SolutionTrajectory, WindowConfig, march
from .galerkin import GalerkinState, Physics, assemble, energy_balance, mass_matrix
from .harness import beltrami_reference, refinement_study, relative_energy
from .material_laws import make_law, regularize_law
from .mollifier import build_initial_state, build_mollifier, mollify
from .simulation import build_setup, run_config
from .spectral_basis import Basis, GridField, TorusDomain, enumerate_modes, project_L2, synthesize
from .transport import advect_density, level_set_histogram

__all__ = [
    "Basis", "GalerkinState", "GridField", "Physics", "SimConfig", "SolutionTrajectory",
    "TorusDomain", "WindowConfig", "advect_density", "assemble", "beltrami_reference",
    "build_initial_state", "build_mollifier", "build_setup", "check_cancellations",
    "divergence_residual", "energy_balance", "enumerate_modes", "level_set_histogram",
    "load_config", "make_law", "march", "mass_matrix", "mollify", "parse_config", "project_L2",
    "refinement_study", "regularize_law", "relative_energy", "run_config", "synthesize",
    "total_energy", "weak_residuals",
]
