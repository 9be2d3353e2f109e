"""Pseudospectral Hartree-Fock-Bogoliubov simulator with a harmonic-analysis norm toolkit."""
from .grid import Grid, make_grid
from .kernels import MatrixState, compose
from .potential import PotentialSpec, sample_VN, sample_vM, split_main_tail
from .bogoliubov import ch, ch_inverse, pair_densities, sh, sh2k
from .evolution import (
    Interaction,
    SimulationError,
    StateHFB,
    Trajectory,
    energy,
    evolve,
    make_initial_data,
    rhs_component,
    rhs_matrix,
    step_matrix,
    step_strang,
)

__version__ = "0.1.0"
