"""gpesolve: ground states of the rotating Gross-Pitaevskii equation.

Preconditioned Riemannian gradient / conjugate-gradient minimization over a
Fourier pseudospectral discretization, with classical imaginary-time
baselines (forward/backward Euler, Crank-Nicolson) and a benchmark harness.
"""

from .spectral import (
    FFTCounter,
    Grid,
    WaveField,
    apply_laplacian,
    apply_lz,
    inner,
    norm,
    spectral_interpolate,
)
from .model import (
    EnergyBreakdown,
    ModelParams,
    PotentialSpec,
    apply_hamiltonian,
    chemical_potential,
    characteristic_energy,
    energy,
    find_vortices,
    gradient,
    harmonic,
    harmonic_lattice,
    harmonic_quartic,
    half_square,
    hessian_quadratic_form,
    initial_guess,
    thomas_fermi_initial,
)
from .precond import Preconditioner, build as build_preconditioner
from .optim import (
    IterationRecord,
    SolveResult,
    SolverConfig,
    check_stop,
    linesearch_full,
    residual,
    solve_pcg,
    solve_pg,
    step,
    tangent_project,
    theta_opt,
)

__version__ = "0.1.0"

__all__ = [
    "FFTCounter", "Grid", "WaveField", "apply_laplacian", "apply_lz",
    "inner", "norm", "spectral_interpolate",
    "EnergyBreakdown", "ModelParams", "PotentialSpec", "apply_hamiltonian",
    "chemical_potential", "characteristic_energy", "energy", "find_vortices",
    "gradient", "harmonic", "harmonic_lattice", "harmonic_quartic",
    "half_square", "hessian_quadratic_form", "initial_guess",
    "thomas_fermi_initial",
    "Preconditioner", "build_preconditioner",
    "IterationRecord", "SolveResult", "SolverConfig", "check_stop",
    "linesearch_full", "residual", "solve_pcg", "solve_pg", "step",
    "tangent_project", "theta_opt",
    "__version__",
]
