"""Matrix-free preconditioners: shifted inverses of the kinetic and
potential parts of the Hessian, their compositions, and the symmetrized
combination.

All kinds are built from two diagonals refreshed at the current iterate:
a Fourier diagonal 1/(alpha + |xi|^2/2) and a real-space diagonal
1/(alpha + V + eta |phi_n|^2).  The shift alpha defaults to the
characteristic energy of the iterate (adaptive policy).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .spectral import FFTCounter, Grid, WaveField

IDENTITY = "identity"
KINETIC = "kinetic"
POTENTIAL = "potential"
COMBINED1 = "c1"
COMBINED2 = "c2"
COMBINED_SYM = "sym"

KINDS = (IDENTITY, KINETIC, POTENTIAL, COMBINED1, COMBINED2, COMBINED_SYM)

# cost-model surcharge in transform units on top of the 3-transform
# (forward + Laplacian + angular momentum) optimizer iteration
FFT_SURCHARGE = {IDENTITY: 0, KINETIC: 0, POTENTIAL: 0, COMBINED1: 1, COMBINED2: 1, COMBINED_SYM: 2}


@dataclass
class Preconditioner:
    """Frozen diagonals of one preconditioner instance.

    Attributes:
        kind: One of KINDS.
        alpha: Positive shift used in both diagonals.
        fourier_diag: 1/(alpha + |xi|^2/2) on the grid (None for identity/potential).
        real_diag: 1/(alpha + V + eta |phi_n|^2) (None for identity/kinetic).
    """

    kind: str
    grid: Grid
    alpha: float
    fourier_diag: np.ndarray | None = None
    real_diag: np.ndarray | None = None

    @property
    def sqrt_real_diag(self) -> np.ndarray:
        return np.sqrt(self.real_diag)

    def apply_values(self, r: np.ndarray, counter: FFTCounter | None = None) -> np.ndarray:
        """Apply to raw grid values (used by the solvers and tests)."""
        g = self.grid
        if self.kind == IDENTITY:
            return r.copy()
        if self.kind == POTENTIAL:
            return self.real_diag * r
        if self.kind == KINETIC:
            return g.ifft(self.fourier_diag * g.fft(r, counter), counter)
        if self.kind == COMBINED1:  # P_V P_Delta
            return self.real_diag * g.ifft(self.fourier_diag * g.fft(r, counter), counter)
        if self.kind == COMBINED2:  # P_Delta P_V
            return g.ifft(self.fourier_diag * g.fft(self.real_diag * r, counter), counter)
        sq = self.sqrt_real_diag
        return sq * g.ifft(self.fourier_diag * g.fft(sq * r, counter), counter)


def build(
    kind: str,
    phi_n: WaveField,
    params: model.ModelParams,
    shift: str | float = "adaptive",
) -> Preconditioner:
    """Build a preconditioner at the current iterate.

    With the adaptive policy the shift is frozen to the characteristic
    energy of phi_n, which is positive for nonnegative traps; a fixed
    float shift must be positive.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown preconditioner kind {kind!r}")
    g = phi_n.grid
    if shift == "adaptive":
        alpha = model.characteristic_energy(phi_n, params)
    else:
        alpha = float(shift)
    if alpha <= 0:
        raise ValueError(f"preconditioner shift must be positive, got {alpha}")
    fourier_diag = None
    real_diag = None
    if kind in (KINETIC, COMBINED1, COMBINED2, COMBINED_SYM):
        fourier_diag = 1.0 / (alpha + 0.5 * g.k2)
    if kind in (POTENTIAL, COMBINED1, COMBINED2, COMBINED_SYM):
        v = model.sample_potential(params.potential, g)
        real_diag = 1.0 / (alpha + v + params.eta * np.abs(phi_n.values) ** 2)
    return Preconditioner(kind=kind, grid=g, alpha=alpha, fourier_diag=fourier_diag, real_diag=real_diag)


def apply(p: Preconditioner, r: WaveField, counter: FFTCounter | None = None) -> WaveField:
    """Apply the preconditioner: the descent direction is -apply(P, r)."""
    if r.grid != p.grid:
        raise ValueError("field grid does not match the preconditioner grid")
    return WaveField(r.grid, p.apply_values(r.values, counter))
