"""Energy functional, mean-field Hamiltonian, trap potentials and initial data.

The energy of a normalized field phi is

    E(phi) = int [ 1/2 |grad phi|^2 + V |phi|^2 + eta/2 |phi|^4
                   - omega * conj(phi) Lz phi ],

with mean-field Hamiltonian H_phi = -1/2 Laplacian + V + eta |phi|^2
- omega Lz, gradient grad E = 2 H_phi phi, and chemical potential
lambda = <H_phi phi, phi>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .spectral import FFTCounter, Grid, WaveField

HARMONIC = "harmonic"
HARMONIC_LATTICE = "harmonic_plus_lattice"
HARMONIC_QUARTIC = "harmonic_plus_quartic"
HALF_SQUARE = "isotropic_half_square"

_KINDS = (HARMONIC, HARMONIC_LATTICE, HARMONIC_QUARTIC, HALF_SQUARE)


def _axis_tuple(value, d: int, name: str) -> tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),) * d
    out = tuple(float(v) for v in value)
    if len(out) < d:
        raise ValueError(f"{name} needs at least {d} entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class PotentialSpec:
    """Parametric trap definition.

    The harmonic part follows the printed convention of the source model:
    gamma_x^2 x^2 in 1D but gamma_nu nu^2 in 2D/3D (coefficients not
    squared).  Set `harmonic_coeffs` to use sum(c_nu nu^2) verbatim in any
    dimension instead.  The lattice argument is sin^2(q_nu * nu^2) by
    default (`lattice_argument="nu_squared"`); pass "nu" for the
    conventional sin^2(q_nu * nu) reading.
    """

    kind: str = HARMONIC
    gamma: tuple[float, ...] = (1.0, 1.0, 1.0)
    kappa: tuple[float, ...] = (0.0, 0.0, 0.0)
    q: tuple[float, ...] = (0.0, 0.0, 0.0)
    alpha: float = 0.0
    kappa_quartic: float = 0.0
    lattice_argument: str = "nu_squared"
    harmonic_coeffs: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.lattice_argument not in ("nu_squared", "nu"):
            raise ValueError(f"unknown lattice_argument {self.lattice_argument!r}")
        if any(g <= 0 for g in self.gamma):
            raise ValueError("trap frequencies gamma must be positive")
        if any(k < 0 for k in self.kappa) or self.kappa_quartic < 0:
            raise ValueError("lattice/quartic amplitudes must be nonnegative")

    def _harmonic(self, grid: Grid) -> np.ndarray:
        if self.harmonic_coeffs is not None:
            coeffs = _axis_tuple(self.harmonic_coeffs, grid.d, "harmonic_coeffs")
            return sum(coeffs[ax] * grid.coordinate(ax) ** 2 for ax in range(grid.d))
        gamma = _axis_tuple(self.gamma, grid.d, "gamma")
        if grid.d == 1:
            return gamma[0] ** 2 * grid.coordinate(0) ** 2
        return sum(gamma[ax] * grid.coordinate(ax) ** 2 for ax in range(grid.d))

    def sample(self, grid: Grid) -> np.ndarray:
        """Evaluate the potential on the grid nodes."""
        if self.kind == HALF_SQUARE:
            return 0.5 * sum(grid.coordinate(ax) ** 2 for ax in range(grid.d))
        if self.kind == HARMONIC:
            return self._harmonic(grid) + np.zeros(grid.shape)
        if self.kind == HARMONIC_LATTICE:
            kappa = _axis_tuple(self.kappa, grid.d, "kappa")
            q = _axis_tuple(self.q, grid.d, "q")
            v = self._harmonic(grid) + np.zeros(grid.shape)
            for ax in range(grid.d):
                nu = grid.coordinate(ax)
                arg = q[ax] * nu**2 if self.lattice_argument == "nu_squared" else q[ax] * nu
                v = v + kappa[ax] * np.sin(arg) ** 2
            return v
        # harmonic plus quartic, d = 2 or 3
        if grid.d < 2:
            raise ValueError("the harmonic-plus-quartic trap requires d >= 2")
        gamma = _axis_tuple(self.gamma, grid.d, "gamma")
        x = grid.coordinate(0)
        y = grid.coordinate(1)
        planar = gamma[0] * x**2 + gamma[1] * y**2
        v = (1.0 - self.alpha) * planar + 0.25 * self.kappa_quartic * (x**2 + y**2) ** 2
        if grid.d == 3:
            v = v + gamma[2] ** 2 * grid.coordinate(2) ** 2
        return v + np.zeros(grid.shape)


def harmonic(gamma=1.0) -> PotentialSpec:
    return PotentialSpec(kind=HARMONIC, gamma=_axis_tuple(gamma, 3, "gamma"))


def harmonic_lattice(gamma=1.0, kappa=25.0, q=math.pi / 2) -> PotentialSpec:
    return PotentialSpec(
        kind=HARMONIC_LATTICE,
        gamma=_axis_tuple(gamma, 3, "gamma"),
        kappa=_axis_tuple(kappa, 3, "kappa"),
        q=_axis_tuple(q, 3, "q"),
    )


def harmonic_quartic(gamma=1.0, alpha=1.2, kappa_quartic=0.3) -> PotentialSpec:
    return PotentialSpec(
        kind=HARMONIC_QUARTIC,
        gamma=_axis_tuple(gamma, 3, "gamma"),
        alpha=float(alpha),
        kappa_quartic=float(kappa_quartic),
    )


def half_square() -> PotentialSpec:
    # |x|^2/2: effective per-axis harmonic coefficient 1/2 (printed 2D/3D
    # convention); 1D equivalent gamma_x = sqrt(1/2).
    return PotentialSpec(kind=HALF_SQUARE, gamma=(0.5, 0.5, 0.5))


@dataclass(frozen=True)
class ModelParams:
    """Nonlinearity strength eta, rotation speed omega, and the trap."""

    eta: float = 0.0
    omega: float = 0.0
    potential: PotentialSpec = PotentialSpec()

    def __post_init__(self) -> None:
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")


_potential_cache: dict[tuple[PotentialSpec, Grid], np.ndarray] = {}


def sample_potential(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    """Sampled trap values, cached per (spec, grid)."""
    key = (spec, grid)
    v = _potential_cache.get(key)
    if v is None:
        v = spec.sample(grid)
        v.setflags(write=False)
        if len(_potential_cache) > 64:
            _potential_cache.clear()
        _potential_cache[key] = v
    return v


@dataclass
class EnergyBreakdown:
    kinetic: float
    potential: float
    interaction: float
    rotation: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.interaction + self.rotation


def _check_finite(phi: WaveField) -> None:
    if not np.all(np.isfinite(phi.values)):
        raise ValueError("field contains NaN or Inf")


def energy(phi: WaveField, params: ModelParams, counter: FFTCounter | None = None) -> EnergyBreakdown:
    """Energy of `phi` split into kinetic/potential/interaction/rotation parts."""
    _check_finite(phi)
    g = phi.grid
    hd = g.cell_volume
    v = sample_potential(params.potential, g)
    kinetic = -0.5 * spectral.inner(phi, spectral.apply_laplacian(phi, counter)).real
    dens = np.abs(phi.values) ** 2
    potential = hd * float(np.sum(v * dens))
    interaction = 0.5 * params.eta * hd * float(np.sum(dens**2))
    rotation = 0.0
    if params.omega != 0.0:
        if g.d < 2:
            raise ValueError("rotation requires d >= 2")
        rotation = -params.omega * spectral.inner(phi, spectral.apply_lz(phi, counter)).real
    return EnergyBreakdown(kinetic, potential, interaction, rotation)


def apply_hamiltonian(
    phi: WaveField,
    density: WaveField,
    params: ModelParams,
    counter: FFTCounter | None = None,
) -> WaveField:
    """Apply H_density = -1/2 Lap + V + eta |density|^2 - omega Lz to phi.

    Uses one forward transform of phi, one inverse transform for the
    Laplacian and (when omega != 0) one angular-momentum derivative pass.
    """
    spectral.check_same_grid(phi, density)
    g = phi.grid
    v = sample_potential(params.potential, g)
    phi_hat = g.fft(phi.values, counter)
    out = -0.5 * spectral.laplacian_from_hat(g, phi_hat, counter)
    out += (v + params.eta * np.abs(density.values) ** 2) * phi.values
    if params.omega != 0.0:
        if g.d < 2:
            raise ValueError("rotation requires d >= 2")
        out -= params.omega * spectral.lz_from_hat(g, phi_hat, counter)
    return WaveField(g, out)


def gradient(phi: WaveField, params: ModelParams, counter: FFTCounter | None = None) -> WaveField:
    """Energy gradient 2 H_phi phi."""
    h = apply_hamiltonian(phi, phi, params, counter)
    return WaveField(phi.grid, 2.0 * h.values)


def hessian_quadratic_form(phi: WaveField, f: WaveField, params: ModelParams) -> float:
    """Second derivative of the energy at phi along f: d^2/dt^2 E(phi + t f).

    Equals 2 Re<f, H_phi f> + 2 eta h^d sum(|phi|^2 |f|^2)
    + 2 eta Re<phi^2, f^2>; the middle term is required for consistency
    with finite differences of the gradient.
    """
    spectral.check_same_grid(phi, f)
    hd = phi.grid.cell_volume
    hf = apply_hamiltonian(f, phi, params)
    out = 2.0 * spectral.inner(f, hf).real
    if params.eta != 0.0:
        out += 2.0 * params.eta * hd * float(np.sum(np.abs(phi.values) ** 2 * np.abs(f.values) ** 2))
        out += 2.0 * params.eta * hd * float(np.sum((np.conj(phi.values) ** 2 * f.values**2).real))
    return out


def _require_normalized(phi: WaveField, tol: float = 1e-8) -> None:
    n = spectral.norm(phi)
    if abs(n - 1.0) > tol:
        raise ValueError(f"field must have unit norm, got {n}")


def chemical_potential(phi: WaveField, params: ModelParams) -> float:
    """Lagrange multiplier lambda = Re<H_phi phi, phi> for normalized phi."""
    _require_normalized(phi)
    h = apply_hamiltonian(phi, phi, params)
    return spectral.inner(h, phi).real


def characteristic_energy(phi: WaveField, params: ModelParams) -> float:
    """Adaptive preconditioner shift: int(1/2 |grad phi|^2 + V|phi|^2 + eta|phi|^4).

    Equals kinetic + potential + 2*interaction of the energy breakdown;
    strictly positive for nonzero phi in a nonnegative trap.
    """
    _require_normalized(phi)
    e = energy(phi, params)
    return e.kinetic + e.potential + 2.0 * e.interaction


def thomas_fermi_mu(params: ModelParams, d: int) -> float:
    """Closed-form Thomas-Fermi chemical potential for the harmonic trap."""
    if params.eta <= 0:
        raise ValueError("the Thomas-Fermi approximation requires eta > 0")
    g = _axis_tuple(params.potential.gamma, d, "gamma")
    eta = params.eta
    if d == 1:
        return 0.5 * (3.0 * eta * g[0]) ** (2.0 / 3.0)
    if d == 2:
        return 0.5 * (4.0 * eta * g[0] * g[1]) ** 0.5
    return 0.5 * (15.0 * eta * g[0] * g[1] * g[2]) ** (2.0 / 5.0)


def thomas_fermi_initial(grid: Grid, params: ModelParams) -> WaveField:
    """Normalized Thomas-Fermi profile sqrt(max(mu - V, 0)/eta)."""
    mu = thomas_fermi_mu(params, grid.d)
    v = sample_potential(params.potential, grid)
    profile = np.sqrt(np.maximum(mu - v, 0.0) / params.eta)
    if not np.any(profile > 0):
        raise ValueError("potential exceeds the Thomas-Fermi level everywhere on the grid")
    return WaveField(grid, profile.astype(np.complex128)).normalized()


GUESS_KINDS = ("a", "b", "bbar", "c", "cbar", "d", "dbar", "e", "ebar", "tf", "gauss")


def initial_guess(kind: str, grid: Grid, params: ModelParams) -> WaveField:
    """Named initial data; `a`-`ebar` are the standard 2D Gaussian/vortex mixes.

    `tf` is the Thomas-Fermi profile (any dimension, eta > 0) and `gauss`
    an isotropic Gaussian (any dimension).
    """
    if kind not in GUESS_KINDS:
        raise ValueError(f"unknown initial guess kind {kind!r}")
    if kind == "tf":
        return thomas_fermi_initial(grid, params)
    if kind == "gauss":
        r2 = sum(grid.coordinate(ax) ** 2 for ax in range(grid.d))
        return WaveField(grid, np.exp(-r2 / 2.0).astype(np.complex128)).normalized()
    if grid.d != 2:
        raise ValueError(f"initial guess {kind!r} is defined for d = 2 only")
    x = grid.coordinate(0)
    y = grid.coordinate(1)
    conjugate = kind.endswith("bar")
    base = kind[:-3] if conjugate else kind
    phi_a = np.exp(-(x**2 + y**2) / 2.0) / math.sqrt(math.pi) + 0j
    phi_b = (x + 1j * y) * phi_a
    w = params.omega
    if base == "a":
        values = phi_a
    elif base == "b":
        values = phi_b
    elif base == "c":
        values = 0.5 * (phi_a + phi_b)
    elif base == "d":
        values = (1.0 - w) * phi_a + w * phi_b
    else:  # e
        values = w * phi_a + (1.0 - w) * phi_b
    field = WaveField(grid, values).normalized()
    if conjugate:
        field = WaveField(grid, np.conj(field.values))
    return field


def find_vortices(phi: WaveField, radius: float | None = None) -> list[tuple[float, float, int]]:
    """Locate phase singularities by plaquette phase-winding summation (d = 2).

    Returns (x, y, winding) for each grid plaquette whose wrapped phase
    circulation is a nonzero multiple of 2*pi, restricted to plaquette
    centers inside `radius` (default: whole grid).
    """
    if phi.grid.d != 2:
        raise ValueError("vortex detection is implemented for d = 2")
    g = phi.grid
    ph = np.angle(phi.values)

    def wrap(a: np.ndarray) -> np.ndarray:
        return (a + np.pi) % (2.0 * np.pi) - np.pi

    # circulation around each plaquette (k,k+1) x (l,l+1), counterclockwise
    d_bottom = wrap(np.diff(ph, axis=0)[:, :-1])
    d_right = wrap(np.diff(ph, axis=1)[1:, :])
    d_top = wrap(-np.diff(ph, axis=0)[:, 1:])
    d_left = wrap(-np.diff(ph, axis=1)[:-1, :])
    winding = np.rint((d_bottom + d_right + d_top + d_left) / (2.0 * np.pi)).astype(int)
    x = g.x1
    xc = 0.5 * (x[:-1] + x[1:])
    out: list[tuple[float, float, int]] = []
    for i, j in np.argwhere(winding != 0):
        cx, cy = xc[i], xc[j]
        if radius is None or cx * cx + cy * cy < radius * radius:
            out.append((float(cx), float(cy), int(winding[i, j])))
    return out
