"""Periodic grid, Fourier transforms, and matrix-free differential operators.

The domain is the square box [-L, L]^d with periodic boundary conditions,
sampled on M uniform points per axis (x_k = -L + k*h, h = 2L/M).  Transforms
follow the unscaled-forward / (1/M per axis)-inverse convention, so the
discrete Fourier frequencies are xi_p = p*pi/L for p = -M/2 .. M/2-1 in
standard FFT ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class FFTCounter:
    """Tracks the spectral-transform budget of a solver run.

    One unit is charged per full d-dimensional forward or inverse
    transform.  An angular-momentum application (the x*d_y and y*d_x
    directional-derivative pair) is charged as a single unit: that is the
    cost-model convention used for the per-iteration budget accounting of
    the optimizers, where the pair is evaluated in one derivative pass.
    """

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int = 1) -> None:
        self.count += n


@dataclass(frozen=True)
class Grid:
    """Isotropic periodic grid on [-L, L]^d.

    Attributes:
        d: Spatial dimension (1, 2 or 3).
        L: Domain half-width.
        M: Grid points per axis (even, >= 4).
        h: Mesh size 2L/M.
        x1: 1-D coordinate samples, x_k = -L + k*h.
        freqs: 1-D Fourier frequencies p*pi/L in FFT ordering.
    """

    d: int
    L: float
    M: int
    h: float = field(init=False, compare=False)
    x1: np.ndarray = field(init=False, compare=False, repr=False)
    freqs: np.ndarray = field(init=False, compare=False, repr=False)
    freqs_first: np.ndarray = field(init=False, compare=False, repr=False)
    k2: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.M < 4 or self.M % 2 != 0:
            raise ValueError(f"M must be an even integer >= 4, got {self.M}")
        if self.L <= 0:
            raise ValueError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))
        h = 2.0 * self.L / self.M
        x1 = -self.L + h * np.arange(self.M)
        # integer frequencies [0 .. M/2-1, -M/2 .. -1] scaled by pi/L
        freqs = np.fft.fftfreq(self.M, d=1.0 / self.M) * (np.pi / self.L)
        # first derivatives zero the unmatched -M/2 mode (odd-derivative
        # convention that keeps real fields real); even powers keep it
        freqs_first = freqs.copy()
        freqs_first[self.M // 2] = 0.0
        k2 = np.zeros((self.M,) * self.d)
        for ax in range(self.d):
            shape = [1] * self.d
            shape[ax] = self.M
            k2 = k2 + freqs.reshape(shape) ** 2
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "freqs_first", freqs_first)
        object.__setattr__(self, "k2", k2)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.d

    @property
    def size(self) -> int:
        return self.M**self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    def coordinate(self, axis: int) -> np.ndarray:
        """Coordinate values along `axis`, broadcastable to the grid shape."""
        shape = [1] * self.d
        shape[axis] = self.M
        return self.x1.reshape(shape)

    def axis_freqs(self, axis: int, first_derivative: bool = False) -> np.ndarray:
        """Fourier frequencies along `axis`, broadcastable to the grid shape."""
        shape = [1] * self.d
        shape[axis] = self.M
        freqs = self.freqs_first if first_derivative else self.freqs
        return freqs.reshape(shape)

    def fft(self, values: np.ndarray, counter: FFTCounter | None = None) -> np.ndarray:
        if counter is not None:
            counter.add()
        return np.fft.fftn(values)

    def ifft(self, values_hat: np.ndarray, counter: FFTCounter | None = None) -> np.ndarray:
        if counter is not None:
            counter.add()
        return np.fft.ifftn(values_hat)


@dataclass
class WaveField:
    """Complex amplitude sampled on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.iscomplexobj(values):
            values = values.astype(np.complex128)
        self.values = values

    @classmethod
    def zeros(cls, grid: Grid) -> "WaveField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.values.copy())

    def normalized(self) -> "WaveField":
        n = norm(self)
        if n == 0.0:
            raise ValueError("cannot normalize the zero field")
        return WaveField(self.grid, self.values / n)

    def is_normalized(self, tol: float = 1e-13) -> bool:
        return abs(norm(self) - 1.0) <= tol


def check_same_grid(u: WaveField, v: WaveField) -> None:
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")


def inner(u: WaveField, v: WaveField) -> complex:
    """Discrete L2 inner product h^d * sum(conj(u) * v)."""
    check_same_grid(u, v)
    return u.grid.cell_volume * np.vdot(u.values, v.values)


def norm(u: WaveField) -> float:
    return float(np.sqrt(u.grid.cell_volume) * np.linalg.norm(u.values.ravel()))


def inner_hat(grid: Grid, u_hat: np.ndarray, v_hat: np.ndarray) -> complex:
    """Inner product evaluated from Fourier coefficients (Parseval)."""
    return grid.cell_volume / grid.size * np.vdot(u_hat, v_hat)


def apply_laplacian(phi: WaveField, counter: FFTCounter | None = None) -> WaveField:
    """Apply the periodic Laplacian by Fourier multiplication with -|xi|^2."""
    g = phi.grid
    out = g.ifft(-g.k2 * g.fft(phi.values, counter), counter)
    return WaveField(g, out)


def laplacian_from_hat(grid: Grid, phi_hat: np.ndarray, counter: FFTCounter | None = None) -> np.ndarray:
    return grid.ifft(-grid.k2 * phi_hat, counter)


def _axis_derivative(grid: Grid, values: np.ndarray, axis: int) -> np.ndarray:
    """One-axis spectral derivative: inverse(i*xi * forward) along `axis`."""
    hat = np.fft.fft(values, axis=axis)
    return np.fft.ifft(1j * grid.axis_freqs(axis, first_derivative=True) * hat, axis=axis)


def apply_lz(phi: WaveField, counter: FFTCounter | None = None) -> WaveField:
    """Apply the angular-momentum operator -i(x d_y - y d_x).

    Each partial derivative is evaluated by one-axis FFT differentiation;
    the coordinate products are taken in real space.  Requires d >= 2.
    """
    g = phi.grid
    if g.d < 2:
        raise ValueError("the angular-momentum operator requires d >= 2")
    if counter is not None:
        counter.add()
    dy = _axis_derivative(g, phi.values, 1)
    dx = _axis_derivative(g, phi.values, 0)
    x = g.coordinate(0)
    y = g.coordinate(1)
    return WaveField(g, -1j * (x * dy - y * dx))


def lz_from_hat(grid: Grid, phi_hat: np.ndarray, counter: FFTCounter | None = None) -> np.ndarray:
    """Angular-momentum application given the full Fourier transform."""
    if grid.d < 2:
        raise ValueError("the angular-momentum operator requires d >= 2")
    if counter is not None:
        counter.add()
    dy = np.fft.ifftn(1j * grid.axis_freqs(1, first_derivative=True) * phi_hat)
    dx = np.fft.ifftn(1j * grid.axis_freqs(0, first_derivative=True) * phi_hat)
    x = grid.coordinate(0)
    y = grid.coordinate(1)
    return -1j * (x * dy - y * dx)


def spectral_interpolate(phi: WaveField, target: Grid) -> WaveField:
    """Zero-padding Fourier interpolation onto a finer grid, then renormalize.

    The unmatched -M/2 mode of the coarse grid is split evenly between the
    +/- M/2 modes of the fine grid, which keeps real fields real.  The
    result has unit discrete norm.
    """
    g = phi.grid
    if target.d != g.d or target.L != g.L:
        raise ValueError("target grid must share dimension and half-width")
    if target.M < g.M:
        raise ValueError("target grid must be at least as fine")
    if target.M == g.M:
        return phi.normalized()
    M, M2, d = g.M, target.M, g.d
    coarse = np.fft.fftshift(np.fft.fftn(phi.values))
    fine = np.zeros(target.shape, dtype=np.complex128)
    off = (M2 - M) // 2
    block = tuple(slice(off, off + M) for _ in range(d))
    fine[block] = coarse
    for ax in range(d):
        lo = [slice(None)] * d
        hi = [slice(None)] * d
        lo[ax] = off
        hi[ax] = off + M
        nyquist = fine[tuple(lo)].copy()
        fine[tuple(lo)] = 0.5 * nyquist
        fine[tuple(hi)] = fine[tuple(hi)] + 0.5 * nyquist
    values = np.fft.ifftn(np.fft.ifftshift(fine)) * (M2 / M) ** d
    return WaveField(target, values).normalized()
