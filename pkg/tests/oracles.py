"""Independent dense oracles used by the tests.

Everything here is built from explicit DFT matrices and direct summation,
not from the package's transform helpers, so oracle and implementation
stay on separate code paths.
"""

import numpy as np


def dft_matrix(m: int) -> np.ndarray:
    """Forward DFT matrix, F[p, k] = exp(-2i pi p k / m) (no prefactor)."""
    k = np.arange(m)
    return np.exp(-2j * np.pi * np.outer(k, k) / m)


def idft_matrix(m: int) -> np.ndarray:
    k = np.arange(m)
    return np.exp(2j * np.pi * np.outer(k, k) / m) / m


def freq_indices(m: int) -> np.ndarray:
    """Integer frequencies in DFT ordering: 0..m/2-1, -m/2..-1."""
    return np.concatenate([np.arange(m // 2), np.arange(-m // 2, 0)])


def second_derivative_matrix(m: int, box: float) -> np.ndarray:
    """Dense spectral d^2/dx^2 on [-box, box] with m points."""
    xi = freq_indices(m) * np.pi / box
    return idft_matrix(m) @ np.diag(-(xi**2)) @ dft_matrix(m)


def first_derivative_matrix(m: int, box: float) -> np.ndarray:
    """Dense spectral d/dx; the unmatched Nyquist mode is dropped, the
    standard convention for odd-order spectral differentiation matrices."""
    idx = freq_indices(m)
    xi = idx * np.pi / box
    xi[idx == -m // 2] = 0.0
    return idft_matrix(m) @ np.diag(1j * xi) @ dft_matrix(m)


def dense_lz_matrix(m: int, box: float) -> np.ndarray:
    """Dense -i(x d_y - y d_x) on the 2D tensor grid, row-major ordering."""
    h = 2.0 * box / m
    x1 = -box + h * np.arange(m)
    d1 = first_derivative_matrix(m, box)
    eye = np.eye(m)
    # axis 0 is x, axis 1 is y; kron(A, B) acts as A on axis 0, B on axis 1
    x_dy = np.kron(np.diag(x1), d1)
    y_dx = np.kron(d1, np.diag(x1))
    return -1j * (x_dy - y_dx)


def dense_hamiltonian_1d(m: int, box: float, v: np.ndarray, eta: float = 0.0,
                         density: np.ndarray | None = None) -> np.ndarray:
    """Dense -1/2 d^2/dx^2 + V (+ eta |phi|^2) on the 1D grid."""
    h_mat = -0.5 * second_derivative_matrix(m, box) + np.diag(v)
    if eta != 0.0 and density is not None:
        h_mat = h_mat + eta * np.diag(np.abs(density) ** 2)
    return h_mat


def trig_interpolant(values: np.ndarray, box: float, targets: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of 1D samples by direct summation.

    The unmatched -m/2 mode is split evenly between +/- m/2, matching the
    convention that keeps real data real.
    """
    m = values.size
    coeff = dft_matrix(m) @ values / m
    out = np.zeros(targets.size, dtype=complex)
    for j, p in enumerate(freq_indices(m)):
        if p == -m // 2:
            out += coeff[j] * 0.5 * (
                np.exp(1j * p * np.pi / box * (targets + box))
                + np.exp(-1j * p * np.pi / box * (targets + box))
            )
        else:
            out += coeff[j] * np.exp(1j * p * np.pi / box * (targets + box))
    return out
