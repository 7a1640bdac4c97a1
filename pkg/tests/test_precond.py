"""Preconditioner diagonals, application, and operator properties."""

import numpy as np
import pytest

from gpesolve import Grid, ModelParams, WaveField, build_preconditioner, harmonic, inner, norm
from gpesolve import model
from gpesolve.precond import apply

from oracles import second_derivative_matrix


def random_normalized(grid, seed=0):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return WaveField(grid, vals).normalized()


def dense_preconditioner(p, grid):
    """Dense matrix of the preconditioner by applying it to basis vectors."""
    n = grid.size
    out = np.zeros((n, n), dtype=complex)
    basis = np.zeros(n, dtype=complex)
    for j in range(n):
        basis[j] = 1.0
        out[:, j] = p.apply_values(basis.reshape(grid.shape)).ravel()
        basis[j] = 0.0
    return out


@pytest.fixture
def setup_1d():
    g = Grid(1, 8.0, 32)
    params = ModelParams(eta=40.0, omega=0.0, potential=harmonic(1.0))
    phi = random_normalized(g, 1)
    return g, params, phi


class TestBuild:
    def test_adaptive_shift_is_characteristic_energy(self, setup_1d):
        g, params, phi = setup_1d
        p = build_preconditioner("sym", phi, params)
        assert p.alpha == pytest.approx(model.characteristic_energy(phi, params), rel=1e-13)
        assert p.alpha > 0

    def test_fixed_shift(self, setup_1d):
        g, params, phi = setup_1d
        p = build_preconditioner("kinetic", phi, params, shift=2.5)
        assert p.alpha == 2.5

    def test_nonpositive_shift_rejected(self, setup_1d):
        g, params, phi = setup_1d
        with pytest.raises(ValueError, match="positive"):
            build_preconditioner("kinetic", phi, params, shift=-1.0)

    def test_unknown_kind_rejected(self, setup_1d):
        g, params, phi = setup_1d
        with pytest.raises(ValueError, match="kind"):
            build_preconditioner("chebyshev", phi, params)


class TestApply:
    def test_identity(self, setup_1d):
        g, params, phi = setup_1d
        p = build_preconditioner("identity", phi, params)
        r = random_normalized(g, 2)
        assert np.array_equal(apply(p, r).values, r.values)

    def test_kinetic_scales_plane_waves(self):
        g = Grid(1, 8.0, 32)
        params = ModelParams(eta=0.0, omega=0.0,
                             potential=model.PotentialSpec(kind="harmonic", harmonic_coeffs=(0.0,)))
        phi = random_normalized(g, 3)
        p = build_preconditioner("kinetic", phi, params, shift=1.7)
        xi = 3 * np.pi / g.L
        wave = WaveField(g, np.exp(1j * xi * (g.x1 + g.L)))
        out = apply(p, wave)
        assert np.allclose(out.values, wave.values / (1.7 + xi**2 / 2), atol=1e-13)

    def test_potential_scales_point_masses(self, setup_1d):
        g, params, phi = setup_1d
        p = build_preconditioner("potential", phi, params)
        k = 7
        e = np.zeros(g.shape, dtype=complex)
        e[k] = 1.0
        out = apply(p, WaveField(g, e))
        v = model.sample_potential(params.potential, g)
        expected = 1.0 / (p.alpha + v[k] + params.eta * np.abs(phi.values[k]) ** 2)
        assert out.values[k] == pytest.approx(expected, rel=1e-14)
        assert np.max(np.abs(np.delete(out.values, k))) == 0

    def test_potential_diagonal_action_on_iterate(self, setup_1d):
        g, params, phi = setup_1d
        p = build_preconditioner("potential", phi, params)
        v = model.sample_potential(params.potential, g)
        out = apply(p, phi)
        expected = phi.values / (p.alpha + v + params.eta * np.abs(phi.values) ** 2)
        assert np.allclose(out.values, expected, atol=1e-15)

    def test_grid_mismatch(self, setup_1d):
        g, params, phi = setup_1d
        p = build_preconditioner("sym", phi, params)
        with pytest.raises(ValueError, match="grid"):
            apply(p, random_normalized(Grid(1, 8.0, 64)))

    def test_composition_order(self, setup_1d):
        g, params, phi = setup_1d
        r = random_normalized(g, 4)
        p1 = build_preconditioner("c1", phi, params)
        p2 = build_preconditioner("c2", phi, params)
        pv = build_preconditioner("potential", phi, params)
        pk = build_preconditioner("kinetic", phi, params)
        # c1 = P_V P_Delta, c2 = P_Delta P_V (shifts agree since same iterate)
        a = apply(p1, r).values
        b = apply(pv, apply(pk, r)).values
        assert np.allclose(a, b, atol=1e-14)
        c = apply(p2, r).values
        d = apply(pk, apply(pv, r)).values
        assert np.allclose(c, d, atol=1e-14)


class TestOperatorProperties:
    @pytest.mark.parametrize("kind", ["identity", "kinetic", "potential", "sym"])
    def test_hermitian_positive_definite(self, kind):
        for d, m in ((1, 16), (1, 32), (2, 16)):
            g = Grid(d, 6.0, m)
            params = ModelParams(eta=15.0, omega=0.0, potential=harmonic(1.0))
            phi = random_normalized(g, m + d)
            p = build_preconditioner(kind, phi, params)
            u = random_normalized(g, 40 + m)
            v = random_normalized(g, 41 + m)
            pu = apply(p, u)
            pv = apply(p, v)
            assert inner(u, pv).real == pytest.approx(inner(pu, v).real, rel=1e-12)
            # positive definiteness on a nonzero vector
            assert inner(u, pu).real > 0

    def test_sym_hermitian_random(self, setup_1d):
        g, params, phi = setup_1d
        p = build_preconditioner("sym", phi, params)
        u = random_normalized(g, 5)
        v = random_normalized(g, 6)
        assert inner(u, apply(p, v)).real == pytest.approx(inner(apply(p, u), v).real, rel=1e-12)

    @pytest.mark.parametrize("kind", ["kinetic", "potential", "c1", "c2", "sym"])
    def test_dense_assembly_oracle(self, kind, setup_1d):
        g, params, phi = setup_1d
        p = build_preconditioner(kind, phi, params)
        dense = dense_preconditioner(p, g)
        # independent dense construction from the two diagonals
        v = model.sample_potential(params.potential, g)
        real_diag = np.diag(1.0 / (p.alpha + v + params.eta * np.abs(phi.values) ** 2))
        lap = second_derivative_matrix(g.M, g.L)
        kin = np.linalg.inv(p.alpha * np.eye(g.M) - 0.5 * lap)
        expected = {
            "kinetic": kin,
            "potential": real_diag,
            "c1": real_diag @ kin,
            "c2": kin @ real_diag,
            "sym": np.sqrt(real_diag) @ kin @ np.sqrt(real_diag),
        }[kind]
        assert np.max(np.abs(dense - expected)) <= 1e-12 * np.max(np.abs(expected))

    def test_shifted_inverse_filter_linear_case(self):
        # eta=0, V=0: P_Delta after the gradient is the filter 1/(alpha + xi^2/2)
        g = Grid(1, 8.0, 32)
        params = ModelParams(eta=0.0, omega=0.0,
                             potential=model.PotentialSpec(kind="harmonic", harmonic_coeffs=(0.0,)))
        phi = random_normalized(g, 7)
        p = build_preconditioner("kinetic", phi, params, shift=0.9)
        from gpesolve import gradient
        grad = gradient(phi, params)
        out = apply(p, grad)
        expected = np.fft.ifft(np.fft.fft(grad.values) / (0.9 + 0.5 * g.k2))
        assert np.allclose(out.values, expected, atol=1e-13)
