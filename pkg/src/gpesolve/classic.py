"""Imaginary-time baselines (forward/backward Euler, Crank-Nicolson), the
preconditioned MINRES inner solver for the implicit schemes, and spectral
analysis tools for the linear model problem.

The gradient flow  d_t phi = -(H_phi phi - lambda phi)  is discretized per
step with the nonlinear density and lambda frozen at the current iterate,
followed by projection back to the unit sphere.  The lambda-variants shift
the implicit operator, so one backward-Euler step with the shift equals one
step without it at the effective stepsize dt/(1 - dt*lambda).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, minres

from . import model, precond, spectral
from .model import ModelParams
from .optim import IterationRecord, STOP_ENERGY, STOP_KINDS, SolveResult
from .spectral import FFTCounter, WaveField

FE = "fe"
FE_LAMBDA = "fe_lambda"
BE = "be"
BE_LAMBDA = "be_lambda"
CN = "cn"
CN_LAMBDA = "cn_lambda"
SCHEMES = (FE, FE_LAMBDA, BE, BE_LAMBDA, CN, CN_LAMBDA)


@dataclass
class SchemeKind:
    """Imaginary-time scheme selection and inner-solver controls."""

    scheme: str = BE_LAMBDA
    dt: float = 0.01
    inner_tol: float = 1e-10
    inner_max_iter: int = 2000

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.inner_tol <= 0:
            raise ValueError("inner_tol must be positive")


class KrylovError(RuntimeError):
    """MINRES failed; carries the best iterate and its residual norm."""

    def __init__(self, message: str, best: np.ndarray, residual: float, iterations: int):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


def _realify(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real.ravel(), z.imag.ravel()])


def _complexify(v: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    n = v.size // 2
    return (v[:n] + 1j * v[n:]).reshape(shape)


def krylov_solve(
    apply_a,
    b: WaveField,
    p: precond.Preconditioner | None = None,
    tol: float = 1e-10,
    max_iter: int = 2000,
    counter: FFTCounter | None = None,
) -> tuple[WaveField, int]:
    """Solve A x = b by preconditioned MINRES for a Hermitian operator A.

    `apply_a` maps grid values to grid values and must be Hermitian under
    the discrete inner product; the preconditioner must be Hermitian
    positive definite.  The complex system is solved in its real
    representation, which is symmetric exactly when A is Hermitian.
    Returns (x, iteration count); raises KrylovError on breakdown or
    when max_iter is reached with relative residual above tol.
    """
    grid = b.grid
    shape = grid.shape

    def matvec(v: np.ndarray) -> np.ndarray:
        return _realify(apply_a(_complexify(v, shape)))

    n2 = 2 * grid.size
    a_op = LinearOperator((n2, n2), matvec=matvec, dtype=np.float64)
    m_op = None
    if p is not None and p.kind != precond.IDENTITY:
        def pvec(v: np.ndarray) -> np.ndarray:
            return _realify(p.apply_values(_complexify(v, shape), counter))
        m_op = LinearOperator((n2, n2), matvec=pvec, dtype=np.float64)
    b_real = _realify(b.values)
    b_norm = np.linalg.norm(b_real)
    iters = 0

    def cb(_xk):
        nonlocal iters
        iters += 1

    x_real, info = minres(a_op, b_real, rtol=tol, maxiter=max_iter, M=m_op, callback=cb)
    res_vec = b_real - a_op.matvec(x_real)
    res = np.linalg.norm(res_vec) / b_norm if b_norm > 0 else 0.0
    if info == 0 and np.isfinite(res) and res > tol:
        # one refinement pass recovers tolerances near the roundoff floor
        dx, info = minres(a_op, res_vec, rtol=1e-6, maxiter=max_iter, M=m_op, callback=cb)
        x_real = x_real + dx
        res = np.linalg.norm(b_real - a_op.matvec(x_real)) / b_norm if b_norm > 0 else 0.0
    x = _complexify(x_real, shape)
    if info != 0 or not np.isfinite(res) or res > max(10.0 * tol, 1e-12):
        raise KrylovError(
            f"MINRES did not converge (info={info}, rel residual={res:.3e})",
            best=x, residual=float(res), iterations=iters,
        )
    return WaveField(grid, x), iters


def _hamiltonian_applier(phi_n: WaveField, params: ModelParams, counter: FFTCounter | None):
    """Matrix-free H_{phi_n} with the nonlinear density frozen at phi_n."""
    g = phi_n.grid
    v = model.sample_potential(params.potential, g)
    w = v + params.eta * np.abs(phi_n.values) ** 2
    omega = params.omega

    def apply_h(values: np.ndarray) -> np.ndarray:
        hat = g.fft(values, counter)
        out = -0.5 * spectral.laplacian_from_hat(g, hat, counter) + w * values
        if omega != 0.0:
            out -= omega * spectral.lz_from_hat(g, hat, counter)
        return out

    return apply_h


def imaginary_time_step(
    phi_n: WaveField,
    scheme: SchemeKind,
    params: ModelParams,
    precond_kind: str = precond.IDENTITY,
    shift: str | float = "adaptive",
    counter: FFTCounter | None = None,
) -> tuple[WaveField, int]:
    """One discretized gradient-flow step followed by sphere projection.

    Explicit schemes update directly; implicit schemes solve the shifted
    Hermitian system with preconditioned MINRES (density and lambda frozen
    at phi_n).  Returns (phi_{n+1}, inner iteration count).
    """
    g = phi_n.grid
    dt = scheme.dt
    apply_h = _hamiltonian_applier(phi_n, params, counter)
    h_phi = apply_h(phi_n.values)
    lam = g.cell_volume * np.vdot(phi_n.values, h_phi).real
    name = scheme.scheme
    if name == FE:
        tilde = phi_n.values - dt * h_phi
        return WaveField(g, tilde).normalized(), 0
    if name == FE_LAMBDA:
        tilde = phi_n.values - dt * (h_phi - lam * phi_n.values)
        return WaveField(g, tilde).normalized(), 0
    p = None
    if precond_kind != precond.IDENTITY:
        if shift == "adaptive":
            # the implicit operator carries the extra 1/dt shift, so the
            # preconditioner diagonal mirrors it on top of the adaptive one
            shift = 1.0 / dt + model.characteristic_energy(phi_n, params)
        p = precond.build(precond_kind, phi_n, params, shift=shift)
    if name == BE:
        def apply_a(x):
            return x / dt + apply_h(x)
        rhs = WaveField(g, phi_n.values / dt)
    elif name == BE_LAMBDA:
        # (1/dt + H - lambda) phi~ = phi/dt: shifting the operator makes one
        # step identical to the shift-free scheme at dt/(1 - dt*lambda)
        def apply_a(x):
            return x / dt + apply_h(x) - lam * x
        rhs = WaveField(g, phi_n.values / dt)
    elif name == CN:
        def apply_a(x):
            return x / dt + 0.5 * apply_h(x)
        rhs = WaveField(g, phi_n.values / dt - 0.5 * h_phi)
    else:  # CN_LAMBDA
        def apply_a(x):
            return x / dt + 0.5 * (apply_h(x) - lam * x)
        rhs = WaveField(g, phi_n.values / dt - 0.5 * (h_phi - lam * phi_n.values))
    tilde, inner_iters = krylov_solve(
        apply_a, rhs, p, tol=scheme.inner_tol, max_iter=scheme.inner_max_iter,
        counter=counter,
    )
    return tilde.normalized(), inner_iters


def run_imaginary_time(
    phi0: WaveField,
    scheme: SchemeKind,
    params: ModelParams,
    precond_kind: str = precond.IDENTITY,
    stop: str = STOP_ENERGY,
    tol: float = 1e-12,
    max_iter: int = 100000,
    shift: str | float = "adaptive",
) -> SolveResult:
    """Outer imaginary-time loop with the standard stopping criteria.

    Divergence (energy blow-up or non-finite values, e.g. forward Euler
    beyond its stability bound) is detected and aborts the run.
    """
    if stop not in STOP_KINDS:
        raise ValueError(f"unknown stopping criterion {stop!r}")
    t0 = time.perf_counter()
    counter = FFTCounter()
    phi = phi0.normalized()
    e_prev = model.energy(phi, params, counter).total
    e0 = e_prev
    records: list[IterationRecord] = []
    converged = False
    stop_reason = "max_iter"
    inner_total = 0
    lam = np.nan
    for n in range(max_iter):
        count0 = counter.count
        try:
            phi_next, inner_iters = imaginary_time_step(
                phi, scheme, params, precond_kind, shift=shift, counter=counter)
        except KrylovError as err:
            stop_reason = f"inner_solver_failed: {err}"
            warnings.warn(str(err), RuntimeWarning)
            break
        inner_total += inner_iters
        step_inf = float(np.max(np.abs(phi_next.values - phi.values)))
        h_next = model.apply_hamiltonian(phi_next, phi_next, params, counter)
        lam = spectral.inner(h_next, phi_next).real
        r_vals = h_next.values - lam * phi_next.values
        r_inf = float(np.max(np.abs(r_vals)))
        e_next = model.energy(phi_next, params).total
        if not np.isfinite(e_next) or e_next > e0 + 10.0 * (abs(e0) + 1.0):
            stop_reason = "diverged"
            break
        d_e = e_next - e_prev
        phi = phi_next
        records.append(IterationRecord(
            n=n, energy=e_next, lam=lam, r_inf=r_inf, step_inf=step_inf,
            theta=np.nan, beta=np.nan, backtracks=0,
            fft_count=counter.count - count0,
            wall_time=time.perf_counter() - t0,
            energy_delta=d_e, inner_iters=inner_iters,
        ))
        e_prev = e_next
        if stop == STOP_ENERGY and abs(d_e) <= tol:
            converged = True
            stop_reason = "energy_diff"
            break
        if stop == "iterate_diff" and step_inf <= tol:
            converged = True
            stop_reason = "iterate_diff"
            break
        if stop == "residual_inf" and r_inf <= tol:
            converged = True
            stop_reason = "residual_inf"
            break
    final_r, final_lam = _final_residual(phi, params)
    return SolveResult(
        phi=phi, records=records, converged=converged, stop_reason=stop_reason,
        energy=float(model.energy(phi, params).total), lam=float(final_lam),
        r_inf=float(np.max(np.abs(final_r.values))),
        fft_total=counter.count, wall_time=time.perf_counter() - t0,
        inner_total=inner_total,
    )


def _final_residual(phi: WaveField, params: ModelParams) -> tuple[WaveField, float]:
    h = model.apply_hamiltonian(phi, phi, params)
    lam = spectral.inner(h, phi).real
    return WaveField(phi.grid, h.values - lam * phi.values), lam


# ---------------------------------------------------------------------------
# linear model-problem analysis
# ---------------------------------------------------------------------------

def amplification_factors(eigvals: np.ndarray, scheme: str, dt: float) -> np.ndarray:
    """Spectral transform mapping eigenvalues of H to those of the update."""
    lam = np.asarray(eigvals, dtype=float)
    base = scheme.replace("_lambda", "")
    if base == FE:
        return 1.0 - dt * lam
    if base == BE:
        return 1.0 / (1.0 + dt * lam)
    if base == CN:
        return (1.0 - 0.5 * dt * lam) / (1.0 + 0.5 * dt * lam)
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass
class SpectralTransformReport:
    """Power-iteration view of one linear imaginary-time scheme."""

    scheme: str
    dt: float
    eigenvalues: np.ndarray
    amplification: np.ndarray
    predicted_rate: float
    observed_rate: float | None
    degenerate: bool
    iterations: int
    final_error: float


def amplification_analysis(
    h: np.ndarray,
    scheme: str | SchemeKind,
    dt: float | None = None,
    n_iter: int = 200,
    phi0: np.ndarray | None = None,
    seed: int = 0,
) -> SpectralTransformReport:
    """Run the normalized power iteration phi <- A phi / ||A phi|| for the
    scheme's update matrix A on a dense Hermitian H and compare the observed
    error-decay rate against the predicted |mu_{N-1}/mu_N|.

    Degenerate dominant amplification factors are flagged and no observed
    rate is fitted.
    """
    if isinstance(scheme, SchemeKind):
        dt = scheme.dt if dt is None else dt
        scheme = scheme.scheme
    if dt is None:
        raise ValueError("dt is required")
    h = np.asarray(h)
    n = h.shape[0]
    if h.shape != (n, n) or n > 256:
        raise ValueError("H must be a square matrix of size <= 256")
    if not np.allclose(h, h.conj().T, atol=1e-12 * max(1.0, float(np.abs(h).max()))):
        raise ValueError("H must be Hermitian")
    eigvals, eigvecs = np.linalg.eigh(h)
    mus = amplification_factors(eigvals, scheme, dt)
    order = np.argsort(np.abs(mus))
    mu_top, mu_second = mus[order[-1]], mus[order[-2]]
    degenerate = abs(abs(mu_top) - abs(mu_second)) < 1e-12 or abs(mu_top) == 0.0
    predicted = abs(mu_second / mu_top) if not degenerate else np.nan
    v_top = eigvecs[:, order[-1]]
    base = scheme.replace("_lambda", "")
    if base == FE:
        a_apply = lambda x: x - dt * (h @ x)
    elif base == BE:
        a_factor = np.linalg.inv(np.eye(n) + dt * h)
        a_apply = lambda x: a_factor @ x
    else:
        a_factor = np.linalg.solve(np.eye(n) + 0.5 * dt * h, np.eye(n) - 0.5 * dt * h)
        a_apply = lambda x: a_factor @ x
    rng = np.random.default_rng(seed)
    x = phi0.astype(complex) if phi0 is not None else rng.standard_normal(n) + 0j
    x = x / np.linalg.norm(x)
    errors = []
    for _ in range(n_iter):
        x = a_apply(x)
        nx = np.linalg.norm(x)
        if nx == 0 or not np.isfinite(nx):
            break
        x = x / nx
        err = np.linalg.norm(x - v_top * np.vdot(v_top, x))
        errors.append(err)
    observed = None
    if not degenerate:
        # geometric fit over the window clear of the start-up transient and
        # the roundoff floor
        usable = [(k, e) for k, e in enumerate(errors) if 1e-13 < e < 0.1]
        if len(usable) >= 5:
            ks = np.array([k for k, _ in usable], dtype=float)
            ls = np.log(np.array([e for _, e in usable]))
            slope = np.polyfit(ks, ls, 1)[0]
            observed = float(np.exp(slope))
    return SpectralTransformReport(
        scheme=scheme, dt=dt, eigenvalues=eigvals, amplification=mus,
        predicted_rate=float(predicted) if not degenerate else np.nan,
        observed_rate=observed, degenerate=degenerate,
        iterations=len(errors), final_error=errors[-1] if errors else np.nan,
    )


def rayleigh_quotient_iteration(h: np.ndarray, phi0: np.ndarray, n_iter: int = 10) -> list[float]:
    """Demonstration-only RQI trace on a dense Hermitian matrix.

    Returns the Rayleigh quotient per iteration; converges cubically near
    an eigenpair but needs globalization to be a practical solver.
    """
    h = np.asarray(h)
    n = h.shape[0]
    x = phi0 / np.linalg.norm(phi0)
    rhos = []
    for _ in range(n_iter):
        rho = float(np.real(np.vdot(x, h @ x)))
        rhos.append(rho)
        try:
            y = np.linalg.solve(h - rho * np.eye(n), x)
        except np.linalg.LinAlgError:
            break
        x = y / np.linalg.norm(y)
    return rhos


# ---------------------------------------------------------------------------
# conditioning diagnostic for the preconditioned projected Hessian
# ---------------------------------------------------------------------------

@dataclass
class ConditionReport:
    sigma: float
    eigenvalues: np.ndarray
    warning: str | None = None


def _real_linear_matrix(apply_fn, shape: tuple[int, ...]) -> np.ndarray:
    """Assemble the real 2N x 2N matrix of a real-linear complex operator."""
    n = int(np.prod(shape))
    out = np.zeros((2 * n, 2 * n))
    basis = np.zeros(n, dtype=complex)
    for j in range(n):
        basis[j] = 1.0
        out[:, j] = _realify(apply_fn(basis.reshape(shape)))
        basis[j] = 1j
        out[:, n + j] = _realify(apply_fn(basis.reshape(shape)))
        basis[j] = 0.0
    return out


def precond_hessian_condition(
    phi_star: WaveField,
    params: ModelParams,
    p: precond.Preconditioner,
    null_tol: float = 1e-8,
) -> ConditionReport:
    """Condition number of the projected, preconditioned energy Hessian.

    Densely assembles M = Pi P (Hess - lambda) Pi in the real representation
    (Pi projects out the iterate) and returns the ratio of the largest to the
    smallest nonzero eigenvalue magnitude.  The gauge direction i*phi is an
    exact null vector at stationary points and is excluded along with phi.
    Small grids only.
    """
    g = phi_star.grid
    if 2 * g.size > 8192:
        raise ValueError("dense conditioning diagnostic is limited to 4096 unknowns")
    warning = None
    r, lam = _final_residual(phi_star, params)
    r_inf = float(np.max(np.abs(r.values)))
    if r_inf > 1e-6:
        warning = f"iterate is not stationary (residual sup-norm {r_inf:.2e}); sigma is unreliable"
    v = model.sample_potential(params.potential, g)
    w = v + params.eta * np.abs(phi_star.values) ** 2
    eta = params.eta
    phi_sq = phi_star.values**2

    def half_hessian_shifted(x: np.ndarray) -> np.ndarray:
        """(1/2 Hess - lambda) x = (H_phi - lambda) x + eta(|phi|^2 x + phi^2 conj(x))."""
        hat = g.fft(x)
        out = -0.5 * spectral.laplacian_from_hat(g, hat) + w * x
        if params.omega != 0.0:
            out -= params.omega * spectral.lz_from_hat(g, hat)
        out += eta * (np.abs(phi_star.values) ** 2 * x + phi_sq * np.conj(x))
        return out - lam * x

    n = g.size
    b_mat = _real_linear_matrix(half_hessian_shifted, g.shape)
    p_mat = _real_linear_matrix(lambda x: p.apply_values(x), g.shape)
    q = _realify(phi_star.values)
    pi = np.eye(2 * n) - g.cell_volume * np.outer(q, q)
    m = pi @ p_mat @ b_mat @ pi
    eig = np.linalg.eigvals(m)
    mags = np.abs(eig)
    top = float(mags.max())
    nonzero = mags[mags > null_tol * top]
    sigma = float(top / nonzero.min()) if nonzero.size else np.inf
    return ConditionReport(sigma=sigma, eigenvalues=eig, warning=warning)
