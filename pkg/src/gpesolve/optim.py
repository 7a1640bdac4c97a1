"""Preconditioned gradient (PG) and conjugate gradient (PCG) minimization on
the unit sphere.

Iterates move along great circles, phi_{n+1} = cos(theta) phi_n
+ sin(theta) p_hat, where p_hat is the normalized tangent projection of the
(preconditioned, optionally CG-mixed) descent direction.  The trial angle
minimizes the second-order expansion of the energy along the arc and is
halved until the energy decreases.

The expensive transforms of an iteration are fused: the Laplacian,
angular-momentum and Fourier images of the iterate are carried across
iterations by the same trigonometric combination that updates the iterate
itself, so one iteration costs 3 transform units (forward + Laplacian +
angular momentum) plus 0/0/0/1/1/2 units for the
identity/kinetic/potential/c1/c2/sym preconditioners.
"""

from __future__ import annotations

import dataclasses
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import model, precond, spectral
from .model import ModelParams
from .spectral import FFTCounter, WaveField

STOP_ENERGY = "energy_diff"
STOP_RESIDUAL = "residual_inf"
STOP_ITERATE = "iterate_diff"
STOP_KINDS = (STOP_ENERGY, STOP_RESIDUAL, STOP_ITERATE)


@dataclass
class SolverConfig:
    """Configuration for the sphere-constrained optimizers."""

    method: str = "pcg"
    precond: str = precond.COMBINED_SYM
    shift: str | float = "adaptive"
    stop: str = STOP_ENERGY
    tol: float = 1e-12
    max_iter: int = 10000
    theta_default: float = 0.1
    backtrack_factor: float = 0.5
    max_backtracks: int = 30
    full_linesearch: bool = False

    def __post_init__(self) -> None:
        if self.method not in ("pg", "pcg"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.precond not in precond.KINDS:
            raise ValueError(f"unknown preconditioner {self.precond!r}")
        if self.stop not in STOP_KINDS:
            raise ValueError(f"unknown stopping criterion {self.stop!r}")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.theta_default <= 0:
            raise ValueError("theta_default must be positive")


@dataclass
class IterationRecord:
    """One accepted iteration of a ground-state solver."""

    n: int
    energy: float
    lam: float
    r_inf: float
    step_inf: float
    theta: float
    beta: float
    backtracks: int
    fft_count: int
    wall_time: float
    energy_delta: float = 0.0
    restarted: bool = False
    inner_iters: int | None = None

    CSV_FIELDS = ("n", "energy", "lam", "r_inf", "step_inf", "theta", "beta",
                  "backtracks", "fft_count", "wall_time")

    def __post_init__(self) -> None:
        for name in ("energy", "lam", "r_inf", "step_inf", "theta", "beta",
                     "wall_time", "energy_delta"):
            setattr(self, name, float(getattr(self, name)))


@dataclass
class SolveResult:
    """Final iterate plus the full convergence history."""

    phi: WaveField
    records: list[IterationRecord]
    converged: bool
    stop_reason: str
    energy: float
    lam: float
    r_inf: float
    fft_total: int
    wall_time: float
    inner_total: int = 0

    @property
    def iterations(self) -> int:
        return len(self.records)


# ---------------------------------------------------------------------------
# standalone operations (simple, unfused; used by tests and small callers)
# ---------------------------------------------------------------------------

def residual(phi: WaveField, params: ModelParams) -> tuple[WaveField, float]:
    """Tangent residual r = H_phi phi - lambda phi and the multiplier lambda."""
    h = model.apply_hamiltonian(phi, phi, params)
    lam = spectral.inner(h, phi).real
    return WaveField(phi.grid, h.values - lam * phi.values), lam


def tangent_project(d: WaveField, phi: WaveField) -> WaveField:
    """Project onto the tangent space at phi: d - Re<phi, d> phi."""
    c = spectral.inner(phi, d).real
    return WaveField(d.grid, d.values - c * phi.values)


def theta_opt(
    phi: WaveField,
    p_dir: WaveField,
    grad: WaveField,
    params: ModelParams,
    lam: float,
) -> tuple[float, float]:
    """Second-order optimal arc angle along the normalized direction.

    Returns (theta, denom) where denom is the curvature of the energy
    along the retraction arc, E''(0) = hessian_quadratic_form(phi, p_hat)
    - 2*lambda; callers must fall back to a default angle when denom <= 0.
    """
    pnorm = spectral.norm(p_dir)
    if pnorm == 0.0:
        raise ValueError("zero search direction")
    p_hat = WaveField(p_dir.grid, p_dir.values / pnorm)
    slope = spectral.inner(grad, p_hat).real
    denom = model.hessian_quadratic_form(phi, p_hat, params) - 2.0 * lam
    theta = -slope / denom if denom != 0.0 else np.inf
    return theta, denom


def step(phi: WaveField, p_dir: WaveField, theta: float) -> WaveField:
    """Great-circle update cos(theta) phi + sin(theta) p_hat, renormalized."""
    pnorm = spectral.norm(p_dir)
    if pnorm == 0.0:
        return phi.copy()
    values = np.cos(theta) * phi.values + np.sin(theta) * (p_dir.values / pnorm)
    return WaveField(phi.grid, values).normalized()


@dataclass
class _Arc:
    """Energy along the arc theta -> cos(theta) u + sin(theta) p_hat.

    Quadratic (linear-operator) part from the coefficients QA, QB, QC and
    the quartic part from the six pointwise sums; everything needed to
    evaluate E(theta) - E(0) exactly at any theta without transforms.
    """

    qa: float
    qb: float
    qc: float
    q40: float
    q04: float
    q22a: float
    q22b: float
    q31: float
    q13: float
    eta_hd: float  # eta * h^d

    def delta_energy(self, theta: float) -> float:
        c = np.cos(theta)
        s = np.sin(theta)
        quad = (self.qb - self.qa) * s * s + self.qc * np.sin(2.0 * theta)
        quart = 0.5 * self.eta_hd * (
            -s * s * (1.0 + c * c) * self.q40
            + s**4 * self.q04
            + (4.0 * self.q22b + 2.0 * self.q22a) * c * c * s * s
            + 4.0 * c**3 * s * self.q31
            + 4.0 * c * s**3 * self.q13
        )
        return quad + quart

    @property
    def slope0(self) -> float:
        return 2.0 * self.qc + 2.0 * self.eta_hd * self.q31

    @property
    def curvature0(self) -> float:
        return 2.0 * (self.qb - self.qa) + self.eta_hd * (
            4.0 * self.q22b + 2.0 * self.q22a - 2.0 * self.q40
        )

    def flip(self) -> None:
        """Negate the direction (p_hat -> -p_hat) in the coefficients."""
        self.qc = -self.qc
        self.q31 = -self.q31
        self.q13 = -self.q13


def _minimize_arc(arc: _Arc) -> float:
    """Arc angle minimizing E(theta) over (0, pi)."""
    if arc.eta_hd == 0.0:
        # closed form for a + b cos(2 theta) + c sin(2 theta)
        theta = 0.5 * np.arctan2(-2.0 * arc.qc, arc.qb - arc.qa)
        if theta <= 0.0:
            theta += 0.5 * np.pi
        other = theta + 0.5 * np.pi
        candidates = [t for t in (theta, other) if 0.0 < t < np.pi]
        return min(candidates, key=arc.delta_energy)
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(
        arc.delta_energy, bounds=(1e-14, np.pi - 1e-14), method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x)


def _arc_from_fields(phi: WaveField, p_hat: WaveField, params: ModelParams) -> _Arc:
    """Arc coefficients computed with the plain (unfused) operators."""
    g = phi.grid
    hd = g.cell_volume
    v = model.sample_potential(params.potential, g)
    u = phi.values
    p = p_hat.values
    du = spectral.apply_laplacian(phi).values
    dp = spectral.apply_laplacian(p_hat).values
    qa = -0.5 * hd * np.vdot(u, du).real + hd * float(np.sum(v * np.abs(u) ** 2))
    qb = -0.5 * hd * np.vdot(p, dp).real + hd * float(np.sum(v * np.abs(p) ** 2))
    qc = -0.5 * hd * np.vdot(u, dp).real + hd * float(np.sum(v * (np.conj(u) * p).real))
    if params.omega != 0.0:
        lu = spectral.apply_lz(phi).values
        lp = spectral.apply_lz(p_hat).values
        qa += -params.omega * hd * np.vdot(u, lu).real
        qb += -params.omega * hd * np.vdot(p, lp).real
        qc += -params.omega * hd * np.vdot(u, lp).real
    a0 = np.abs(u) ** 2
    a1 = np.abs(p) ** 2
    a2 = (np.conj(u) * p).real
    return _Arc(
        qa=qa, qb=qb, qc=qc,
        q40=float(np.sum(a0 * a0)), q04=float(np.sum(a1 * a1)),
        q22a=float(np.sum(a0 * a1)), q22b=float(np.sum(a2 * a2)),
        q31=float(np.sum(a0 * a2)), q13=float(np.sum(a1 * a2)),
        eta_hd=params.eta * hd,
    )


def linesearch_full(phi: WaveField, p_dir: WaveField, params: ModelParams) -> float:
    """Exact one-dimensional energy minimization along the arc.

    The quadratic part of E(theta) reduces to three cached inner products
    and the quartic part to six pointwise sums, so the minimization costs
    no transforms beyond those needed for the coefficients.
    """
    pnorm = spectral.norm(p_dir)
    if pnorm == 0.0:
        raise ValueError("zero search direction")
    p_hat = WaveField(p_dir.grid, p_dir.values / pnorm)
    return _minimize_arc(_arc_from_fields(phi, p_hat, params))


def check_stop(history: list[IterationRecord], cfg: SolverConfig) -> bool:
    """Evaluate the configured stopping criterion on the recorded history."""
    if not history:
        return False
    last = history[-1]
    if cfg.stop == STOP_ENERGY:
        return abs(last.energy_delta) <= cfg.tol
    if cfg.stop == STOP_ITERATE:
        return last.step_inf <= cfg.tol
    return bool(last.r_inf <= cfg.tol)


# ---------------------------------------------------------------------------
# fused iteration engines
# ---------------------------------------------------------------------------

@dataclass
class _Bundle:
    """Direction data produced once per iteration."""

    arc: _Arc
    p_hat: np.ndarray
    p_hat_hat: np.ndarray
    dp_hat: np.ndarray | None  # Laplacian of p_hat (engine A only)
    lp_hat: np.ndarray | None  # Lz of p_hat (None when omega == 0)
    p_norm: float
    beta: float
    restarted: bool
    r_real: np.ndarray | None
    r_hat: np.ndarray | None
    prp: float  # <r, P r>


class _EngineBase:
    """Shared state and update rule of the fused solvers."""

    def __init__(self, phi0: WaveField, params: ModelParams, cfg: SolverConfig,
                 counter: FFTCounter) -> None:
        g = phi0.grid
        if params.omega != 0.0 and g.d < 2:
            raise ValueError("rotation requires d >= 2")
        self.grid = g
        self.params = params
        self.cfg = cfg
        self.counter = counter
        self.hd = g.cell_volume
        self.scale = g.cell_volume / g.size  # Parseval factor
        self.v = model.sample_potential(params.potential, g)
        self.eta = params.eta
        self.omega = params.omega
        u = phi0.values.astype(np.complex128)
        n = np.sqrt(self.hd) * np.linalg.norm(u.ravel())
        if n == 0:
            raise ValueError("initial field is zero")
        self.u = u / n
        self.uhat = g.fft(self.u, counter)
        self.lu = spectral.lz_from_hat(g, self.uhat, counter) if self.omega != 0.0 else None
        # iterate-dependent scalars, refreshed by _begin
        self.lam = 0.0
        self.qa = 0.0
        self.q40 = 0.0
        self.alpha = 0.0
        self.energy = 0.0
        self.dens = None
        # CG memory
        self.prp_prev: float | None = None
        self._last_prp: float = np.nan
        self.p_prev_real: np.ndarray | None = None
        self.p_prev_hat: np.ndarray | None = None
        self.r_prev_real: np.ndarray | None = None
        self.r_prev_hat: np.ndarray | None = None

    # -- helpers -----------------------------------------------------------
    def _rdot(self, a: np.ndarray, b: np.ndarray) -> float:
        return self.hd * np.vdot(a, b).real

    def _rdot_hat(self, a: np.ndarray, b: np.ndarray) -> float:
        return self.scale * np.vdot(a, b).real

    def _pointwise_scalars(self) -> tuple[float, float, float]:
        """(potential, 2*interaction, rotation) quadratic pieces of the iterate."""
        self.dens = np.abs(self.u) ** 2
        pot = self.hd * float(np.sum(self.v * self.dens))
        self.q40 = float(np.sum(self.dens * self.dens))
        inter2 = self.eta * self.hd * self.q40
        rot = -self.omega * self._rdot(self.u, self.lu) if self.lu is not None else 0.0
        return pot, inter2, rot

    def _finish_scalars(self, kin: float, pot: float, inter2: float, rot: float) -> None:
        self.qa = kin + pot + rot
        self.lam = self.qa + self.eta * self.hd * self.q40
        self.alpha = kin + pot + inter2  # characteristic energy, shift of the preconditioner

    def _shift(self) -> float:
        return self.alpha if self.cfg.shift == "adaptive" else float(self.cfg.shift)

    def _arc(self, p_hat: np.ndarray, kin_p: float, kin_c: float,
             lp: np.ndarray | None) -> _Arc:
        a1 = np.abs(p_hat) ** 2
        a2 = (np.conj(self.u) * p_hat).real
        qb = kin_p + self.hd * float(np.sum(self.v * a1))
        qc = kin_c + self.hd * float(np.sum(self.v * a2))
        if lp is not None:
            qb += -self.omega * self._rdot(p_hat, lp)
            qc += -self.omega * self._rdot(self.u, lp)
        return _Arc(
            qa=self.qa, qb=qb, qc=qc,
            q40=self.q40, q04=float(np.sum(a1 * a1)),
            q22a=float(np.sum(self.dens * a1)), q22b=float(np.sum(a2 * a2)),
            q31=float(np.sum(self.dens * a2)), q13=float(np.sum(a1 * a2)),
            eta_hd=self.eta * self.hd,
        )

    def _mix_cg(self, pr: np.ndarray, r: np.ndarray, r_prev: np.ndarray | None,
                p_prev: np.ndarray | None, u_rep: np.ndarray, rdot,
                force_restart: bool) -> tuple[np.ndarray, float, bool]:
        """Polak-Ribiere direction -Pr + beta p_prev with descent safeguard.

        All arrays must live in the same representation (real space or
        Fourier coefficients); `u_rep` is the iterate in that
        representation and `rdot` the matching real inner product.
        """
        prp = rdot(r, pr)
        beta = 0.0
        restarted = force_restart
        if (self.cfg.method == "pcg" and not force_restart and r_prev is not None
                and p_prev is not None and self.prp_prev is not None
                and self.prp_prev > 0.0):
            beta = max(0.0, rdot(r - r_prev, pr) / self.prp_prev)
        if beta > 0.0:
            dvec = -pr + beta * p_prev
            # descent check on the projected direction:
            # Re<grad E, proj dvec> = 2(Re<r, dvec> - Re<u, dvec> Re<r, u>)
            c_u = rdot(u_rep, dvec)
            slope = 2.0 * (rdot(r, dvec) - c_u * rdot(r, u_rep))
            if slope >= 0.0:
                dvec = -pr
                beta = 0.0
                restarted = True
        else:
            dvec = -pr
        self._last_prp = prp
        return dvec, beta, restarted

    def accept(self, theta: float, bundle: _Bundle) -> float:
        """Apply the great-circle update; returns the sup-norm of the step."""
        c = np.cos(theta)
        s = np.sin(theta)
        delta = (c - 1.0) * self.u + s * bundle.p_hat
        step_inf = float(np.max(np.abs(delta)))
        self.u = self.u + delta
        nn = np.sqrt(self.hd) * np.linalg.norm(self.u.ravel())
        self.u /= nn
        self.uhat = (c * self.uhat + s * bundle.p_hat_hat) / nn
        if self.lu is not None:
            self.lu = (c * self.lu + s * bundle.lp_hat) / nn
        self._accept_extra(c, s, nn, bundle)
        self.energy += bundle.arc.delta_energy(theta)
        # CG memory
        self.prp_prev = bundle.prp
        self.p_prev_real = bundle.p_hat * bundle.p_norm if bundle.p_hat is not None else None
        self.p_prev_hat = bundle.p_hat_hat * bundle.p_norm if bundle.p_hat_hat is not None else None
        self.r_prev_real = bundle.r_real
        self.r_prev_hat = bundle.r_hat
        return step_inf

    def _accept_extra(self, c: float, s: float, nn: float, bundle: _Bundle) -> None:
        pass

    def final_residual(self) -> tuple[np.ndarray, float]:
        raise NotImplementedError


class _EngineA(_EngineBase):
    """Real-space residual engine: identity, potential, c2 and sym kinds.

    Maintains the Laplacian of the iterate in real space, so the residual
    and its sup norm are available without transforms.
    """

    def __init__(self, phi0, params, cfg, counter):
        super().__init__(phi0, params, cfg, counter)
        self.du = spectral.laplacian_from_hat(self.grid, self.uhat, counter)
        self.r = None

    def begin(self) -> float | None:
        pot, inter2, rot = self._pointwise_scalars()
        kin = -0.5 * self._rdot(self.u, self.du)
        self._finish_scalars(kin, pot, inter2, rot)
        hu = -0.5 * self.du + (self.v + self.eta * self.dens) * self.u
        if self.lu is not None:
            hu -= self.omega * self.lu
        self.r = hu - self.lam * self.u
        return float(np.max(np.abs(self.r)))

    def direction(self, force_restart: bool) -> _Bundle | None:
        g = self.grid
        kind = self.cfg.precond
        alpha = self._shift()
        pr_hat = None
        if kind == precond.IDENTITY:
            pr = self.r
        elif kind == precond.POTENTIAL:
            pr = self.r / (alpha + self.v + self.eta * self.dens)
        elif kind == precond.COMBINED2:  # P_Delta P_V
            t = self.r / (alpha + self.v + self.eta * self.dens)
            pr_hat = g.fft(t, self.counter) / (alpha + 0.5 * g.k2)
            pr = g.ifft(pr_hat, self.counter)
        else:  # symmetrized combination
            sq = np.sqrt(1.0 / (alpha + self.v + self.eta * self.dens))
            t_hat = g.fft(sq * self.r, self.counter) / (alpha + 0.5 * g.k2)
            pr = sq * g.ifft(t_hat, self.counter)
        dvec, beta, restarted = self._mix_cg(
            pr, self.r, self.r_prev_real, self.p_prev_real, self.u, self._rdot,
            force_restart)
        c_u = self._rdot(self.u, dvec)
        p = dvec - c_u * self.u
        p_norm = float(np.sqrt(self.hd) * np.linalg.norm(p.ravel()))
        if not np.isfinite(p_norm) or p_norm == 0.0:
            return None
        p_hat = p / p_norm
        if pr_hat is not None:
            # c2 keeps the Fourier image of Pr (and of p_prev), hence p_hat
            # comes for free by linearity
            dvec_hat = -pr_hat if beta == 0.0 else -pr_hat + beta * self.p_prev_hat
            p_hat_hat = (dvec_hat - c_u * self.uhat) / p_norm
        else:
            p_hat_hat = g.fft(p_hat, self.counter)
        dp = spectral.laplacian_from_hat(g, p_hat_hat, self.counter)
        lp = spectral.lz_from_hat(g, p_hat_hat, self.counter) if self.lu is not None else None
        kin_p = -0.5 * self._rdot(p_hat, dp)
        kin_c = -0.5 * self._rdot(self.u, dp)
        arc = self._arc(p_hat, kin_p, kin_c, lp)
        if arc.slope0 > 0.0:
            p_hat = -p_hat
            p_hat_hat = -p_hat_hat
            dp = -dp
            lp = -lp if lp is not None else None
            arc.flip()
        return _Bundle(arc=arc, p_hat=p_hat, p_hat_hat=p_hat_hat, dp_hat=dp,
                       lp_hat=lp, p_norm=p_norm, beta=beta, restarted=restarted,
                       r_real=self.r, r_hat=None, prp=self._last_prp)

    def _accept_extra(self, c, s, nn, bundle):
        self.du = (c * self.du + s * bundle.dp_hat) / nn

    def final_residual(self):
        r_inf = self.begin()
        return self.r, r_inf


class _EngineB(_EngineBase):
    """Fourier-space residual engine: kinetic and c1 kinds.

    The residual is assembled in Fourier space (one forward transform of
    the pointwise part), kinetic inner products are evaluated by Parseval,
    and the Laplacian of the iterate is never materialized.
    """

    def __init__(self, phi0, params, cfg, counter):
        super().__init__(phi0, params, cfg, counter)
        self.r_hat = None
        self.r_real = None
        self.kin_u = 0.0
        # c1 under pcg needs the residual pointwise for the PR inner products
        self.need_r_real = (
            cfg.stop == STOP_RESIDUAL
            or (cfg.precond == precond.COMBINED1 and cfg.method == "pcg")
        )

    def begin(self) -> float | None:
        g = self.grid
        pot, inter2, rot = self._pointwise_scalars()
        self.kin_u = 0.5 * self.scale * float(np.sum(g.k2 * np.abs(self.uhat) ** 2))
        self._finish_scalars(self.kin_u, pot, inter2, rot)
        gvec = (self.v + self.eta * self.dens - self.lam) * self.u
        if self.lu is not None:
            gvec -= self.omega * self.lu
        self.r_hat = 0.5 * g.k2 * self.uhat + g.fft(gvec, self.counter)
        if self.need_r_real:
            self.r_real = g.ifft(self.r_hat, self.counter)
            return float(np.max(np.abs(self.r_real)))
        self.r_real = None
        return None

    def direction(self, force_restart: bool) -> _Bundle | None:
        g = self.grid
        alpha = self._shift()
        fdiag = 1.0 / (alpha + 0.5 * g.k2)
        if self.cfg.precond == precond.KINETIC:
            pr_hat = fdiag * self.r_hat
            dvec_hat, beta, restarted = self._mix_cg(
                pr_hat, self.r_hat, self.r_prev_hat, self.p_prev_hat,
                self.uhat, self._rdot_hat, force_restart)
            c_u = self._rdot_hat(self.uhat, dvec_hat)
            p_hat_fourier = dvec_hat - c_u * self.uhat
            p_norm = float(np.sqrt(self.scale) * np.linalg.norm(p_hat_fourier.ravel()))
            if not np.isfinite(p_norm) or p_norm == 0.0:
                return None
            p_hat_hat = p_hat_fourier / p_norm
            p_hat = g.ifft(p_hat_hat, self.counter)
        else:  # c1: P_V P_Delta
            s_real = g.ifft(fdiag * self.r_hat, self.counter)
            pr = s_real / (alpha + self.v + self.eta * self.dens)
            dvec, beta, restarted = self._mix_cg_c1(pr, force_restart)
            c_u = self._rdot(self.u, dvec)
            p = dvec - c_u * self.u
            p_norm = float(np.sqrt(self.hd) * np.linalg.norm(p.ravel()))
            if not np.isfinite(p_norm) or p_norm == 0.0:
                return None
            p_hat = p / p_norm
            p_hat_hat = g.fft(p_hat, self.counter)
        lp = spectral.lz_from_hat(g, p_hat_hat, self.counter) if self.lu is not None else None
        kin_p = 0.5 * self.scale * float(np.sum(g.k2 * np.abs(p_hat_hat) ** 2))
        kin_c = 0.5 * self.scale * np.vdot(self.uhat, g.k2 * p_hat_hat).real
        arc = self._arc(p_hat, kin_p, kin_c, lp)
        if arc.slope0 > 0.0:
            p_hat = -p_hat
            p_hat_hat = -p_hat_hat
            lp = -lp if lp is not None else None
            arc.flip()
        return _Bundle(arc=arc, p_hat=p_hat, p_hat_hat=p_hat_hat, dp_hat=None,
                       lp_hat=lp, p_norm=p_norm, beta=beta, restarted=restarted,
                       r_real=self.r_real, r_hat=self.r_hat, prp=self._last_prp)

    def _mix_cg_c1(self, pr: np.ndarray, force_restart: bool):
        """PR mixing for c1, where Pr lives in real space."""
        if self.cfg.method == "pcg" and self.r_real is None:
            # needed for the beta inner products; counted honestly
            self.r_real = self.grid.ifft(self.r_hat, self.counter)
        if self.r_real is not None:
            return self._mix_cg(pr, self.r_real, self.r_prev_real,
                                self.p_prev_real, self.u, self._rdot,
                                force_restart)
        # plain gradient direction
        self._last_prp = np.nan
        return -pr, 0.0, force_restart

    def final_residual(self):
        self.need_r_real = True
        self.begin()
        return self.r_real, float(np.max(np.abs(self.r_real)))

    @property
    def kinetic_of_iterate(self) -> float:
        return self.kin_u


_ENGINE_FOR_KIND = {
    precond.IDENTITY: _EngineA,
    precond.POTENTIAL: _EngineA,
    precond.COMBINED2: _EngineA,
    precond.COMBINED_SYM: _EngineA,
    precond.KINETIC: _EngineB,
    precond.COMBINED1: _EngineB,
}


def solve(phi0: WaveField, params: ModelParams, cfg: SolverConfig,
          counter: FFTCounter | None = None) -> SolveResult:
    """Run the configured PG/PCG ground-state iteration from phi0."""
    t0 = time.perf_counter()
    counter = counter if counter is not None else FFTCounter()
    engine_cls = _ENGINE_FOR_KIND[cfg.precond]
    engine = engine_cls(phi0, params, cfg, counter)
    records: list[IterationRecord] = []
    converged = False
    stop_reason = "max_iter"
    force_restart = False
    r_inf = None
    first = True
    while len(records) < cfg.max_iter:
        count0 = counter.count
        r_inf = engine.begin()
        if first:
            # energy of the initial iterate, from the bootstrapped state
            engine.energy = engine.qa + 0.5 * engine.eta * engine.hd * engine.q40
            first = False
        if not np.isfinite(engine.energy) or not np.isfinite(engine.lam):
            stop_reason = "diverged"
            break
        if cfg.stop == STOP_RESIDUAL and r_inf is not None and r_inf <= cfg.tol:
            converged = True
            stop_reason = "residual_inf"
            break
        bundle = engine.direction(force_restart)
        if bundle is None:
            converged = True
            stop_reason = "zero_direction"
            break
        arc = bundle.arc
        if cfg.full_linesearch:
            theta = _minimize_arc(arc)
        else:
            curv = arc.curvature0
            if curv > 0.0:
                theta = -arc.slope0 / curv
            else:
                theta = cfg.theta_default
            theta = min(theta, 0.5 * np.pi)
            if theta <= 0.0:
                theta = cfg.theta_default
        backtracks = 0
        d_e = arc.delta_energy(theta)
        while d_e >= 0.0 and backtracks < cfg.max_backtracks:
            theta *= cfg.backtrack_factor
            d_e = arc.delta_energy(theta)
            backtracks += 1
        if d_e >= 0.0:
            stop_reason = "backtracking_exhausted"
            warnings.warn(
                "energy could not be decreased after "
                f"{cfg.max_backtracks} step halvings (tolerance at roundoff floor?)",
                RuntimeWarning,
            )
            break
        step_inf = engine.accept(theta, bundle)
        force_restart = backtracks > 0
        records.append(IterationRecord(
            n=len(records),
            energy=engine.energy,
            lam=engine.lam,
            r_inf=r_inf if r_inf is not None else np.nan,
            step_inf=step_inf,
            theta=theta,
            beta=bundle.beta,
            backtracks=backtracks,
            fft_count=counter.count - count0,
            wall_time=time.perf_counter() - t0,
            energy_delta=d_e,
            restarted=bundle.restarted,
        ))
        if cfg.stop == STOP_ENERGY and abs(d_e) <= cfg.tol:
            converged = True
            stop_reason = "energy_diff"
            break
        if cfg.stop == STOP_ITERATE and step_inf <= cfg.tol:
            converged = True
            stop_reason = "iterate_diff"
            break
    phi = WaveField(engine.grid, engine.u)
    _, final_r_inf = engine.final_residual()
    breakdown = model.energy(phi, params)
    return SolveResult(
        phi=phi,
        records=records,
        converged=converged,
        stop_reason=stop_reason,
        energy=float(breakdown.total),
        lam=float(engine.lam),
        r_inf=float(final_r_inf),
        fft_total=counter.count,
        wall_time=time.perf_counter() - t0,
    )


def solve_pg(phi0: WaveField, params: ModelParams, cfg: SolverConfig | None = None,
             **kwargs) -> SolveResult:
    """Preconditioned gradient iteration (Riemannian steepest descent)."""
    cfg = _with_method(cfg, "pg", kwargs)
    return solve(phi0, params, cfg)


def solve_pcg(phi0: WaveField, params: ModelParams, cfg: SolverConfig | None = None,
              **kwargs) -> SolveResult:
    """Preconditioned conjugate gradient iteration (Polak-Ribiere)."""
    cfg = _with_method(cfg, "pcg", kwargs)
    return solve(phi0, params, cfg)


def _with_method(cfg: SolverConfig | None, method: str, kwargs) -> SolverConfig:
    if cfg is None:
        return SolverConfig(method=method, **kwargs)
    if kwargs:
        raise TypeError("pass either a SolverConfig or keyword options, not both")
    return dataclasses.replace(cfg, method=method)
