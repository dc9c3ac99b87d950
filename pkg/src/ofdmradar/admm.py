"""ADMM solver for the joint atomic-norm + l1 denoising program.

The program splits the measurement ``r = s*z + e + v`` into a 2-D sinusoid
part ``z`` (penalized through the Toeplitz-lifted semidefinite surrogate of
the atomic norm, weight ``lam``) and a sparse demodulation-error part ``e``
(penalized by ``mu * ||e||_1``; ``mu = 0`` pins ``e`` to zero).  Each
iteration performs closed-form block updates followed by one projection of
the lifted variable onto the positive semidefinite cone and a dual ascent
step.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError
from .operators import adjoint_normalized, block_toeplitz, psd_project, soft_threshold, symmetrize_param
from .scene import Measurement


@dataclass(frozen=True)
class SolverConfig:
    """Weights and stopping rules for the ADMM iteration.

    ``lam`` weights the atomic-norm surrogate, ``mu`` the l1 error penalty
    (zero selects the error-free mode), ``rho`` is the augmented-Lagrangian
    penalty.  Iterations stop when both residuals drop below
    ``tol * (MN + 1)`` or at ``max_iters``.
    """

    lam: float
    mu: float
    rho: float = 0.05
    max_iters: int = 2000
    tol_primal: float = 1e-4
    tol_dual: float = 1e-4

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigError(f"lam must be positive, got {self.lam}")
        if self.mu < 0:
            raise ConfigError(f"mu must be nonnegative, got {self.mu}")
        if self.rho <= 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise ConfigError("tolerances must be positive")


@dataclass
class SdpBlock:
    """Partition of an (MN+1) x (MN+1) Hermitian block matrix."""

    theta0: np.ndarray
    theta1: np.ndarray
    theta_bar: float

    @classmethod
    def from_matrix(cls, A: np.ndarray) -> "SdpBlock":
        n = A.shape[0] - 1
        return cls(theta0=A[:n, :n], theta1=A[:n, n], theta_bar=float(A[n, n].real))

    def assemble(self) -> np.ndarray:
        n = self.theta1.shape[0]
        A = np.empty((n + 1, n + 1), dtype=complex)
        A[:n, :n] = self.theta0
        A[:n, n] = self.theta1
        A[n, :n] = np.conj(self.theta1)
        A[n, n] = self.theta_bar
        return A


@dataclass
class SolverState:
    """Final primal/dual iterates of one solve."""

    z_bar: np.ndarray
    e_bar: np.ndarray
    U: np.ndarray
    t: float
    Theta: SdpBlock
    Upsilon: SdpBlock
    iter: int


@dataclass
class Diagnostics:
    primal_residuals: list = field(default_factory=list)
    dual_residuals: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    wall_clock_s: float = 0.0

    @property
    def final_objective(self) -> float:
        return self.objectives[-1] if self.objectives else math.nan


@dataclass
class Solution:
    """Denoised signal, sparse error estimate, and the recovered dual vector."""

    z_hat: np.ndarray
    e_hat: np.ndarray
    nu_hat: np.ndarray
    diagnostics: Diagnostics
    state: SolverState


def default_weights(sigma: float, M: int, N: int) -> tuple[float, float]:
    """Noise-scaled penalty weights: lam = sigma*sqrt(MN log MN), mu = lam/sqrt(MN)."""
    mn = M * N
    lam = sigma * math.sqrt(mn * math.log(mn))
    return lam, lam / math.sqrt(mn)


def estimate_noise_sigma(measurement: Measurement) -> float:
    """Median-based noise scale from the 2-D spectrum of the symbol-normalized data.

    The unitary 2-D DFT keeps white noise white while concentrating the
    multipath signal in a few bins, so the median magnitude is a robust noise
    statistic; for circular complex noise the median of the magnitudes equals
    sigma*sqrt(log 2).
    """
    M, N = measurement.M, measurement.N
    Rn = measurement.r_bar.reshape(M, N, order="F") / measurement.S_hat
    F = np.fft.fft2(Rn, norm="ortho")
    return float(np.median(np.abs(F)) / math.sqrt(math.log(2.0)))


def _assemble(TU: np.ndarray, z: np.ndarray, t: float) -> np.ndarray:
    mn = z.shape[0]
    A = np.empty((mn + 1, mn + 1), dtype=complex)
    A[:mn, :mn] = TU
    A[:mn, mn] = z
    A[mn, :mn] = np.conj(z)
    A[mn, mn] = t
    return A


def solve(measurement: Measurement, config: SolverConfig) -> Solution:
    """Run the ADMM iteration to convergence or ``max_iters``.

    All variables start at zero.  Each sweep updates, in order and always
    with the latest values: the signal ``z`` (regularized elementwise divide,
    the symbol lift being diagonal), the scalar ``t``, the Toeplitz parameter
    ``U`` (normalized adjoint with center-shifted penalty, then Hermitian
    symmetrization), the error ``e`` (soft threshold of the data residual,
    skipped when ``mu == 0``), the PSD block ``Theta`` (cone projection), and
    the multiplier ``Upsilon`` (ascent step).
    """
    started = time.perf_counter()
    M, N = measurement.M, measurement.N
    mn = M * N
    s = measurement.s_tilde
    r = measurement.r_bar
    lam, mu, rho = config.lam, config.mu, config.rho

    if np.any(s == 0):
        raise ConfigError("symbol lift has zero diagonal entries")

    s_conj = np.conj(s)
    denom = np.abs(s) ** 2 + 2.0 * rho
    sh_r = s_conj * r

    z = np.zeros(mn, dtype=complex)
    e = np.zeros(mn, dtype=complex)
    t = 0.0
    Theta = np.zeros((mn + 1, mn + 1), dtype=complex)
    Upsilon = np.zeros((mn + 1, mn + 1), dtype=complex)

    diag = Diagnostics()
    scale = mn + 1
    it = 0
    for it in range(1, config.max_iters + 1):
        theta1 = Theta[:mn, mn]
        theta_bar = Theta[mn, mn].real
        ups1 = Upsilon[:mn, mn]
        ups_bar = Upsilon[mn, mn].real

        z = (sh_r - s_conj * e + 2.0 * rho * theta1 + 2.0 * ups1) / denom
        t = theta_bar + (ups_bar - 0.5 * lam) / rho

        U = adjoint_normalized(Theta[:mn, :mn] + Upsilon[:mn, :mn] / rho, M, N)
        U[M - 1, N - 1] -= lam / (2.0 * mn * rho)
        U = symmetrize_param(U)

        if mu > 0:
            e = soft_threshold(r - s * z, mu)

        A = _assemble(block_toeplitz(U, M, N), z, t)
        Theta_new = psd_project(A - Upsilon / rho)

        primal = float(np.linalg.norm(Theta_new - A))
        dual = rho * float(np.linalg.norm(Theta_new - Theta))
        Upsilon = Upsilon + rho * (Theta_new - A)
        Theta = Theta_new

        fit = r - e - s * z
        obj = (0.5 * float(np.vdot(fit, fit).real)
               + lam * 0.5 * float(U[M - 1, N - 1].real)
               + lam * 0.5 * t
               + mu * float(np.sum(np.abs(e))))

        diag.primal_residuals.append(primal)
        diag.dual_residuals.append(dual)
        diag.objectives.append(obj)

        if not (math.isfinite(primal) and math.isfinite(dual) and math.isfinite(obj)):
            raise NumericError(f"non-finite iterate at iteration {it}", iteration=it)
        if primal < config.tol_primal * scale and dual < config.tol_dual * scale:
            diag.converged = True
            break

    diag.iterations = it
    diag.wall_clock_s = time.perf_counter() - started

    # The stationarity condition for z ties the multiplier's border block to
    # the data residual mapped through the conjugate symbols, off by a factor
    # of -2; undoing it recovers the dual vector of the denoising program.
    nu_hat = -2.0 * Upsilon[:mn, mn]

    state = SolverState(z_bar=z, e_bar=e, U=U, t=t,
                        Theta=SdpBlock.from_matrix(Theta),
                        Upsilon=SdpBlock.from_matrix(Upsilon), iter=it)
    return Solution(z_hat=z, e_hat=e, nu_hat=nu_hat, diagnostics=diag, state=state)


def atomic_norm_sdp_value(U: np.ndarray, t: float, M: int, N: int) -> float:
    """Surrogate atomic norm certified by the lift: Tr(T(U))/(2MN) + t/2."""
    return 0.5 * float(U[M - 1, N - 1].real) + 0.5 * t


def objective_primal(state: SolverState, measurement: Measurement,
                     config: SolverConfig) -> float:
    """Value of the semidefinite objective at the given state."""
    M, N = measurement.M, measurement.N
    fit = measurement.r_bar - state.e_bar - measurement.s_tilde * state.z_bar
    return (0.5 * float(np.vdot(fit, fit).real)
            + config.lam * atomic_norm_sdp_value(state.U, state.t, M, N)
            + config.mu * float(np.sum(np.abs(state.e_bar))))


def objective_dual(nu: np.ndarray, measurement: Measurement,
                   config: SolverConfig) -> float:
    """Dual objective <inv(S^H) nu, r>_R - ||inv(S^H) nu||^2 / 2."""
    s = measurement.s_tilde
    if np.any(s == 0):
        raise ConfigError("symbol lift has zero diagonal entries")
    x = nu / np.conj(s)
    return float(np.vdot(measurement.r_bar, x).real) - 0.5 * float(np.vdot(x, x).real)


@dataclass
class OptimalityReport:
    """Residuals of the four stationarity/feasibility conditions.

    ``atomic_balance``: gap between lam * ||z||_A (surrogate value) and the
    real inner product of the fit residual with s*z.
    ``l1_balance``: same for mu * ||e||_1 against the residual and e
    (``None`` when mu == 0).
    ``dual_norm_excess``: max over frequencies of |<S^H w, atom>| minus lam
    (nonpositive when dual-feasible).
    ``linf_excess``: ||w||_inf - mu (``None`` when mu == 0).
    """

    atomic_balance: float
    l1_balance: float | None
    dual_norm_excess: float
    linf_excess: float | None

    def max_violation(self) -> float:
        vals = [abs(self.atomic_balance), self.dual_norm_excess]
        if self.l1_balance is not None:
            vals.append(abs(self.l1_balance))
        if self.linf_excess is not None:
            vals.append(self.linf_excess)
        return max(vals)


def optimality_residuals(solution: Solution, measurement: Measurement,
                         config: SolverConfig, grid_factor: int = 16) -> OptimalityReport:
    """Evaluate how far a solution is from satisfying the optimality system."""
    from .extract import dual_atomic_norm

    M, N = measurement.M, measurement.N
    s = measurement.s_tilde
    z, e = solution.z_hat, solution.e_hat
    w = measurement.r_bar - e - s * z

    sdp_norm = atomic_norm_sdp_value(solution.state.U, solution.state.t, M, N)
    atomic_balance = config.lam * sdp_norm - float(np.vdot(s * z, w).real)
    dual_norm_excess = dual_atomic_norm(np.conj(s) * w, M, N, grid_factor=grid_factor) - config.lam

    if config.mu > 0:
        l1_balance = config.mu * float(np.sum(np.abs(e))) - float(np.vdot(e, w).real)
        linf_excess = float(np.max(np.abs(w))) - config.mu
    else:
        l1_balance = None
        linf_excess = None

    return OptimalityReport(atomic_balance=float(atomic_balance),
                            l1_balance=l1_balance,
                            dual_norm_excess=float(dual_norm_excess),
                            linf_excess=linf_excess)
