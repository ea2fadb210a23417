"""Boundedness and convergence certificates for the closed helicopter loop.

With A = M Σ M⁻¹ and ‖N(z)‖ ≤ κ‖z‖², the variation-of-constants bound gives

    ‖z(t)‖ ≤ β‖z(0)‖ + β κ γ² / |λ1|,    β = ‖M‖ ‖M⁻¹‖,

and any γ satisfying that inequality bounds the whole trajectory. λ1 is the
eigenvalue with the largest real part, which keeps the bound valid for every
mode. Norms are Euclidean for vectors and spectral for matrices.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from helictl.errors import DefectiveMatrixError, UnstableClosedLoopError
from helictl.models.heli import GainPreset, HeliParams
from helictl.models.trace import SimTrace
from helictl.services.gain_design import GainConvention
from helictl.services.heli_dynamics import CrossTerm, Model, refined_linear_A, residual_N
from helictl.services.sim_runtime.closed_loop import ZTrajectories, simulate_z

logger = logging.getLogger(__name__)

EIGEN_GAP_TOL = 1e-8
DECOMPOSITION_RTOL = 1e-8
CONVERGENCE_THRESHOLD = 1e-4
# d below this is treated as already converged when checking monotonicity.
CONVERGENCE_FLOOR = 1e-14


def eigen_decompose(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(eigenvalues, M, M⁻¹) with A = M diag(eigenvalues) M⁻¹, sorted by descending real part."""
    A = np.asarray(A, dtype=float)
    eigvals, M = np.linalg.eig(A)
    order = np.lexsort((-eigvals.imag, -eigvals.real))
    eigvals = eigvals[order]
    M = M[:, order]
    n = len(eigvals)
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigvals[i] - eigvals[j]) < EIGEN_GAP_TOL * scale:
                raise DefectiveMatrixError()
    try:
        M_inv = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise DefectiveMatrixError() from exc
    residual = np.linalg.norm(A - M @ np.diag(eigvals) @ M_inv, 2)
    if residual > DECOMPOSITION_RTOL * np.linalg.norm(A, 2):
        raise DefectiveMatrixError(
            f"certificate requires diagonalizable A; perturb gains (residual {residual:.3e})"
        )
    return eigvals, M, M_inv


def beta(M: np.ndarray, M_inv: np.ndarray) -> float:
    """‖M‖₂ ‖M⁻¹‖₂, the spectral condition number of the eigenvector basis."""
    return float(np.linalg.norm(M, 2) * np.linalg.norm(M_inv, 2))


def kappa(p: HeliParams, theta_d: float) -> float:
    """Quadratic bound constant of the residual, ‖N(z)‖ ≤ κ ‖z‖² for small ‖z‖."""
    a1, a2, ml2 = p.alpha1, p.alpha2, p.ml2
    pitch = a1 * p.mgl / 2.0 + 2.0 * a1 * ml2 * theta_d + a1 * ml2 * theta_d**2
    yaw = 3.0 * a2 * ml2 + 2.0 * a2 * ml2 * theta_d + a2 * ml2 * theta_d**2
    return math.sqrt(pitch**2 + yaw**2)


@dataclass(frozen=True)
class GammaSolution:
    feasible: bool
    gamma: float | None
    z0_max: float


def solve_gamma(beta: float, kappa: float, lambda1_abs: float, z0_norm: float) -> GammaSolution:
    """Smallest γ with β z0 + β κ γ² / |λ1| ≤ γ.

    Uses γ = 2 β z0 / (1 + √(1 - x)), x = 4 β² κ z0 / |λ1|, which equals the
    textbook root without its cancellation for small z0.
    """
    if not (beta > 0 and kappa > 0 and lambda1_abs > 0):
        raise ValueError("beta, kappa and |lambda1| must be positive")
    if z0_norm < 0:
        raise ValueError("initial norm must be >= 0")
    z0_max = lambda1_abs / (4.0 * beta**2 * kappa)
    disc = 1.0 - 4.0 * beta**2 * kappa * z0_norm / lambda1_abs
    if -1e-12 < disc < 0:
        disc = 0.0
    if disc < 0:
        return GammaSolution(False, None, z0_max)
    return GammaSolution(True, 2.0 * beta * z0_norm / (1.0 + math.sqrt(disc)), z0_max)


def decay_kernel_integral(lambda1: float, t: float) -> float:
    """∫₀ᵗ e^{λ1 (t-τ)} dτ = (e^{λ1 t} - 1) / λ1; tends to 1/|λ1| for λ1 < 0."""
    if lambda1 == 0:
        return t
    return math.expm1(lambda1 * t) / lambda1


@dataclass(frozen=True)
class Certificate:
    eigenvalues: tuple[complex, ...]
    beta: float
    kappa: float
    lambda1: float
    gamma: float
    z0_max: float
    theta_d: float = 0.0
    modes: np.ndarray = field(default=None, repr=False, compare=False)  # M, columns are eigenvectors

    def bound_holds(self, z0_norm: float, gamma: float | None = None) -> bool:
        """β z0 + β κ γ² / |λ1| ≤ γ, to 1e-12."""
        g = self.gamma if gamma is None else gamma
        lhs = self.beta * z0_norm + self.beta * self.kappa * g * g / abs(self.lambda1)
        return lhs <= g + 1e-12

    def slowest_direction(self) -> np.ndarray:
        """Unit real vector along the eigenvector of λ1."""
        v = self.modes[:, 0]
        v = v.real if np.linalg.norm(v.real) >= np.linalg.norm(v.imag) else v.imag
        return v / np.linalg.norm(v)

    def constants(self) -> dict[str, float]:
        return {"beta": self.beta, "kappa": self.kappa, "gamma": self.gamma, "z0_max": self.z0_max}


def certify(
    params: HeliParams,
    gains: GainPreset,
    theta_d: float = 0.0,
    convention: GainConvention = "torque",
) -> Certificate:
    """Certificate for initial norms up to z0_max; γ is the bound at z0_max."""
    A = refined_linear_A(params, gains, theta_d, convention)
    eigvals = np.linalg.eigvals(A)
    if np.any(eigvals.real >= 0):
        raise UnstableClosedLoopError(sorted(eigvals.tolist(), key=lambda c: -c.real))
    eigvals, M, M_inv = eigen_decompose(A)
    b = beta(M, M_inv)
    k = kappa(params, theta_d)
    lambda1 = float(eigvals[0].real)
    solution = solve_gamma(b, k, abs(lambda1), 0.0)
    gamma = solve_gamma(b, k, abs(lambda1), solution.z0_max).gamma
    cert = Certificate(
        eigenvalues=tuple(complex(v) for v in eigvals),
        beta=b,
        kappa=k,
        lambda1=lambda1,
        gamma=gamma,
        z0_max=solution.z0_max,
        theta_d=theta_d,
        modes=M,
    )
    logger.info(
        "Certificate: beta=%.6g kappa=%.6g lambda1=%.6g gamma=%.6g z0_max=%.6g",
        b, k, lambda1, gamma, solution.z0_max,
    )
    return cert


def sample_initial_states(n: int, radius: float, seed: int) -> np.ndarray:
    """(n, 6) states uniformly distributed on the sphere ‖z‖ = radius."""
    if n < 0 or radius < 0:
        raise ValueError("n and radius must be >= 0")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 6))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return radius * v / norms


@dataclass(frozen=True)
class TrajectoryBound:
    z0_norm: float
    max_norm: float
    passed: bool


@dataclass(frozen=True)
class BoundednessReport:
    gamma: float
    trajectories: tuple[TrajectoryBound, ...]

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trajectories)

    @property
    def worst_max_norm(self) -> float:
        return max((t.max_norm for t in self.trajectories), default=0.0)

    @property
    def worst_margin(self) -> float:
        """γ minus the largest simulated norm; negative means a violation."""
        return self.gamma - self.worst_max_norm


def verify_boundedness(cert: Certificate, trajectories: Iterable[SimTrace]) -> BoundednessReport:
    """max_t ‖z(t)‖ ≤ γ for every trajectory. Trajectories starting outside z0_max are rejected."""
    results = []
    for trace in trajectories:
        norms = np.linalg.norm(trace.z, axis=1)
        z0 = float(norms[0])
        if z0 > cert.z0_max * (1.0 + 1e-12):
            raise ValueError(
                f"trajectory starts at ‖z(0)‖={z0:.6g} outside the certified radius {cert.z0_max:.6g}"
            )
        peak = float(np.max(norms))
        results.append(TrajectoryBound(z0, peak, peak <= cert.gamma))
    return BoundednessReport(cert.gamma, tuple(results))


@dataclass(frozen=True)
class ConvergenceReport:
    t2: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    d_final: float
    monotone_tail: bool
    decay_rate: float | None  # fitted, positive when decaying
    envelope_ok: bool | None  # None when no reference rate was given
    passed: bool


def _fit_decay_rate(t: np.ndarray, d: np.ndarray, t_start: float) -> float | None:
    """Log-linear fit through the peaks of d, i.e. the points where d equals its
    running upper envelope sup_{s >= t} d(s), from t_start on.

    Points below 1e-12 of the largest d are left out.
    """
    if len(d) < 2 or not np.max(d) > 0:
        return None
    envelope = np.maximum.accumulate(d[::-1])[::-1]
    keep = (d == envelope) & (d > 1e-12 * np.max(d)) & (t >= t_start)
    if np.count_nonzero(keep) < 2:
        return None
    slope, _ = np.polyfit(t[keep], np.log(d[keep]), 1)
    return float(-slope)


def verify_convergence(
    trace: SimTrace,
    t0: float,
    horizon: float,
    lambda_max: float | None = None,
) -> ConvergenceReport:
    """Cauchy-difference check d(t2) = ‖z(t2 + t0) - z(t2)‖ over t2 ∈ [0, horizon - t0].

    Passes when the maxima of d over consecutive windows of length t0 in the
    second half never increase and d at the end is below 1e-4. With
    `lambda_max` (the real part of the slowest eigenvalue) the envelope
    d ≤ C e^{λ t2}, C fitted on the first half, is also checked on the second.
    """
    if not t0 > 0:
        raise ValueError("t0 must be > 0")
    t = trace.t
    if horizon <= t0 or t[-1] < horizon - 1e-9:
        raise ValueError(f"trace covers {t[-1]:.6g} s, needs horizon {horizon} > t0 {t0}")
    dt = trace.dt
    lag = round(t0 / dt)
    last = int(np.searchsorted(t, horizon - 1e-9)) + 1
    if lag < 1 or lag >= last:
        raise ValueError("trace too short for the requested lag")
    z = trace.z[:last]
    d = np.linalg.norm(z[lag:] - z[:-lag], axis=1)
    t2 = t[: last - lag]

    half = len(d) // 2
    window = max(lag, 1)
    maxima = [float(np.max(d[i : i + window])) for i in range(half, len(d), window)]
    monotone = all(
        b <= a or (a < CONVERGENCE_FLOOR and b < CONVERGENCE_FLOOR)
        for a, b in zip(maxima, maxima[1:])
    )
    d_final = float(d[-1])
    rate = _fit_decay_rate(t2, d, t_start=t0)

    envelope_ok = None
    if lambda_max is not None and half > 0:
        weight = np.exp(-lambda_max * t2)
        C = float(np.max(d[:half] * weight[:half]))
        envelope_ok = bool(np.all(d[half:] <= 1.05 * C * np.exp(lambda_max * t2[half:]) + CONVERGENCE_FLOOR))

    passed = monotone and d_final < CONVERGENCE_THRESHOLD and envelope_ok is not False
    return ConvergenceReport(t2, d, d_final, monotone, rate, envelope_ok, passed)


@dataclass(frozen=True)
class SweepResult:
    trajectories: ZTrajectories
    boundedness: BoundednessReport
    convergence: tuple[ConvergenceReport, ...]

    @property
    def passed(self) -> bool:
        return self.boundedness.passed and all(c.passed for c in self.convergence)


def boundedness_sweep(
    params: HeliParams,
    gains: GainPreset,
    cert: Certificate,
    n: int = 100,
    fraction: float = 0.5,
    seed: int = 0,
    horizon: float = 60.0,
    dt: float = 5e-3,
    t0: float = 5.0,
    model: Model = "small_angle",
    convention: GainConvention = "torque",
    extra_states: np.ndarray | None = None,
) -> SweepResult:
    """Simulate `extra_states` (first) and n random initial states at ‖z(0)‖ = fraction·z0_max,
    and check boundedness and convergence on every one of them."""
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    z0 = sample_initial_states(n, fraction * cert.z0_max, seed)
    if extra_states is not None:
        z0 = np.vstack([np.atleast_2d(extra_states), z0])
    record_every = max(1, round(0.05 / dt))
    runs = simulate_z(
        params, gains, cert.theta_d, z0, horizon, dt, model,
        bias=True, convention=convention, record_every=record_every,
    )
    traces = runs.traces()
    bounded = verify_boundedness(cert, traces)
    converged = tuple(verify_convergence(tr, t0, horizon, cert.lambda1) for tr in traces)
    logger.info(
        "Sweep of %d trajectories: bounded=%s converged=%d/%d worst margin=%.3e",
        len(traces), bounded.passed, sum(c.passed for c in converged), len(converged), bounded.worst_margin,
    )
    return SweepResult(runs, bounded, converged)


@dataclass(frozen=True)
class ResidualBoundCheck:
    samples: int
    worst_ratio: float  # max ‖N(z)‖ / (κ ‖z‖²); the bound holds when ≤ 1

    @property
    def passed(self) -> bool:
        return self.worst_ratio <= 1.0

    @property
    def margin(self) -> float:
        return 1.0 - self.worst_ratio


def residual_bound_check(
    params: HeliParams,
    theta_d: float = 0.0,
    samples: int = 100_000,
    radius: float = 0.1,
    seed: int = 0,
    cross_term: CrossTerm = "printed",
) -> ResidualBoundCheck:
    """Monte-Carlo test of ‖N(z)‖ ≤ κ ‖z‖² for z uniform in the ball ‖z‖ ≤ radius."""
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((samples, 6))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.uniform(0.0, 1.0, size=samples) ** (1.0 / 6.0)
    z = directions * radii[:, None]
    norms_sq = np.einsum("ij,ij->i", z, z)
    n_norm = np.linalg.norm(residual_N(params, z, theta_d, cross_term), axis=1)
    k = kappa(params, theta_d)
    ok = norms_sq > 0
    worst = float(np.max(n_norm[ok] / (k * norms_sq[ok]))) if np.any(ok) else 0.0
    return ResidualBoundCheck(samples, worst)
