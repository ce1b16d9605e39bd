"""SINR-target feasibility via spectral conditions on the coupling matrix.

For targets gamma_t the power constraints gamma_i(p) >= gamma_t[i] are
equivalent to p >= A p + eta with the normalized nonnegative matrix
A[i, k] = gamma_t[i] gain[k, i] / gain[i, i] (zero diagonal) and
eta[i] = gamma_t[i] noise[i] / gain[i, i].  Targets are jointly
achievable iff the Perron root rho(A) < 1, in which case the minimal
power vector is the fixed point of p = A p + eta.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ModelError
from .model import NetworkModel

NEUMANN_STEP_TOL = 1e-12


@dataclass
class NormalizedGainMatrix:
    """Coupling matrix A, its diagonal normalizer D, and effective noise eta."""

    A: np.ndarray
    D: np.ndarray
    eta: np.ndarray


class FeasibilityStatus(str, enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE_SPECTRAL = "InfeasibleSpectral"
    INFEASIBLE_BOUNDS = "InfeasibleBounds"


@dataclass
class FeasibilityVerdict:
    rho: float
    status: FeasibilityStatus
    p_star: np.ndarray | None = None
    bound_violations: list[int] = field(default_factory=list)
    residual: float = float("nan")

    @property
    def feasible(self) -> bool:
        return self.status is FeasibilityStatus.FEASIBLE


def build_normalized(model: NetworkModel, gamma_target) -> NormalizedGainMatrix:
    """Normalized coupling matrix for the given positive SINR targets."""
    n = model.num_links
    gamma_target = np.asarray(gamma_target, dtype=float)
    if gamma_target.ndim == 0:
        gamma_target = np.full(n, float(gamma_target))
    if gamma_target.shape != (n,):
        raise ModelError(f"gamma_target has shape {gamma_target.shape}, expected ({n},)")
    if np.any(gamma_target <= 0) or not np.all(np.isfinite(gamma_target)):
        raise ModelError("gamma_target entries must be positive and finite")
    d = gamma_target / model.direct_gain
    # A[i, k] = gamma_t[i] gain[k, i] / gain[i, i], k != i
    A = d[:, None] * model.gain.T
    np.fill_diagonal(A, 0.0)
    return NormalizedGainMatrix(A=A, D=np.diag(d), eta=d * model.noise)


@dataclass
class _IterationOutcome:
    converged: bool
    lam: float
    best_lam: float
    best_resid: float
    hit_zero: bool
    used: int


def _power_iterate(M: np.ndarray, budget: int, tol: float) -> _IterationOutcome:
    """Power iteration from all-ones with a no-progress stall detector."""
    x = np.ones(M.shape[0])
    best_resid, best_lam = np.inf, 0.0
    stall = 0
    for it in range(1, budget + 1):
        y = M @ x
        if not np.any(y):
            return _IterationOutcome(False, 0.0, 0.0, 0.0, True, it)
        lam = float(x @ y / (x @ x))
        resid = float(np.linalg.norm(y - lam * x, ord=np.inf))
        x = y / np.linalg.norm(y, ord=np.inf)
        if resid <= tol * max(abs(lam), np.finfo(float).tiny):
            return _IterationOutcome(True, lam, lam, resid, False, it)
        if resid < 0.99 * best_resid:
            stall = 0
        else:
            stall += 1
        if resid < best_resid:
            best_resid, best_lam = resid, lam
        if stall >= 40:
            return _IterationOutcome(False, best_lam, best_lam, best_resid, False, it)
    return _IterationOutcome(False, best_lam, best_lam, best_resid, False, budget)


def spectral_radius(A, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Perron root of a square nonnegative matrix by power iteration.

    Starts from the all-ones vector and accepts when the Rayleigh
    residual ||A x - lambda x||_inf drops below tol relative to lambda.
    Periodic structure stalls the plain iteration in a cycle (any
    2-link coupling matrix is 2-cyclic); on stall the iteration first
    retries on A + 1e-12*I and then escalates to repeated operator
    squaring, using rho(A^2) = rho(A)^2 exactly.  Squaring turns a
    period-2 matrix into convergent primitive blocks and quadratically
    accelerates small spectral gaps.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ModelError(f"spectral_radius needs a square matrix, got shape {A.shape}")
    if np.any(A < 0) or not np.all(np.isfinite(A)):
        raise ModelError("spectral_radius requires a finite nonnegative matrix")
    n = A.shape[0]
    if n == 0 or float(np.max(A.sum(axis=1))) == 0.0:
        return 0.0

    out = _power_iterate(A, max(max_iter // 2, 1), tol)
    if out.hit_zero:
        return 0.0  # A^k 1 = 0 for a nonnegative A means A is nilpotent
    if out.converged:
        return max(out.lam, 0.0)
    spent = out.used
    best_lam, best_resid = out.best_lam, out.best_resid

    shifted = _power_iterate(A + 1e-12 * np.eye(n), min(200, max_iter), tol)
    if shifted.converged:
        return max(shifted.lam - 1e-12, 0.0)
    spent += shifted.used
    if shifted.best_resid < best_resid:
        best_resid, best_lam = shifted.best_resid, shifted.best_lam

    # Squaring escalation: track rho(A)^power = rho(M) * exp(log_scale_acc).
    M = A
    power = 1
    log_scale_acc = 0.0
    while spent < max_iter and power <= 64:
        s = float(np.max(np.abs(M)))
        if s == 0.0:
            return 0.0
        M = (M / s) @ M  # rho(M_new) = rho(M)^2 / s
        log_scale_acc = 2.0 * log_scale_acc + np.log(s)
        power *= 2
        out = _power_iterate(M, max_iter - spent, tol)
        spent += out.used
        if out.hit_zero:
            return 0.0
        if out.converged:
            if out.lam <= 0.0:
                return 0.0
            return float(np.exp((np.log(out.lam) + log_scale_acc) / power))
    raise ConvergenceError(
        f"power iteration did not reach tol {tol} in {max_iter} iterations "
        f"(best residual {best_resid:.3g})",
        best=max(best_lam, 0.0),
    )


def _neumann_min_power(A: np.ndarray, eta: np.ndarray, max_iter: int = 2_000_000):
    """Iterate p <- A p + eta from zero; geometric for rho(A) < 1.

    The infinity-norm step equals the residual ||p - A p - eta||_inf of
    the current iterate, so stopping on the step certifies the residual
    of the returned vector exactly.  The threshold is scaled to the
    problem (a pure 1e-12 absolute step is unreachable in doubles for
    large eta and too loose relative to tiny eta).
    """
    eta_norm = float(np.linalg.norm(eta, ord=np.inf))
    if eta_norm == 0.0:
        return np.zeros_like(eta), 0.0
    p = np.zeros_like(eta)
    step = np.inf
    for _ in range(max_iter):
        p_next = A @ p + eta
        step = float(np.linalg.norm(p_next - p, ord=np.inf))
        p_norm = float(np.linalg.norm(p_next, ord=np.inf))
        tol = min(NEUMANN_STEP_TOL * max(1.0, eta_norm, p_norm), 0.5e-9 * eta_norm)
        tol = max(tol, 4.0 * np.finfo(float).eps * p_norm)
        if step <= tol:
            return p, step
        p = p_next
    return p, step


def check_feasibility(model: NetworkModel, gamma_target) -> FeasibilityVerdict:
    """Decide whether the SINR targets are achievable within the power box.

    Infeasibility is a verdict, not an error.  When rho(A) < 1 the
    minimal power vector is computed even if it violates the box, so
    callers can see which constraint binds (InfeasibleBounds).
    """
    norm = build_normalized(model, gamma_target)
    rho = spectral_radius(norm.A)
    if rho >= 1.0:
        return FeasibilityVerdict(rho=rho, status=FeasibilityStatus.INFEASIBLE_SPECTRAL)
    p_star, residual = _neumann_min_power(norm.A, norm.eta)
    slack = 1e-12 * np.maximum(1.0, model.p_max)
    violations = [
        int(i)
        for i in range(model.num_links)
        if p_star[i] > model.p_max[i] + slack[i] or p_star[i] < model.p_min[i] - slack[i]
    ]
    status = FeasibilityStatus.FEASIBLE if not violations else FeasibilityStatus.INFEASIBLE_BOUNDS
    return FeasibilityVerdict(
        rho=rho, status=status, p_star=p_star, bound_violations=violations, residual=residual
    )


def max_uniform_scaling(model: NetworkModel, gamma_target) -> float:
    """Largest s such that s * gamma_target stays spectrally feasible.

    A is linear in the targets, so s = 1 / rho(A(gamma_target)); the
    scaled targets sit exactly on the rho = 1 boundary.  A decoupled
    network (rho = 0) returns +inf.
    """
    norm = build_normalized(model, gamma_target)
    rho = spectral_radius(norm.A)
    if rho == 0.0:
        return float("inf")
    return 1.0 / rho
