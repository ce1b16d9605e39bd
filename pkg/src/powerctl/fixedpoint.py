"""Standard-interference-function fixed-point machinery.

A map I(p) is standard when it is positive, monotone, and scalable
(alpha > 1 implies alpha*I(p) > I(alpha*p)).  For such maps the
iteration p(t+1) = I(p(t)) converges to the unique fixed point from any
start, synchronously and under totally asynchronous execution with
bounded staleness.  The asynchronous engine here is a seeded
virtual-time simulation (no real threads), so runs are reproducible
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivergenceError, ModelError
from .model import NetworkModel

DIVERGENCE_FACTOR = 1e12


class InterferenceMap:
    """Base interference map; subclasses implement __call__ on a 1-D vector."""

    size: int | None = None

    def __call__(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def batch(self, P: np.ndarray) -> np.ndarray:
        """Evaluate on a (m, n) batch of power vectors; rows map to rows."""
        return np.stack([np.asarray(self(row), dtype=float) for row in P])


class TargetSinrMap(InterferenceMap):
    """I_i(p) = gamma_target[i] * q_i(p) / gain[i, i].

    Its fixed point (when one exists) meets the SINR targets exactly
    with the minimal powers.  Affine in p with positive constant term,
    hence standard.
    """

    def __init__(self, model: NetworkModel, gamma_target):
        self.model = model
        gt = np.asarray(gamma_target, dtype=float)
        if gt.ndim == 0:
            gt = np.full(model.num_links, float(gt))
        if gt.shape != (model.num_links,):
            raise ModelError(f"gamma_target shape {gt.shape} != ({model.num_links},)")
        if np.any(gt <= 0):
            raise ModelError("gamma_target entries must be positive")
        self.gamma_target = gt
        self.size = model.num_links
        self._coef = gt / model.direct_gain

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        q = p @ self.model.gain - self.model.direct_gain * p + self.model.noise
        return self._coef * q

    def batch(self, P):
        P = np.asarray(P, dtype=float)
        q = P @ self.model.gain - P * self.model.direct_gain + self.model.noise
        return self._coef * q


class PowerCappedMap(InterferenceMap):
    """Cap an inner map at per-link maximum powers: min(p_max, I(p))."""

    def __init__(self, inner: InterferenceMap, p_max):
        self.inner = inner
        self.p_max = np.asarray(p_max, dtype=float)
        self.size = inner.size

    def __call__(self, p):
        return np.minimum(self.p_max, self.inner(p))

    def batch(self, P):
        return np.minimum(self.p_max, self.inner.batch(P))


class CustomMap(InterferenceMap):
    """Wrap a deterministic callable as an interference map."""

    def __init__(self, evaluator: Callable, size: int | None = None):
        self.evaluator = evaluator
        self.size = size

    def __call__(self, p):
        return np.asarray(self.evaluator(np.asarray(p, dtype=float)), dtype=float)


@dataclass
class AsyncSchedule:
    """Seeded virtual-time schedule for totally asynchronous updates.

    Each tick activates every link independently with its update
    probability; an active link reads every component through a delay
    drawn uniformly from [0, staleness_bound] ticks.
    """

    staleness_bound: int = 0
    update_probability: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.staleness_bound < 0:
            raise ModelError("staleness_bound must be >= 0")
        prob = np.asarray(self.update_probability, dtype=float)
        if np.any(prob <= 0) or np.any(prob > 1):
            raise ModelError("update probabilities must lie in (0, 1]")


@dataclass
class FixedPointResult:
    p_bar: np.ndarray
    iterations: int
    residual: float
    converged: bool
    trajectory: np.ndarray | None = None
    trajectory_iters: np.ndarray | None = None
    trajectory_residuals: np.ndarray | None = None
    schedule_seed: int | None = None


class TrajectoryRecorder:
    """Decimating iterate store: keeps every k-th sample, at most ~10k."""

    def __init__(self, enabled: bool, max_iter: int, cap: int = 10000):
        self.enabled = enabled
        self.stride = max(1, (max_iter + cap - 1) // cap) if enabled else 1
        self.iters: list[int] = []
        self.points: list[np.ndarray] = []
        self.residuals: list[float] = []

    def record(self, t: int, p: np.ndarray, residual: float, force: bool = False):
        if self.enabled and (t % self.stride == 0 or force):
            if self.iters and self.iters[-1] == t:
                return
            self.iters.append(t)
            self.points.append(p.copy())
            self.residuals.append(residual)

    def dump(self):
        if not self.enabled or not self.iters:
            return None, None, None
        return (
            np.asarray(self.points),
            np.asarray(self.iters),
            np.asarray(self.residuals),
        )


def _divergence_bound(p0: np.ndarray, first: np.ndarray) -> float:
    scale = max(
        1.0,
        float(np.linalg.norm(p0, ord=np.inf)),
        float(np.linalg.norm(first, ord=np.inf)),
    )
    return DIVERGENCE_FACTOR * scale


def _check_divergence(p: np.ndarray, bound: float, t: int, last_finite: np.ndarray):
    if not np.all(np.isfinite(p)) or np.any(np.abs(p) > bound):
        raise DivergenceError(
            f"iterate exceeded divergence bound {bound:.3g} at iteration {t}",
            last_iterate=last_finite,
            iterations=t,
        )


def iterate_sync(
    map: InterferenceMap,
    p0,
    tol: float = 1e-9,
    max_iter: int = 100000,
    record_trajectory: bool = False,
) -> FixedPointResult:
    """Synchronous iteration p(t+1) = I(p(t)).

    Stops when the residual ||I(p) - p||_inf of the current iterate
    drops below tol, so the returned residual certifies p_bar itself.
    ``iterations`` counts map evaluations (the identity map converges
    at p0 after a single evaluation).
    """
    p = np.asarray(p0, dtype=float).copy()
    if np.any(p < 0):
        raise ModelError("p0 must be nonnegative")
    image = np.asarray(map(p), dtype=float)
    evals = 1
    bound = _divergence_bound(p, image)
    rec = TrajectoryRecorder(record_trajectory, max_iter)
    residual = float(np.linalg.norm(image - p, ord=np.inf))
    rec.record(0, p, residual)
    while True:
        if residual <= tol:
            rec.record(evals - 1, p, residual, force=True)
            traj, iters, resid = rec.dump()
            return FixedPointResult(
                p_bar=p, iterations=evals, residual=residual, converged=True,
                trajectory=traj, trajectory_iters=iters, trajectory_residuals=resid,
            )
        if evals >= max_iter:
            break
        _check_divergence(image, bound, evals, p)
        p = image
        image = np.asarray(map(p), dtype=float)
        evals += 1
        residual = float(np.linalg.norm(image - p, ord=np.inf))
        rec.record(evals - 1, p, residual)
    traj, iters, resid = rec.dump()
    return FixedPointResult(
        p_bar=p, iterations=evals, residual=residual, converged=False,
        trajectory=traj, trajectory_iters=iters, trajectory_residuals=resid,
    )


def iterate_async(
    map: InterferenceMap,
    p0,
    schedule: AsyncSchedule,
    tol: float = 1e-9,
    max_iter: int = 100000,
    record_trajectory: bool = False,
) -> FixedPointResult:
    """Totally asynchronous iteration with bounded staleness.

    Convergence is checked against the true residual ||I(p) - p||_inf of
    the current global state, so the result certifies the same fixed
    point the synchronous iteration finds.
    """
    p = np.asarray(p0, dtype=float).copy()
    if np.any(p < 0):
        raise ModelError("p0 must be nonnegative")
    n = p.shape[0]
    rng = np.random.default_rng(schedule.seed)
    D = schedule.staleness_bound
    prob = np.broadcast_to(np.asarray(schedule.update_probability, dtype=float), (n,))
    history = [p.copy()]  # history[d] is the state d ticks ago
    first = np.asarray(map(p), dtype=float)
    bound = _divergence_bound(p, first)
    rec = TrajectoryRecorder(record_trajectory, max_iter)
    residual = float(np.linalg.norm(first - p, ord=np.inf))
    rec.record(0, p, residual)
    if residual <= tol:
        traj, iters, resid = rec.dump()
        return FixedPointResult(
            p_bar=p, iterations=1, residual=residual, converged=True,
            trajectory=traj, trajectory_iters=iters, trajectory_residuals=resid,
            schedule_seed=schedule.seed,
        )
    for t in range(1, max_iter + 1):
        active = rng.random(n) < prob
        if D > 0:
            delays = rng.integers(0, D + 1, size=(n, n))
        else:
            delays = None
        p_next = p.copy()
        for i in np.flatnonzero(active):
            if delays is None:
                stale = p
            else:
                d = np.minimum(delays[i], len(history) - 1)
                stale = np.array([history[d[k]][k] for k in range(n)])
            p_next[i] = float(np.asarray(map(stale), dtype=float)[i])
        _check_divergence(p_next, bound, t, p)
        p = p_next
        history.insert(0, p.copy())
        if len(history) > D + 1:
            history.pop()
        residual = float(np.linalg.norm(np.asarray(map(p)) - p, ord=np.inf))
        rec.record(t, p, residual)
        if residual <= tol:
            rec.record(t, p, residual, force=True)
            traj, iters, resid = rec.dump()
            return FixedPointResult(
                p_bar=p, iterations=t, residual=residual, converged=True,
                trajectory=traj, trajectory_iters=iters, trajectory_residuals=resid,
                schedule_seed=schedule.seed,
            )
    traj, iters, resid = rec.dump()
    return FixedPointResult(
        p_bar=p, iterations=max_iter, residual=residual, converged=False,
        trajectory=traj, trajectory_iters=iters, trajectory_residuals=resid,
        schedule_seed=schedule.seed,
    )


@dataclass
class Witness:
    """Concrete counterexample to one of the standard-map axioms."""

    axiom: str
    link: int
    p: np.ndarray
    other: np.ndarray | None
    alpha: float | None
    lhs: float
    rhs: float

    def describe(self) -> str:
        detail = f"link {self.link}: lhs {self.lhs:.6g} vs rhs {self.rhs:.6g}"
        if self.alpha is not None:
            detail += f" (alpha {self.alpha:g})"
        return f"{self.axiom} violated, {detail}"


@dataclass
class PropertyReport:
    """Outcome of the randomized standard-interference-function check."""

    num_pairs: int
    seed: int
    alphas: tuple[float, ...]
    positivity: list[Witness] = field(default_factory=list)
    monotonicity: list[Witness] = field(default_factory=list)
    scalability: list[Witness] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.positivity or self.monotonicity or self.scalability)

    def witnesses(self) -> list[Witness]:
        return [*self.positivity, *self.monotonicity, *self.scalability]


def certify_standard(
    map: InterferenceMap,
    num_pairs: int = 1000,
    power_range: tuple[float, float] = (0.0, 10.0),
    seed: int = 0,
    size: int | None = None,
    alphas: tuple[float, ...] = (1.1, 2.0, 10.0),
    max_witnesses: int = 10,
) -> PropertyReport:
    """Randomized check of positivity, monotonicity, and scalability.

    Violations are report entries (with explicit witnesses), never
    exceptions.  Sampling is seeded and deterministic.
    """
    n = size if size is not None else map.size
    if n is None:
        raise ModelError("map has no intrinsic size; pass size explicitly")
    lo, hi = power_range
    if not (0 <= lo < hi):
        raise ModelError("power_range must satisfy 0 <= lo < hi")
    rng = np.random.default_rng(seed)
    report = PropertyReport(num_pairs=num_pairs, seed=seed, alphas=tuple(alphas))

    P = rng.uniform(lo, hi, size=(num_pairs, n))
    bump = rng.uniform(0.0, hi - lo, size=(num_pairs, n)) * rng.integers(
        0, 2, size=(num_pairs, n)
    )
    P2 = P + bump
    IP = map.batch(P)
    IP2 = map.batch(P2)

    bad = np.argwhere(IP <= 0)
    for row, col in bad[:max_witnesses]:
        report.positivity.append(
            Witness("positivity", int(col), P[row], None, None, float(IP[row, col]), 0.0)
        )

    tol = 1e-12 * np.maximum(1.0, np.abs(IP2))
    bad = np.argwhere(IP > IP2 + tol)
    for row, col in bad[:max_witnesses]:
        report.monotonicity.append(
            Witness(
                "monotonicity", int(col), P[row], P2[row], None,
                float(IP[row, col]), float(IP2[row, col]),
            )
        )

    for alpha in alphas:
        IaP = map.batch(alpha * P)
        tol = 1e-12 * np.maximum(1.0, np.abs(IaP))
        bad = np.argwhere(alpha * IP <= IaP - tol)
        for row, col in bad[:max_witnesses]:
            report.scalability.append(
                Witness(
                    "scalability", int(col), P[row], alpha * P[row], float(alpha),
                    float(alpha * IP[row, col]), float(IaP[row, col]),
                )
            )
    return report
