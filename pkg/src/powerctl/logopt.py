"""Utility maximization over powers via the log change of variables.

With y = ln(p) and z = ln(gamma) the total utility F(y) = sum_i
u_i(e^{z_i(y)}) is concave whenever every utility has relative risk
aversion >= 1, which the solvers certify before running.  Two solvers
share this machinery:

* ``solve_g2off``: centralized projected gradient ascent over the power
  box, SINR bounds enforced by an exact penalty with doubling weight.
* ``solve_g2too``: distributed asynchronous variant where each receiver
  announces an interference price pi_i = u_i'(gamma_i) gamma_i / q_i
  and each transmitter updates from its own measurements plus stale
  prices.  It runs on the same seeded virtual-time engine as the
  fixed-point module, so results are reproducible.

Both report KKT residuals with multipliers recovered from constraint
activity (nonnegative least squares on the active columns).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import ModelError, NonConcaveError, OscillationError
from .fixedpoint import AsyncSchedule, TrajectoryRecorder
from .model import NetworkModel
from .utility import ConcavityCertificate, UtilitySpec, certify_log_concavity

P_FLOOR = 1e-12  # watts; keeps the log-power box compact when p_min = 0
ACTIVE_TOL_Y = 1e-12


@dataclass
class LogVars:
    """Log-domain coordinates y = ln p, z = ln gamma with their boxes."""

    y: np.ndarray
    z: np.ndarray
    y_min: np.ndarray
    y_max: np.ndarray
    z_min: np.ndarray
    z_max: np.ndarray

    @property
    def powers(self) -> np.ndarray:
        return np.exp(self.y)


@dataclass
class Multipliers:
    """Nonnegative multipliers for the four constraint families."""

    lambda_lower: np.ndarray  # SINR lower bounds z >= ln gamma_min
    lambda_upper: np.ndarray  # SINR upper bounds z <= ln gamma_max
    mu: np.ndarray  # power upper bounds y <= y_max
    nu: np.ndarray  # power lower bounds y >= y_min

    @classmethod
    def zeros(cls, n: int) -> "Multipliers":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n))


@dataclass
class KktResiduals:
    stationarity_inf_norm: float
    primal_violation: float
    comp_slack_max: float

    def within(self, tol: float) -> bool:
        return self.stationarity_inf_norm <= tol and self.primal_violation <= tol


@dataclass
class LogSolution:
    y_star: LogVars
    powers: np.ndarray
    multipliers: Multipliers
    kkt: KktResiduals
    objective: float
    iterations: int
    converged: bool
    algorithm: str
    penalty_weight: float = 0.0
    certificate: ConcavityCertificate | None = None
    objective_history: np.ndarray | None = None
    trajectory: np.ndarray | None = None
    trajectory_iters: np.ndarray | None = None
    trajectory_residuals: np.ndarray | None = None
    schedule_seed: int | None = None


def _log_bounds(model: NetworkModel):
    y_min = np.log(np.maximum(model.p_min, P_FLOOR))
    with np.errstate(divide="ignore"):
        y_max = np.log(model.p_max)
        z_min = np.log(np.maximum(model.gamma_min, 0.0))
        z_max = np.log(model.gamma_max)
    return y_min, y_max, z_min, z_max


def log_sinr(model: NetworkModel, y: np.ndarray) -> np.ndarray:
    """z_i = ln gain[i,i] + y_i - ln(sum_{k != i} gain[k,i] e^{y_k} + noise_i)."""
    p = np.exp(y)
    q = p @ model.gain - model.direct_gain * p + model.noise
    return np.log(model.direct_gain) + y - np.log(q)


def to_log(model: NetworkModel, p) -> LogVars:
    """Log coordinates of a strictly positive power vector."""
    p = model.check_power(p)
    zero = np.flatnonzero(p <= 0)
    if zero.size:
        raise ModelError(f"p[{int(zero[0])}] = 0 has no log coordinate")
    y = np.log(p)
    y_min, y_max, z_min, z_max = _log_bounds(model)
    return LogVars(y=y, z=log_sinr(model, y), y_min=y_min, y_max=y_max,
                   z_min=z_min, z_max=z_max)


def from_log(y) -> np.ndarray:
    """Powers e^y from log coordinates (accepts LogVars or an array)."""
    if isinstance(y, LogVars):
        return y.powers
    return np.exp(np.asarray(y, dtype=float))


def _uprime_gamma(utils, gamma: np.ndarray) -> np.ndarray:
    return np.array([float(u.deriv_times_gamma(gamma[i])) for i, u in enumerate(utils)])


def _utility_sum(utils, gamma: np.ndarray) -> float:
    return float(sum(float(u.value(gamma[i])) for i, u in enumerate(utils)))


@dataclass
class _Evaluation:
    """Everything the solvers need at one point y."""

    F: float  # true objective
    F_pen: float  # penalized objective (equals F when no SINR bounds)
    gamma: np.ndarray
    q: np.ndarray
    z: np.ndarray
    weights: np.ndarray  # penalty-augmented u'(gamma) * gamma
    prices: np.ndarray  # weights / q, the quantities receivers announce
    grad_pen: np.ndarray
    z_violation: float


def _evaluate(model: NetworkModel, utils, y, z_min, z_max, W: float) -> _Evaluation:
    p = np.exp(y)
    q = p @ model.gain - model.direct_gain * p + model.noise
    gamma = model.direct_gain * p / q
    z = np.log(model.direct_gain) + y - np.log(q)
    F = _utility_sum(utils, gamma)
    below = z < z_min
    above = z > z_max
    viol = float(
        max(
            np.max(np.where(below, z_min - z, 0.0), initial=0.0),
            np.max(np.where(above, z - z_max, 0.0), initial=0.0),
        )
    )
    weights = _uprime_gamma(utils, gamma)
    F_pen = F
    if W > 0.0:
        weights = weights + W * (below.astype(float) - above.astype(float))
        F_pen = F - W * float(
            np.sum(np.where(below, z_min - z, 0.0)) + np.sum(np.where(above, z - z_max, 0.0))
        )
    prices = weights / q
    cross = model.gain @ prices - model.direct_gain * prices
    grad = weights - p * cross
    return _Evaluation(F=F, F_pen=F_pen, gamma=gamma, q=q, z=z, weights=weights,
                       prices=prices, grad_pen=grad, z_violation=viol)


def objective_and_gradient(model: NetworkModel, spec: UtilitySpec, y) -> tuple[float, np.ndarray]:
    """Total utility F(y) and its analytic gradient in log-power coordinates."""
    y = np.asarray(y, dtype=float)
    utils = spec.for_links(model.num_links)
    ev = _evaluate(model, utils, y, -np.inf * np.ones_like(y), np.inf * np.ones_like(y), 0.0)
    return ev.F, ev.grad_pen


def _sinr_jacobian(model: NetworkModel, y: np.ndarray, q: np.ndarray) -> np.ndarray:
    """J[i, j] = d z_i / d y_j = delta_ij - gain[j, i] p_j / q_i (j != i)."""
    p = np.exp(y)
    S = (model.gain * p[:, None]).T / q[:, None]
    np.fill_diagonal(S, 0.0)
    return np.eye(model.num_links) - S


def kkt_residual(model: NetworkModel, spec: UtilitySpec, y, multipliers: Multipliers,
                 ) -> KktResiduals:
    """Lagrangian stationarity, primal violation, and complementary slackness.

    Stationarity: grad F - mu + nu + J_z^T (lambda_lower - lambda_upper),
    where J_z is the Jacobian of z(y).  Bounds that are absent (infinite)
    contribute zero slack when their multiplier is zero and +inf when a
    positive multiplier was attached to a nonexistent constraint.
    """
    y = np.asarray(y, dtype=float)
    utils = spec.for_links(model.num_links)
    y_min, y_max, z_min, z_max = _log_bounds(model)
    ev = _evaluate(model, utils, y, z_min, z_max, 0.0)
    J = _sinr_jacobian(model, y, ev.q)
    r = ev.grad_pen - multipliers.mu + multipliers.nu + J.T @ (
        multipliers.lambda_lower - multipliers.lambda_upper
    )
    stationarity = float(np.linalg.norm(r, ord=np.inf))
    viol = max(
        float(np.max(np.maximum(y - y_max, 0.0), initial=0.0)),
        float(np.max(np.maximum(y_min - y, 0.0), initial=0.0)),
        float(np.max(np.maximum(z_min - ev.z, 0.0), initial=0.0)),
        float(np.max(np.maximum(ev.z - z_max, 0.0), initial=0.0)),
    )

    def slack_terms(mult, slack):
        out = np.zeros_like(mult)
        finite = np.isfinite(slack)
        out[finite] = np.abs(mult[finite] * slack[finite])
        out[~finite & (mult > 0)] = np.inf
        return out

    comp = max(
        float(np.max(slack_terms(multipliers.mu, y_max - y), initial=0.0)),
        float(np.max(slack_terms(multipliers.nu, y - y_min), initial=0.0)),
        float(np.max(slack_terms(multipliers.lambda_lower, ev.z - z_min), initial=0.0)),
        float(np.max(slack_terms(multipliers.lambda_upper, z_max - ev.z), initial=0.0)),
    )
    return KktResiduals(stationarity_inf_norm=stationarity, primal_violation=viol,
                        comp_slack_max=comp)


def recover_multipliers(model: NetworkModel, spec: UtilitySpec, y, tol: float = 1e-8,
                        ) -> tuple[Multipliers, float]:
    """Multipliers from constraint activity at y.

    Active power bounds get the clamped gradient component; active SINR
    bounds enter through the z-Jacobian rows.  All of them are fit at
    once by nonnegative least squares so the returned stationarity
    residual is exactly what the fitted multipliers leave unexplained.
    """
    y = np.asarray(y, dtype=float)
    n = model.num_links
    utils = spec.for_links(n)
    y_min, y_max, z_min, z_max = _log_bounds(model)
    ev = _evaluate(model, utils, y, z_min, z_max, 0.0)
    g = ev.grad_pen
    z_tol = max(1e-6, 10.0 * tol)

    columns: list[np.ndarray] = []
    labels: list[tuple[str, int]] = []
    J = None
    # A link parked near the artificial p = 0 floor has a vanishing
    # log-coordinate gradient regardless of optimality; when its
    # per-watt gradient is positive it wants power, so charge the
    # first-order turn-on gain instead of certifying it.
    turn_on_gap = 0.0
    p = np.exp(y)
    if np.all(np.isfinite(model.p_max)):
        low = (p <= 1e-3 * model.p_max) & (g > 0) & (model.p_min <= P_FLOOR)
        if np.any(low):
            turn_on_gap = float(np.max(np.where(low, g / p * model.p_max, 0.0)))
    for i in range(n):
        if np.isfinite(y_max[i]) and y[i] >= y_max[i] - ACTIVE_TOL_Y:
            e = np.zeros(n)
            e[i] = -1.0
            columns.append(e)
            labels.append(("mu", i))
        if np.isfinite(y_min[i]) and y[i] <= y_min[i] + ACTIVE_TOL_Y:
            if model.p_min[i] <= P_FLOOR and g[i] > 0:
                continue
            e = np.zeros(n)
            e[i] = 1.0
            columns.append(e)
            labels.append(("nu", i))
        if np.isfinite(z_min[i]) and ev.z[i] <= z_min[i] + z_tol:
            if J is None:
                J = _sinr_jacobian(model, y, ev.q)
            columns.append(J[i])
            labels.append(("lambda_lower", i))
        if np.isfinite(z_max[i]) and ev.z[i] >= z_max[i] - z_tol:
            if J is None:
                J = _sinr_jacobian(model, y, ev.q)
            columns.append(-J[i])
            labels.append(("lambda_upper", i))

    mult = Multipliers.zeros(n)
    if not columns:
        return mult, max(float(np.linalg.norm(g, ord=np.inf)), turn_on_gap)
    M = np.column_stack(columns)
    theta, _ = nnls(M, -g)
    for (kind, i), value in zip(labels, theta):
        getattr(mult, kind)[i] += float(value)
    residual = max(float(np.linalg.norm(g + M @ theta, ord=np.inf)), turn_on_gap)
    return mult, residual


@dataclass
class G2offConfig:
    """Centralized solver settings (projected gradient with backtracking)."""

    step: float = 1.0
    beta: float = 0.5
    armijo_c: float = 1e-4
    tol: float = 1e-8
    max_iter: int = 50000
    allow_nonconcave: bool = False
    record_trajectory: bool = False
    penalty_max: float = 1e8
    step_cap: float = 1e8


def _require_solvable(model: NetworkModel):
    if not np.all(np.isfinite(model.p_max)):
        raise ModelError("solvers require finite p_max (a compact power box)")
    if np.any(model.p_max <= 0):
        raise ModelError("solvers require p_max > 0 on every link")


def _certify_or_raise(spec: UtilitySpec, n: int, allow: bool) -> ConcavityCertificate:
    cert = certify_log_concavity(spec, n)
    if not cert.passed and not allow:
        raise NonConcaveError(
            f"utility failed the log-concavity certificate ({cert.failure}); "
            "pass allow_nonconcave to proceed anyway"
        )
    return cert


def _armijo_step(y, grad, f_cur, s_start, beta, c1, y_lo, y_hi, evaluate):
    """Backtracking projected-ascent step; returns (y_new, eval_new, s_used).

    s_used = 0 means no improving move was found (already blocked).
    """
    s = s_start
    while s >= 1e-20:
        y_new = np.clip(y + s * grad, y_lo, y_hi)
        delta = y_new - y
        if not np.any(delta):
            return y, None, 0.0
        ev_new = evaluate(y_new)
        if ev_new.F_pen >= f_cur + c1 * float(grad @ delta):
            return y_new, ev_new, s
        s *= beta
    return y, None, 0.0


def solve_g2off(model: NetworkModel, spec: UtilitySpec,
                config: G2offConfig | None = None) -> LogSolution:
    """Centralized log-domain utility maximization (the G2off solver).

    Projected gradient ascent over the log-power box with adaptive
    Armijo backtracking (the accepted step doubles as the next trial,
    so the method self-scales).  SINR bounds are enforced by an exact
    penalty whose weight doubles from 1 until the violation falls below
    tol.  The objective sequence is nondecreasing within each penalty
    stage by construction.
    """
    cfg = config or G2offConfig()
    _require_solvable(model)
    n = model.num_links
    utils = spec.for_links(n)
    cert = _certify_or_raise(spec, n, cfg.allow_nonconcave)
    y_min, y_max, z_min, z_max = _log_bounds(model)
    has_z = bool(np.any(np.isfinite(z_min)) or np.any(np.isfinite(z_max)))

    y = np.clip(np.log(model.p_max) - math.log(2.0), y_min, y_max)
    W = 1.0 if has_z else 0.0
    evaluate = lambda yy: _evaluate(model, utils, yy, z_min, z_max, W)  # noqa: E731

    rec = TrajectoryRecorder(cfg.record_trajectory, cfg.max_iter)
    history: list[float] = []
    s_prev = cfg.step
    iters = 0
    converged = False
    mult = Multipliers.zeros(n)
    stationarity = np.inf
    ev = evaluate(y)

    def kkt_ok() -> bool:
        nonlocal mult, stationarity
        mult, stationarity = recover_multipliers(model, spec, y, tol=cfg.tol)
        viol = max(ev.z_violation, 0.0)
        return stationarity <= cfg.tol and viol <= cfg.tol

    while iters < cfg.max_iter and not converged:
        stalled = False
        check_countdown = 0
        while iters < cfg.max_iter:
            history.append(ev.F)
            rec.record(iters, np.exp(y), float(np.linalg.norm(ev.grad_pen, ord=np.inf)))
            blocked_hi = (y >= y_max - ACTIVE_TOL_Y) & (ev.grad_pen > 0)
            blocked_lo = (y <= y_min + ACTIVE_TOL_Y) & (ev.grad_pen < 0)
            proj_grad = np.where(blocked_hi | blocked_lo, 0.0, ev.grad_pen)
            proj_norm = float(np.linalg.norm(proj_grad, ord=np.inf))
            if proj_norm <= 10.0 * cfg.tol or check_countdown <= 0:
                check_countdown = 25
                if kkt_ok():
                    converged = True
                    break
            check_countdown -= 1
            y_new, ev_new, s_used = _armijo_step(
                y, ev.grad_pen, ev.F_pen, min(2.0 * s_prev, cfg.step_cap),
                cfg.beta, cfg.armijo_c, y_min, y_max, evaluate,
            )
            iters += 1
            if s_used == 0.0:
                if kkt_ok():
                    converged = True
                else:
                    stalled = True
                break
            y, ev, s_prev = y_new, ev_new, s_used
        if converged:
            break
        if has_z and ev.z_violation > cfg.tol and W < cfg.penalty_max:
            W = min(2.0 * W, cfg.penalty_max)
            evaluate = lambda yy: _evaluate(model, utils, yy, z_min, z_max, W)  # noqa: E731
            ev = evaluate(y)
            continue
        if stalled or iters >= cfg.max_iter:
            break

    if not converged:
        mult, stationarity = recover_multipliers(model, spec, y, tol=cfg.tol)
    kkt = kkt_residual(model, spec, y, mult)
    rec.record(iters, np.exp(y), kkt.stationarity_inf_norm, force=True)
    traj, traj_iters, traj_resid = rec.dump()
    final = _evaluate(model, utils, y, z_min, z_max, 0.0)
    return LogSolution(
        y_star=LogVars(y=y, z=final.z, y_min=y_min, y_max=y_max, z_min=z_min, z_max=z_max),
        powers=np.exp(y),
        multipliers=mult,
        kkt=kkt,
        objective=final.F,
        iterations=iters,
        converged=converged,
        algorithm="g2off",
        penalty_weight=W,
        certificate=cert,
        objective_history=np.asarray(history) if history else None,
        trajectory=traj,
        trajectory_iters=traj_iters,
        trajectory_residuals=traj_resid,
    )


@dataclass
class G2TooConfig:
    """Distributed asynchronous solver settings.

    The per-link step is fixed (a distributed link cannot run global
    backtracking); when ``step`` is None it is set to 0.1 / L_hat with
    L_hat estimated per link from a seeded 10-sample gradient-difference
    probe.  ``noise_bound`` adds zero-mean uniform measurement noise to
    each link's gradient, as a simulation feature.
    """

    step: float | np.ndarray | None = None
    schedule: AsyncSchedule = field(default_factory=AsyncSchedule)
    noise_bound: float = 0.0
    tol: float = 1e-8
    max_iter: int = 200000
    check_every: int = 10
    allow_nonconcave: bool = False
    record_trajectory: bool = False
    penalty_max: float = 1e8
    regression_limit: int = 1000


def _probe_steps(model: NetworkModel, spec: UtilitySpec, y_min, y_max, rng) -> np.ndarray:
    """Per-link fixed steps 0.1 / L_hat from a gradient-difference probe."""
    n = model.num_links
    lo = np.maximum(y_min, np.log(model.p_max) - math.log(1e3))
    hi = y_max
    L = np.zeros(n)
    for _ in range(10):
        ya = rng.uniform(lo, hi)
        yb = rng.uniform(lo, hi)
        _, ga = objective_and_gradient(model, spec, ya)
        _, gb = objective_and_gradient(model, spec, yb)
        denom = float(np.linalg.norm(ya - yb, ord=np.inf))
        if denom > 0:
            L = np.maximum(L, np.abs(ga - gb) / denom)
    floor = max(1e-3 * float(np.max(L, initial=0.0)), 1e-9)
    return 0.1 / np.maximum(L, floor)


def _link_update(y_j, own_term, stale_prices, out_gains_j, j, step_j, lo_j, hi_j, noise):
    """One transmitter's update from locally available information only.

    The link sees its own log-power, its own measured marginal utility
    term, the (possibly stale) announced prices, and the gains from its
    own transmitter out to each receiver.  It never reads another
    link's utility or channel row.
    """
    interference_cost = float(out_gains_j @ stale_prices) - out_gains_j[j] * stale_prices[j]
    grad_j = own_term - math.exp(y_j) * interference_cost + noise
    return min(max(y_j + step_j * grad_j, lo_j), hi_j)


def solve_g2too(model: NetworkModel, spec: UtilitySpec,
                config: G2TooConfig | None = None) -> LogSolution:
    """Distributed asynchronous interference-pricing solver (G2Too).

    Receivers announce prices pi_i = u_i'(gamma_i) gamma_i / q_i;
    transmitters take fixed-step projected gradient updates using those
    prices with bounded staleness.  Runs as a seeded virtual-time
    simulation; with zero noise it converges to the same optimum as
    solve_g2off.
    """
    cfg = config or G2TooConfig()
    _require_solvable(model)
    n = model.num_links
    utils = spec.for_links(n)
    cert = _certify_or_raise(spec, n, cfg.allow_nonconcave)
    y_min, y_max, z_min, z_max = _log_bounds(model)
    has_z = bool(np.any(np.isfinite(z_min)) or np.any(np.isfinite(z_max)))
    if cfg.noise_bound < 0:
        raise ModelError("noise_bound must be >= 0")

    seed_seq = np.random.SeedSequence(cfg.schedule.seed)
    sched_ss, noise_ss, probe_ss = seed_seq.spawn(3)
    rng = np.random.default_rng(sched_ss)
    noise_rng = np.random.default_rng(noise_ss)
    if cfg.step is None:
        steps = _probe_steps(model, spec, y_min, y_max, np.random.default_rng(probe_ss))
    else:
        steps = np.broadcast_to(np.asarray(cfg.step, dtype=float), (n,)).copy()

    D = cfg.schedule.staleness_bound
    prob = np.broadcast_to(np.asarray(cfg.schedule.update_probability, dtype=float), (n,))
    y = np.clip(np.log(model.p_max) - math.log(2.0), y_min, y_max)
    W = 1.0 if has_z else 0.0

    rec = TrajectoryRecorder(cfg.record_trajectory, cfg.max_iter)
    history: list[float] = []
    price_hist: list[np.ndarray] = []
    own_hist: list[np.ndarray] = []
    best_pen = -np.inf
    regress_count = 0
    iters = 0
    converged = False
    mult = Multipliers.zeros(n)

    while iters < cfg.max_iter and not converged:
        # one penalty stage; the RNG streams continue across stages
        price_hist.clear()
        own_hist.clear()
        best_pen = -np.inf
        regress_count = 0
        stage_viol = np.inf
        while iters < cfg.max_iter:
            ev = _evaluate(model, utils, y, z_min, z_max, W)
            stage_viol = ev.z_violation
            history.append(ev.F)
            rec.record(iters, np.exp(y), float(np.linalg.norm(ev.grad_pen, ord=np.inf)))
            margin = 1e-9 * max(1.0, abs(best_pen))
            if cfg.noise_bound > 0:
                margin += max(1.0, abs(best_pen))
            if ev.F_pen < best_pen - margin:
                regress_count += 1
                if regress_count > cfg.regression_limit:
                    raise OscillationError(
                        f"objective regressed for {regress_count} consecutive "
                        f"activations (best {best_pen:.6g}, current {ev.F_pen:.6g})",
                        last_iterate=np.exp(y),
                        iterations=iters,
                    )
            else:
                regress_count = 0
                best_pen = max(best_pen, ev.F_pen)

            if iters % cfg.check_every == 0:
                mult, stationarity = recover_multipliers(model, spec, y, tol=cfg.tol)
                if stationarity <= cfg.tol and ev.z_violation <= cfg.tol:
                    converged = True
                    break

            price_hist.insert(0, ev.prices)
            own_hist.insert(0, ev.weights)
            if len(price_hist) > D + 1:
                price_hist.pop()
                own_hist.pop()

            active = rng.random(n) < prob
            delays = rng.integers(0, D + 1, size=(n, n + 1)) if D > 0 else None
            y_new = y.copy()
            for j in np.flatnonzero(active):
                if delays is None:
                    stale_prices = price_hist[0]
                    own_term = own_hist[0][j]
                else:
                    avail = len(price_hist)
                    d_prices = np.minimum(delays[j, :n], avail - 1)
                    stale_prices = np.array(
                        [price_hist[d_prices[i]][i] for i in range(n)]
                    )
                    own_term = own_hist[min(delays[j, n], avail - 1)][j]
                zeta = (
                    float(noise_rng.uniform(-cfg.noise_bound, cfg.noise_bound))
                    if cfg.noise_bound > 0
                    else 0.0
                )
                y_new[j] = _link_update(
                    y[j], own_term, stale_prices, model.gain[j], j,
                    steps[j], y_min[j], y_max[j], zeta,
                )
            y = y_new
            iters += 1
        if converged:
            break
        if has_z and stage_viol > cfg.tol and W < cfg.penalty_max:
            W = min(2.0 * W, cfg.penalty_max)
            continue
        break

    if not converged:
        mult, _ = recover_multipliers(model, spec, y, tol=cfg.tol)
    kkt = kkt_residual(model, spec, y, mult)
    rec.record(iters, np.exp(y), kkt.stationarity_inf_norm, force=True)
    traj, traj_iters, traj_resid = rec.dump()
    final = _evaluate(model, utils, y, z_min, z_max, 0.0)
    return LogSolution(
        y_star=LogVars(y=y, z=final.z, y_min=y_min, y_max=y_max, z_min=z_min, z_max=z_max),
        powers=np.exp(y),
        multipliers=mult,
        kkt=kkt,
        objective=final.F,
        iterations=iters,
        converged=converged,
        algorithm="g2too",
        penalty_weight=W,
        certificate=cert,
        objective_history=np.asarray(history) if history else None,
        trajectory=traj,
        trajectory_iters=traj_iters,
        trajectory_residuals=traj_resid,
        schedule_seed=cfg.schedule.seed,
    )
