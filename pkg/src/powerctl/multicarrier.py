"""Multi-carrier extension: per-carrier SINR, feasibility, and budgeted solve.

Carriers do not interfere with each other, so SINR and spectral
feasibility decompose into per-carrier slices of the single-carrier
machinery.  The coupling is per-link: a total power budget across
carriers, optional per-carrier caps, and an optional aggregate QoS
floor sum_f U_if(gamma_if) >= U_min[i].

Cross-carrier reductions (budgets, objective, QoS totals, inner
products) use exact summation so that permuting carrier indices
permutes the solution bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProblemError, ModelError, NonConcaveError
from .feasibility import FeasibilityVerdict, check_feasibility
from .fixedpoint import TrajectoryRecorder
from .logopt import P_FLOOR, KktResiduals
from .model import NetworkModel, sinr
from .utility import Utility, UtilitySpec, certify_log_concavity

# Active-set tolerance in log-power units.  The exit-time budget trim can
# move capped components up to ~budget_tol below their bound, so this must
# be loose enough to still see those caps as active.
ACTIVE_TOL_MC = 1e-7

_nnls = None  # imported lazily from scipy in _recover_mc


def _fsum_rows(M: np.ndarray) -> np.ndarray:
    """Exactly rounded per-row sums (order independent)."""
    return np.array([math.fsum(row) for row in M])


def _fsum_all(M: np.ndarray) -> float:
    return math.fsum(np.asarray(M, dtype=float).ravel())


@dataclass
class MultiCarrierModel:
    """Links sharing a set of orthogonal carriers.

    gains[k, i, f] is the power gain from Tx k to Rx i on carrier f;
    noise[i, f] the receiver noise; p_cap[i, f] per-carrier caps
    (infinite when absent); p_budget[i] the per-link total budget.
    u_min / v_max are the optional QoS floor and objective saturation
    levels.
    """

    gains: np.ndarray
    noise: np.ndarray
    p_cap: np.ndarray | None = None
    p_budget: np.ndarray | float = np.inf
    u_min: np.ndarray | None = None
    v_max: np.ndarray | None = None

    def __post_init__(self):
        self.gains = np.asarray(self.gains, dtype=float)
        if self.gains.ndim != 3 or self.gains.shape[0] != self.gains.shape[1]:
            raise ModelError(f"gains must have shape (n, n, F), got {self.gains.shape}")
        n, _, F = self.gains.shape
        self.noise = np.asarray(self.noise, dtype=float)
        if self.noise.shape != (n, F):
            raise ModelError(f"noise must have shape ({n}, {F}), got {self.noise.shape}")
        if self.p_cap is None:
            self.p_cap = np.full((n, F), np.inf)
        else:
            cap = np.asarray(self.p_cap, dtype=float)
            if cap.ndim == 0:
                cap = np.full((n, F), float(cap))
            if cap.shape != (n, F):
                raise ModelError(f"p_cap must have shape ({n}, {F}), got {cap.shape}")
            self.p_cap = cap
        budget = np.asarray(self.p_budget, dtype=float)
        if budget.ndim == 0:
            budget = np.full(n, float(budget))
        if budget.shape != (n,):
            raise ModelError(f"p_budget must be scalar or shape ({n},)")
        if np.any(budget <= 0):
            raise ModelError("p_budget must be positive")
        self.p_budget = budget
        if self.u_min is not None:
            self.u_min = np.asarray(self.u_min, dtype=float)
            if self.u_min.shape not in ((n,), (n, F)):
                raise ModelError(f"u_min must have shape ({n},) or ({n}, {F})")
        if self.v_max is not None:
            self.v_max = np.asarray(self.v_max, dtype=float)
            if self.v_max.shape != (n,):
                raise ModelError(f"v_max must have shape ({n},)")
        self._slices = [self.carrier_slice(f) for f in range(F)]

    @property
    def num_links(self) -> int:
        return self.gains.shape[0]

    @property
    def num_carriers(self) -> int:
        return self.gains.shape[2]

    def carrier_slice(self, f: int) -> NetworkModel:
        """Single-carrier view of carrier f (validates its invariants).

        Slices are copied to contiguous layout so results do not depend
        on the parent array's memory order (strided and contiguous BLAS
        paths round differently, which would break the bitwise carrier
        permutation equivariance).
        """
        return NetworkModel(
            gain=np.ascontiguousarray(self.gains[:, :, f]),
            noise=np.ascontiguousarray(self.noise[:, f]),
            p_min=0.0,
            p_max=np.minimum(self.p_cap[:, f], self.p_budget),
        )

    def check_power_matrix(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        shape = (self.num_links, self.num_carriers)
        if P.shape != shape:
            raise ModelError(f"power matrix has shape {P.shape}, expected {shape}")
        if not np.all(np.isfinite(P)) or np.any(P < 0):
            raise ModelError("powers must be finite and nonnegative")
        return P


@dataclass
class CarrierUtilitySplit:
    """Objective utilities V[i][f] and optional QoS utilities U[i][f].

    Each of ``objective`` / ``qos`` is either a single Utility used for
    every (link, carrier) pair or a nested list indexed [link][carrier].
    V enters the maximized objective; U only enters the aggregate QoS
    floor against u_min.
    """

    objective: Utility | list
    qos: Utility | list | None = None

    def _resolve(self, which, i: int, f: int) -> Utility:
        if isinstance(which, Utility):
            return which
        return which[i][f]

    def v_at(self, i: int, f: int) -> Utility:
        return self._resolve(self.objective, i, f)

    def u_at(self, i: int, f: int) -> Utility:
        if self.qos is None:
            raise ModelError("no QoS utilities configured")
        return self._resolve(self.qos, i, f)


def sinr_mc(model: MultiCarrierModel, P) -> np.ndarray:
    """Per-carrier SINR matrix; column f uses the single-carrier formula."""
    P = model.check_power_matrix(P)
    cols = [sinr(model._slices[f], P[:, f]) for f in range(model.num_carriers)]
    return np.stack(cols, axis=1)


@dataclass
class McFeasibility:
    verdicts: list[FeasibilityVerdict]
    budget_violations: list[int]
    min_power_totals: np.ndarray | None

    @property
    def all_spectrally_feasible(self) -> bool:
        return all(v.p_star is not None for v in self.verdicts)


def feasibility_mc(model: MultiCarrierModel, gamma_target) -> McFeasibility:
    """Per-carrier feasibility verdicts plus per-link budget flags.

    gamma_target has shape (n, F).  Budget flags compare the summed
    minimal powers against p_budget over every carrier that produced a
    minimal power vector.
    """
    gt = np.asarray(gamma_target, dtype=float)
    shape = (model.num_links, model.num_carriers)
    if gt.shape != shape:
        raise ModelError(f"gamma_target has shape {gt.shape}, expected {shape}")
    verdicts = [
        check_feasibility(model._slices[f], gt[:, f]) for f in range(model.num_carriers)
    ]
    stars = [v.p_star for v in verdicts if v.p_star is not None]
    if stars:
        totals = _fsum_rows(np.stack(stars, axis=1))
        violations = [
            int(i) for i in range(model.num_links)
            if totals[i] > model.p_budget[i] * (1.0 + 1e-12)
        ]
    else:
        totals, violations = None, []
    return McFeasibility(
        verdicts=verdicts,
        budget_violations=violations,
        min_power_totals=totals,
    )


@dataclass
class BudgetReport:
    used: np.ndarray
    budget: np.ndarray
    slack: np.ndarray


def budget_check(model: MultiCarrierModel, P) -> BudgetReport:
    """Per-link power usage against the budget (exact row sums)."""
    P = model.check_power_matrix(P)
    used = _fsum_rows(P)
    return BudgetReport(used=used, budget=model.p_budget.copy(),
                        slack=model.p_budget - used)


@dataclass
class McConfig:
    tol: float = 1e-8
    budget_tol: float = 1e-9
    dual_step: float = 0.01
    max_outer: int = 500
    max_inner: int = 20000
    beta: float = 0.5
    armijo_c: float = 1e-4
    step_cap: float = 1e8
    allow_nonconcave: bool = False
    qos_per_carrier: bool = False
    penalty_max: float = 1e8
    record_trajectory: bool = False
    smoothing_band: float = 1e-3


@dataclass
class McSolution:
    powers: np.ndarray
    y: np.ndarray
    budget_duals: np.ndarray
    cap_multipliers: np.ndarray
    floor_multipliers: np.ndarray
    qos_multipliers: np.ndarray | None
    kkt: KktResiduals
    objective: float
    inner_iterations: int
    outer_iterations: int
    converged: bool
    objective_history: np.ndarray | None = None
    trajectory: np.ndarray | None = None
    trajectory_iters: np.ndarray | None = None
    trajectory_residuals: np.ndarray | None = None


def _smooth_capped(values: np.ndarray, caps: np.ndarray, band: float):
    """C1 smoothing of min(v, cap) over a band around the kink.

    Returns the smoothed values and the derivative factor d(smoothed)/dv.
    """
    v = values
    out = v.copy()
    dout = np.ones_like(v)
    finite = np.isfinite(caps)
    if not np.any(finite):
        return out, dout
    c = np.where(finite, caps, np.inf)
    upper = v >= c + band
    mid = (~upper) & (v > c - band) & finite
    out = np.where(upper & finite, c, out)
    dout = np.where(upper & finite, 0.0, dout)
    t = np.where(mid, c + band - v, 0.0)
    out = np.where(mid, c - t * t / (4.0 * band), out)
    dout = np.where(mid, t / (2.0 * band), dout)
    return out, dout


class _McObjective:
    """Evaluation bundle for the multi-carrier Lagrangian ascent."""

    def __init__(self, model: MultiCarrierModel, split: CarrierUtilitySplit, cfg: McConfig):
        self.model = model
        self.split = split
        self.cfg = cfg
        n, F = model.num_links, model.num_carriers
        self.uniform_v = split.objective if isinstance(split.objective, Utility) else None
        self.v_utils = [[split.v_at(i, f) for f in range(F)] for i in range(n)]
        self.has_qos = model.u_min is not None
        if self.has_qos:
            if split.qos is None:
                raise ModelError("model has u_min but the utility split has no QoS utilities")
            self.uniform_u = split.qos if isinstance(split.qos, Utility) else None
            self.u_utils = [[split.u_at(i, f) for f in range(F)] for i in range(n)]
            if cfg.qos_per_carrier:
                if model.u_min.ndim != 2:
                    raise ModelError("qos_per_carrier requires u_min of shape (n, F)")
            elif model.u_min.ndim != 1:
                raise ModelError("aggregate QoS requires u_min of shape (n,)")
        self.caps_v = model.v_max

    def _eval_v(self, gamma: np.ndarray):
        if self.uniform_v is not None:
            u = self.uniform_v
            return (np.asarray(u.value(gamma), dtype=float),
                    np.asarray(u.deriv_times_gamma(gamma), dtype=float))
        n, F = gamma.shape
        val = np.empty_like(gamma)
        w = np.empty_like(gamma)
        for i in range(n):
            for f in range(F):
                u = self.v_utils[i][f]
                val[i, f] = float(u.value(gamma[i, f]))
                w[i, f] = float(u.deriv_times_gamma(gamma[i, f]))
        return val, w

    def _eval_u(self, gamma: np.ndarray):
        if self.uniform_u is not None:
            u = self.uniform_u
            return (np.asarray(u.value(gamma), dtype=float),
                    np.asarray(u.deriv_times_gamma(gamma), dtype=float))
        n, F = gamma.shape
        val = np.empty_like(gamma)
        w = np.empty_like(gamma)
        for i in range(n):
            for f in range(F):
                u = self.u_utils[i][f]
                val[i, f] = float(u.value(gamma[i, f]))
                w[i, f] = float(u.deriv_times_gamma(gamma[i, f]))
        return val, w

    def __call__(self, Y: np.ndarray, mu: np.ndarray, W: float):
        model, cfg = self.model, self.cfg
        n, F = model.num_links, model.num_carriers
        P = np.exp(Y)
        gamma = np.empty_like(P)
        q = np.empty_like(P)
        for f in range(F):
            sl = model._slices[f]
            col = P[:, f]
            qf = col @ sl.gain - sl.direct_gain * col + sl.noise
            q[:, f] = qf
            gamma[:, f] = sl.direct_gain * col / qf

        v_raw, w_v = self._eval_v(gamma)
        if self.caps_v is not None:
            v_val, dfac = _smooth_capped(v_raw, self.caps_v[:, None], cfg.smoothing_band)
            w_v = w_v * dfac
        else:
            v_val = v_raw
        objective = _fsum_all(v_val)

        qos_viol = 0.0
        qos_gap = None  # signed: u_min - achieved (negative means slack)
        weights = w_v
        objective_pen = objective
        if self.has_qos:
            u_val, w_u = self._eval_u(gamma)
            if cfg.qos_per_carrier:
                qos_gap = self.model.u_min - u_val
                violated = qos_gap > 0.0
                force = np.where(violated, w_u, 0.0)
                deficit = np.maximum(qos_gap, 0.0)
                penalty = _fsum_all(deficit)
            else:
                totals = _fsum_rows(u_val)
                qos_gap = self.model.u_min - totals
                violated = qos_gap > 0.0
                force = np.where(violated[:, None], w_u, 0.0)
                deficit = np.maximum(qos_gap, 0.0)
                penalty = math.fsum(deficit)
            qos_viol = float(np.max(deficit, initial=0.0))
            if W > 0.0:
                weights = w_v + W * force
                objective_pen = objective - W * penalty

        grad = np.empty_like(P)
        for f in range(F):
            sl = model._slices[f]
            pi = weights[:, f] / q[:, f]
            cross = sl.gain @ pi - sl.direct_gain * pi
            grad[:, f] = weights[:, f] - P[:, f] * cross
        used = _fsum_rows(P)
        lagrangian = objective_pen - math.fsum(mu * (used - model.p_budget))
        grad = grad - (mu[:, None] * P)
        return {
            "P": P, "gamma": gamma, "q": q, "objective": objective,
            "objective_pen": objective_pen, "lagrangian": lagrangian,
            "grad": grad, "used": used, "qos_viol": qos_viol,
            "qos_gap": qos_gap,
        }


def _recover_mc(obj: _McObjective, state: dict, Y, y_lo, y_hi, mu, W: float):
    """Cap/floor/QoS multipliers by NNLS on the active columns.

    The fit uses the plain (unpenalized) gradient: the QoS penalty force
    is exactly what the recovered multipliers stand in for, so fitting
    the penalized gradient would double-count it on the violated side
    of the kink.  The budget duals mu are algorithm state, not
    recovered: their force -mu * p is already part of that gradient.
    """
    global _nnls
    if _nnls is None:
        from scipy.optimize import nnls as _scipy_nnls
        _nnls = _scipy_nnls
    model = obj.model
    n, F = model.num_links, model.num_carriers
    if obj.has_qos and W > 0.0:
        state = obj(np.asarray(Y), mu, 0.0)
    g = state["grad"].ravel()
    columns, labels = [], []
    flat = lambda i, f: i * F + f  # noqa: E731
    # Tiny powers stand in for p = 0, where the log-coordinate gradient
    # vanishes no matter what.  Any component far below its cap whose
    # per-watt gradient is positive wants power, so it must not certify
    # as stationary; its first-order turn-on gain is charged instead.
    eff_cap = np.minimum(model.p_cap, model.p_budget[:, None])
    pgrad = state["grad"] / state["P"]
    low = state["P"] <= 1e-3 * eff_cap
    gaps = np.where(low & (pgrad > 0), pgrad * eff_cap, 0.0)
    turn_on_gap = float(np.max(gaps, initial=0.0))
    for i in range(n):
        for f in range(F):
            if Y[i, f] >= y_hi[i, f] - ACTIVE_TOL_MC:
                e = np.zeros(n * F)
                e[flat(i, f)] = -1.0
                columns.append(e)
                labels.append(("cap", i, f))
            if Y[i, f] <= y_lo[i, f] + ACTIVE_TOL_MC and pgrad[i, f] <= 0:
                e = np.zeros(n * F)
                e[flat(i, f)] = 1.0
                columns.append(e)
                labels.append(("floor", i, f))
    if obj.has_qos and state["qos_gap"] is not None:
        # d/dY of the QoS aggregate: same pricing structure with U weights.
        # Floors near-binding on either side of the kink count as active
        # for multiplier recovery (the penalty ascent settles there).
        band = 1e-6 * np.maximum(1.0, np.abs(obj.model.u_min))
        near = state["qos_gap"] >= -band
        P, q = state["P"], state["q"]
        _, w_u = obj._eval_u(state["gamma"])

        def qos_column(i: int, f: int) -> np.ndarray:
            sl = model._slices[f]
            wf = np.zeros(n)
            wf[i] = w_u[i, f]
            pi = wf / q[:, f]
            cross = sl.gain @ pi - sl.direct_gain * pi
            col = np.zeros((n, F))
            col[:, f] = wf - P[:, f] * cross
            return col.ravel()

        if obj.cfg.qos_per_carrier:
            for i, f in np.argwhere(near):
                columns.append(qos_column(int(i), int(f)))
                labels.append(("qos", int(i), int(f)))
        else:
            for i in np.flatnonzero(near):
                total = np.zeros(n * F)
                for f in range(F):
                    total += qos_column(int(i), f)
                columns.append(total)
                labels.append(("qos", int(i), -1))
    qos_shape = None
    if obj.has_qos:
        qos_shape = (n, F) if obj.cfg.qos_per_carrier else (n,)
    cap_m = np.zeros((n, F))
    floor_m = np.zeros((n, F))
    qos_m = np.zeros(qos_shape) if qos_shape else None
    if not columns:
        return cap_m, floor_m, qos_m, max(float(np.linalg.norm(g, ord=np.inf)), turn_on_gap)
    M = np.column_stack(columns)
    theta, _ = _nnls(M, -g)
    for (kind, i, f), val in zip(labels, theta):
        if kind == "cap":
            cap_m[i, f] = float(val)
        elif kind == "floor":
            floor_m[i, f] = float(val)
        elif f >= 0:
            qos_m[i, f] = float(val)
        else:
            qos_m[i] = float(val)
    resid = max(float(np.linalg.norm(g + M @ theta, ord=np.inf)), turn_on_gap)
    return cap_m, floor_m, qos_m, resid


def solve_mc(model: MultiCarrierModel, split: CarrierUtilitySplit,
             config: McConfig | None = None) -> McSolution:
    """Budgeted multi-carrier utility maximization.

    Inner loop: projected gradient ascent in log powers Y with adaptive
    Armijo backtracking for fixed budget duals mu.  Outer loop: per-link
    dual subgradient mu_i <- [mu_i + kappa (used_i - budget_i)]_+ with
    kappa halved on sign oscillation (and grown while the sign persists,
    so the bracket is found quickly).  The QoS floor uses the doubling
    exact penalty; exhausting the weight raises an infeasibility
    diagnostic.
    """
    cfg = config or McConfig()
    n, F = model.num_links, model.num_carriers
    for i in range(n):
        for f in range(F):
            u = split.v_at(i, f)
            cert = certify_log_concavity(UtilitySpec(u), 1)
            if not cert.passed and not cfg.allow_nonconcave:
                raise NonConcaveError(
                    f"objective utility at link {i} carrier {f} failed the "
                    f"log-concavity certificate ({cert.failure}); "
                    "pass allow_nonconcave to proceed anyway"
                )
    obj = _McObjective(model, split, cfg)
    eff_cap = np.minimum(model.p_cap, model.p_budget[:, None])
    if np.any(eff_cap <= 0):
        raise ModelError("every (link, carrier) needs a positive power cap or budget")
    y_hi = np.log(eff_cap)
    y_lo = np.full((n, F), math.log(P_FLOOR))
    start = np.minimum(eff_cap, model.p_budget[:, None] / F)
    Y = np.clip(np.log(0.5 * start), y_lo, y_hi)

    mu = np.zeros(n)
    kappa = np.full(n, cfg.dual_step)
    prev_sign = np.zeros(n)
    prev_viol = np.zeros(n)
    mu_lo = np.zeros(n)
    mu_hi = np.full(n, np.inf)
    W = 1.0 if obj.has_qos else 0.0
    rec = TrajectoryRecorder(cfg.record_trajectory, cfg.max_outer * cfg.max_inner)
    history: list[float] = []
    inner_total = 0
    outer = 0
    converged = False
    cap_m = np.zeros((n, F))
    floor_m = np.zeros((n, F))
    qos_m = None
    if obj.has_qos:
        qos_m = np.zeros((n, F) if cfg.qos_per_carrier else n)
    stationarity = np.inf
    state = obj(Y, mu, W)

    # per-component step factors: grown while the gradient sign persists,
    # halved on flips, so carriers switching off travel exponentially fast
    step_fac = np.ones((n, F))
    grad_sign = np.zeros((n, F))
    t_prev = 1.0
    while outer < cfg.max_outer:
        outer += 1
        inner_done = False
        countdown = 0
        inner_budget = cfg.max_inner
        while inner_budget > 0:
            history.append(state["objective"])
            rec.record(inner_total, state["P"],
                       float(np.linalg.norm(state["grad"], ord=np.inf)))
            # switch-off snap: a tiny power with a negative per-watt
            # gradient decays only asymptotically in log coordinates, so
            # try sending it straight to the floor (kept only if the
            # Lagrangian does not degrade)
            eff_cap_m = np.exp(y_hi)
            snap = (state["P"] <= 1e-4 * eff_cap_m) & (Y > y_lo) & (
                state["grad"] / state["P"] < 0
            )
            if np.any(snap):
                Y_snap = np.where(snap, y_lo, Y)
                state_snap = obj(Y_snap, mu, W)
                slack = 16.0 * np.finfo(float).eps * max(1.0, abs(state["lagrangian"]))
                if state_snap["lagrangian"] >= state["lagrangian"] - slack:
                    Y, state = Y_snap, state_snap
            blocked_hi = (Y >= y_hi - ACTIVE_TOL_MC) & (state["grad"] > 0)
            blocked_lo = (Y <= y_lo + ACTIVE_TOL_MC) & (state["grad"] < 0)
            proj = np.where(blocked_hi | blocked_lo, 0.0, state["grad"])
            proj_norm = float(np.linalg.norm(proj, ord=np.inf))
            if proj_norm <= 10.0 * cfg.tol or countdown <= 0:
                countdown = 25
                cap_m, floor_m, qos_m, stationarity = _recover_mc(
                    obj, state, Y, y_lo, y_hi, mu, W
                )
                if stationarity <= cfg.tol and state["qos_viol"] <= cfg.tol:
                    inner_done = True
                    break
            countdown -= 1
            grad = state["grad"]
            direction = step_fac * grad
            f_cur = state["lagrangian"]
            moved = False
            t = min(2.0 * t_prev, 1.0)
            # ULP slack keeps progress possible when the true improvement
            # of a tiny step sits below the objective's float resolution
            slack = 16.0 * np.finfo(float).eps * max(1.0, abs(f_cur))
            while t >= 1e-20:
                Y_new = np.clip(Y + t * direction, y_lo, y_hi)
                delta = Y_new - Y
                if not np.any(delta):
                    break
                state_new = obj(Y_new, mu, W)
                gain = math.fsum((grad * delta).ravel())
                if state_new["lagrangian"] >= f_cur + cfg.armijo_c * gain - slack:
                    new_sign = np.sign(state_new["grad"])
                    same = (new_sign * grad_sign) > 0
                    flip = (new_sign * grad_sign) < 0
                    step_fac = np.where(same, np.minimum(step_fac * 1.5, 1e14), step_fac)
                    step_fac = np.where(flip, np.maximum(step_fac * 0.5, 1e-2), step_fac)
                    grad_sign = new_sign
                    Y, state = Y_new, state_new
                    t_prev = t
                    moved = True
                    break
                t *= cfg.beta
            inner_total += 1
            inner_budget -= 1
            if not moved:
                cap_m, floor_m, qos_m, stationarity = _recover_mc(
                    obj, state, Y, y_lo, y_hi, mu, W
                )
                inner_done = stationarity <= cfg.tol and state["qos_viol"] <= cfg.tol
                break

        if obj.has_qos and state["qos_viol"] > cfg.tol:
            if W >= cfg.penalty_max:
                raise InfeasibleProblemError(
                    f"QoS floor unreachable: violation {state['qos_viol']:.3g} "
                    f"remains at penalty weight {W:.3g}"
                )
            W = min(2.0 * W, cfg.penalty_max)
            state = obj(Y, mu, W)
            continue

        # dual subgradient step on the budget constraints.  used(mu) is
        # evaluated through the inner solve, whose stationarity tol puts
        # a noise floor ~10*tol on it, so complementarity is accepted at
        # that scale; the exit trim below then enforces the hard
        # slack >= -budget_tol guarantee exactly.
        viol = state["used"] - model.p_budget
        scale = np.maximum(1.0, model.p_budget)
        comp_tol = max(cfg.budget_tol, 100.0 * cfg.tol) * scale
        exhausted = np.isfinite(mu_hi) & (mu_hi - mu_lo <= 1e-10 * np.maximum(1.0, mu_hi))
        satisfied = (viol <= comp_tol) & ((viol >= -comp_tol) | (mu <= 1e-15))
        satisfied |= exhausted & (viol <= comp_tol)
        if inner_done and bool(np.all(satisfied)):
            converged = True
            break
        sign = np.sign(np.where(np.abs(viol) <= cfg.budget_tol, 0.0, viol))
        flipped = (sign * prev_sign) < 0
        kappa = np.where(flipped, 0.5 * kappa, kappa)
        # grow kappa only while the violation stagnates on one side;
        # unconditional growth catapults mu into a limit cycle
        stagnant = (sign * prev_sign) > 0
        stagnant &= np.abs(viol) > 0.5 * np.abs(prev_viol)
        kappa = np.where(stagnant, np.minimum(2.0 * kappa, 1e3), kappa)
        prev_sign = sign
        prev_viol = viol
        # used(mu) is monotone nonincreasing, so past violations bracket
        # the optimal dual; keep the subgradient step inside the bracket
        # (bisect when it jumps out) to rule out limit cycles across the
        # flat segments that box caps create
        mu_lo = np.where(viol > cfg.budget_tol, np.maximum(mu_lo, mu), mu_lo)
        mu_hi = np.where(viol < -cfg.budget_tol, np.minimum(mu_hi, mu), mu_hi)
        jump = np.clip(kappa * viol, -(1.0 + mu), 1.0 + mu)
        mu_new = np.maximum(0.0, mu + jump)
        bracketed = np.isfinite(mu_hi)
        outside = (mu_new <= mu_lo) | (mu_new >= mu_hi)
        mu = np.where(bracketed & outside, 0.5 * (mu_lo + mu_hi), mu_new)
        state = obj(Y, mu, W)

    # the converged flag certifies the solved point; the feasibility trim
    # below may nudge powers by up to ~comp_tol relative, and the KKT
    # residuals are re-measured honestly at the returned (trimmed) point
    converged = converged and stationarity <= cfg.tol and state["qos_viol"] <= cfg.tol

    # guarantee budget feasibility at exit by scaling violating links down
    over = state["used"] > model.p_budget
    if np.any(over):
        shift = np.where(over, np.log(state["used"] / model.p_budget), 0.0)
        Y = np.clip(Y - shift[:, None], y_lo, y_hi)
        state = obj(Y, mu, W)
        cap_m, floor_m, qos_m, stationarity = _recover_mc(obj, state, Y, y_lo, y_hi, mu, W)

    used = state["used"]
    comp_budget = float(np.max(np.abs(mu * (model.p_budget - used)), initial=0.0))
    comp_box = float(
        max(
            np.max(np.abs(cap_m * (y_hi - Y)), initial=0.0),
            np.max(np.abs(floor_m * (Y - y_lo)), initial=0.0),
        )
    )
    primal = float(np.max(np.maximum(used - model.p_budget, 0.0), initial=0.0))
    primal = max(primal, state["qos_viol"])
    kkt = KktResiduals(
        stationarity_inf_norm=stationarity,
        primal_violation=primal,
        comp_slack_max=max(comp_budget, comp_box),
    )
    rec.record(inner_total, state["P"], stationarity, force=True)
    traj, traj_iters, traj_resid = rec.dump()
    return McSolution(
        powers=state["P"],
        y=Y,
        budget_duals=mu,
        cap_multipliers=cap_m,
        floor_multipliers=floor_m,
        qos_multipliers=qos_m,
        kkt=kkt,
        objective=state["objective"],
        inner_iterations=inner_total,
        outer_iterations=outer,
        converged=converged,
        objective_history=np.asarray(history) if history else None,
        trajectory=traj,
        trajectory_iters=traj_iters,
        trajectory_residuals=traj_resid,
    )
