"""Brute-force utility maximization over a log-spaced power grid.

Independent cross-check for the gradient solvers on tiny networks
(n <= 3): evaluate the total utility on a full grid, then shrink the
box around the incumbent and regrid.  Every evaluated point is feasible,
so the result is always a lower bound on the true optimum; with enough
refinement rounds it pins the optimum of log-concave objectives to
grid resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .model import NetworkModel
from .utility import UtilitySpec

MAX_LINKS = 3


@dataclass
class GridSearchResult:
    p_best: np.ndarray
    objective: float
    evaluations: int
    resolution: int
    refine_rounds: int


def _batch_objective(model: NetworkModel, spec: UtilitySpec, P: np.ndarray) -> np.ndarray:
    """Total utility for every row of P; -inf where SINR bounds fail."""
    Q = P @ model.gain - P * model.direct_gain + model.noise
    gamma = model.direct_gain * P / Q
    values = spec.values(gamma)
    total = values.sum(axis=1)
    if np.any(model.gamma_min > 0) or np.any(np.isfinite(model.gamma_max)):
        ok = np.all((gamma >= model.gamma_min) & (gamma <= model.gamma_max), axis=1)
        total = np.where(ok, total, -np.inf)
    return total


def grid_search(
    model: NetworkModel,
    spec: UtilitySpec,
    resolution: int = 41,
    refine_rounds: int = 4,
) -> GridSearchResult:
    """Log-spaced grid search with shrink-and-regrid refinement.

    The initial grid spans [max(p_min, 1e-3 p_max), p_max] per axis;
    each refinement round shrinks the box width by a factor 0.2 around
    the incumbent (clipped to the original box) and regrids.  Refuses
    networks with more than three links.
    """
    n = model.num_links
    if n > MAX_LINKS:
        raise ModelError(f"grid search supports at most {MAX_LINKS} links, got {n}")
    if resolution < 2:
        raise ModelError("resolution must be at least 2")
    if not np.all(np.isfinite(model.p_max)):
        raise ModelError("grid search requires finite p_max")

    lo = np.log(np.maximum(model.p_min, 1e-3 * model.p_max))
    hi = np.log(model.p_max)
    best_p = None
    best_val = -np.inf
    evaluations = 0
    cur_lo, cur_hi = lo.copy(), hi.copy()
    for _ in range(refine_rounds + 1):
        axes = [np.linspace(cur_lo[i], cur_hi[i], resolution) for i in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        Y = np.stack([m.ravel() for m in mesh], axis=1)
        P = np.exp(Y)
        vals = _batch_objective(model, spec, P)
        evaluations += P.shape[0]
        idx = int(np.argmax(vals))
        if vals[idx] > best_val:
            best_val = float(vals[idx])
            best_p = P[idx].copy()
        # shrink around the incumbent, staying inside the original box
        center = np.log(best_p) if best_p is not None else 0.5 * (cur_lo + cur_hi)
        half = 0.2 * 0.5 * (cur_hi - cur_lo)
        cur_lo = np.maximum(center - half, lo)
        cur_hi = np.minimum(center + half, hi)
    if best_p is None or not np.isfinite(best_val):
        raise ModelError("grid search found no feasible point (SINR bounds exclude the grid)")
    return GridSearchResult(
        p_best=best_p,
        objective=best_val,
        evaluations=evaluations,
        resolution=resolution,
        refine_rounds=refine_rounds,
    )
