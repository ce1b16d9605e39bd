"""Single-carrier network model and SINR algebra.

Gain-matrix orientation, fixed once for the whole package and the file
format: ``gain[k, i]`` is the linear power gain from transmitter k to
receiver i.  The interference seen by receiver i is therefore a column
sum, q_i = sum_{k != i} gain[k, i] * p[k] + noise[i].

Powers, noise and interference are in watts; SINR is linear (not dB).
All operations are pure functions of read-only arrays and are safe to
call concurrently on a shared model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError, UtilityDomainError
from .utility import UtilitySpec


def _as_vector(x, n: int, name: str) -> np.ndarray:
    """Broadcast a scalar to length n, or validate a length-n vector."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ModelError(f"{name} must be a scalar or length-{n} vector, got shape {arr.shape}")
    return arr


@dataclass
class NetworkModel:
    """A set of transmitter-receiver link pairs sharing one carrier.

    Parameters
    ----------
    gain : (n, n) array
        Linear power gains, ``gain[k, i]`` from Tx k to Rx i.  Diagonal
        entries (direct gains) must be positive, off-diagonal entries
        nonnegative.
    noise : scalar or (n,) array
        Receiver noise power in watts, strictly positive.
    p_min, p_max : scalar or (n,) array
        Per-link transmit power box, 0 <= p_min <= p_max.
    gamma_min, gamma_max : scalar, (n,) array, or None
        Optional linear SINR bounds.  None means unconstrained
        (stored as 0 and +inf respectively).
    """

    gain: np.ndarray
    noise: np.ndarray
    p_min: np.ndarray = 0.0
    p_max: np.ndarray = np.inf
    gamma_min: np.ndarray | None = None
    gamma_max: np.ndarray | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        self.gain = np.asarray(self.gain, dtype=float)
        if self.gain.ndim != 2 or self.gain.shape[0] != self.gain.shape[1]:
            raise ModelError(f"gain must be a square matrix, got shape {self.gain.shape}")
        n = self.gain.shape[0]
        if not np.all(np.isfinite(self.gain)) or np.any(self.gain < 0):
            raise ModelError("gains must be finite and nonnegative")
        if np.any(np.diag(self.gain) <= 0):
            raise ModelError("direct gains gain[i, i] must be positive")
        self.noise = _as_vector(self.noise, n, "noise")
        if np.any(self.noise <= 0):
            raise ModelError("noise powers must be positive")
        self.p_min = _as_vector(self.p_min, n, "p_min")
        self.p_max = _as_vector(self.p_max, n, "p_max")
        if np.any(self.p_min < 0):
            raise ModelError("p_min must be nonnegative")
        if np.any(self.p_min > self.p_max):
            raise ModelError("p_min must not exceed p_max")
        self.gamma_min = _as_vector(0.0 if self.gamma_min is None else self.gamma_min, n, "gamma_min")
        gm = np.inf if self.gamma_max is None else self.gamma_max
        self.gamma_max = _as_vector(gm, n, "gamma_max")
        if np.any(self.gamma_min < 0):
            raise ModelError("gamma_min must be nonnegative")
        if np.any(self.gamma_min > self.gamma_max):
            raise ModelError("gamma_min must not exceed gamma_max")

    @property
    def num_links(self) -> int:
        return self.gain.shape[0]

    @property
    def direct_gain(self) -> np.ndarray:
        """Diagonal of the gain matrix (h[i][i])."""
        return np.diag(self.gain)

    def check_power(self, p) -> np.ndarray:
        """Validate a power vector for this model and return it as an array."""
        arr = np.asarray(p, dtype=float)
        if arr.shape != (self.num_links,):
            raise ModelError(
                f"power vector has shape {arr.shape}, expected ({self.num_links},)"
            )
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ModelError("powers must be finite and nonnegative")
        return arr


def interference(model: NetworkModel, p) -> np.ndarray:
    """Interference-plus-noise q_i = sum_{k != i} gain[k, i] p[k] + noise[i]."""
    p = model.check_power(p)
    return p @ model.gain - model.direct_gain * p + model.noise


def sinr(model: NetworkModel, p) -> np.ndarray:
    """Linear SINR gamma_i = gain[i, i] p[i] / q_i(p).

    A zero-power link has SINR exactly 0 (never NaN); q > 0 is
    guaranteed by positive noise.
    """
    p = model.check_power(p)
    return model.direct_gain * p / interference(model, p)


def total_utility(model: NetworkModel, p, spec: UtilitySpec) -> float:
    """Sum of per-link utilities at the SINRs produced by ``p``.

    Raises UtilityDomainError naming the first offending link if some
    gamma_i falls outside the domain of u_i (e.g. 0 for the log family).
    """
    gamma = sinr(model, p)
    total = 0.0
    for i, u in enumerate(spec.for_links(model.num_links)):
        if gamma[i] <= 0 and u.requires_positive_sinr:
            raise UtilityDomainError(i, f"SINR {gamma[i]} outside the domain of {u.label}")
        total += float(u.value(gamma[i]))
    return total


def capacity(gamma) -> np.ndarray | float:
    """Shannon capacity log2(1 + gamma) in bit/s/Hz; gamma must be >= 0."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ModelError("capacity requires gamma >= 0")
    out = np.log2(1.0 + g)
    return float(out) if out.ndim == 0 else out
