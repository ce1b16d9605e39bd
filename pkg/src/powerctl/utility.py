"""Per-link utility families u_i(gamma) with first and second derivatives.

All evaluators accept scalars or numpy arrays and broadcast elementwise.
The relative-risk-aversion coefficient -gamma u''/u' is the certificate
used by the solvers: values >= 1 everywhere imply u(e^z) is concave in
z = ln(gamma), which is what makes the log-domain problem convex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidUtilityError


class Utility:
    """One link's utility of linear SINR."""

    label = "utility"
    requires_positive_sinr = False

    def value(self, gamma):
        raise NotImplementedError

    def deriv(self, gamma):
        raise NotImplementedError

    def second(self, gamma):
        raise NotImplementedError

    def deriv_times_gamma(self, gamma):
        """u'(gamma) * gamma, the marginal-utility weight the solvers price.

        Families override this where the product has a removable
        singularity at gamma -> 0 (e.g. log: 1/gamma * gamma = 1).
        """
        return self.deriv(gamma) * np.asarray(gamma, dtype=float)


class LogUtility(Utility):
    """u(gamma) = ln(gamma), the proportional-fair utility."""

    label = "log"
    requires_positive_sinr = True

    def value(self, gamma):
        return np.log(gamma)

    def deriv(self, gamma):
        return 1.0 / np.asarray(gamma, dtype=float)

    def second(self, gamma):
        return -1.0 / np.asarray(gamma, dtype=float) ** 2

    def deriv_times_gamma(self, gamma):
        return np.ones_like(np.asarray(gamma, dtype=float))


class AlphaFairUtility(Utility):
    """u(gamma) = gamma^(1-alpha) / (1-alpha) for alpha >= 0, alpha != 1.

    alpha = 1 aliases LogUtility (the standard limit).  Use the
    module-level :func:`alpha_fair` factory to get that aliasing.
    """

    requires_positive_sinr = True

    def __init__(self, alpha: float):
        if alpha < 0:
            raise InvalidUtilityError(f"alpha-fair requires alpha >= 0, got {alpha}")
        if alpha == 1.0:
            raise InvalidUtilityError("alpha = 1 is the log family; use alpha_fair()")
        self.alpha = float(alpha)
        self.label = f"alpha_fair({alpha:g})"

    def value(self, gamma):
        a = self.alpha
        return np.asarray(gamma, dtype=float) ** (1.0 - a) / (1.0 - a)

    def deriv(self, gamma):
        return np.asarray(gamma, dtype=float) ** (-self.alpha)

    def second(self, gamma):
        a = self.alpha
        return -a * np.asarray(gamma, dtype=float) ** (-a - 1.0)

    def deriv_times_gamma(self, gamma):
        return np.asarray(gamma, dtype=float) ** (1.0 - self.alpha)


def alpha_fair(alpha: float) -> Utility:
    """Alpha-fair family; alpha = 1 returns the log utility."""
    if alpha == 1.0:
        return LogUtility()
    return AlphaFairUtility(alpha)


class RateUtility(Utility):
    """u(gamma) = ln(1 + gamma), proportional to Shannon rate.

    Note: its relative risk aversion is gamma/(1+gamma) < 1, so it does
    NOT pass the log-domain concavity certificate.
    """

    label = "rate"

    def value(self, gamma):
        return np.log1p(np.asarray(gamma, dtype=float))

    def deriv(self, gamma):
        return 1.0 / (1.0 + np.asarray(gamma, dtype=float))

    def second(self, gamma):
        return -1.0 / (1.0 + np.asarray(gamma, dtype=float)) ** 2

    def deriv_times_gamma(self, gamma):
        g = np.asarray(gamma, dtype=float)
        return g / (1.0 + g)


class TabulatedUtility(Utility):
    """Utility given by explicit value/derivative callables."""

    label = "tabulated"

    def __init__(
        self,
        value: Callable,
        deriv: Callable,
        second: Callable,
        requires_positive_sinr: bool = True,
        label: str = "tabulated",
    ):
        self._value = value
        self._deriv = deriv
        self._second = second
        self.requires_positive_sinr = requires_positive_sinr
        self.label = label

    def value(self, gamma):
        return self._value(gamma)

    def deriv(self, gamma):
        return self._deriv(gamma)

    def second(self, gamma):
        return self._second(gamma)


@dataclass
class UtilitySpec:
    """Per-link utility assignment.

    Holds either one utility applied to every link or an explicit
    per-link list; :meth:`for_links` resolves to a list of length n.
    """

    utilities: Utility | Sequence[Utility]

    @classmethod
    def uniform(cls, utility: Utility) -> "UtilitySpec":
        return cls(utilities=utility)

    def for_links(self, n: int) -> list[Utility]:
        if isinstance(self.utilities, Utility):
            return [self.utilities] * n
        us = list(self.utilities)
        if len(us) != n:
            raise InvalidUtilityError(f"utility list has length {len(us)}, expected {n}")
        return us

    def values(self, gamma: np.ndarray) -> np.ndarray:
        """Per-link u_i(gamma_i); gamma may be (n,) or batched (m, n)."""
        gamma = np.asarray(gamma, dtype=float)
        us = self.for_links(gamma.shape[-1])
        cols = [np.asarray(us[i].value(gamma[..., i]), dtype=float) for i in range(len(us))]
        return np.stack(cols, axis=-1)

    def derivs(self, gamma: np.ndarray) -> np.ndarray:
        gamma = np.asarray(gamma, dtype=float)
        us = self.for_links(gamma.shape[-1])
        cols = [np.asarray(us[i].deriv(gamma[..., i]), dtype=float) for i in range(len(us))]
        return np.stack(cols, axis=-1)


def relative_risk_aversion(u: Utility, gamma: float) -> float:
    """-gamma u''(gamma) / u'(gamma), the log-domain concavity measure.

    Requires gamma > 0 and u'(gamma) > 0; a value >= 1 at every tested
    gamma certifies that u(e^z) is concave in z.
    """
    if gamma <= 0:
        raise InvalidUtilityError(f"relative risk aversion needs gamma > 0, got {gamma}")
    d1 = float(u.deriv(gamma))
    if d1 <= 0:
        raise InvalidUtilityError(f"u'({gamma}) = {d1} <= 0; utility must be increasing")
    return -gamma * float(u.second(gamma)) / d1


@dataclass
class ConcavityCertificate:
    """Outcome of the sampled RRA >= 1 check over a gamma range."""

    passed: bool
    min_rra: float
    argmin_gamma: float
    failure: str | None = None


def certify_log_concavity(
    spec: UtilitySpec,
    num_links: int,
    gamma_lo: float = 1e-4,
    gamma_hi: float = 1e4,
    points: int = 161,
    slack: float = 1e-9,
) -> ConcavityCertificate:
    """Check RRA >= 1 on a log-spaced grid for every link's utility."""
    grid = np.geomspace(gamma_lo, gamma_hi, points)
    min_rra = np.inf
    argmin = grid[0]
    for i, u in enumerate(spec.for_links(num_links)):
        for g in grid:
            try:
                rra = relative_risk_aversion(u, float(g))
            except InvalidUtilityError as exc:
                return ConcavityCertificate(False, -np.inf, float(g), f"link {i}: {exc}")
            if rra < min_rra:
                min_rra, argmin = rra, float(g)
    passed = min_rra >= 1.0 - slack
    failure = None if passed else f"min RRA {min_rra:.6g} at gamma {argmin:.6g}"
    return ConcavityCertificate(passed, float(min_rra), argmin, failure)
