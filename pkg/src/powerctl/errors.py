"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: invalid input (2), infeasible (3),
non-convergence (4), anything else (5).
"""


class PowerControlError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(PowerControlError):
    """Invalid model data: dimension mismatch or violated invariant."""


class UtilityDomainError(PowerControlError):
    """A utility was evaluated outside its domain (e.g. log of SINR 0)."""

    def __init__(self, link: int, message: str):
        super().__init__(f"link {link}: {message}")
        self.link = link


class InvalidUtilityError(PowerControlError):
    """Utility violates u' > 0 where it was evaluated."""


class NonConcaveError(PowerControlError):
    """Utility failed the log-domain concavity certificate."""


class ScenarioError(PowerControlError):
    """Scenario file failed validation; carries the itemized problems."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid scenario: " + "; ".join(self.problems))


class ConvergenceError(PowerControlError):
    """An iteration hit its budget; carries the best estimate found."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DivergenceError(PowerControlError):
    """Iterates grew without bound; carries the last finite iterate."""

    def __init__(self, message: str, last_iterate=None, iterations: int = 0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class OscillationError(PowerControlError):
    """Objective regressed for too many consecutive activations."""

    def __init__(self, message: str, last_iterate=None, iterations: int = 0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class InfeasibleProblemError(PowerControlError):
    """Constraints detected as unsatisfiable (e.g. QoS penalty exhaustion)."""
