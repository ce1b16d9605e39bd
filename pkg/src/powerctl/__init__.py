"""Utility-based power control workbench for interference-limited networks.

Library layers:

* :mod:`powerctl.model` / :mod:`powerctl.utility` -- network + utility model,
  SINR algebra, concavity certificates.
* :mod:`powerctl.feasibility` -- Perron-root feasibility of SINR targets and
  minimal power vectors.
* :mod:`powerctl.fixedpoint` -- standard-interference-function iterations,
  synchronous and totally asynchronous, plus axiom certification.
* :mod:`powerctl.logopt` -- log-domain utility maximization: centralized
  G2off and distributed asynchronous G2Too, with KKT certification.
* :mod:`powerctl.multicarrier` -- multi-carrier extension with per-link
  power budgets.
* :mod:`powerctl.scenario` / :mod:`powerctl.cli` -- scenario files, brute
  force oracles, reports, figures, and the command line front end.
"""

from .errors import (
    ConvergenceError,
    DivergenceError,
    InfeasibleProblemError,
    InvalidUtilityError,
    ModelError,
    NonConcaveError,
    OscillationError,
    PowerControlError,
    ScenarioError,
    UtilityDomainError,
)
from .feasibility import (
    FeasibilityStatus,
    FeasibilityVerdict,
    NormalizedGainMatrix,
    build_normalized,
    check_feasibility,
    max_uniform_scaling,
    spectral_radius,
)
from .fixedpoint import (
    AsyncSchedule,
    CustomMap,
    FixedPointResult,
    InterferenceMap,
    PowerCappedMap,
    PropertyReport,
    TargetSinrMap,
    Witness,
    certify_standard,
    iterate_async,
    iterate_sync,
)
from .logopt import (
    G2offConfig,
    G2TooConfig,
    KktResiduals,
    LogSolution,
    LogVars,
    Multipliers,
    from_log,
    kkt_residual,
    log_sinr,
    objective_and_gradient,
    recover_multipliers,
    solve_g2off,
    solve_g2too,
    to_log,
)
from .gridsearch import GridSearchResult, grid_search
from .model import NetworkModel, capacity, interference, sinr, total_utility
from .scenario import Scenario, canonical_json, content_digest, generate as generate_scenario, load as load_scenario, parse as parse_scenario, validate as validate_scenario
from .multicarrier import (
    BudgetReport,
    CarrierUtilitySplit,
    McConfig,
    McFeasibility,
    McSolution,
    MultiCarrierModel,
    budget_check,
    feasibility_mc,
    sinr_mc,
    solve_mc,
)
from .utility import (
    AlphaFairUtility,
    ConcavityCertificate,
    LogUtility,
    RateUtility,
    TabulatedUtility,
    Utility,
    UtilitySpec,
    alpha_fair,
    certify_log_concavity,
    relative_risk_aversion,
)

__version__ = "0.1.0"
