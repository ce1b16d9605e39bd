import numpy as np
import pytest

from powerctl import (
    AlphaFairUtility,
    LogUtility,
    ModelError,
    NetworkModel,
    UtilitySpec,
    grid_search,
    solve_g2off,
    total_utility,
)
from conftest import random_model, two_link_symmetric

LOG = UtilitySpec(LogUtility())


def test_single_link_log_picks_cap():
    m = NetworkModel(gain=[[1.0]], noise=0.1, p_max=1.0)
    result = grid_search(m, LOG)
    assert result.p_best[0] == pytest.approx(1.0, rel=1e-12)


def test_matches_solver_two_link():
    m = two_link_symmetric()
    oracle = grid_search(m, LOG, resolution=41, refine_rounds=4)
    sol = solve_g2off(m, LOG)
    assert oracle.objective == pytest.approx(sol.objective, abs=1e-6)


def test_coarse_grid_is_lower_bound():
    m = two_link_symmetric()
    coarse = grid_search(m, LOG, resolution=2, refine_rounds=0)
    sol = solve_g2off(m, LOG)
    assert coarse.objective <= sol.objective + 1e-9
    # best corner of the 2-point grid; evaluated points are feasible
    assert coarse.objective == pytest.approx(
        total_utility(m, coarse.p_best, LOG), rel=1e-12
    )


def test_refinement_never_worsens(rng):
    m = random_model(rng, 3)
    spec = UtilitySpec(AlphaFairUtility(2.0))
    prev = -np.inf
    for rounds in range(4):
        obj = grid_search(m, spec, resolution=11, refine_rounds=rounds).objective
        assert obj >= prev - 1e-15
        prev = obj


def test_refuses_more_than_three_links(rng):
    m = random_model(rng, 4)
    with pytest.raises(ModelError):
        grid_search(m, LOG)


def test_respects_gamma_bounds():
    m = NetworkModel(gain=[[1.0]], noise=0.1, p_max=1.0, gamma_max=2.0)
    result = grid_search(m, LOG, resolution=81, refine_rounds=4)
    from powerctl import sinr

    assert sinr(m, result.p_best)[0] <= 2.0 * (1 + 1e-9)
