import numpy as np
import pytest

from powerctl import (
    CarrierUtilitySplit,
    FeasibilityStatus,
    InfeasibleProblemError,
    LogUtility,
    McConfig,
    ModelError,
    MultiCarrierModel,
    NetworkModel,
    RateUtility,
    UtilitySpec,
    budget_check,
    feasibility_mc,
    sinr,
    sinr_mc,
    solve_g2off,
    solve_mc,
)
from conftest import two_link_symmetric

RATE = CarrierUtilitySplit(objective=RateUtility())
MC_CFG = McConfig(allow_nonconcave=True)


def waterfill_oracle(effective_noise, budget, caps):
    """Closed-form waterfilling by bisection on the water level."""
    e = np.asarray(effective_noise, dtype=float)
    caps = np.asarray(caps, dtype=float)
    lo, hi = 0.0, float(np.max(e) + budget + 1.0)
    for _ in range(200):
        w = 0.5 * (lo + hi)
        if np.clip(w - e, 0.0, caps).sum() > budget:
            hi = w
        else:
            lo = w
    return np.clip(0.5 * (lo + hi) - e, 0.0, caps)


def single_link_mc(h, noise, budget, caps=None):
    F = len(noise)
    return MultiCarrierModel(
        gains=np.asarray(h, dtype=float).reshape(1, 1, F),
        noise=np.asarray(noise, dtype=float).reshape(1, F),
        p_cap=None if caps is None else np.asarray(caps, dtype=float).reshape(1, F),
        p_budget=budget,
    )


def two_link_mc(carriers=2, budget=1.0):
    base = two_link_symmetric()
    gains = np.repeat(base.gain[:, :, None], carriers, axis=2)
    noise = np.full((2, carriers), 0.1)
    return MultiCarrierModel(gains=gains, noise=noise, p_budget=budget)


def test_sinr_mc_single_carrier_is_bitwise_sinr():
    base = two_link_symmetric()
    mc = MultiCarrierModel(gains=base.gain[:, :, None], noise=np.full((2, 1), 0.1),
                           p_budget=1.0)
    p = np.array([0.3, 0.8])
    np.testing.assert_array_equal(sinr_mc(mc, p[:, None])[:, 0], sinr(base, p))


def test_sinr_mc_zero_power_column():
    mc = two_link_mc()
    P = np.array([[0.0, 0.5], [0.0, 0.7]])
    g = sinr_mc(mc, P)
    assert np.all(g[:, 0] == 0.0)
    assert np.all(g[:, 1] > 0.0)


def test_sinr_mc_matches_per_carrier_oracle(rng):
    n, F = 2, 2
    gains = rng.uniform(0.05, 0.4, size=(n, n, F))
    for f in range(F):
        np.fill_diagonal(gains[:, :, f], rng.uniform(0.8, 1.5, size=n))
    noise = rng.uniform(0.05, 0.2, size=(n, F))
    mc = MultiCarrierModel(gains=gains, noise=noise, p_budget=2.0)
    P = rng.uniform(0.0, 1.0, size=(n, F))
    got = sinr_mc(mc, P)
    for f in range(F):
        slice_model = NetworkModel(gain=gains[:, :, f], noise=noise[:, f])
        np.testing.assert_allclose(got[:, f], sinr(slice_model, P[:, f]), rtol=1e-14)


def test_feasibility_mc_identical_carriers_budget_flag():
    mc = two_link_mc(carriers=2, budget=1.0)
    targets = np.ones((2, 2))
    result = feasibility_mc(mc, targets)
    assert all(v.feasible for v in result.verdicts)
    for v in result.verdicts:
        np.testing.assert_allclose(v.p_star, [0.2, 0.2], atol=1e-9)
    assert result.budget_violations == []
    tight = two_link_mc(carriers=2, budget=0.3)  # 0.4 needed
    assert feasibility_mc(tight, targets).budget_violations == [0, 1]


def test_feasibility_mc_decoupled_always_spectral():
    gains = np.zeros((2, 2, 2))
    gains[0, 0] = gains[1, 1] = 1.0
    mc = MultiCarrierModel(gains=gains, noise=np.full((2, 2), 0.1), p_budget=10.0)
    result = feasibility_mc(mc, np.full((2, 2), 5.0))
    assert all(v.rho == 0.0 for v in result.verdicts)


def test_feasibility_mc_one_bad_carrier_isolated():
    mc = two_link_mc(carriers=2, budget=10.0)
    targets = np.column_stack([np.ones(2), np.full(2, 2.5)])
    result = feasibility_mc(mc, targets)
    assert result.verdicts[0].feasible
    assert result.verdicts[1].status is FeasibilityStatus.INFEASIBLE_SPECTRAL


def test_budget_check_zero_power():
    mc = two_link_mc(budget=1.5)
    rep = budget_check(mc, np.zeros((2, 2)))
    np.testing.assert_array_equal(rep.slack, rep.budget)


def test_budget_check_single_carrier_scalar_reduction():
    base = two_link_symmetric()
    mc = MultiCarrierModel(gains=base.gain[:, :, None], noise=np.full((2, 1), 0.1),
                           p_budget=np.array([0.7, 0.9]))
    rep = budget_check(mc, np.array([[0.2], [0.3]]))
    np.testing.assert_allclose(rep.used, [0.2, 0.3])
    np.testing.assert_allclose(rep.slack, [0.5, 0.6])


def test_waterfilling_two_carriers():
    mc = single_link_mc([1.0, 1.0], [0.1, 0.4], budget=1.0)
    sol = solve_mc(mc, RATE, MC_CFG)
    assert sol.converged
    np.testing.assert_allclose(sol.powers, [[0.65, 0.35]], atol=1e-5)
    assert sol.budget_duals[0] == pytest.approx(1.0 / 0.75, rel=1e-4)


def test_waterfilling_equal_noise_equal_split():
    mc = single_link_mc([1.0] * 4, [0.2] * 4, budget=1.0)
    sol = solve_mc(mc, RATE, MC_CFG)
    assert sol.converged
    np.testing.assert_allclose(sol.powers, np.full((1, 4), 0.25), atol=1e-6)


def test_waterfilling_cap_binding():
    mc = single_link_mc([1.0, 1.0], [0.1, 0.4], budget=1.0, caps=[0.3, np.inf])
    sol = solve_mc(mc, RATE, MC_CFG)
    assert sol.converged
    np.testing.assert_allclose(sol.powers, [[0.3, 0.7]], atol=1e-5)


def test_waterfilling_random_profiles(rng):
    for _ in range(10):
        F = int(rng.integers(1, 9))
        h = rng.uniform(0.5, 2.0, F)
        noise = rng.uniform(0.02, 2.0, F)
        budget = float(rng.uniform(0.3, 3.0))
        caps = np.where(rng.random(F) < 0.3, rng.uniform(0.1, 1.0, F), np.inf)
        mc = single_link_mc(h, noise, budget, caps)
        sol = solve_mc(mc, RATE, MC_CFG)
        expected = waterfill_oracle(noise / h, budget, caps)
        assert sol.converged
        np.testing.assert_allclose(sol.powers[0], expected, atol=1e-5)
        assert np.sum(sol.powers) <= budget + 1e-9


def test_budget_feasible_at_exit(rng):
    for _ in range(5):
        F = int(rng.integers(2, 6))
        mc = single_link_mc(rng.uniform(0.5, 2.0, F), rng.uniform(0.05, 1.0, F),
                            budget=float(rng.uniform(0.5, 2.0)))
        sol = solve_mc(mc, RATE, MC_CFG)
        rep = budget_check(mc, sol.powers)
        assert np.all(rep.slack >= -1e-9)


def test_carrier_permutation_equivariance():
    rng = np.random.default_rng(17)
    n, F = 2, 4
    gains = rng.uniform(0.05, 0.3, size=(n, n, F))
    for f in range(F):
        np.fill_diagonal(gains[:, :, f], rng.uniform(0.8, 1.5, size=n))
    noise = rng.uniform(0.05, 0.5, size=(n, F))
    caps = rng.uniform(0.3, 1.0, size=(n, F))
    perm = np.array([2, 0, 3, 1])
    mc1 = MultiCarrierModel(gains=gains, noise=noise, p_cap=caps, p_budget=1.0)
    mc2 = MultiCarrierModel(gains=gains[:, :, perm], noise=noise[:, perm],
                            p_cap=caps[:, perm], p_budget=1.0)
    split = CarrierUtilitySplit(objective=LogUtility())
    sol1 = solve_mc(mc1, split, McConfig())
    sol2 = solve_mc(mc2, split, McConfig())
    np.testing.assert_array_equal(sol2.powers, sol1.powers[:, perm])
    np.testing.assert_array_equal(np.sort(sol2.powers, axis=1),
                                  np.sort(sol1.powers, axis=1))


def test_f1_reduction_matches_g2off():
    base = two_link_symmetric()
    mc = MultiCarrierModel(gains=base.gain[:, :, None], noise=np.full((2, 1), 0.1),
                           p_cap=np.full((2, 1), 1.0), p_budget=np.array([1.0, 1.0]))
    split = CarrierUtilitySplit(objective=LogUtility())
    sol = solve_mc(mc, split, McConfig())
    ref = solve_g2off(base, UtilitySpec(LogUtility()))
    assert sol.converged
    np.testing.assert_allclose(sol.powers[:, 0], ref.powers, rtol=1e-6)


def test_qos_floor_pushes_allocation():
    # without the floor both links ride their caps; link 1's rate floor
    # forces link 2 to back off and the floor binds with a positive dual
    gains = np.array([[1.0, 0.6], [0.6, 1.0]])[:, :, None]
    noise = np.full((2, 1), 0.1)
    split = CarrierUtilitySplit(objective=LogUtility(), qos=RateUtility())
    free_model = MultiCarrierModel(gains=gains, noise=noise, p_budget=1.0)
    free = solve_mc(free_model, CarrierUtilitySplit(objective=LogUtility()), McConfig())
    np.testing.assert_allclose(free.powers, np.ones((2, 1)), rtol=1e-6)
    floor = 1.2  # needs gamma_1 >= 2.32, unreachable with both links at cap
    floored = MultiCarrierModel(gains=gains, noise=noise, p_budget=1.0,
                                u_min=np.array([floor, 0.0]))
    sol = solve_mc(floored, split, McConfig())
    rates = np.log1p(sinr_mc(floored, sol.powers)).sum(axis=1)
    assert rates[0] >= floor - 1e-6
    assert sol.powers[1, 0] < 0.6  # link 2 pushed off its cap
    assert sol.qos_multipliers[0] > 0


def test_qos_per_carrier_mode():
    # per-carrier floors: each carrier of the single link must reach its
    # own minimum rate, forcing power onto the noisy carrier
    mc = MultiCarrierModel(
        gains=np.ones((1, 1, 2)), noise=np.array([[0.1, 2.0]]), p_budget=1.0,
        u_min=np.array([[0.0, 0.2]]),
    )
    split = CarrierUtilitySplit(objective=RateUtility(), qos=RateUtility())
    cfg = McConfig(allow_nonconcave=True, qos_per_carrier=True)
    sol = solve_mc(mc, split, cfg)
    rates = np.log1p(sinr_mc(mc, sol.powers))
    assert rates[0, 1] >= 0.2 - 1e-6
    assert sol.qos_multipliers.shape == (1, 2)
    assert sol.qos_multipliers[0, 1] > 0


def test_qos_floor_infeasible_diagnostic():
    mc = MultiCarrierModel(
        gains=np.ones((1, 1, 2)), noise=np.array([[0.1, 0.4]]), p_budget=1.0,
        u_min=np.array([100.0]),  # unreachable aggregate rate
    )
    split = CarrierUtilitySplit(objective=RateUtility(), qos=RateUtility())
    with pytest.raises(InfeasibleProblemError):
        solve_mc(mc, split, MC_CFG)


def test_v_max_saturation_diverts_power():
    # carrier 1 is much better, but its objective utility saturates, so
    # the solver stops rewarding it and the split evens out
    free_model = single_link_mc([1.0, 1.0], [0.1, 0.4], budget=1.0)
    free = solve_mc(free_model, RATE, MC_CFG)
    capped_model = MultiCarrierModel(
        gains=free_model.gains, noise=free_model.noise, p_budget=1.0,
        v_max=np.array([0.5]),
    )
    sol = solve_mc(capped_model, RATE, MC_CFG)
    assert sol.converged
    assert sol.powers[0, 1] > free.powers[0, 1]


def test_mc_model_validation():
    with pytest.raises(ModelError):
        MultiCarrierModel(gains=np.ones((2, 2)), noise=np.ones((2, 2)), p_budget=1.0)
    with pytest.raises(ModelError):
        MultiCarrierModel(gains=np.ones((1, 1, 2)), noise=np.ones((1, 2)),
                          p_budget=-1.0)
    with pytest.raises(ModelError):
        mc = single_link_mc([1.0, 1.0], [0.1, 0.1], budget=1.0)
        sinr_mc(mc, np.ones((2, 2)))  # wrong power-matrix shape
