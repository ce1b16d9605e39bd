"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
they complete.  Every tolerance is pinned here; the brute-force oracles
(grid search, finite differences, dense eigensolver, closed-form
waterfilling, sync fixed point) are independent of the code paths they
check.
"""

import json
import time

import numpy as np
import pytest

from powerctl import (
    AlphaFairUtility,
    AsyncSchedule,
    CarrierUtilitySplit,
    CustomMap,
    G2TooConfig,
    LogUtility,
    McConfig,
    MultiCarrierModel,
    PowerCappedMap,
    RateUtility,
    TargetSinrMap,
    UtilitySpec,
    certify_standard,
    grid_search,
    iterate_async,
    iterate_sync,
    objective_and_gradient,
    sinr,
    sinr_mc,
    solve_g2off,
    solve_g2too,
    solve_mc,
)
from powerctl.cli import main
from conftest import random_feasible_target, random_model, two_link_symmetric

LOG = UtilitySpec(LogUtility())


class Timer:
    def __init__(self, limit_s):
        self.limit_s = limit_s

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False

    def check(self):
        assert self.elapsed < self.limit_s, (
            f"runtime {self.elapsed:.1f}s exceeded the {self.limit_s}s budget"
        )


def report(n, text, timer=None):
    suffix = f" [{timer.elapsed:.1f}s]" if timer else ""
    print(f"\n[PASS] criterion {n}: {text}{suffix}")


def test_criterion_1_feasibility_threshold(tmp_path):
    scenario = {
        "schema_version": 1,
        "name": "two-link-symmetric-unbounded",
        "links": {"gains": [[1.0, 0.5], [0.5, 1.0]]},
        "noise": 0.1,
        "limits": {"p_min": 0.0},
        "utility": {"family": "log"},
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario), encoding="utf-8")
    with Timer(1.0) as t:
        for gamma in (0.2, 0.5, 1.0, 1.5, 1.9, 1.99):
            out = tmp_path / f"f{gamma}"
            code = main(["check-feas", "--scenario", str(path), "--out", str(out),
                         "--gamma", str(gamma)])
            rep = json.loads((out / "report.json").read_text())
            assert code == 0 and rep["results"]["feasible"] is True
            assert rep["results"]["rho"] == pytest.approx(0.5 * gamma, abs=1e-9)
        for gamma in (2.0, 2.01, 2.5):
            out = tmp_path / f"i{gamma}"
            code = main(["check-feas", "--scenario", str(path), "--out", str(out),
                         "--gamma", str(gamma)])
            rep = json.loads((out / "report.json").read_text())
            assert code == 3 and rep["results"]["feasible"] is False
            assert rep["results"]["rho"] == pytest.approx(0.5 * gamma, abs=1e-9)
        out = tmp_path / "unity"
        main(["check-feas", "--scenario", str(path), "--out", str(out),
              "--gamma", "1.0"])
        rep = json.loads((out / "report.json").read_text())
        np.testing.assert_allclose(rep["results"]["p_star"], [0.2, 0.2], atol=1e-9)
    t.check()
    report(1, "rho = 0.5*gamma to 1e-9, verdict flips exactly at gamma = 2, "
              "p_star = (0.2, 0.2) at gamma = 1", t)


def test_criterion_2_standard_interference_suite():
    rng = np.random.default_rng(1234)
    with Timer(10.0) as t:
        for _ in range(20):
            n = int(rng.integers(2, 7))
            model = random_model(rng, n)
            target = rng.uniform(0.5, 2.0, size=n)
            maps = {
                "target": TargetSinrMap(model, target),
                "capped": PowerCappedMap(TargetSinrMap(model, target), model.p_max),
            }
            for name, imap in maps.items():
                for seed in range(10):
                    rep = certify_standard(imap, num_pairs=1000, seed=seed)
                    assert rep.passed, f"{name} map failed at seed {seed}"
        quad = CustomMap(lambda p: p ** 2 + 1.0, size=2)
        failures = [certify_standard(quad, num_pairs=1000, seed=s) for s in range(10)]
        assert all(not r.passed for r in failures)
        witness = failures[0].scalability[0]
        assert witness.lhs < witness.rhs
    t.check()
    report(2, "axioms hold for target/capped maps on 20 models x 10 seeds x "
              "1000 pairs; quadratic map yields explicit witnesses", t)


def test_criterion_3_monotone_convergence():
    rng = np.random.default_rng(99)
    with Timer(30.0) as t:
        for _ in range(20):
            n = int(rng.integers(2, 7))
            model = random_model(rng, n)
            target = random_feasible_target(rng, model)
            imap = TargetSinrMap(model, target)
            up = iterate_sync(imap, np.zeros(n), tol=1e-10, record_trajectory=True)
            assert up.converged
            assert np.all(np.diff(up.trajectory, axis=0) >= -1e-12)
            down = iterate_sync(imap, up.p_bar * 1.5, tol=1e-10,
                                record_trajectory=True)
            assert down.converged
            assert np.all(np.diff(down.trajectory, axis=0) <= 1e-12)
            assert np.linalg.norm(up.p_bar - down.p_bar, np.inf) <= 1e-7
            for seed in range(5):
                schedule = AsyncSchedule(
                    staleness_bound=int(rng.integers(0, 11)),
                    update_probability=float(rng.uniform(0.3, 1.0)),
                    seed=seed,
                )
                asy = iterate_async(imap, np.zeros(n), schedule, tol=1e-10,
                                    max_iter=500000)
                assert asy.converged
                assert np.linalg.norm(asy.p_bar - up.p_bar, np.inf) <= 1e-6
    t.check()
    report(3, "20 instances: monotone from 0 and from feasible starts, same "
              "fixed point to 1e-7; async (D <= 10, 5 seeds) within 1e-6", t)


def test_criterion_4_gradient_correctness():
    rng = np.random.default_rng(4)
    with Timer(10.0) as t:
        for _ in range(100):
            n = int(rng.integers(2, 6))
            model = random_model(rng, n)
            spec = UtilitySpec(
                LogUtility() if rng.random() < 0.5 else AlphaFairUtility(2.0)
            )
            y = np.log(rng.uniform(0.05, 1.0, size=n))
            _, grad = objective_and_gradient(model, spec, y)
            fd = np.zeros(n)
            for j in range(n):
                up, dn = y.copy(), y.copy()
                up[j] += 1e-6
                dn[j] -= 1e-6
                fd[j] = (objective_and_gradient(model, spec, up)[0]
                         - objective_and_gradient(model, spec, dn)[0]) / 2e-6
            np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-8)
    t.check()
    report(4, "analytic gradient matches central differences (1e-5 relative) "
              "on 100 random instances, n <= 5", t)


def test_criterion_5_solver_oracle_agreement():
    rng = np.random.default_rng(55)
    with Timer(300.0) as t:
        for k in range(25):
            n = int(rng.integers(2, 4))
            model = random_model(rng, n)
            spec = UtilitySpec(LogUtility() if k % 2 == 0 else AlphaFairUtility(2.0))
            sol = solve_g2off(model, spec)
            oracle = grid_search(model, spec, resolution=41, refine_rounds=4)
            assert sol.converged, f"instance {k} did not converge"
            assert abs(sol.objective - oracle.objective) <= 1e-5
            assert sol.kkt.stationarity_inf_norm <= 1e-8
            assert sol.kkt.primal_violation <= 1e-8
    t.check()
    report(5, "g2off matches the 41-point grid oracle within 1e-5 on 25 "
              "instances; KKT residuals <= 1e-8", t)


def _regression_instances():
    yield "two-link-log", two_link_symmetric(), LOG
    rng = np.random.default_rng(3)
    yield "three-link-log", random_model(rng, 3, coupling=0.5), LOG
    yield ("three-link-af2", random_model(rng, 3, coupling=0.7),
           UtilitySpec(AlphaFairUtility(2.0)))
    yield ("four-link-af2", random_model(rng, 4, coupling=0.5),
           UtilitySpec(AlphaFairUtility(2.0)))


def test_criterion_6_distributed_agreement():
    with Timer(120.0) as t:
        for name, model, spec in _regression_instances():
            ref = solve_g2off(model, spec)
            cfg = G2TooConfig(schedule=AsyncSchedule(
                staleness_bound=5, update_probability=0.7, seed=1))
            sol = solve_g2too(model, spec, cfg)
            assert sol.converged, name
            rel = np.max(np.abs(sol.powers - ref.powers)
                         / np.maximum(np.abs(ref.powers), 1e-300))
            assert rel <= 1e-4, f"{name}: relative power error {rel:.2e}"
            assert abs(sol.objective - ref.objective) <= 1e-6, name
        noisy_model = random_model(np.random.default_rng(5), 3, coupling=0.7)
        noisy_spec = UtilitySpec(AlphaFairUtility(2.0))
        ref = solve_g2off(noisy_model, noisy_spec)
        objs = []
        for seed in range(10):
            cfg = G2TooConfig(
                schedule=AsyncSchedule(staleness_bound=5, update_probability=0.7,
                                       seed=seed),
                noise_bound=1e-3,
                max_iter=15000,
            )
            objs.append(solve_g2too(noisy_model, noisy_spec, cfg).objective)
        assert abs(np.mean(objs) - ref.objective) <= 1e-2
    t.check()
    report(6, "g2too matches g2off within 1e-4 relative power on all "
              "regression instances; noise 1e-3 degrades the mean objective "
              "by <= 1e-2 over 10 seeds", t)


def test_criterion_7_waterfilling():
    rng = np.random.default_rng(7)
    split = CarrierUtilitySplit(objective=RateUtility())
    cfg = McConfig(allow_nonconcave=True)

    def closed_form(effective_noise, budget, caps):
        lo, hi = 0.0, float(np.max(effective_noise) + budget + 1.0)
        for _ in range(200):
            w = 0.5 * (lo + hi)
            if np.clip(w - effective_noise, 0.0, caps).sum() > budget:
                hi = w
            else:
                lo = w
        return np.clip(0.5 * (lo + hi) - effective_noise, 0.0, caps)

    with Timer(60.0) as t:
        cap_binding_seen = 0
        for _ in range(50):
            F = int(rng.integers(1, 9))
            h = rng.uniform(0.5, 2.0, F)
            noise = rng.uniform(0.02, 2.0, F)
            budget = float(rng.uniform(0.3, 3.0))
            caps = np.where(rng.random(F) < 0.35, rng.uniform(0.1, 1.0, F), np.inf)
            model = MultiCarrierModel(
                gains=h.reshape(1, 1, F), noise=noise.reshape(1, F),
                p_cap=caps.reshape(1, F), p_budget=budget,
            )
            sol = solve_mc(model, split, cfg)
            expected = closed_form(noise / h, budget, caps)
            if np.any(np.isclose(expected, caps)):
                cap_binding_seen += 1
            assert sol.converged
            assert np.linalg.norm(sol.powers[0] - expected, np.inf) <= 1e-5
            assert np.sum(sol.powers) <= budget + 1e-9
        assert cap_binding_seen > 0  # the sample includes cap-binding cases
    t.check()
    report(7, "solve_mc matches closed-form waterfilling within 1e-5 on 50 "
              f"random profiles (F <= 8, {cap_binding_seen} cap-binding)", t)


def test_criterion_8_reductions():
    with Timer(30.0) as t:
        base = two_link_symmetric()
        ref = solve_g2off(base, LOG)
        mc = MultiCarrierModel(
            gains=base.gain[:, :, None], noise=np.full((2, 1), 0.1),
            p_cap=np.full((2, 1), 1.0), p_budget=np.array([1.0, 1.0]),
        )
        sol = solve_mc(mc, CarrierUtilitySplit(objective=LogUtility()), McConfig())
        assert sol.converged
        np.testing.assert_allclose(sol.powers[:, 0], ref.powers, rtol=1e-6)

        rng = np.random.default_rng(8)
        for _ in range(5):
            n = int(rng.integers(2, 5))
            model = random_model(rng, n)
            p = rng.uniform(0.0, 1.0, size=n)
            mc1 = MultiCarrierModel(
                gains=model.gain[:, :, None],
                noise=model.noise[:, None],
                p_budget=np.full(n, 10.0),
            )
            assert np.array_equal(sinr_mc(mc1, p[:, None])[:, 0], sinr(model, p))
    t.check()
    report(8, "solve_mc at F = 1 matches g2off within 1e-6 relative; "
              "sinr_mc at F = 1 is bitwise equal to sinr", t)


def test_criterion_9_determinism_and_round_trip(tmp_path):
    with Timer(60.0) as t:
        gen_args = ["generate", "--num-links", "5", "--seed", "31", "--noise", "1e-9"]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(gen_args + ["--out", str(out_a)]) == 0
        assert main(gen_args + ["--out", str(out_b)]) == 0
        bytes_a = (out_a / "scenario.json").read_bytes()
        assert bytes_a == (out_b / "scenario.json").read_bytes()

        from powerctl import scenario as scen

        sc = scen.load(out_a / "scenario.json")
        assert scen.parse(sc.emit()).doc == sc.doc  # field-for-field round trip

        runs = [tmp_path / "r1", tmp_path / "r2"]
        for out in runs:
            assert main(["solve", "--scenario", str(out_a / "scenario.json"),
                         "--out", str(out), "--algo", "g2too", "--seed", "11",
                         "--async-staleness", "4", "--update-prob", "0.8"]) == 0
        reports = [json.loads((out / "report.json").read_text()) for out in runs]
        assert reports[0]["results"] == reports[1]["results"]

        p1 = np.array(reports[0]["results"]["powers"], dtype=float)
        p2 = np.array(reports[1]["results"]["powers"], dtype=float)
        assert np.max(np.abs(p1 - p2)) <= 1e-12
    t.check()
    report(9, "identical seeds give byte-identical scenarios and identical "
              "report numerics; scenario JSON round-trips exactly", t)
