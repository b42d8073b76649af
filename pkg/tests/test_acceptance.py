"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  The simulation-heavy criteria use the jitted kernel; a warmup
fixture compiles it before any timed section starts.
"""

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from aoiq.analytic import (
    SystemParams,
    mean_aoi,
    stationary_distribution,
    step1_table,
    transition_matrix,
)
from aoiq.cli import default_validation_cases, run_validation
from aoiq.distributions import deterministic, erlang, exponential, gamma, parse_distribution
from aoiq.simulator import SimConfig, cycle_diagnostics, empirical_chain, run

from mc_oracle import triple_oracle

SEED = 20240614


def _report(num, ok, detail):
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module", autouse=True)
def warm_kernel():
    cfg = SimConfig(params=SystemParams(1.0, 3, exponential(1.0)),
                    horizon=100.0, replications=1, seed=0)
    run(cfg)


def test_criterion_1_chain_correctness():
    rng = np.random.default_rng(SEED)
    makers = [
        lambda: deterministic(rng.uniform(0.2, 3.0)),
        lambda: exponential(rng.uniform(0.3, 3.0)),
        lambda: erlang(int(rng.integers(1, 6)), rng.uniform(0.3, 3.0)),
        lambda: gamma(rng.uniform(0.3, 4.0), rng.uniform(0.3, 3.0)),
    ]
    t0 = time.perf_counter()
    worst_row = worst_fp = worst_solve = 0.0
    for i in range(200):
        lam = float(np.exp(rng.uniform(np.log(0.05), np.log(50.0))))
        params = SystemParams(lam, 3, makers[i % 4]())
        P = transition_matrix(params)
        pi = stationary_distribution(params)
        worst_row = max(worst_row, float(np.max(np.abs(P.sum(axis=1) - 1.0))))
        worst_fp = max(worst_fp, float(np.max(np.abs(pi @ P - pi))))
        A = P.T - np.eye(3)
        A[2, :] = 1.0
        pi_solve = np.linalg.solve(A, np.array([0.0, 0.0, 1.0]))
        worst_solve = max(worst_solve, float(np.max(np.abs(pi_solve - pi))))
    elapsed = time.perf_counter() - t0
    ok = worst_row <= 1e-12 and worst_fp <= 1e-12 and worst_solve <= 1e-10 and elapsed < 1.0
    _report(1, ok, f"200 cases: row-sum err {worst_row:.2e}, fixed-point err "
                   f"{worst_fp:.2e}, solve err {worst_solve:.2e}, {elapsed:.2f}s")


def test_criterion_2_step1_oracle():
    cases = [(lam, spec) for spec in ("det:1", "exp:1", "erlang:3:3")
             for lam in (0.5, 1.0, 4.0)]
    t0 = time.perf_counter()
    worst = ("", 0.0)
    for idx, (lam, spec) in enumerate(cases):
        dist = parse_distribution(spec)
        table = step1_table(SystemParams(lam, 3, dist))
        oracle = triple_oracle(lam, dist, 10_000_000, seed=SEED + idx)
        for name in table._fields:
            exact = getattr(table, name)
            est, se = oracle[name]
            if abs(exact - est) > 3.0 * se:
                _report(2, False,
                        f"{spec} lam={lam} {name}: exact {exact:.6f} vs MC {est:.6f} "
                        f"(se {se:.2e})")
            dev = abs(exact - est) / se if se > 0 else 0.0
            if dev > worst[1]:
                worst = (f"{spec} lam={lam} {name}", dev)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 60.0
    _report(2, ok, f"9 cases x 7 quantities within 3 s.e. (worst {worst[0]} at "
                   f"{worst[1]:.2f} s.e.), {elapsed:.1f}s")


def test_criterion_3_validate_default_grid():
    t0 = time.perf_counter()
    # the default `aoiq validate` configuration: default grid, default seed
    results = run_validation(default_validation_cases(), horizon=1e7,
                             replications=8, seed=3, jobs=2)
    elapsed = time.perf_counter() - t0
    fails = [r for r in results if not r.passed]
    detail = "; ".join(
        f"m={r.case.m} lam={r.case.lam} {r.case.service.spec_string()} z={r.z:.2f}"
        for r in fails
    )
    worst = max(abs(r.z) for r in results)
    ok = not fails and elapsed < 600.0
    _report(3, ok, f"{len(results) - len(fails)}/{len(results)} cases inside 3-sigma "
                   f"(worst |z| {worst:.2f}), {elapsed:.0f}s"
                   + (f"; FAILED: {detail}" if fails else ""))


def _ordering_values(service, lams, ms):
    out = {}
    for m in ms:
        out[m] = [mean_aoi(SystemParams(float(lam), m, service)).mean_aoi for lam in lams]
    return out


def test_criterion_4_deterministic_ordering():
    lams = np.arange(0.5, 8.0 + 1e-9, 0.25)
    t0 = time.perf_counter()
    vals = _ordering_values(deterministic(1.0), lams, (1, 2, 3))
    ok_order = all(v2 < v3 < v1 for v1, v2, v3 in zip(vals[1], vals[2], vals[3]))
    elapsed = time.perf_counter() - t0
    ok = ok_order and elapsed < 1.0
    _report(4, ok, f"det service: m2 < m3 < m1 at all {len(lams)} grid points, "
                   f"{elapsed:.2f}s")


def test_criterion_5_exponential_ordering():
    lams = np.concatenate([[0.05], np.arange(0.25, 8.0 + 1e-9, 0.25)])
    t0 = time.perf_counter()
    vals = _ordering_values(exponential(1.0), lams, (1, 2, 3))
    ok_order = all(v1 < v2 < v3 for v1, v2, v3 in zip(vals[1], vals[2], vals[3]))
    elapsed = time.perf_counter() - t0
    ok = ok_order and elapsed < 1.0
    _report(5, ok, f"exp service: m1 < m2 < m3 at all {len(lams)} grid points, "
                   f"{elapsed:.2f}s")


def test_criterion_6_saturation_limit():
    details = []
    ok = True
    for service, name in ((exponential(1.0), "exp"), (deterministic(1.0), "det")):
        gaps = []
        for lam in (4.0, 8.0, 16.0, 32.0):
            m2 = mean_aoi(SystemParams(lam, 2, service)).mean_aoi
            m3 = mean_aoi(SystemParams(lam, 3, service)).mean_aoi
            gaps.append(abs(m3 - m2))
        decreasing = all(a > b for a, b in zip(gaps, gaps[1:]))
        ok = ok and decreasing and gaps[-1] < 0.01
        details.append(f"{name}: gaps {['%.2e' % g for g in gaps]}")
    _report(6, ok, "|m3 - m2| strictly decreasing over lam in {4,8,16,32} and "
                   "< 0.01 at 32; " + "; ".join(details))


def test_criterion_7_larger_buffers_by_simulation():
    t0 = time.perf_counter()
    jobs = [("det:1", m) for m in (2, 3, 4)] + [("exp:1", m) for m in (1, 2, 3, 4)]

    def one(item):
        idx, (spec, m) = item
        cfg = SimConfig(
            params=SystemParams(1.0, m, parse_distribution(spec)),
            horizon=1e7, replications=16, seed=SEED + 100 + idx,
        )
        result = run(cfg)
        return spec, m, result.estimate.mean_aoi, result.se

    with ThreadPoolExecutor(max_workers=2) as pool:
        rows = list(pool.map(one, enumerate(jobs)))
    elapsed = time.perf_counter() - t0

    def separated(chain):
        return all(
            (a_mean + 3 * a_se) < (b_mean - 3 * b_se)
            for (a_mean, a_se), (b_mean, b_se) in zip(chain, chain[1:])
        )

    det_chain = [(mean, se) for spec, m, mean, se in rows if spec == "det:1"]
    exp_chain = [(mean, se) for spec, m, mean, se in rows if spec == "exp:1"]
    det_ok = separated(det_chain)
    exp_ok = separated(exp_chain)
    ok = det_ok and exp_ok and elapsed < 900.0
    det_str = " < ".join(f"{mean:.4f}" for mean, _ in det_chain)
    exp_str = " < ".join(f"{mean:.4f}" for mean, _ in exp_chain)
    _report(7, ok, f"3-sigma-separated chains at lam=1: det m2..m4 [{det_str}], "
                   f"exp m1..m4 [{exp_str}], {elapsed:.0f}s")


def test_criterion_8_cycle_moments():
    cfg = SimConfig(params=SystemParams(1.0, 3, exponential(1.0)),
                    horizon=2e6, replications=2, seed=SEED + 200)
    diag = cycle_diagnostics(cfg)
    mean_ok = abs(diag.mean_gap - 4.0 / 3.0) <= 3.0 * diag.mean_gap_se
    second_ok = abs(diag.gap_second_moment - 10.0 / 3.0) <= 3.0 * diag.gap_second_moment_se
    _, pi_hat = empirical_chain(cfg)
    pi_ok = float(np.max(np.abs(pi_hat - 1.0 / 3.0))) < 0.01
    ok = mean_ok and second_ok and pi_ok
    _report(8, ok, f"gap mean {diag.mean_gap:.5f} (4/3), second moment "
                   f"{diag.gap_second_moment:.5f} (10/3), pi_hat {np.round(pi_hat, 4)}")


def test_criterion_9_stale_departures():
    cfg3 = SimConfig(params=SystemParams(1.0, 3, exponential(1.0)),
                     horizon=1e6, replications=1, seed=SEED + 300)
    path3 = run(cfg3).paths[0]
    freq3 = path3.stale_departures / path3.departures
    cfg2 = SimConfig(params=SystemParams(1.0, 2, exponential(1.0)),
                     horizon=2e6, replications=1, seed=SEED + 301)
    path2 = run(cfg2).paths[0]
    ok = freq3 > 0.0 and path2.departures >= 1_000_000 and path2.stale_departures == 0
    _report(9, ok, f"stale frequency {freq3:.4f} at m=3; "
                   f"{path2.stale_departures} stale over {path2.departures} departures at m=2")
