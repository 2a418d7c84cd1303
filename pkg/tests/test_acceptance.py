"""Acceptance criteria 1-14.

Each test records one PASS/FAIL line (printed in the terminal summary by
conftest.py) and then asserts the same condition. Thresholds are the fixed
acceptance tolerances; nothing here is tuned to make a criterion pass.
"""

import math
import os
import subprocess
import sys

import numpy as np

from excitable.analysis import detect_peaks, segment_ratios
from excitable.campaign import CampaignConfig, integrate_cases, sample_cases
from excitable.contraction import (
    alpha_certificate,
    distance_curve,
    gain_matrix,
    integral_criterion,
    metric_fhn,
    nu,
    region_labels_fhn,
    sigma_of_gains,
)
from excitable.integrator import EnsembleRun, integrate, integrate_ensemble
from excitable.models import (
    FHN_STATE,
    LtiParams,
    ei_deriv,
    exo_deriv,
    fhn_deriv,
    fig1_params,
    fig3_params,
    lti_deriv,
    lti_resonance,
)
from excitable.scenarios import get_scenario
from excitable.signals import realize

P1 = fig1_params()
PAIR = np.array([[-1.6, -0.6], [-1.4, -0.7]])


def _pair_run(dt, t1):
    return integrate_ensemble(lambda x, u: fhn_deriv(x, u, P1), PAIR, None, 0.0, t1, dt, model="fhn", params=P1)


def test_c01_lower_region_rate_bound(record):
    mu = 0.2
    lam = math.sqrt(mu)
    run = _pair_run(0.01, 20.0)
    labels = region_labels_fhn(run.states[:, :, 0], mu)
    inside = np.all(labels == -1, axis=0)
    k_exit = len(inside) if inside.all() else int(np.argmin(inside))
    stay = k_exit * run.dt
    t = run.times[:k_exit]
    d = metric_fhn(run.states[0, :k_exit], run.states[1, :k_exit], P1.epsilon)
    bound = np.exp(-lam * t) * d[0] * (1 + 1e-6)
    violated = np.flatnonzero(d > bound)
    ok = stay >= 10.0 and len(violated) == 0
    first = f"first violation t={t[violated[0]]:.2f}" if len(violated) else "no violation"
    record(
        "1",
        ok,
        f"stay in lower region {stay:.2f} (need >= 10); rate bound on stay window: {first}; "
        f"d(t_exit)/d0={d[-1] / d[0]:.4f} vs bound {math.exp(-lam * t[-1]):.4f}",
    )
    assert ok


def test_c02_squared_distance_identity(record):
    dt = 1e-3
    run = _pair_run(dt, 10.0)
    a, b = run.states
    d2 = metric_fhn(a, b, P1.epsilon) ** 2
    fd = (d2[2:] - d2[:-2]) / (2 * dt)
    exact = 3.0 - nu(a[1:-1], b[1:-1], P1.b)
    rel = np.max(np.abs(fd - exact) / np.abs(exact))
    ok = rel <= 1e-3
    record("2", ok, f"max relative error of central difference of d^2 vs 3-nu: {rel:.2e} (need <= 1e-3)")
    assert ok


def test_c03_integral_criterion_equivalence(record):
    cfg = CampaignConfig(ensembles=100, members=2, seed=2023)
    runs = integrate_cases(sample_cases(cfg), cfg.t1, cfg.dt)
    tol = 10 * cfg.dt
    decided = mismatches = 0
    for run in runs:
        ta, tb = run.trajectories
        r = integral_criterion(ta, tb, 0.0, cfg.t1, run.params.b)
        if abs(r.lhs - r.rhs) <= tol:
            continue
        decided += 1
        eps = run.params.epsilon
        direct = metric_fhn(tb.states[-1], ta.states[-1], eps) < metric_fhn(tb.states[0], ta.states[0], eps)
        mismatches += r.contracts != direct
    ok = mismatches == 0 and decided > 0
    record("3", ok, f"{mismatches} verdict mismatches over {decided} decisive pairs of 100")
    assert ok


def test_c04_certificate_soundness(record):
    cfg = CampaignConfig()
    runs = integrate_cases(sample_cases(cfg), cfg.t1, cfg.dt)
    certs = [alpha_certificate(run, 0.2, 0.0, cfg.t1) for run in runs]
    met = [c for c in certs if c.precondition_met]
    bad = [c for c in met if c.measured_ratio > c.alpha + 1e-9]
    worst = max((c.measured_ratio / c.alpha for c in bad), default=0.0)
    ok = not bad
    record("4", ok, f"precondition met in {len(met)}/200 ensembles, violations {len(bad)} (worst ratio/alpha {worst:.3g})")
    assert ok


def test_c05_fig1_reliability_ordering(builtin, record):
    r = {n: builtin(n).summary["distance_ratio"] for n in ("fig1a", "fig1b", "fig1c")}
    ok = r["fig1b"] < 0.1 and r["fig1c"] < 0.1 and r["fig1a"] > 0.5
    record("5", ok, f"ratio fig1a={r['fig1a']:.4f} (>0.5), fig1b={r['fig1b']:.2e} (<0.1), fig1c={r['fig1c']:.2e} (<0.1)")
    assert ok


def test_c06_noise_segment_trend(builtin, record):
    spec = get_scenario("fig1d")
    t0, t1, dt = spec.horizon
    ics = builtin("fig1d").run.initial_conditions
    seeds = list(range(10))
    m = len(ics)
    # one batched pass: 10 seeds x 9 members, each column its own frozen input
    inputs = np.repeat(np.column_stack([realize(spec.signal, t0, t1, dt, seed=s) for s in seeds]), m, axis=1)
    batch = integrate_ensemble(
        lambda x, u: fhn_deriv(x, u, spec.params), np.tile(ics, (len(seeds), 1)), inputs, t0, t1, dt
    )
    hits = 0
    patterns = []
    for j, s in enumerate(seeds):
        states = batch.states[j * m : (j + 1) * m]
        run = EnsembleRun(t0, dt, states, inputs[:, j * m], ics, "fhn", spec.params, names=FHN_STATE)
        if s == spec.seed:
            assert np.array_equal(states, builtin("fig1d").run.states)
        ratios = segment_ratios(*distance_curve(run), [100.0, 200.0])
        hit = ratios[0] < 1 and ratios[1] > 1 and ratios[2] < 1
        hits += hit
        patterns.append("".join("<" if q < 1 else ">" for q in ratios))
    ok = hits >= 8
    record("6", ok, f"pattern (<1,>1,<1) in {hits}/10 seeds (need >= 8); observed {' '.join(patterns)}")
    assert ok


def test_c07_exosystem_and_internal_model(builtin, record):
    run = builtin("fig3a").run
    peaks = detect_peaks(run.times, run.states[0, :, 6], "v_u1").within(100.0, 400.0)
    rng = np.random.default_rng(7)
    p = fig3_params()
    x = rng.uniform(-3, 3, size=(1000, 6))
    x[:, 0] = p.v_rest
    ctrl = ei_deriv(x, rng.uniform(-2, 2, 1000), p)[:, 2:]
    exo = exo_deriv(x[:, 2:], p.u_params, p.k_u)
    max_diff = float(np.max(np.abs(ctrl - exo)))
    ok = len(peaks) >= 5 and max_diff <= 1e-15
    record("7", ok, f"v_u1 peaks in [100,400]: {len(peaks)} (need >= 5); controller vs exosystem max |diff| {max_diff:.1e}")
    assert ok


def test_c08_regulation(builtin, record):
    s = builtin("fig3a").summary
    tail = max(s["tail_max_abs_y_minus_v_rest"])
    ratio = s["distance_ratio"]
    ok = tail <= 0.05 and ratio <= 0.01
    record("8", ok, f"max tail |y - v_rest| {tail:.2e} (<= 0.05); distance ratio {ratio:.2e} (<= 0.01)")
    assert ok


def test_c09_non_regulation(builtin, record):
    s = builtin("fig3c").summary
    ratio = s["distance_ratio"]
    low = s["eta_pairwise_sync_min"]
    ok = ratio >= 0.2 and low < 0.5
    record("9", ok, f"distance ratio {ratio:.3f} (>= 0.2); min pairwise eta sync {low:.3f} (need < 0.5 for some pair)")
    assert ok


def test_c10_event_tracking(builtin, record):
    s = builtin("fig3b").summary
    sync = s["eta_u_sync_mean"]
    spikes = sum(s["y_spikes_after"])
    ok = sync >= 0.9 and spikes == 0
    record("10", ok, f"mean eta/u sync {sync:.3f} (>= 0.9); y spikes after t=100: {spikes} (need 0)")
    assert ok


def _char_poly_sigma(k_e, k_u):
    """Largest root of det(sI - K) by Newton from a Gershgorin upper bound.

    For a cubic with only real roots, Newton started to the right of the
    largest root decreases monotonically onto it.
    """
    K = gain_matrix(k_e, k_u).tolist()
    tr = K[0][0] + K[1][1] + K[2][2]
    c2 = (K[0][0] * K[1][1] - K[0][1] ** 2) + (K[0][0] * K[2][2] - K[0][2] ** 2) + (K[1][1] * K[2][2] - K[1][2] ** 2)
    det = (
        K[0][0] * (K[1][1] * K[2][2] - K[1][2] * K[2][1])
        - K[0][1] * (K[1][0] * K[2][2] - K[1][2] * K[2][0])
        + K[0][2] * (K[1][0] * K[2][1] - K[1][1] * K[2][0])
    )
    s = max(K[i][i] + sum(abs(K[i][j]) for j in range(3) if j != i) for i in range(3)) + 1.0
    for _ in range(500):
        p = ((s - tr) * s + c2) * s - det
        dp = (3 * s - 2 * tr) * s + c2
        if dp == 0:
            break
        step = p / dp
        s -= step
        if abs(step) <= 1e-15 * max(1.0, abs(s)):
            break
    return s


def test_c11_sigma_and_gain_matrix(record):
    rng = np.random.default_rng(11)
    ks = rng.uniform(0, 10, 50)
    balanced = max(abs(sigma_of_gains(k, k)) for k in ks)
    s40 = abs(sigma_of_gains(4.0, 0.0) - 2 * (math.sqrt(2) - 1))
    rho = np.array([0.0, 1.0, -1.0])
    null = all(rho @ gain_matrix(*g) @ rho == 0.0 for g in rng.uniform(0, 10, (20, 2)))
    gains = rng.uniform(0, 10, (100, 2))
    oracle = max(abs(sigma_of_gains(ke, ku) - _char_poly_sigma(ke, ku)) for ke, ku in gains)
    ok = balanced <= 1e-12 and s40 <= 1e-10 and null and oracle <= 1e-10
    record(
        "11",
        ok,
        f"max |sigma(k,k)| {balanced:.1e}; |sigma(4,0)-2(sqrt2-1)| {s40:.1e}; rho K rho^T == 0: {null}; "
        f"max |sigma - char-poly oracle| {oracle:.1e}",
    )
    assert ok


def test_c12_lti_peak_synchronization(builtin, record):
    a = builtin("fig4a").summary["peak_phase_dispersion"]
    b = builtin("fig4b").summary["peak_phase_dispersion"]
    thr = 0.05 * 2 * math.pi
    ok = a is not None and b is not None and a <= thr and b >= 4 * a and b >= 4 * thr
    record("12", ok, f"dispersion resonant {a:.4f} (<= {thr:.4f}); 2w input {b:.4f} (>= 4x resonant and >= 4x threshold {4 * thr:.3f})")
    assert ok


def test_c13_integrator_order(record):
    w = math.pi / 30
    p = LtiParams(w)
    dts = [0.04, 0.02, 0.01, 0.005]
    errs = []
    for dt in dts:
        tr = integrate(lambda x, u: lti_deriv(x, u, p), [0.0, 0.0], lambda t: math.sin(w * t), 0.0, 60.0, dt)
        errs.append(float(np.max(np.abs(tr.states - lti_resonance(tr.times, w)))))
    slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    ok = 3.7 <= slope <= 4.3
    record("13", ok, f"convergence slope {slope:.3f} in [3.7, 4.3]; sup errors {', '.join(f'{e:.1e}' for e in errs)}")
    assert ok


def test_c14_determinism(tmp_path, record):
    def run(out, *extra, env=None):
        cmd = [sys.executable, "-m", "excitable", "run", "fig1d", "--seed", "7", "--out", str(out), *extra]
        proc = subprocess.run(cmd, capture_output=True, env={**os.environ, **(env or {})})
        assert proc.returncode == 0, proc.stderr
        return (out / "trajectories.csv").read_bytes()

    first = run(tmp_path / "a", env={"OMP_NUM_THREADS": "1", "OPENBLAS_NUM_THREADS": "1"})
    same = run(tmp_path / "b")
    threads = run(tmp_path / "c", "--workers", "4", env={"OMP_NUM_THREADS": "8", "OPENBLAS_NUM_THREADS": "8"})
    ok = first == same == threads
    record("14", ok, f"trajectories.csv byte-identical across 2 invocations and workers/threads 1 vs 4/8: {ok} ({len(first)} bytes)")
    assert ok
