"""Acceptance gate: twelve criteria, one recorded pass/fail line each.

Every tolerance below is pinned; the summary block at the end of the pytest
run lists one line per criterion.
"""

import json
import time

import numpy as np
import pytest

from osgrf import (ParetoProductModel, classify, theorem13_case, build_qtable,
                   sigma_x2, parseval_check, pair_meeting_prob,
                   estimate_var_xstar, estimate_meeting_prob,
                   fbm_spectral_identity, LimitCovariance, closed_form_cov,
                   Synthesizer, ExperimentPlan, run_invariance_experiment,
                   LESS, EQUAL, GREATER)
from osgrf.cli import main as cli_main

from conftest import record_criterion

# -- pinned tolerances ----------------------------------------------------
GOLDEN_TOL = 1e-12          # criterion 1
PARSEVAL_TOL_1D = 0.02      # criterion 3
PARSEVAL_TOL_2D = 0.05
VAR_XSTAR_Z = 3.0           # criterion 4
MEETING_Z = 3.0             # criterion 5
CH_TOL = 1e-6               # criterion 6
CLOSED_FORM_TOL_1D = 1e-3   # criterion 7
CLOSED_FORM_TOL_2D = 1e-2
SCALING_TOL = 1e-2          # criterion 8
VAR_REL_TOL = 0.15          # criterion 9 (d=1)
D2_Z_TOL = 4.0              # criterion 9 (d=2 substitute)
SYNTH_Z = 3.0               # criterion 10
PSD_EIG_TOL = 1e-8          # criterion 11


def d1_critical_engine(extent=1 << 14):
    model = ParetoProductModel([0.3])
    report = classify([0.3], [1.0])
    qt = build_qtable(model, extent)
    return LimitCovariance(report, model, sigma2=sigma_x2(qt, 0.5)), report, model


def case_i_engine(extent=512):
    model = ParetoProductModel([0.35, 0.3])
    report = classify([0.35, 0.3], [0.35, 0.6])
    qt = build_qtable(model, extent)
    return LimitCovariance(report, model, sigma2=sigma_x2(qt, 0.5)), report, model


def case_ii_engine(extent=512):
    model = ParetoProductModel([0.35, 0.6])
    report = classify([0.35, 0.6], [0.35, 0.8])
    qt = build_qtable(model, extent)
    return LimitCovariance(report, model, sigma2=sigma_x2(qt, 0.5)), report, model


def test_criterion_01_regime_golden_table():
    t0 = time.time()
    vals = np.linspace(0.06, 0.94, 20)
    worst = 0.0
    checked = 0
    for a1 in vals:
        for a2 in vals:
            if 1.0 / a1 + 1.0 / a2 <= 2.0:
                continue
            for a2p in vals:
                if a2p == a2:
                    continue
                case, beta, h1, h2, _ = theorem13_case(a1, a2, a2p)
                rep = classify([a1, a2], [a1, a2p])
                assert rep.valid and rep.is_fbs, (a1, a2, a2p)
                worst = max(worst, abs(rep.H - beta),
                            abs(rep.hurst[0] - h1), abs(rep.hurst[1] - h2))
                checked += 1
    # critical scaling: H = 1 + (sum 1/alpha)/2 exactly
    for a1 in vals[::2]:
        for a2 in vals[::2]:
            rep = classify([a1, a2], [a1, a2])
            assert rep.is_critical
            worst = max(worst, abs(rep.H - (1.0 + 0.5 * (1 / a1 + 1 / a2))))
    dt = time.time() - t0
    ok = worst < GOLDEN_TOL and dt < 1.0
    record_criterion(1, ok, "golden table %d triples, worst dev %.2e, %.2fs"
                     % (checked, worst, dt))
    assert ok


def test_criterion_02_gamma0_property():
    t0 = time.time()
    rs = np.random.default_rng(20260826)
    valid = 0
    attempts = 0
    while valid < 10_000 and attempts < 60_000:
        attempts += 1
        d = int(rs.integers(1, 4))
        alphas = rs.uniform(0.05, 0.95, d)
        primes = rs.uniform(0.05, 0.95, d)
        rep = classify(alphas, primes)
        if not rep.valid:
            continue
        valid += 1
        g = rep.gamma0
        inv_a = 1.0 / np.asarray(rep.alphas)
        rho = np.asarray(rep.rhos)
        part = rep.partition
        below = [k for k in range(d) if part[k] in (EQUAL, GREATER)]  # rho <= g
        strict = [k for k in range(d) if part[k] == GREATER]          # rho < g
        assert inv_a[below].sum() > 2.0
        assert inv_a[strict].sum() <= 2.0
        assert sum(1 for lab in part if lab == GREATER) <= 1
        assert sum(1 for lab in part if lab == EQUAL) >= 1
        # the partition is what the rho/gamma0 comparison says it is
        for k in range(d):
            lab = LESS if rho[k] > g + 1e-12 else (
                GREATER if rho[k] < g - 1e-12 else EQUAL)
            assert part[k] == lab
    dt = time.time() - t0
    ok = valid == 10_000 and dt < 5.0
    record_criterion(2, ok, "gamma0 property on %d valid draws "
                     "(%d attempts), %.2fs" % (valid, attempts, dt))
    assert ok


def test_criterion_03_parseval():
    t0 = time.time()
    qt1 = build_qtable(ParetoProductModel([0.3]), 1 << 14)
    r1 = parseval_check(qt1)
    qt2 = build_qtable(ParetoProductModel([0.6, 0.6]), 256)
    r2 = parseval_check(qt2)
    dt = time.time() - t0
    ok = (r1.rel_discrepancy < PARSEVAL_TOL_1D
          and r2.rel_discrepancy < PARSEVAL_TOL_2D and dt < 120.0)
    record_criterion(3, ok, "Parseval rel gap d=1 %.2e (<%g), d=2 %.2e (<%g), "
                     "%.1fs" % (r1.rel_discrepancy, PARSEVAL_TOL_1D,
                                r2.rel_discrepancy, PARSEVAL_TOL_2D, dt))
    assert ok


def test_criterion_04_var_xstar():
    t0 = time.time()
    model = ParetoProductModel([0.3])
    est, se, bound = estimate_var_xstar(model, 10_000, 1 << 16, seed=401)
    qt = build_qtable(model, 1 << 16)
    target = 1.0 / qt.sum_sq
    z = (est - target) / se
    dt = time.time() - t0
    ok = abs(z) < VAR_XSTAR_Z and dt < 300.0
    record_criterion(4, ok, "Var(X*_0) %.5f vs 1/sum q^2 %.5f, z=%.2f, %.0fs"
                     % (est, target, z, dt))
    assert ok


def test_criterion_05_meeting_probability():
    t0 = time.time()
    model = ParetoProductModel([0.3])
    qt = build_qtable(model, 1 << 16)
    zs = []
    ok = True
    for m in (8, 32, 128):
        mp = pair_meeting_prob(qt, m)
        phat, se = estimate_meeting_prob(model, m, 3000, 1 << 16,
                                         seed=500 + m)
        zs.append((phat - mp.value) / se)
        # truncation biases the estimate low only (one-sided caveat)
        if mp.value - phat > MEETING_Z * se + mp.residual_bound:
            ok = False
        if phat - mp.value > MEETING_Z * se:
            ok = False
    dt = time.time() - t0
    ok = ok and dt < 300.0
    record_criterion(5, ok, "meeting prob offsets {8,32,128} z = %s, %.0fs"
                     % (", ".join("%.2f" % z for z in zs), dt))
    assert ok


def test_criterion_06_ch_identity():
    t0 = time.time()
    worst = 0.0
    for h in (0.55, 0.8, 0.95):
        for t in (0.5, 1.0):
            quad, closed = fbm_spectral_identity(h, t)
            worst = max(worst, abs(quad / closed - 1.0))
    dt = time.time() - t0
    ok = worst < CH_TOL and dt < 10.0
    record_criterion(6, ok, "C_H identity worst rel dev %.2e (< %g), %.1fs"
                     % (worst, CH_TOL, dt))
    assert ok


def test_criterion_07_closed_form_vs_quadrature():
    t0 = time.time()
    eng1, rep1, m1 = d1_critical_engine()
    v = eng1.cov((1.0,), (1.0,))
    cf = closed_form_cov(rep1, m1, (1.0,), (1.0,), sigma2=eng1.sigma2)
    rel1 = abs(v / cf - 1.0)
    eng2, rep2, m2 = case_i_engine()
    pts = [((1.0, 1.0), (1.0, 1.0)), ((0.5, 1.0), (1.0, 0.5)),
           ((0.7, 0.3), (0.4, 0.9)), ((1.0, 0.25), (0.25, 1.0)),
           ((0.8, 0.8), (0.6, 0.6))]
    rel2 = 0.0
    for t, s in pts:
        v = eng2.cov(t, s)
        cf = closed_form_cov(rep2, m2, t, s, sigma2=eng2.sigma2)
        rel2 = max(rel2, abs(v / cf - 1.0))
    dt = time.time() - t0
    ok = rel1 < CLOSED_FORM_TOL_1D and rel2 < CLOSED_FORM_TOL_2D and dt < 120.0
    record_criterion(7, ok, "closed form vs quadrature: d=1 %.2e (< %g), "
                     "d=2 case (i) %.2e (< %g), %.1fs"
                     % (rel1, CLOSED_FORM_TOL_1D, rel2, CLOSED_FORM_TOL_2D, dt))
    assert ok


def test_criterion_08_operator_scaling():
    t0 = time.time()
    engines = [("d=1 critical", d1_critical_engine()[0], (1.0,), (0.7,)),
               ("case (i)", case_i_engine()[0], (1.0, 1.0), (0.5, 0.8)),
               ("case (ii)", case_ii_engine()[0], (1.0, 1.0), (0.5, 0.8))]
    worst = 0.0
    for name, eng, t, s in engines:
        for lam in (0.5, 2.0):
            worst = max(worst, eng.operator_scaling_residual(lam, t, s))
    dt = time.time() - t0
    ok = worst < SCALING_TOL and dt < 120.0
    record_criterion(8, ok, "operator scaling worst residual %.2e (< %g), "
                     "%.0fs" % (worst, SCALING_TOL, dt))
    assert ok


def test_criterion_09a_invariance_d1():
    t0 = time.time()
    plan = ExperimentPlan(
        alphas=(0.3,), alpha_primes=(1.0,),
        n_schedule=(1 << 12, 1 << 13, 1 << 14),
        replicas=200, gauss_replicas=500,
        t_grid=[(1.0,)], seed=901,
        qtable_extent=1 << 16, buffer_factor=256.0,
        var_rel_tolerance=VAR_REL_TOL)
    rep = run_invariance_experiment(plan)
    relerrs = [e["var_rel_error"] for e in rep.per_n]
    noise = [e["pairs"][-1]["se"] / abs(e["pairs"][-1]["target"])
             for e in rep.per_n]
    monotone = all(relerrs[k + 1] <= relerrs[k] + 2.0 * noise[k + 1]
                   for k in range(len(relerrs) - 1))
    gauss = rep.per_n[-1]["gaussianity"]
    dt = time.time() - t0
    ok = (relerrs[-1] < VAR_REL_TOL and monotone and gauss["passed"]
          and dt < 1800.0)
    record_criterion(9, ok, "d=1 invariance: var rel errs %s (last < %g), "
                     "monotone %s, KS %.4f < %.4f, %.0fs"
                     % (", ".join("%.3f" % r for r in relerrs), VAR_REL_TOL,
                        monotone, gauss["ks"], gauss["ks_critical"], dt))
    assert ok


def test_criterion_09b_invariance_d2_critical():
    t0 = time.time()
    plan = ExperimentPlan(
        alphas=(0.6, 0.6), alpha_primes=(0.6, 0.6),
        n_schedule=(64,), replicas=200,
        t_grid=[(0.5, 0.5), (0.5, 1.0), (1.0, 0.5), (1.0, 1.0)],
        seed=902, qtable_extent=2048, z_tolerance=D2_Z_TOL)
    rep = run_invariance_experiment(plan)
    entry = rep.per_n[-1]
    diag = [p["z"] for p in entry["pairs"] if p["t"] == p["s"]]
    dt = time.time() - t0
    ok = (len(diag) == 4 and max(abs(z) for z in diag) < D2_Z_TOL
          and dt < 3600.0)
    record_criterion(9, ok, "d=2 critical n=64: grid-point z = %s (|z| < %g),"
                     " %.0fs" % (", ".join("%.2f" % z for z in diag),
                                 D2_Z_TOL, dt))
    assert ok


def synthesis_check(engine, report, model, points, seed, n_real=10_000):
    synth = Synthesizer(report, model, points, sigma2=engine.sigma2)
    target = engine.gram(points)
    grid = synth.grid_cov()
    disc = np.abs(grid - target)          # measured discretization bias
    x = synth.sample(seed, n_real)
    emp = x.T @ x / n_real
    se = np.sqrt((np.outer(np.diag(grid), np.diag(grid)) + grid ** 2)
                 / n_real)
    gap = np.abs(emp - target)
    return float(np.max((gap - disc) / se)), float(np.max(disc / np.abs(target)))


def test_criterion_10_synthesis():
    t0 = time.time()
    eng1, rep1, m1 = d1_critical_engine()
    pts1 = [(0.2,), (0.4,), (0.6,), (0.8,), (1.0,)]
    z1, disc1 = synthesis_check(eng1, rep1, m1, pts1, seed=1001)
    eng2, rep2, m2 = case_i_engine()
    pts2 = [(0.25, 0.25), (0.5, 1.0), (1.0, 0.5), (0.75, 0.75), (1.0, 1.0)]
    z2, disc2 = synthesis_check(eng2, rep2, m2, pts2, seed=1002)
    dt = time.time() - t0
    ok = z1 < SYNTH_Z and z2 < SYNTH_Z and dt < 600.0
    record_criterion(10, ok, "synthesis z (beyond measured discretization "
                     "bias %.1f%%/%.1f%%): d=1 %.2f, d=2 case (i) %.2f "
                     "(< %g), %.0fs" % (100 * disc1, 100 * disc2, z1, z2,
                                        SYNTH_Z, dt))
    assert ok


def test_criterion_11_psd_gram():
    t0 = time.time()
    rs = np.random.default_rng(1101)
    worst = np.inf
    eng1 = d1_critical_engine()[0]
    eng2 = case_i_engine()[0]
    for trial in range(100):
        if trial % 2 == 0:
            pts = [(float(v),) for v in rs.uniform(0.1, 1.5, 8)]
            G = eng1.gram(pts)
        else:
            pts = [tuple(row) for row in rs.uniform(0.1, 1.5, (8, 2))]
            G = eng2.gram(pts)
        worst = min(worst, float(np.linalg.eigvalsh(G).min()
                                 / np.trace(G)))
    dt = time.time() - t0
    ok = worst >= -PSD_EIG_TOL and dt < 300.0
    record_criterion(11, ok, "PSD: min eig/trace %.2e over 100 Grams "
                     "(>= -%g), %.0fs" % (worst, PSD_EIG_TOL, dt))
    assert ok


def test_criterion_12_determinism(tmp_path):
    t0 = time.time()
    blobs = {}
    for workers in (1, 4):
        out = tmp_path / ("w%d" % workers)
        code = cli_main([
            "verify", "--alpha", "0.3", "--alpha-prime", "1.0",
            "--n-schedule", "512,1024", "--replicas", "200",
            "--t-grid", "0.5;1.0", "--qtable-extent", "4096",
            "--buffer-factor", "8", "--workers", str(workers),
            "--seed", "1201", "--output-dir", str(out)])
        assert code in (0, 3)
        blobs[workers] = {name: (out / name).read_bytes()
                          for name in ("verdict.json", "verdict.csv")}
    identical = blobs[1] == blobs[4]
    dt = time.time() - t0
    ok = identical and dt < 3600.0
    record_criterion(12, ok, "verify byte-identical across workers {1,4}: %s,"
                     " %.0fs" % (identical, dt))
    assert ok
