import numpy as np
import pytest

from osgrf import (ParetoProductModel, ExperimentPlan, run_invariance_experiment,
                   gaussianity_test, jackknife_se, verify_identities,
                   ConfigError)
from osgrf.montecarlo import window_extents


def small_plan(**kw):
    base = dict(alphas=(0.3,), alpha_primes=(1.0,),
                n_schedule=(256, 512), replicas=120,
                t_grid=[(0.5,), (1.0,)], seed=42,
                qtable_extent=1024, buffer_factor=8.0)
    base.update(kw)
    return ExperimentPlan(**base)


def test_window_extents():
    assert window_extents(64, (0.6, 0.6)) == (1024, 1024)
    assert window_extents(100, (1.0,)) == (100,)


def test_jackknife_matches_std_err():
    rs = np.random.default_rng(0)
    x = rs.normal(size=500)
    se = jackknife_se(x)
    ref = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(se / ref - 1.0) < 1e-10


def test_gaussianity_null_and_alternative():
    rs = np.random.default_rng(1)
    g = gaussianity_test(rs.normal(size=2000))
    assert g["passed"] and not g["degenerate"]
    e = gaussianity_test(rs.exponential(size=2000))
    assert not e["passed"]


def test_gaussianity_degenerate_and_small():
    g = gaussianity_test(np.ones(200))
    assert g["degenerate"] and not g["passed"]
    with pytest.raises(ConfigError):
        gaussianity_test(np.ones(50))


def test_plan_validation():
    with pytest.raises(ConfigError):
        small_plan(n_schedule=(512, 256)).validate()
    with pytest.raises(ConfigError):
        small_plan(n_schedule=(256, 256)).validate()
    with pytest.raises(ConfigError):
        small_plan(replicas=1).validate()
    with pytest.raises(ConfigError):
        small_plan(seed=None).validate()


def test_experiment_deterministic_across_workers():
    a = run_invariance_experiment(small_plan(workers=1))
    b = run_invariance_experiment(small_plan(workers=2))
    assert a.to_dict() == b.to_dict()


def test_experiment_report_shape():
    rep = run_invariance_experiment(small_plan())
    d = rep.to_dict()
    assert d["schema_version"] == 1
    assert len(d["per_n"]) == 2
    assert len(d["per_n"][0]["pairs"]) == 3  # pairs (i <= j) of 2 grid points
    for entry in d["per_n"]:
        for pr in entry["pairs"]:
            assert np.isfinite(pr["empirical"]) and pr["se"] > 0
        assert entry["centering_ok"]
    assert "gaussianity" in d["per_n"][-1]
    assert "gaussianity" not in d["per_n"][0]
    assert "workers" not in d["runtime_meta"]


def test_experiment_rejects_invalid_regime():
    plan = small_plan(alphas=(0.5,), alpha_primes=(1.0,))
    with pytest.raises(ConfigError):
        run_invariance_experiment(plan)


def test_verify_identities_shape():
    model = ParetoProductModel([0.4])
    out = verify_identities(model, replicas=300, lags=256, offsets=(4,),
                            depth=256, qtable_extent=1024, seed=3)
    v = out["var_xstar"]
    assert abs(v["z"]) < 5 or abs(v["estimate"] - v["target"]) \
        < 4 * v["se"] + v["truncation_bound"]
    m = out["meeting"][0]
    assert m["offset"] == 4
    # truncation can only bias the meeting estimate low
    assert m["estimate"] <= m["target"] + 4 * m["se"]
