from fractions import Fraction

import numpy as np
import pytest

from osgrf import (classify, theorem13_case, fbs_detect, holder_exponents,
                   ConfigError, LESS, EQUAL, GREATER)


def test_partition_example_less_equal():
    r = classify([0.7, 0.4], [0.7, 0.6])
    assert r.valid
    assert abs(r.gamma0 - Fraction(2, 3)) < 1e-15
    assert r.partition == (LESS, EQUAL)
    assert r.increment_class == ("INDEPENDENT", "LONG_RANGE")


def test_partition_example_greater_equal():
    r = classify([0.7, 0.4], [0.9, 0.4])
    assert r.valid
    assert r.gamma0 == 1
    assert r.partition == (GREATER, EQUAL)
    assert r.increment_class == ("INVARIANT", "LONG_RANGE")


def test_critical_case():
    r = classify([0.6, 0.6], [0.6, 0.6])
    assert r.valid and r.is_critical
    assert r.partition == (EQUAL, EQUAL)
    # E' = E: gamma0 = 1 and H = 1 + q(E)/2
    assert abs(r.H - (1 + (2 / 0.6) / 2)) < 1e-12


def test_d1_needs_alpha_below_half():
    r = classify([0.5], [0.5])
    assert not r.valid
    assert "alpha_1 < 1/2 required for d=1" in r.reasons
    assert classify([0.49], [0.49]).valid


def test_d2_always_transient():
    # 1/a1 + 1/a2 > 2 automatically when both alphas are below 1
    assert classify([0.9, 0.95], [0.9, 0.95]).valid
    assert classify([0.5, 0.5], [0.5, 0.5]).valid


def test_invariant_axis_boundary_invalid():
    # gamma0 makes axis 2 invariant but the remaining 1/alpha mass is
    # exactly 2: the strict inequality fails and the pair is rejected.
    r = classify([0.7, 0.5], [0.7, 0.75])
    assert not r.valid
    assert any("2 exactly" in reason for reason in r.reasons)


def test_gamma0_defining_property_random():
    rng = np.random.default_rng(3)
    found = 0
    while found < 300:
        d = rng.integers(1, 4)
        alphas = rng.uniform(0.05, 0.95, d).round(3)
        primes = rng.uniform(0.05, 1.2, d).round(3)
        r = classify(alphas, primes)
        if not r.valid:
            continue
        found += 1
        rhos = [Fraction(float(a)) / Fraction(float(p)) for a, p in
                zip(r.alphas, r.alpha_primes)]
        # report.gamma0 is a float; recover the exact candidate it names
        g = min((rho for rho in rhos if abs(float(rho) - r.gamma0) < 1e-12),
                default=Fraction(r.gamma0))
        at_or_below = sum(1 / Fraction(float(a))
                          for a, rho in zip(r.alphas, rhos) if rho <= g)
        strictly_below = sum(1 / Fraction(float(a))
                             for a, rho in zip(r.alphas, rhos) if rho < g)
        assert at_or_below > 2
        assert strictly_below <= 2
        assert sum(1 for lab in r.partition if lab == GREATER) <= 1
        assert sum(1 for lab in r.partition if lab == EQUAL) >= 1
        # invariant axes must have alpha > 1/2
        for lab, a in zip(r.partition, r.alphas):
            if lab == GREATER:
                assert a > 0.5


def test_partition_invariant_under_scaled_exponent():
    # replacing E' by lambda E' rescales gamma0 but not the partition
    r1 = classify([0.7, 0.4], [0.7, 0.6])
    r2 = classify([0.7, 0.4], [0.35, 0.3])
    assert r1.partition == r2.partition
    assert abs(r2.gamma0 - 2 * r1.gamma0) < 1e-12


def test_theorem13_case_i():
    cid, beta, h1, h2, _ = theorem13_case(0.35, 0.3, 0.6)
    assert cid == "i"
    assert abs(beta - (0.3 / 0.6 + (1 / 0.35 + 1 / 0.6) / 2)) < 1e-12
    assert abs(h1 - 0.5) < 1e-12 and abs(h2 - 0.8) < 1e-12


def test_theorem13_case_ii():
    cid, beta, h1, h2, _ = theorem13_case(0.35, 0.6, 0.8)
    assert cid == "ii"
    assert abs(beta - (1 + 1 / 0.7 + 1 / 0.8 - 1 / 1.2)) < 1e-12
    assert abs(h1 - (0.5 + 0.35 * (1 - 1 / 1.2))) < 1e-12
    assert h2 == 1.0


def test_theorem13_case_iii():
    cid, beta, h1, h2, _ = theorem13_case(0.35, 0.6, 0.4)
    assert cid == "iii"
    assert abs(beta - (1 + (1 / 0.35 + 1 / 0.4) / 2)) < 1e-12
    assert abs(h1 - 0.85) < 1e-12 and abs(h2 - 0.5) < 1e-12


def test_theorem13_case_iv():
    cid, beta, h1, h2, _ = theorem13_case(0.7, 0.6, 0.4)
    assert cid == "iv"
    expected = (0.6 / 0.4) * (1 - 1 / 1.4) + 1 / 0.7 + 1 / 0.8
    assert abs(beta - expected) < 1e-12
    assert h1 == 1.0
    assert abs(h2 - (0.5 + 0.6 * (1 - 1 / 1.4))) < 1e-12


def test_theorem13_boundaries_rejected():
    with pytest.raises(ConfigError):
        theorem13_case(0.35, 0.5, 0.8)      # alpha2 = 1/2 splits (i)/(ii)
    with pytest.raises(ConfigError):
        theorem13_case(0.5, 0.6, 0.4)       # alpha1 = 1/2 splits (iii)/(iv)
    with pytest.raises(ConfigError):
        theorem13_case(0.35, 0.6, 0.6)      # alpha2 = alpha2'


def test_fbs_detection():
    r = classify([0.35, 0.3], [0.35, 0.6])
    is_fbs, hurst = fbs_detect(r)
    assert is_fbs
    assert abs(hurst[0] - 0.5) < 1e-12       # independent axis
    assert abs(hurst[1] - 0.8) < 1e-12       # fractional, alpha + 1/2
    rc = classify([0.6, 0.6], [0.6, 0.6])
    assert not fbs_detect(rc)[0]


def test_fbs_hurst_with_invariant_axis():
    r = classify([0.35, 0.6], [0.35, 0.8])
    is_fbs, hurst = fbs_detect(r)
    assert is_fbs
    assert hurst[1] == 1.0                   # invariant axis
    assert abs(hurst[0] - (0.35 * (1 - 1 / 1.2) + 0.5)) < 1e-12


def test_holder_boundary_flag():
    r = classify([0.7, 0.5], [0.7, 0.5])
    exps, flags = holder_exponents(r)
    if "boundary" in flags[1]:
        assert exps[1] < 1.0
    # all exponents in (0, 1]
    assert all(0 < e <= 1 for e in exps)


def test_to_dict_stable_keys():
    keys = set(classify([0.3], [1.0]).to_dict())
    expected = {"alphas", "alpha_primes", "rhos", "valid", "reasons",
                "gamma0", "partition", "E_doubleprime", "H", "is_critical",
                "is_fbs", "hurst", "holder", "holder_flags",
                "increment_class", "warnings"}
    assert keys == expected


def test_bad_inputs():
    with pytest.raises(ConfigError):
        classify([1.0], [1.0])
    with pytest.raises(ConfigError):
        classify([0.3], [0.0])
    with pytest.raises(ConfigError):
        classify([0.3, 0.4], [0.3])
