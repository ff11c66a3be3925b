"""Replica orchestration and statistical verdicts.

Runs batches of window simulations across an n-schedule, normalizes the
centered partial sums by n^H, and compares their empirical covariance on a
t-grid against the analytic limit covariance, with jackknife standard
errors, z-scores, trend ratios, and Gaussianity statistics.

Everything is deterministic in (plan, seed): per-(n, replica) streams are
derived by counter-based mixing, results are reduced in replica order, and
reports contain no wall-clock data, so reruns are byte-identical for any
worker count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import stats

from . import rng
from .errors import ConfigError
from .spectral import ParetoProductModel
from .graph_field import simulate_window, partial_sums, estimate_var_xstar, \
    estimate_meeting_prob
from .qtable import build_qtable, sigma_x2, pair_meeting_prob
from .regime import classify
from .limit_field import LimitCovariance

SCHEMA_VERSION = 1
KS_CRIT_1PCT = 1.6276  # 1% critical value of sqrt(n) * KS distance


@dataclass
class ExperimentPlan:
    alphas: tuple
    alpha_primes: tuple
    n_schedule: tuple
    replicas: int
    t_grid: list
    seed: int
    p: float = 0.5
    gammas: tuple = None
    qtable_extent: int = 2048
    buffer_factor: float = 1.0
    gauss_replicas: int = 0          # extra replicas for the KS test at max n
    workers: int = 1
    var_rel_tolerance: float = 0.15
    z_tolerance: float = 4.0
    site_budget: int = 10 ** 8

    def validate(self):
        if len(self.n_schedule) == 0 or list(self.n_schedule) != sorted(
                set(int(n) for n in self.n_schedule)):
            raise ConfigError("n-schedule must be strictly increasing")
        if self.replicas < 2:
            raise ConfigError("need at least 2 replicas")
        if self.seed is None:
            raise ConfigError("seed is required")
        return self


@dataclass
class VerdictReport:
    schema_version: int
    plan: dict
    regime: dict
    sigma2: float
    targets: list                 # covariance targets over t-grid pairs
    per_n: list                   # one dict per n
    passed: bool
    runtime_meta: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def window_extents(n, alpha_primes):
    # the tiny slack keeps exact powers (e.g. 64^(1/0.6) = 1024) from
    # rounding up on float noise
    return tuple(int(math.ceil(n ** (1.0 / a) - 1e-9)) for a in alpha_primes)


def _replica_sums(args):
    """Worker: one window simulation reduced to its t-grid sums."""
    (alphas, gammas, p, extents, buffer_depth, seed, t_grid, site_budget) = args
    model = ParetoProductModel(alphas, gamma=gammas, p=p)
    win = simulate_window(model, extents, buffer_depth, seed,
                          site_budget=site_budget)
    return partial_sums(win, t_grid).centered


def _simulate_batch(plan, model, n_index, extents, buffer_depth, n_replicas,
                    replica_offset=0):
    seed_n = rng.derive_seed(plan.seed, n_index)
    tasks = [(plan.alphas, plan.gammas, plan.p, extents, buffer_depth,
              rng.derive_seed(seed_n, replica_offset + r), plan.t_grid,
              plan.site_budget)
             for r in range(n_replicas)]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            rows = list(pool.map(_replica_sums, tasks, chunksize=8))
    else:
        rows = [_replica_sums(t) for t in tasks]
    return np.array(rows)


def jackknife_se(samples):
    """Jackknife SE of the mean of `samples` (any 1-d array)."""
    n = samples.shape[0]
    total = samples.sum(axis=0)
    loo = (total - samples) / (n - 1)
    center = loo.mean(axis=0)
    return np.sqrt((n - 1) / n * np.sum((loo - center) ** 2, axis=0))


def gaussianity_test(samples):
    """(skewness, excess kurtosis, KS distance, passed) for standardized data.

    Samples are standardized by their own mean and SD; the KS distance is
    measured against the standard normal, with the 1% critical value
    1.6276/sqrt(n).  Degenerate samples are flagged, not raised.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 100:
        raise ConfigError("need at least 100 samples")
    sd = x.std()
    if sd == 0.0:
        return {"skewness": 0.0, "kurtosis": 0.0, "ks": float("nan"),
                "passed": False, "degenerate": True}
    z = (x - x.mean()) / sd
    ks = float(stats.kstest(z, "norm").statistic)
    return {
        "skewness": float(stats.skew(z)),
        "kurtosis": float(stats.kurtosis(z)),
        "ks": ks,
        "ks_critical": KS_CRIT_1PCT / math.sqrt(x.size),
        "passed": bool(ks < KS_CRIT_1PCT / math.sqrt(x.size)),
        "degenerate": False,
    }


def run_invariance_experiment(plan):
    """Empirical-vs-analytic covariance verdicts across the n-schedule."""
    plan.validate()
    report = classify(plan.alphas, plan.alpha_primes)
    if not report.valid:
        raise ConfigError("invalid regime: %s" % "; ".join(report.reasons))
    model = ParetoProductModel(plan.alphas, gamma=plan.gammas, p=plan.p)
    qt = build_qtable(model, plan.qtable_extent)
    sigma2 = sigma_x2(qt, plan.p)
    engine = LimitCovariance(report, model, sigma2=sigma2)
    t_grid = [tuple(float(v) for v in np.atleast_1d(t)) for t in plan.t_grid]
    n_t = len(t_grid)
    pairs = [(i, j) for i in range(n_t) for j in range(i, n_t)]
    targets = [engine.cov(t_grid[i], t_grid[j]) for i, j in pairs]

    per_n = []
    passed = True
    prev_relerr = None
    for n_index, n in enumerate(plan.n_schedule):
        extents = window_extents(n, plan.alpha_primes)
        buffer_depth = max(1, int(round(plan.buffer_factor * max(extents))))
        rows = _simulate_batch(plan, model, n_index, extents, buffer_depth,
                               plan.replicas)
        norm = float(n) ** report.H
        y = rows / norm
        entry = {"n": int(n), "extents": list(extents),
                 "buffer_depth": buffer_depth, "pairs": []}
        max_abs_z = 0.0
        for (i, j), target in zip(pairs, targets):
            prod = y[:, i] * y[:, j]
            emp = float(prod.mean())
            se = float(jackknife_se(prod))
            z = (emp - target) / se if se > 0 else float("inf")
            max_abs_z = max(max_abs_z, abs(z))
            entry["pairs"].append({
                "t": list(t_grid[i]), "s": list(t_grid[j]),
                "empirical": emp, "se": se, "target": target, "z": z})
        # variance trend at the last grid point (conventionally t = 1-vector)
        var_pair = entry["pairs"][-1]
        relerr = abs(var_pair["empirical"] / var_pair["target"] - 1.0) \
            if var_pair["target"] != 0 else 0.0
        entry["var_rel_error"] = relerr
        entry["max_abs_z"] = max_abs_z
        entry["centering_ok"] = bool(np.all(
            np.abs(y.mean(axis=0)) <= 4.0 * jackknife_se(y) + 1e-300))
        if n_index == len(plan.n_schedule) - 1:
            gauss_rows = rows[:, -1]
            if plan.gauss_replicas > plan.replicas:
                extra = _simulate_batch(plan, model, n_index, extents,
                                        buffer_depth,
                                        plan.gauss_replicas - plan.replicas,
                                        replica_offset=plan.replicas)
                gauss_rows = np.concatenate([gauss_rows, extra[:, -1]])
            entry["gaussianity"] = gaussianity_test(gauss_rows / norm)
            if relerr > plan.var_rel_tolerance or max_abs_z > plan.z_tolerance:
                passed = False
            if not entry["gaussianity"]["passed"]:
                passed = False
        prev_relerr = relerr
        per_n.append(entry)

    return VerdictReport(
        schema_version=SCHEMA_VERSION,
        plan={"alphas": list(plan.alphas), "alpha_primes": list(plan.alpha_primes),
              "n_schedule": [int(n) for n in plan.n_schedule],
              "replicas": plan.replicas, "t_grid": [list(t) for t in t_grid],
              "seed": plan.seed, "p": plan.p,
              "qtable_extent": plan.qtable_extent,
              "gauss_replicas": plan.gauss_replicas},
        regime=report.to_dict(),
        sigma2=sigma2,
        targets=targets,
        per_n=per_n,
        passed=passed,
        # worker count and wall time live in the CLI manifest, not here:
        # the report must be byte-identical for any parallelization.
        runtime_meta={"schema": SCHEMA_VERSION},
    )


def verify_identities(model, replicas=2000, lags=4096, offsets=(8, 32, 128),
                      depth=4096, qtable_extent=4096, seed=1):
    """Bundle of exact-identity Monte Carlo checks against the q-table.

    Returns a dict with the innovation-variance comparison and the
    meeting-probability comparisons (z-scores; meeting probabilities are
    one-sided-biased low by truncation).
    """
    qt = build_qtable(model, qtable_extent)
    out = {"var_xstar": {}, "meeting": []}
    est, se, bound = estimate_var_xstar(model, replicas, lags,
                                        rng.derive_seed(seed, 101))
    target = 4.0 * model.p * (1.0 - model.p) / qt.sum_sq
    out["var_xstar"] = {"estimate": est, "se": se, "target": target,
                        "truncation_bound": bound,
                        "z": (est - target) / se if se > 0 else float("inf")}
    for i, m in enumerate(offsets):
        mp = pair_meeting_prob(qt, (m,) * model.d)
        phat, pse = estimate_meeting_prob(model, (m,) * model.d,
                                          replicas, depth,
                                          rng.derive_seed(seed, 202 + i))
        out["meeting"].append({
            "offset": int(m), "estimate": phat, "se": pse,
            "target": mp.value, "residual_bound": mp.residual_bound,
            "z": (phat - mp.value) / pse if pse > 0 else float("inf")})
    return out
