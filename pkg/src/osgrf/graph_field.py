"""Simulation of the random ancestor graph and its +-1 field.

Every lattice site i draws one backward step Z_i and points to i - Z_i.
Following these edges partitions the lattice into tree components; each
component carries a single +-1 sign, and the field value at a site is its
component's sign.

The step at a site is a pure function of (seed, site), so any two
simulations with the same seed agree wherever they overlap.  A window
simulation materializes the whole box [origin - D, origin + extents - 1],
samples every edge at once, resolves each site's in-box root by pointer
doubling (ancestors are strictly smaller in every coordinate, so chains
have no cycles), and draws the sign from the root's coordinates.  Chains
are truncated where they leave the box; a deeper buffer D moves that
truncation farther from the window.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ConfigError, ResourceBudgetError

DEFAULT_SITE_BUDGET = 10 ** 8


@dataclass
class FieldWindow:
    extents: tuple
    buffer_depth: int
    seed: int
    origin: tuple
    values: np.ndarray          # int8, shape extents
    component_id: np.ndarray    # int64, shape extents
    n_components: int
    truncated_components: int
    p: float

    @property
    def d(self):
        return len(self.extents)


def simulate_window(model, extents, buffer_depth, seed,
                    origin=None, site_budget=DEFAULT_SITE_BUDGET):
    """Simulate the field on origin + [0, extents-1]^d with buffer depth D.

    The box extends D sites below the window on every axis; ancestral
    chains that leave the box are truncated there (their last in-box site
    becomes a component root).  Truncation can only split components, never
    merge them, so pair correlations are biased low by an amount controlled
    by the ancestry-table tail.
    """
    extents = tuple(int(n) for n in np.atleast_1d(extents))
    d = len(extents)
    if model.d != d:
        raise ConfigError("extents must have one entry per model axis")
    if any(n < 1 for n in extents) or buffer_depth < 1:
        raise ConfigError("extents and buffer_depth must be >= 1")
    origin = tuple(int(o) for o in (origin or (0,) * d))
    box_shape = tuple(n + buffer_depth for n in extents)
    n_sites = int(np.prod([float(b) for b in box_shape]))
    if n_sites > site_budget:
        raise ResourceBudgetError(
            "box of %d sites exceeds the %d-site budget" % (n_sites, site_budget))
    lo = tuple(o - buffer_depth for o in origin)

    coords = []
    for ax in range(d):
        shape = [1] * d
        shape[ax] = box_shape[ax]
        coords.append((lo[ax] + np.arange(box_shape[ax], dtype=np.int64))
                      .reshape(shape))
    steps = model.sample_steps(seed, coords)

    inside = np.ones(box_shape, dtype=bool)
    anc_idx = []
    for ax in range(d):
        idx = coords[ax] - lo[ax] - steps[ax]
        inside &= idx >= 0
        anc_idx.append(idx)
    own = np.arange(np.prod(box_shape), dtype=np.int64)
    anc = np.ravel_multi_index(
        tuple(np.clip(a, 0, None) for a in anc_idx), box_shape,
        mode="clip").ravel()
    parent = np.where(inside.ravel(), anc, own)

    for _ in range(64):
        nxt = parent[parent]
        if np.array_equal(nxt, parent):
            break
        parent = nxt
    else:
        raise RuntimeError("pointer doubling failed to stabilize")

    root_coords = np.unravel_index(parent, box_shape)
    root_coords = [rc.astype(np.int64) + lo[ax] for ax, rc in enumerate(root_coords)]
    u = rng.point_uniforms(seed, rng.TAG_SIGN, *root_coords)
    values = np.where(u <= model.p, 1, -1).astype(np.int8).reshape(box_shape)

    window_sl = tuple(slice(buffer_depth, None) for _ in range(d))
    win_parent = parent.reshape(box_shape)[window_sl]
    roots, comp = np.unique(win_parent, return_inverse=True)
    root_pos = np.unravel_index(roots, box_shape)
    truncated = int(np.sum(np.any(
        np.stack([rp < buffer_depth for rp in root_pos]), axis=0)))
    return FieldWindow(
        extents=extents, buffer_depth=int(buffer_depth), seed=int(seed),
        origin=origin,
        values=values[window_sl].copy(),
        component_id=comp.reshape(extents),
        n_components=int(roots.size),
        truncated_components=truncated,
        p=model.p,
    )


@dataclass
class PartialSumGrid:
    t_grid: list
    sums: np.ndarray
    centered: np.ndarray
    extents: tuple
    seed: int


def partial_sums(window, t_grid):
    """Rectangular partial sums S(t) = sum of values over [0, ceil(n t)-1].

    t_grid is a list of points in (0, 1]^d.  Centered values subtract the
    exact mean (2p-1) * prod ceil(n_k t_k).
    """
    vals = window.values.astype(np.float64)
    prefix = vals
    for ax in range(window.d):
        prefix = np.cumsum(prefix, axis=ax)
    sums = np.empty(len(t_grid))
    centered = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if t.size != window.d or np.any(t <= 0) or np.any(t > 1):
            raise ConfigError("t-grid points must lie in (0, 1]^d")
        m = np.ceil(np.asarray(window.extents) * t).astype(np.int64)
        sums[i] = prefix[tuple(m - 1)]
        centered[i] = sums[i] - (2.0 * window.p - 1.0) * np.prod(m)
    return PartialSumGrid(t_grid=list(t_grid), sums=sums, centered=centered,
                          extents=window.extents, seed=window.seed)


def estimate_var_xstar(model, replicas, lags, seed, buffer_depth=None,
                       batch=None, site_budget=DEFAULT_SITE_BUDGET):
    """Monte Carlo variance of the innovation X*_0 = X_0 - E[X_0 | past].

    The conditional mean is sum over steps z of pmf(z) X_{-z}, truncated to
    z within [1, lags]^d; each replica simulates the field on
    [-lags - buffer, 0]^d.  Returns (estimate, SE, truncation_bound) where
    the bound is the crude 4 * (pmf tail mass) allowance; the actual bias
    is quadratically smaller because the discarded terms are uncorrelated
    with the retained innovation.
    """
    k = int(lags)
    d = model.d
    buffer_depth = int(buffer_depth if buffer_depth is not None else k)
    if d == 1:
        return _var_xstar_1d(model, replicas, k, seed, buffer_depth, batch,
                             site_budget)
    # generic path: one window per replica (small lags only)
    w = np.ones([k] * d)
    for ax in range(d):
        shp = [1] * d
        shp[ax] = k
        w = w * model.axis_pmf(ax, k).reshape(shp)
    samples = np.empty(replicas)
    for r in range(replicas):
        win = simulate_window(model, (k + 1,) * d, buffer_depth,
                              rng.derive_seed(seed, r),
                              origin=(-k,) * d, site_budget=site_budget)
        x = win.values.astype(np.float64)
        x0 = x[(-1,) * d]
        past = x[tuple(slice(-2, None, -1) for _ in range(d))][
            tuple(slice(0, k) for _ in range(d))]
        samples[r] = x0 - np.sum(w * past)
    return _var_summary(model, samples, k)


def _var_xstar_1d(model, replicas, k, seed, buffer_depth, batch, site_budget):
    length = k + buffer_depth + 1
    if batch is None:
        batch = max(1, min(replicas, (1 << 22) // length or 1))
    lo = -(k + buffer_depth)
    cols = np.arange(length, dtype=np.int64)
    coords = lo + cols
    pmf = model.axis_pmf(0, k)
    samples = np.empty(replicas)
    done = 0
    while done < replicas:
        b = min(batch, replicas - done)
        if b * length > site_budget:
            raise ResourceBudgetError("replica batch exceeds the site budget")
        seeds = np.array([rng.derive_seed(seed, done + r) for r in range(b)],
                         dtype=np.uint64)[:, None]
        z = model.steps_from_uniforms(
            rng.uniform_from_hash(rng.hash_point(seeds, rng.TAG_STEP, coords[None, :]))
            [..., None])[..., 0]
        parent_col = cols[None, :] - z
        parent = np.where(parent_col >= 0, parent_col, cols[None, :])
        for _ in range(64):
            nxt = np.take_along_axis(parent, parent, axis=1)
            if np.array_equal(nxt, parent):
                break
            parent = nxt
        root_coord = lo + parent
        u = rng.uniform_from_hash(rng.hash_point(seeds, rng.TAG_SIGN, root_coord))
        x = np.where(u <= model.p, 1.0, -1.0)
        cond = x[:, -2::-1][:, :k] @ pmf
        samples[done : done + b] = x[:, -1] - cond
        done += b
    return _var_summary(model, samples, k)


def _var_summary(model, samples, k):
    tail = 1.0 - np.prod([model.axis_pmf(ax, k).sum() for ax in range(model.d)])
    est = float(np.var(samples))
    se = float(np.std((samples - samples.mean()) ** 2) / np.sqrt(samples.size))
    return est, se, 4.0 * float(tail)


def estimate_meeting_prob(model, m, replicas, depth, seed):
    """Monte Carlo P(the ancestral lines of 0 and m meet within `depth`).

    Both lines live in the same sampled graph: the step at a lattice point
    is the shared hash stream, so once the lines collide they coalesce.
    Truncation at depth can only miss meetings, biasing the estimate low.
    Returns (estimate, SE).
    """
    m = tuple(int(v) for v in np.atleast_1d(m))
    d = model.d
    if len(m) != d:
        raise ConfigError("offset must have one entry per axis")
    hits = 0
    for r in range(replicas):
        sr = rng.derive_seed(seed, r)
        if m == (0,) * d:
            hits += 1
            continue
        line0 = set()
        pt = (0,) * d
        while all(c >= -depth for c in pt):
            line0.add(pt)
            step = model.sample_steps(sr, [np.int64(c) for c in pt])
            pt = tuple(int(pt[ax] - step[ax]) for ax in range(d))
        pt = m
        while all(c >= -depth for c in pt):
            if pt in line0:
                hits += 1
                break
            step = model.sample_steps(sr, [np.int64(c) for c in pt])
            pt = tuple(int(pt[ax] - step[ax]) for ax in range(d))
    phat = hits / replicas
    se = float(np.sqrt(max(phat * (1.0 - phat), 1.0 / replicas) / replicas))
    return phat, se
