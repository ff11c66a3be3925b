"""Step distributions on the positive lattice and their Fourier data.

The driving object is a probability measure mu on {1,2,...}^d.  Each lattice
site draws one step Z ~ mu and points to the site at i - Z.  The measure
enters the limit theory only through psi, a characteristic-function-like
object with log psi(x) = -sum_j gamma_j |x_j|^{alpha_j}
(1 - i sgn(x_j) tan(pi alpha_j / 2)), and through the Fourier transform
P(x) = E exp(i <Z, x>).

The default family is the product of discrete Pareto marginals with tail
P(Z_k >= n) = n^{-alpha_k}.  For that family 1 - P(x) ~ -log psi(x) as
x -> 0 exactly when gamma_k = Gamma(1 - alpha_k) cos(pi alpha_k / 2); the
`g_ratio` diagnostic measures how close the ratio is to 1 at a given scale.
"""

import math

import numpy as np
import mpmath

from .errors import ConfigError
from . import rng

_STEP_CAP = 2.0**62  # steps larger than any box we simulate; clipped


def gamma_default(alpha):
    """Tail calibration Gamma(1-alpha) * cos(pi*alpha/2), per axis."""
    alpha = np.asarray(alpha, dtype=float)
    return math.gamma(1.0) * np.array(
        [math.gamma(1.0 - a) * math.cos(math.pi * a / 2.0) for a in np.atleast_1d(alpha)]
    )


class ParetoProductModel:
    """Product measure with discrete Pareto marginals P(Z_k >= n) = n^-alpha_k.

    Parameters
    ----------
    alpha : sequence of float, each in (0, 1)
        Per-axis tail exponents.
    gamma : sequence of float, optional
        Per-axis scale constants in log psi.  Default is the calibration
        Gamma(1-alpha_k) cos(pi alpha_k / 2), which makes
        |log psi| / |1 - P| -> 1 at the origin.
    p : float in (0, 1)
        Probability that a component's sign is +1.  Default 1/2.
    """

    def __init__(self, alpha, gamma=None, p=0.5):
        self.alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        if self.alpha.ndim != 1 or self.alpha.size == 0:
            raise ConfigError("alpha must be a non-empty 1-d sequence")
        if np.any(self.alpha <= 0.0) or np.any(self.alpha >= 1.0):
            raise ConfigError("each alpha_k must lie strictly inside (0, 1)")
        if gamma is None:
            self.gamma = gamma_default(self.alpha)
        else:
            self.gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
            if self.gamma.shape != self.alpha.shape or np.any(self.gamma <= 0.0):
                raise ConfigError("gamma must be positive, one entry per axis")
        if not (0.0 < p < 1.0):
            raise ConfigError("sign bias p must lie strictly inside (0, 1)")
        self.p = float(p)

    @property
    def d(self):
        return self.alpha.size

    @property
    def trace_exponent(self):
        """q(E) = sum_k 1/alpha_k."""
        return float(np.sum(1.0 / self.alpha))

    @property
    def is_transient(self):
        """True when the ancestral walk is transient, i.e. q(E) > 2.

        Transience is what makes the graph split into infinitely many
        components and Var(X) finite; everything downstream assumes it.
        """
        return self.trace_exponent > 2.0

    # -- spectral side -----------------------------------------------------

    def log_psi(self, x):
        """log psi at points x (shape (..., d) or scalar when d == 1)."""
        x = self._as_points(x)
        a = self.alpha
        mag = self.gamma * np.abs(x) ** a
        phase = np.sign(x) * np.tan(np.pi * a / 2.0)
        return -np.sum(mag * (1.0 - 1j * phase), axis=-1)

    def psi(self, x):
        return np.exp(self.log_psi(x))

    def one_minus_P(self, x):
        """1 - P(x) evaluated exactly (analytic continuation of the series).

        Per axis, Abel summation of p_n = n^-a - (n+1)^-a gives
        1 - P_k(x) = (1 - z) Li_a(z) / z with z = e^{ix}, Li_a the
        polylogarithm.  The d-dimensional value is 1 - prod_k P_k(x_k).
        """
        x = self._as_points(x)
        flat = x.reshape(-1, self.d)
        out = np.empty(flat.shape[0], dtype=complex)
        for i, pt in enumerate(flat):
            prod = 1.0 + 0.0j
            for a, xk in zip(self.alpha, pt):
                prod *= self._axis_P_exact(a, float(xk))
            out[i] = 1.0 - prod
        return out.reshape(x.shape[:-1]) if x.shape[:-1] else out[0]

    @staticmethod
    def _axis_P_exact(a, xk):
        if xk == 0.0 or (xk % (2.0 * math.pi)) == 0.0:
            return 1.0 + 0.0j
        z = complex(mpmath.exp(1j * xk))
        li = complex(mpmath.polylog(a, mpmath.exp(1j * xk)))
        return 1.0 - (1.0 - z) * li / z

    def fourier_P(self, x, truncation):
        """Truncated series for P(x) over the box [1, truncation]^d.

        Returns (values, neglected_mass) where neglected_mass is the mu-mass
        outside the box: 1 - prod_k (1 - (truncation+1)^-alpha_k).
        """
        x = self._as_points(x)
        n = np.arange(1, truncation + 1, dtype=float)
        val = np.ones(x.shape[:-1], dtype=complex) if x.shape[:-1] else np.ones((), dtype=complex)
        for k, a in enumerate(self.alpha):
            pk = n ** (-a) - (n + 1.0) ** (-a)
            xk = x[..., k]
            val = val * np.tensordot(np.exp(1j * np.multiply.outer(xk, n)), pk, axes=(-1, 0))
        tail = 1.0 - np.prod(1.0 - (truncation + 1.0) ** (-self.alpha))
        return val, float(tail)

    def g_ratio(self, t, theta=None):
        """|log psi(x)| / |1 - P(x)| at x_k = t^{-1/alpha_k} theta_k.

        Tends to 1 as t -> infinity when gamma is the default calibration;
        the deviation at finite t measures how well the spectral model
        represents the step measure at that scale.
        """
        if theta is None:
            theta = np.ones(self.d)
        theta = np.asarray(theta, dtype=float)
        x = float(t) ** (-1.0 / self.alpha) * theta
        num = np.abs(self.log_psi(x))
        den = np.abs(self.one_minus_P(x))
        return float(num / den)

    # -- sampling side -----------------------------------------------------

    def steps_from_uniforms(self, u):
        """Map uniforms on (0,1] (shape (..., d)) to steps floor(U^{-1/a}).

        P(Z_k >= n) = n^{-alpha_k} exactly (to within one part in 2^53).
        Steps are clipped at 2^62, far beyond any simulable box, so the
        clip never changes which sites coalesce.
        """
        u = np.asarray(u, dtype=float)
        z = np.floor(np.minimum(u ** (-1.0 / self.alpha), _STEP_CAP))
        return z.astype(np.int64)

    def sample_steps(self, seed, coords):
        """Steps at lattice points: one int64 array per axis.

        coords is a tuple of d integer arrays (one per axis, broadcastable).
        The step on axis k at point i is a pure function of (seed, k, i).
        """
        out = []
        for k in range(self.d):
            u = rng.point_uniforms(seed, rng.TAG_STEP + k, *coords)
            z = np.floor(np.minimum(u ** (-1.0 / self.alpha[k]), _STEP_CAP))
            out.append(z.astype(np.int64))
        return out

    def axis_pmf(self, k, extent):
        """pmf of Z_k on 1..extent: n^-a - (n+1)^-a."""
        n = np.arange(1, extent + 1, dtype=float)
        a = self.alpha[k]
        return n ** (-a) - (n + 1.0) ** (-a)

    def axis_tail(self, k, extent):
        """P(Z_k > extent) = (extent+1)^-alpha_k."""
        return float((extent + 1.0) ** (-self.alpha[k]))

    # -- helpers -----------------------------------------------------------

    def _as_points(self, x):
        x = np.asarray(x, dtype=float)
        if self.d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., np.newaxis]
        if x.shape[-1] != self.d:
            raise ConfigError("points must have %d coordinates in the last axis" % self.d)
        return x

    def __repr__(self):
        return "ParetoProductModel(alpha=%s, gamma=%s, p=%s)" % (
            list(self.alpha), list(np.round(self.gamma, 12)), self.p)


class TableModel:
    """Product measure given by explicit per-axis pmf tables.

    axis_pmfs is a list of 1-d arrays; entry j of table k is
    P(Z_k = j + 1).  Tables may be sub-probability (mass at larger values
    is treated as 'escapes any finite box').  No spectral data is attached;
    this model drives the exact combinatorial layers (ancestry tables,
    simulation) in tests and diagnostics.
    """

    def __init__(self, axis_pmfs, p=0.5):
        self.tables = [np.asarray(t, dtype=float) for t in axis_pmfs]
        for t in self.tables:
            if t.ndim != 1 or t.size == 0 or np.any(t < 0) or t.sum() > 1.0 + 1e-12:
                raise ConfigError("each axis pmf must be non-negative with mass <= 1")
        if not (0.0 < p < 1.0):
            raise ConfigError("sign bias p must lie strictly inside (0, 1)")
        self.p = float(p)
        self._cdfs = [np.cumsum(t) for t in self.tables]

    @property
    def d(self):
        return len(self.tables)

    def steps_from_uniforms(self, u):
        u = np.asarray(u, dtype=float)
        out = np.empty(u.shape, dtype=np.int64)
        for k, cdf in enumerate(self._cdfs):
            # mass beyond the table maps to a step larger than the table
            out[..., k] = np.searchsorted(cdf, u[..., k], side="left") + 1
        return out

    def sample_steps(self, seed, coords):
        out = []
        for k, cdf in enumerate(self._cdfs):
            u = rng.point_uniforms(seed, rng.TAG_STEP + k, *coords)
            out.append(np.searchsorted(cdf, u, side="left").astype(np.int64) + 1)
        return out

    def axis_pmf(self, k, extent):
        t = self.tables[k]
        out = np.zeros(extent, dtype=float)
        m = min(extent, t.size)
        out[:m] = t[:m]
        return out

    def axis_tail(self, k, extent):
        t = self.tables[k]
        return float(max(0.0, 1.0 - t[: min(extent, t.size)].sum()))

    def one_minus_P(self, x):
        x = np.asarray(x, dtype=float)
        if self.d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., np.newaxis]
        prod = np.ones(x.shape[:-1], dtype=complex)
        for k, t in enumerate(self.tables):
            n = np.arange(1, t.size + 1, dtype=float)
            prod = prod * np.tensordot(np.exp(1j * np.multiply.outer(x[..., k], n)), t, axes=(-1, 0))
        return 1.0 - prod


# -- module-level ops ---------------------------------------------------

def log_psi(model, x):
    return model.log_psi(x)


def pmf(model, k):
    """Probability of the single step k in N*^d."""
    k = np.atleast_1d(np.asarray(k))
    if k.shape != (model.d,):
        raise ConfigError("step must be a lattice vector of length %d" % model.d)
    if np.any(k != np.floor(k)) or np.any(k < 1):
        raise ConfigError("step components must be positive integers")
    val = 1.0
    for ax, n in enumerate(k.astype(np.int64)):
        val *= float(model.axis_pmf(ax, int(n))[int(n) - 1])
    return val


def sample_step(model, seed, index=0):
    """One step vector from the named stream (seed, index)."""
    coords = [np.asarray([index])] * model.d
    parts = model.sample_steps(int(seed), coords)
    return tuple(int(p[0]) for p in parts)


def fourier_P(model, x, truncation):
    return model.fourier_P(x, truncation)


def g_ratio_check(model, directions, scales):
    """Table of |1 - P(t^{-E} theta)| / |log psi(t^{-E} theta)|.

    Rows are scales, columns directions.  Ratios drift toward 1 as the
    scale grows exactly when the gamma weights match the step tails; this
    is the calibration witness (the exact-series route is used for 1-P,
    so no truncation tail enters).
    """
    scales = np.asarray(scales, dtype=float)
    if np.any(np.diff(scales) <= 0):
        raise ConfigError("scales must be increasing")
    table = np.empty((scales.size, len(directions)))
    for j, theta in enumerate(directions):
        theta = np.asarray(theta, dtype=float)
        for i, t in enumerate(scales):
            xv = t ** (-1.0 / model.alpha) * theta
            table[i, j] = abs(model.one_minus_P(xv)) / abs(model.log_psi(xv))
    return table


def local_integrability_flag(alphas, power):
    """Whether |log psi|^{-power} is locally integrable at 0: q(E) > power."""
    if power <= 0:
        raise ConfigError("power must be positive")
    return float(np.sum(1.0 / np.asarray(alphas, dtype=float))) > power
