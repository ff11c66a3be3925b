"""Ancestry-probability tables and exact pre-limit covariances.

q_k = P(the origin is an ancestor of site k) satisfies the renewal-type
recursion q_k = sum_j mu({j}) q_{k-j} with q_0 = 1 and q vanishing off the
nonnegative orthant.  Everything second-order about the sign field flows
through these tables:

* sum_k q_k^2 normalizes the variance of the innovation X*_0,
* the probability that two ancestral lines meet is a q-correlation,
* the centered partial sum over a box is sum_j b_j X*_j with window
  coefficients b_j that are box sums of q.

Tables are exact (up to float rounding) for the pmf truncated to the table
box; the mass outside the box is carried along as `tail_mass`.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal
from numpy.polynomial import legendre

from .errors import ConfigError, QuadratureError


@dataclass
class QTable:
    """Ancestry probabilities on the box [0, extent]^d.

    values[k] = P(0 is an ancestor of site k) under the pmf truncated to
    steps in [1, extent]^d.  tail_mass is the pmf mass thrown away by that
    truncation (zero when the measure is supported inside the box).
    """

    values: np.ndarray
    extent: int
    tail_mass: float
    axis_pmfs: list = field(repr=False)

    @property
    def d(self):
        return self.values.ndim

    @property
    def sum_sq(self):
        return float(np.sum(self.values ** 2))


def build_qtable(model, extent):
    """Build the ancestry table for `model` on [0, extent]^d (d <= 2)."""
    if extent < 1:
        raise ConfigError("extent must be >= 1")
    d = model.d
    pmfs = [model.axis_pmf(k, extent) for k in range(d)]
    tail = 1.0 - float(np.prod([p.sum() for p in pmfs]))
    if d == 1:
        q = _build_1d(pmfs[0], extent)
    elif d == 2:
        q = _build_2d(pmfs[0], pmfs[1], extent)
    else:
        raise ConfigError("ancestry tables are implemented for d <= 2")
    return QTable(values=q, extent=extent, tail_mass=max(tail, 0.0), axis_pmfs=pmfs)


def _build_1d(p, n):
    q = np.zeros(n + 1)
    q[0] = 1.0
    for k in range(1, n + 1):
        q[k] = np.dot(p[:k], q[k - 1 :: -1])
    return q


def _build_2d(a, b, n):
    # column recursion: q[:, k2] = conv(a, sum_{j2<=k2} b[j2-1] * q[:, k2-j2]).
    # Steps have both coordinates >= 1, so column k2 only needs earlier
    # columns and the axis-1 convolution shifts everything up by >= 1.
    q = np.zeros((n + 1, n + 1))
    q[0, 0] = 1.0
    for k2 in range(1, n + 1):
        w = q[:, k2 - 1 :: -1][:, :k2] @ b[:k2]
        if n > 512:
            q[1:, k2] = signal.fftconvolve(a, w)[:n]
        else:
            q[1:, k2] = np.convolve(a, w)[:n]
    return q


def sigma_x2(qtable, p):
    """Variance of the limit field's unit load: 4 p (1-p) / sum_k q_k^2."""
    return 4.0 * p * (1.0 - p) / qtable.sum_sq


@dataclass
class MeetingProb:
    value: float
    residual_bound: float


def pair_meeting_prob(qtable, m):
    """P(the ancestral lines of 0 and m meet) = sum_k q_k q_{k+m} / sum q^2.

    Only terms with both indices inside the table are summed; the reported
    residual bound covers the numerator terms whose shifted index k+m falls
    outside, bounded by (max q on the table's far shell) * (q-mass of the
    strip left uncovered).
    """
    q = qtable.values
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    if m.size != qtable.d or np.any(m < 0):
        raise ConfigError("offset m must be a nonnegative vector, one entry per axis")
    n = qtable.extent
    if np.any(m > n):
        raise ConfigError("offset exceeds table extent")
    lo = tuple(slice(0, n + 1 - mk) for mk in m)
    hi = tuple(slice(mk, n + 1) for mk in m)
    num = float(np.sum(q[lo] * q[hi]))
    # far shell: indices with some coordinate in the top m_k band
    strip = np.ones(q.shape, dtype=bool)
    strip[lo] = False
    shell = np.zeros(q.shape, dtype=bool)
    for axis, mk in enumerate(m):
        if mk > 0:
            idx = [slice(None)] * qtable.d
            idx[axis] = slice(n + 1 - mk, n + 1)
            shell[tuple(idx)] = True
    edge = float(q[shell].max()) if shell.any() else 0.0
    residual = edge * float(q[strip].sum())
    return MeetingProb(value=num / qtable.sum_sq, residual_bound=residual)


# -- Parseval cross-check ---------------------------------------------------

@dataclass
class ParsevalReport:
    sum_side: float
    integral_side: float
    rel_discrepancy: float
    quadrature_error: float


def _dyadic_axis_nodes(order, levels):
    """Gauss-Legendre nodes/weights on dyadic bands of (0, pi], both signs."""
    gx, gw = legendre.leggauss(order)
    xs, ws = [], []
    hi = np.pi
    for _ in range(levels):
        lo = hi / 2.0
        c, h = (hi + lo) / 2.0, (hi - lo) / 2.0
        xs.append(c + h * gx)
        ws.append(h * gw)
        hi = lo
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    return np.concatenate([x, -x]), np.concatenate([w, w])


def _axis_poly(pmf, x):
    """sum_n pmf[n-1] e^{inx} evaluated at nodes x."""
    n = np.arange(1, pmf.size + 1, dtype=float)
    return np.exp(1j * np.multiply.outer(x, n)) @ pmf


def _parseval_integral(pmfs, order, levels):
    nodes = [_dyadic_axis_nodes(order, levels) for _ in pmfs]
    polys = [_axis_poly(p, x) for p, (x, _) in zip(pmfs, nodes)]
    if len(pmfs) == 1:
        x, w = nodes[0]
        f = np.abs(1.0 - polys[0]) ** (-2.0)
        return float(np.dot(w, f)) / (2.0 * np.pi), f, nodes
    if len(pmfs) == 2:
        (x1, w1), (x2, w2) = nodes
        p1 = polys[0][:, None]
        p2 = polys[1][None, :]
        f = np.abs(1.0 - p1 * p2) ** (-2.0)
        return float(w1 @ f @ w2) / (2.0 * np.pi) ** 2, f, nodes
    raise ConfigError("identity check implemented for d <= 2")


def parseval_check(qtable, levels=48, order=16, rtol=1e-3):
    """Compare sum_k q_k^2 against (2 pi)^-d int |1 - P(x)|^-2 dx.

    Both sides use the same truncated pmf.  The integral is computed on a
    dyadic Gauss-Legendre grid refined toward the origin, where |1-P| is
    smallest; the quadrature error is estimated by halving the per-band
    order.  A non-integrable origin singularity (full-mass pmf with no
    truncation defect, i.e. a recurrent-range ancestry walk) makes the
    refinement diverge and raises QuadratureError.
    """
    pmfs = qtable.axis_pmfs
    coarse, _, _ = _parseval_integral(pmfs, max(order // 2, 2), levels)
    fine, f, nodes = _parseval_integral(pmfs, order, levels)
    # origin truncation: innermost cell-scale residual, bounded by value at
    # the innermost nodes times the remaining measure around 0
    inner = float(np.max(f)) * (2.0 * np.pi * 2.0 ** (-levels)) ** len(pmfs) \
        / (2.0 * np.pi) ** len(pmfs)
    err = abs(fine - coarse) + inner
    if not np.isfinite(fine) or err > rtol * abs(fine):
        raise QuadratureError(
            "Parseval integral did not converge (error %.3g vs value %.6g); "
            "the |1-P|^-2 singularity at the origin is likely non-integrable"
            % (err, fine))
    s = qtable.sum_sq
    return ParsevalReport(
        sum_side=s,
        integral_side=fine,
        rel_discrepancy=abs(s - fine) / abs(fine),
        quadrature_error=err / abs(fine),
    )


# -- window coefficients and pre-limit covariance ---------------------------

@dataclass
class WindowCoefficients:
    """b_j = sum over the window box of q_{k - j}, j in [-extent, m-1]^d."""

    array: np.ndarray
    offset: np.ndarray  # index 0 of `array` corresponds to j = offset

    @property
    def norm_sq(self):
        return float(np.sum(self.array ** 2))

    @property
    def sup(self):
        return float(np.max(np.abs(self.array)))

    @property
    def lindeberg_ratio(self):
        """sup_j b_j^2 / ||b||^2; the CLT needs this to vanish."""
        return self.sup ** 2 / self.norm_sq


def window_counts(extents, t=None):
    extents = np.atleast_1d(np.asarray(extents, dtype=np.int64))
    if t is None:
        return extents.copy()
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.ceil(extents * t).astype(np.int64)


def b_coefficients(qtable, extents, t=None):
    """Window coefficients for the box [0, m-1]^d, m = ceil(extents * t).

    Computed from the padded prefix-sum array of the q-table, so a single
    table serves every window size up to its extent.
    """
    m = window_counts(extents, t)
    if m.size != qtable.d:
        raise ConfigError("extents must have one entry per table axis")
    if np.any(m < 0):
        raise ConfigError("window counts must be nonnegative")
    n = qtable.extent
    q = qtable.values
    # padded prefix sums: S[i1,...] = sum of q over [0, i1) x ...
    s = q.copy()
    for axis in range(qtable.d):
        s = np.cumsum(s, axis=axis)
        pad = [(0, 0)] * qtable.d
        pad[axis] = (1, 0)
        s = np.pad(s, pad)
    offset = -np.full(qtable.d, n, dtype=np.int64)
    out_shape = tuple(int(mk + n) for mk in m)
    if np.any(m == 0):
        return WindowCoefficients(array=np.zeros(out_shape), offset=offset)
    los, his = [], []
    for axis, mk in enumerate(m):
        j = np.arange(-n, mk)
        los.append(np.clip(-j, 0, n + 1))
        his.append(np.clip(mk - j, 0, n + 1))
    if qtable.d == 1:
        arr = s[his[0]] - s[los[0]]
    else:
        arr = (s[np.ix_(his[0], his[1])] - s[np.ix_(los[0], his[1])]
               - s[np.ix_(his[0], los[1])] + s[np.ix_(los[0], los[1])])
    return WindowCoefficients(array=arr, offset=offset)


@dataclass
class PrelimitCov:
    value: float
    coefficient_path: float
    spectral_path: float

    @property
    def path_gap(self):
        return abs(self.coefficient_path - self.spectral_path)


def prelimit_cov(qtable, extents, t, s, p=0.5, method="both"):
    """Exact covariance of centered partial sums over two windows.

    Cov(S(t), S(s)) = Var(X*) <b(t), b(s)> with Var(X*) = 4p(1-p)/sum q^2.
    Two independent routes to the inner product:

    * coefficient: direct inner product of the window coefficient arrays;
    * spectral: discrete Parseval on the circle.  All factors are
      trigonometric polynomials, so an M-point trapezoid rule with M
      exceeding the total degree is exact, not approximate.

    method is "coefficient", "spectral", or "both".
    """
    extents = np.atleast_1d(np.asarray(extents, dtype=np.int64))
    mt = window_counts(extents, t)
    ms = window_counts(extents, s)
    var_star = 4.0 * p * (1.0 - p) / qtable.sum_sq
    coeff = spec = None
    if method in ("coefficient", "both"):
        bt = b_coefficients(qtable, mt)
        bs = b_coefficients(qtable, ms)
        hi = np.maximum(mt, ms)
        at = np.zeros(tuple(int(h + qtable.extent) for h in hi))
        as_ = np.zeros_like(at)
        at[tuple(slice(0, d) for d in bt.array.shape)] = bt.array
        as_[tuple(slice(0, d) for d in bs.array.shape)] = bs.array
        coeff = var_star * float(np.sum(at * as_))
    if method in ("spectral", "both"):
        spec = var_star * _spectral_inner(qtable, mt, ms)
    value = coeff if coeff is not None else spec
    return PrelimitCov(value=value,
                       coefficient_path=coeff if coeff is not None else np.nan,
                       spectral_path=spec if spec is not None else np.nan)


def _dirichlet(m, x):
    """D_m(x) = sum_{j=0}^{m-1} e^{ijx}, stable at x = 0."""
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(np.remainder(x + np.pi, 2 * np.pi) - np.pi) < 1e-12
    z = np.exp(1j * x)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (np.exp(1j * m * x) - 1.0) / (z - 1.0)
    out[small] = m
    return out


def _spectral_inner(qtable, mt, ms):
    n = qtable.extent
    if np.all(mt == 0) or np.all(ms == 0):
        pass  # zero windows fall out naturally (Dirichlet kernel is 0)
    big = int(2 * n + int(np.max(mt)) + int(np.max(ms)) + 1)
    m_nodes = 1 << int(np.ceil(np.log2(max(big, 2))))
    # Q on the grid: zero-pad the table and FFT.  numpy's fft uses
    # e^{-2 pi i k r / M}; conjugate to get sum q_k e^{+ikx} at x_r.
    pad = np.zeros((m_nodes,) * qtable.d)
    pad[tuple(slice(0, n + 1) for _ in range(qtable.d))] = qtable.values
    qhat = np.conj(np.fft.fftn(pad))
    x = 2.0 * np.pi * np.arange(m_nodes) / m_nodes
    absq2 = np.abs(qhat) ** 2
    kernels = []
    for axis in range(qtable.d):
        kt = _dirichlet(int(mt[axis]), x)
        ks = _dirichlet(int(ms[axis]), x)
        kernels.append(kt * np.conj(ks))
    if qtable.d == 1:
        total = np.dot(absq2, kernels[0])
    else:
        total = kernels[0] @ absq2 @ kernels[1]
    return float(np.real(total)) / m_nodes ** qtable.d
