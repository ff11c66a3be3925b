"""Analytic side of the limit field W and its spectral synthesis.

W is the centered Gaussian field with covariance

  Cov(W(t), W(s)) = sigma_X^2
      * prod_{k independent} min(t_k, s_k)
      * prod_{k invariant} t_k s_k
      * I(t_frac, s_frac)

with I the active-axes spectral integral of `quadrature.ActiveIntegral`
(the invariant axes' 1/(2 pi) and the fractional axes' 1/(2 pi y^2) weights
live inside I).  When exactly one axis is fractional the integral collapses
to a fractional Brownian covariance via homogeneity of |log psi|, giving an
independent closed-form route.

The same spectral measure drives synthesis: W(t) = int f_t dM for a complex
Gaussian measure M, discretized on a half-space cell grid so that the
synthesized field is real with an exactly computable discrete covariance.
"""

import math
from dataclasses import dataclass

import warnings

import numpy as np
from scipy import integrate

warnings.filterwarnings("ignore", category=integrate.IntegrationWarning)

from .errors import ConfigError, QuadratureError
from .quadrature import ActiveIntegral, TWO_PI
from . import rng as _rng
from .regime import LESS, EQUAL, GREATER


def c_h(h):
    """The fractional spectral constant C_H = pi / (H Gamma(2H) sin(H pi)).

    int_R (e^{ity}-1)(e^{-isy}-1) |y|^{-1-2H} dy = C_H Cov(B_H(t), B_H(s)).
    C_{1/2} = 2 pi.  Diverges as H -> 1.
    """
    h = float(h)
    if not (0.0 < h < 1.0):
        raise ConfigError("H must lie strictly inside (0, 1)")
    return math.pi / (h * math.gamma(2.0 * h) * math.sin(h * math.pi))


def fbm_cov(h, t, s):
    """Cov(B_H(t), B_H(s)) = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2."""
    return 0.5 * (abs(t) ** (2 * h) + abs(s) ** (2 * h) - abs(t - s) ** (2 * h))


def fbm_spectral_identity(h, t, s=None):
    """Quadrature check of the C_H identity; returns (quadrature, closed).

    Computes int_R (e^{ity}-1)(e^{-isy}-1) |y|^{-1-2H} dy by adaptive
    quadrature (finite core + oscillatory-weighted tails) and the closed
    form C_H Cov(B_H(t), B_H(s)).
    """
    if s is None:
        s = t
    t, s = float(t), float(s)
    if t <= 0 or s <= 0:
        return 0.0, 0.0
    if t == s:
        const, freqs = 2.0, [(-2.0, t)]
    else:
        const, freqs = 1.0, [(1.0, abs(t - s)), (-1.0, t), (-1.0, s)]
    a = 64.0 / min(f for _, f in freqs)

    def dens(y):
        return y ** (-1.0 - 2.0 * h)

    def core(y):
        b = const
        for c, w in freqs:
            b = b + c * np.cos(w * y)
        return dens(y) * b

    val, _ = integrate.quad(core, 0.0, a, limit=800, epsabs=1e-14, epsrel=1e-12)
    tail, _ = integrate.quad(dens, a, np.inf, epsabs=1e-14, epsrel=1e-12)
    val += const * tail
    for c, w in freqs:
        tv, _ = integrate.quad(dens, a, np.inf, weight="cos", wvar=w,
                               epsabs=1e-15, limit=400)
        val += c * tv
    return 2.0 * val, c_h(h) * fbm_cov(h, t, s)


def _check_valid(report, model):
    if not report.valid:
        raise ConfigError("invalid regime: %s" % "; ".join(report.reasons))
    if len(report.alphas) != model.d:
        raise ConfigError("report dimension does not match the model")
    if tuple(float(a) for a in model.alpha) != tuple(report.alphas):
        raise ConfigError("report alphas do not match the model")


def _split_points(report, t, s):
    d = len(report.alphas)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if t.size != d or s.size != d:
        raise ConfigError("t and s must have one coordinate per axis")
    if np.any(t < 0) or np.any(s < 0):
        raise ConfigError("evaluation points must be nonnegative")
    return t, s


class LimitCovariance:
    """Covariance evaluator for the limit field of a valid regime.

    sigma2 is the field-variance constant (sigma_X^2 from the ancestry
    table); pass 1.0 for shape-only studies.
    """

    def __init__(self, report, model, sigma2=1.0, rtol=1e-7, order=12, seed=7):
        _check_valid(report, model)
        self.report = report
        self.model = model
        self.sigma2 = float(sigma2)
        self.integral = ActiveIntegral(
            model, report.fractional_axes, report.invariant_axes,
            rtol=rtol, order=order, seed=seed)

    def cov(self, t, s, with_error=False):
        rep = self.report
        t, s = _split_points(rep, t, s)
        pref = self.sigma2
        for k in rep.independent_axes:
            pref *= min(t[k], s[k])
        for k in rep.invariant_axes:
            pref *= t[k] * s[k]
        if pref == 0.0:
            return (0.0, 0.0) if with_error else 0.0
        frac = list(rep.fractional_axes)
        val, err = self.integral.value(t[frac], s[frac])
        if with_error:
            return pref * val, abs(pref) * err
        return pref * val

    def var(self, t):
        return self.cov(t, t)

    def gram(self, points):
        """Covariance matrix of W over a list of points."""
        pts = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
        n = len(pts)
        g = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                g[i, j] = g[j, i] = self.cov(pts[i], pts[j])
        return g

    def var_increment(self, axis, delta, u):
        """Variance of W(u + delta e_axis) - W(u).

        Equals delta^2 Var(W(u with u_axis=1)) on invariant axes and
        |delta| times it on independent axes; computed here for every axis
        class through three covariance evaluations, which reduces to those
        closed forms exactly.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float)).copy()
        v = u.copy()
        v[axis] += delta
        if v[axis] < 0 or u[axis] < 0:
            raise ConfigError("increment leaves the nonnegative orthant")
        return self.cov(v, v) - 2.0 * self.cov(v, u) + self.cov(u, u)

    def operator_scaling_residual(self, lam, t, s):
        """|cov(lam^{E'} t, lam^{E'} s) - lam^{2H} cov(t, s)| / scale."""
        rep = self.report
        t, s = _split_points(rep, t, s)
        lam = float(lam)
        scale_vec = lam ** (1.0 / np.asarray(rep.alpha_primes))
        left = self.cov(scale_vec * t, scale_vec * s)
        right = lam ** (2.0 * rep.H) * self.cov(t, s)
        denom = max(abs(left), abs(right))
        return abs(left - right) / denom if denom > 0 else 0.0


def cov_w(report, model, t, s, sigma2=1.0, **kw):
    """One-shot covariance evaluation; see LimitCovariance for batches."""
    return LimitCovariance(report, model, sigma2=sigma2, **kw).cov(t, s)


def closed_form_cov(report, model, t, s, sigma2=1.0):
    """Fractional-Brownian-sheet closed form; needs exactly one fractional axis.

    With j the fractional axis and H_j its Hurst index,

      Cov = sigma2 * prod_{k indep} min(t_k,s_k) * prod_{k invar} t_k s_k / (2 pi)
            * A_j * C_{H_j} / (2 pi) * Cov(B_{H_j}(t_j), B_{H_j}(s_j)),

    where A_j = |log psi(e_j)|^{-2} when no axis is invariant, and
    A_j = int_R |log psi(e_j + y e_k)|^{-2} dy (1-d adaptive quadrature)
    when axis k is invariant.  Derived from the spectral integral by
    |log psi| homogeneity.
    """
    _check_valid(report, model)
    if not report.is_fbs:
        raise ConfigError("closed form requires exactly one fractional axis")
    t, s = _split_points(report, t, s)
    j = report.fractional_axes[0]
    hj = report.hurst[j]
    val = sigma2
    for k in report.independent_axes:
        val *= min(t[k], s[k])
    for k in report.invariant_axes:
        val *= t[k] * s[k] / TWO_PI
    if val == 0.0 or t[j] == 0.0 or s[j] == 0.0:
        return 0.0
    if report.invariant_axes:
        k = report.invariant_axes[0]

        def f(y):
            pt = np.zeros(model.d)
            pt[j] = 1.0
            pt[k] = y
            return abs(model.log_psi(pt)) ** (-2.0)

        # core plus inverted tails: u = 1/y maps the |y|^{-2 alpha_k} tails
        # to integrable endpoint singularities at 0
        big = 64.0
        core, cerr = integrate.quad(f, -big, big, epsabs=1e-13, epsrel=1e-11,
                                    limit=800, points=[0.0])
        tp, ep = integrate.quad(lambda u: f(1.0 / u) / u ** 2, 0.0, 1.0 / big,
                                epsabs=1e-13, epsrel=1e-11, limit=400)
        tm, em = integrate.quad(lambda u: f(1.0 / u) / u ** 2, -1.0 / big, 0.0,
                                epsabs=1e-13, epsrel=1e-11, limit=400)
        aj = core + tp + tm
        aerr = cerr + ep + em
        if aj <= 0 or aerr > 1e-7 * aj:
            raise QuadratureError("invariant-axis profile integral did not converge")
    else:
        ej = np.zeros(model.d)
        ej[j] = 1.0
        aj = abs(model.log_psi(ej)) ** (-2.0)
    return val * aj * (c_h(hj) / TWO_PI) * fbm_cov(hj, t[j], s[j])


# -- spectral synthesis -------------------------------------------------------


@dataclass
class SynthesisGrid:
    centers: np.ndarray      # (n_cells, d) cell centers, half-space only
    masses: np.ndarray       # (n_cells,) spectral masses m_c


def _axis_cells(lmin, lmax, per_band):
    edges = 2.0 ** np.arange(lmin, lmax + 1)
    mids, widths = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sub = np.linspace(lo, hi, per_band + 1)
        mids.append((sub[:-1] + sub[1:]) / 2.0)
        widths.append(np.diff(sub))
    m = np.concatenate(mids)
    w = np.concatenate(widths)
    return np.concatenate([m, -m]), np.concatenate([w, w])


class Synthesizer:
    """Samples of W on a fixed list of evaluation points.

    Discretizes the harmonizable representation on a tensor cell grid kept
    on one side of a lexicographic half-space (the mirror cells are implied
    by Hermitian symmetry).  The synthesized field is exactly Gaussian with
    covariance `grid_cov`, the discrete stand-in for the limit covariance;
    the gap between the two is the (measured) discretization bias.
    """

    def __init__(self, report, model, t_points, sigma2=1.0, per_band=4,
                 lmin=-26, lmax_cap=220):
        _check_valid(report, model)
        self.report = report
        self.model = model
        self.sigma2 = float(sigma2)
        self.t_points = [np.atleast_1d(np.asarray(p, dtype=float))
                         for p in t_points]
        d = model.d
        axes_cells = []
        for ax in range(d):
            lab = report.partition[ax]
            a = model.alpha[ax]
            if lab == EQUAL:
                lmax = int(np.ceil(18.0 / (2.0 * a)))
            elif lab == "GREATER":
                lmax = min(int(np.ceil(21.0 / (2.0 * a - 1.0))), lmax_cap)
            else:
                lmax = 24
            axes_cells.append(_axis_cells(lmin, lmax, per_band))
        mesh = np.meshgrid(*[c for c, _ in axes_cells], indexing="ij")
        wmesh = np.meshgrid(*[w for _, w in axes_cells], indexing="ij")
        centers = np.stack([m.ravel() for m in mesh], axis=-1)
        vols = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)
        keep = _lex_positive(centers)
        centers, vols = centers[keep], vols[keep]
        proj = centers.copy()
        for ax in range(d):
            if report.partition[ax] == "LESS":
                proj[:, ax] = 0.0
        dens = np.abs(self.model.log_psi(proj)) ** (-2.0) / TWO_PI ** d
        self.grid = SynthesisGrid(centers=centers, masses=dens * vols)
        self._basis = self._build_basis()

    def _f(self, t):
        """f_t(y) over the cell centers."""
        rep = self.report
        y = self.grid.centers
        out = np.full(y.shape[0], math.sqrt(self.sigma2), dtype=complex)
        for ax in range(self.model.d):
            if rep.partition[ax] == "GREATER":
                out = out * t[ax]
            else:
                out = out * (np.exp(1j * t[ax] * y[:, ax]) - 1.0) / (1j * y[:, ax])
        return out

    def _build_basis(self):
        root = np.sqrt(2.0 * self.grid.masses)
        rows_re, rows_im = [], []
        for t in self.t_points:
            f = self._f(t)
            rows_re.append(root * np.real(f))
            rows_im.append(-root * np.imag(f))
        return np.array(rows_re), np.array(rows_im)

    def grid_cov(self):
        """Exact covariance matrix of the synthesized values."""
        a, b = self._basis
        return a @ a.T + b @ b.T

    def sample(self, seed, realizations):
        """(realizations, n_points) array of synthesized W values.

        Gaussian weights come from counter-based streams keyed to
        (seed, realization), so samples are independent of batch sizes
        and worker layout.
        """
        a, b = self._basis
        n_cells = self.grid.masses.size
        out = np.empty((realizations, len(self.t_points)))
        for r in range(realizations):
            g = np.random.Generator(np.random.Philox(key=_rng.derive_seed(seed, r)))
            ga = g.standard_normal(n_cells)
            gb = g.standard_normal(n_cells)
            out[r] = a @ ga + b @ gb
        return out


def _lex_positive(centers):
    keep = np.zeros(centers.shape[0], dtype=bool)
    undecided = np.ones(centers.shape[0], dtype=bool)
    for ax in range(centers.shape[1]):
        col = centers[:, ax]
        keep |= undecided & (col > 0)
        undecided &= col == 0
    return keep
