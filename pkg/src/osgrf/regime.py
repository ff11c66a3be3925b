"""Scaling-regime classification for anisotropic partial-sum windows.

The field on Z^d has natural exponents alpha_k; the observation window grows
like n^{1/alpha'_k} along axis k.  The ratio rho_k = alpha_k / alpha'_k
determines the character of axis k in the limit through the matching level

    gamma0 = min { g in {rho_1,...,rho_d} :
                   sum_{k: rho_k <= g} 1/alpha_k > 2  and
                   sum_{k: rho_k <  g} 1/alpha_k <= 2 },

with the per-axis partition

    LESS    (I_<): rho_k > gamma0, independent-increment (Brownian) axis,
    EQUAL   (I_=): rho_k = gamma0, long-range (fractional) axis,
    GREATER (I_>): rho_k < gamma0, invariant-increment (degenerate) axis.

All comparisons use exact rational arithmetic on the float inputs (floats
are binary rationals, so ties are decided exactly); near-ties within 1e-12
produce warnings because the regime is discontinuous across them.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError

_TIE_EPS = 1e-12

LESS, EQUAL, GREATER = "LESS", "EQUAL", "GREATER"
_INCREMENT_CLASS = {LESS: "INDEPENDENT", EQUAL: "LONG_RANGE", GREATER: "INVARIANT"}


@dataclass
class RegimeReport:
    alphas: tuple
    alpha_primes: tuple
    rhos: tuple
    valid: bool
    reasons: list
    gamma0: float = None
    partition: tuple = None          # per-axis LESS / EQUAL / GREATER
    E_doubleprime: tuple = None      # diagonal entries gamma_k / alpha'_k
    H: float = None                  # normalization exponent
    is_critical: bool = False
    is_fbs: bool = False
    hurst: tuple = None              # per-axis Hurst indices when is_fbs
    holder: tuple = None             # per-axis path-regularity exponents
    holder_flags: tuple = None
    increment_class: tuple = None    # INDEPENDENT / LONG_RANGE / INVARIANT
    warnings: list = field(default_factory=list)

    def axes(self, label):
        if self.partition is None:
            return ()
        return tuple(k for k, lab in enumerate(self.partition) if lab == label)

    @property
    def independent_axes(self):
        return self.axes(LESS)

    @property
    def fractional_axes(self):
        return self.axes(EQUAL)

    @property
    def invariant_axes(self):
        return self.axes(GREATER)

    @property
    def active_axes(self):
        """Axes entering the spectral integral (EQUAL then GREATER)."""
        return self.fractional_axes + self.invariant_axes

    def to_dict(self):
        return {
            "alphas": list(self.alphas),
            "alpha_primes": list(self.alpha_primes),
            "rhos": list(self.rhos),
            "gamma0": self.gamma0,
            "partition": list(self.partition) if self.partition else None,
            "E_doubleprime": list(self.E_doubleprime) if self.E_doubleprime else None,
            "H": self.H,
            "valid": self.valid,
            "reasons": list(self.reasons),
            "is_critical": self.is_critical,
            "is_fbs": self.is_fbs,
            "hurst": list(self.hurst) if self.hurst else None,
            "holder": list(self.holder) if self.holder else None,
            "holder_flags": list(self.holder_flags) if self.holder_flags else None,
            "increment_class": list(self.increment_class) if self.increment_class else None,
            "warnings": list(self.warnings),
        }


def classify(alphas, alpha_primes, holder_boundary_default=1.0 - 1e-3):
    """Classify the (alpha, alpha') window-scaling regime.

    alphas must lie in (0,1); alpha_primes only need to be positive (the
    window exponents 1/alpha'_k are free).  Returns a RegimeReport; excluded
    configurations (not enough transience, or an exact boundary case where
    the limit changes form) come back with valid=False and reasons, never
    as exceptions.
    """
    alphas = tuple(float(a) for a in np.atleast_1d(alphas))
    alpha_primes = tuple(float(a) for a in np.atleast_1d(alpha_primes))
    if len(alphas) != len(alpha_primes) or len(alphas) == 0:
        raise ConfigError("alpha and alpha' must be non-empty and equally long")
    if any(not (0.0 < a < 1.0) for a in alphas):
        raise ConfigError("every alpha_k must lie strictly inside (0, 1)")
    if any(a <= 0.0 for a in alpha_primes):
        raise ConfigError("every alpha'_k must be positive")
    d = len(alphas)
    fa = [Fraction(a) for a in alphas]
    fap = [Fraction(a) for a in alpha_primes]
    rho = [fa[k] / fap[k] for k in range(d)]
    rhos = tuple(float(r) for r in rho)
    warnings = _tie_warnings(alphas, rho)
    base = dict(alphas=alphas, alpha_primes=alpha_primes, rhos=rhos,
                warnings=warnings)

    trace = sum(Fraction(1) / a for a in fa)
    if trace <= 2:
        if d == 1:
            reason = "alpha_1 < 1/2 required for d=1"
        elif trace == 2:
            reason = "boundary: sum 1/alpha_k = 2 exactly (no transience margin)"
        else:
            reason = "recurrent range: sum 1/alpha_k < 2, the graph has a single component"
        return RegimeReport(valid=False, reasons=[reason], **base)

    gamma0 = None
    for g in sorted(set(rho)):
        at_or_below = sum(Fraction(1) / fa[k] for k in range(d) if rho[k] <= g)
        below = sum(Fraction(1) / fa[k] for k in range(d) if rho[k] < g)
        if at_or_below > 2 and below <= 2:
            gamma0 = g
            break
    assert gamma0 is not None, "no admissible matching level despite q(E) > 2"

    partition = tuple(
        LESS if rho[k] > gamma0 else (EQUAL if rho[k] == gamma0 else GREATER)
        for k in range(d))
    invariant = [k for k in range(d) if partition[k] == GREATER]
    inv_trace = sum(Fraction(1) / fa[k] for k in invariant)
    if inv_trace == 2:
        return RegimeReport(
            valid=False,
            reasons=["boundary: invariant-increment axes carry sum 1/alpha_k = 2 "
                     "exactly (strict inequality required)"],
            gamma0=float(gamma0), partition=partition, **base)
    # inv_trace > 2 is impossible: the gamma0 selection caps the strict sum at 2

    epp = [max(gamma0 / rho[k], Fraction(1)) / fap[k] for k in range(d)]
    h = gamma0 + sum(Fraction(1) / a for a in fap) - Fraction(1, 2) * sum(epp)
    report = RegimeReport(
        valid=True, reasons=[],
        gamma0=float(gamma0),
        partition=partition,
        E_doubleprime=tuple(float(e) for e in epp),
        H=float(h),
        is_critical=all(lab == EQUAL for lab in partition),
        increment_class=tuple(_INCREMENT_CLASS[lab] for lab in partition),
        **base)
    report.is_fbs, report.hurst = fbs_detect(report)
    report.holder, report.holder_flags = holder_exponents(
        report, holder_boundary_default)
    return report


def _tie_warnings(alphas, rho):
    out = []
    d = len(alphas)
    rf = [float(r) for r in rho]
    for i in range(d):
        for j in range(i + 1, d):
            gap = abs(rf[i] - rf[j])
            if 0.0 < gap < _TIE_EPS:
                out.append("rho_%d and rho_%d differ by %.3g; the regime is "
                           "discontinuous across this tie" % (i, j, gap))
    for k in range(d):
        if 0.0 < abs(alphas[k] - 0.5) < _TIE_EPS:
            out.append("alpha_%d is within %.3g of 1/2; nearby regimes differ"
                       % (k, abs(alphas[k] - 0.5)))
    return out


def fbs_detect(report):
    """(is_fbs, hurst): the limit is a fractional Brownian sheet iff exactly
    one axis is fractional; then every axis carries a Hurst index."""
    if not report.valid or report.partition is None:
        return False, None
    frac = report.fractional_axes
    if len(frac) != 1:
        return False, None
    alphas = report.alphas
    j = frac[0]
    hs = [None] * len(alphas)
    for k in report.independent_axes:
        hs[k] = 0.5
    for k in report.invariant_axes:
        hs[k] = 1.0
    if report.invariant_axes:
        k = report.invariant_axes[0]
        hs[j] = alphas[j] * (1.0 - 1.0 / (2.0 * alphas[k])) + 0.5
    else:
        hs[j] = alphas[j] + 0.5 if alphas[j] < 0.5 else 1.0
    return True, tuple(hs)


def holder_exponents(report, boundary_default=1.0 - 1e-3):
    """Per-axis path-regularity exponents of the limit field.

    Independent axes are 1/2-regular, invariant axes Lipschitz.  A
    fractional axis j is alpha_j (1 - q_>/2) + 1/2 regular, with q_> the
    1/alpha mass of the invariant axes; exception: no invariant axis and
    alpha_j >= 1/2, where the exponent saturates at 1 (exactly 1/2 is a
    boundary with logarithmic corrections, reported as `boundary_default`
    plus a flag).

    Returns (exponents, flags).
    """
    if not report.valid:
        raise ConfigError("cannot produce regularity exponents: %s"
                          % "; ".join(report.reasons))
    d = len(report.alphas)
    out = [None] * d
    flags = [""] * d
    q_gt = sum(1.0 / report.alphas[k] for k in report.invariant_axes)
    for k in report.independent_axes:
        out[k] = 0.5
    for k in report.invariant_axes:
        out[k] = 1.0
    for j in report.fractional_axes:
        aj = report.alphas[j]
        if report.invariant_axes or aj < 0.5:
            out[j] = aj * (1.0 - q_gt / 2.0) + 0.5
        elif aj == 0.5:
            out[j] = boundary_default
            flags[j] = "boundary alpha_j = 1/2: any exponent below 1 works, none equals 1"
        else:
            out[j] = 1.0
    return tuple(out), tuple(flags)


_SIGMA2_FORM = {
    "i": "C_{H2} |log psi(0,1)|^-2",
    "ii": "C_{H1} integral |log psi(1,y)|^-2 dy",
    "iii": "C_{H1} |log psi(1,0)|^-2",
    "iv": "C_{H2} integral |log psi(y,1)|^-2 dy",
}


def theorem13_case(alpha1, alpha2, alpha2_prime):
    """Closed forms for the d=2 windows with the first axis critically scaled.

    The window grows like (n^{1/alpha1}, n^{1/alpha2'}).  Returns
    (case_id, beta, H1, H2, sigma2_formula) with beta the normalization
    exponent (n^beta) and (H1, H2) the per-axis Hurst indices of the
    fractional-Brownian-sheet limit:

      i   : alpha2' > alpha2, alpha2 < 1/2
      ii  : alpha2' > alpha2, alpha2 > 1/2
      iii : alpha2' < alpha2, alpha1 < 1/2
      iv  : alpha2' < alpha2, alpha1 > 1/2

    Boundaries (alpha = 1/2 where a case needs a strict inequality, or
    alpha2 = alpha2') are rejected: the limit changes form there.
    """
    a1, a2, a2p = float(alpha1), float(alpha2), float(alpha2_prime)
    for name, v in (("alpha1", a1), ("alpha2", a2), ("alpha2'", a2p)):
        if not (0.0 < v < 1.0):
            raise ConfigError("%s must lie strictly inside (0, 1)" % name)
    if a2 == a2p:
        raise ConfigError("boundary alpha2 = alpha2' (critical scaling) is not a "
                          "fractional-sheet case")
    if 1.0 / a1 + 1.0 / a2 <= 2.0:
        raise ConfigError("need 1/alpha1 + 1/alpha2 > 2")
    if a2p > a2:
        if a2 == 0.5:
            raise ConfigError("boundary alpha2 = 1/2 is not covered")
        if a2 < 0.5:
            case = "i"
            beta = a2 / a2p + 0.5 * (1.0 / a1 + 1.0 / a2p)
            h1, h2 = 0.5, 0.5 + a2
        else:
            case = "ii"
            beta = 1.0 + 0.5 / a1 + 1.0 / a2p - 0.5 / a2
            h1, h2 = 0.5 + a1 * (1.0 - 0.5 / a2), 1.0
    else:
        if a1 == 0.5:
            raise ConfigError("boundary alpha1 = 1/2 is not covered")
        if a1 < 0.5:
            case = "iii"
            beta = 1.0 + 0.5 * (1.0 / a1 + 1.0 / a2p)
            h1, h2 = 0.5 + a1, 0.5
        else:
            case = "iv"
            beta = (a2 / a2p) * (1.0 - 0.5 / a1) + 1.0 / a1 + 0.5 / a2p
            h1, h2 = 1.0, 0.5 + a2 * (1.0 - 0.5 / a1)
    return case, beta, h1, h2, _SIGMA2_FORM[case]
