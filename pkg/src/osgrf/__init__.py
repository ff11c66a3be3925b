"""Laboratory for operator-scaling random fields on the lattice.

The package simulates the sign field attached to a random ancestor graph
with heavy-tailed product steps, computes the ancestral-line probabilities
q_k exactly, classifies the scaling regime of a (alpha, alpha') pair, and
evaluates / synthesizes the Gaussian limit field, with Monte Carlo verdicts
tying the three layers together.
"""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError, QuadratureError, \
    ResourceBudgetError
from .spectral import ParetoProductModel, TableModel, gamma_default, \
    log_psi, pmf, sample_step, fourier_P, g_ratio_check, \
    local_integrability_flag
from .qtable import QTable, build_qtable, sigma_x2, pair_meeting_prob, \
    parseval_check, b_coefficients, window_counts, prelimit_cov
from .regime import RegimeReport, classify, theorem13_case, fbs_detect, \
    holder_exponents, LESS, EQUAL, GREATER
from .limit_field import c_h, fbm_cov, fbm_spectral_identity, \
    LimitCovariance, cov_w, closed_form_cov, Synthesizer
from .graph_field import FieldWindow, simulate_window, partial_sums, \
    estimate_var_xstar, estimate_meeting_prob
from .montecarlo import ExperimentPlan, VerdictReport, \
    run_invariance_experiment, gaussianity_test, verify_identities, \
    jackknife_se
from .rng import derive_seed
