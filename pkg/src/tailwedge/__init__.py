"""Right-tail asymptotics from exploding moment generating functions.

The generic engine (:mod:`tailwedge.tauberian`) maps a cumulant generating
function with a finite critical moment to Legendre transforms, Chernoff
bounds and tail bands.  :mod:`tailwedge.riccati` and
:mod:`tailwedge.critical` supply the closed-form CIR model, and
:mod:`tailwedge.montecarlo` checks them by exact simulation.
"""

from .critical import (
    CorollaryBand,
    CriticalMomentResult,
    OmegaFit,
    SuperpositionSpec,
    cir_mgf_model,
    corollary_band,
    critical_moments,
    mu_minus,
    mu_plus,
    omega_closed,
    omega_fit,
)
from .errors import (
    BelowMeanError,
    ConvergenceError,
    DomainError,
    InvalidInputError,
    MomentExplodedError,
    NumericalError,
    PreconditionError,
    TailwedgeError,
)
from .models import (
    GammaParams,
    HestonParams,
    VarianceGammaParams,
    gamma_exact_log_sf,
    gamma_model,
    heston_log_mgf,
    vg_model,
)
from .montecarlo import McConfig, McMgfEstimate, McTailEstimate, estimate_mgf, estimate_tail
from .riccati import CirParams, Regime, RiccatiCase, RiccatiEval, classify, log_mgf, t_star
from .tauberian import (
    LegendrePoint,
    MgfModel,
    TailBand,
    chernoff_upper,
    laplace_window_integral,
    legendre,
    phi_shifted,
    psi_R,
    pstar_derivative_indices,
    rv_index_estimate,
    tail_band,
)

__version__ = "0.1.0"
