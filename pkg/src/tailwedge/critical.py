"""Critical moments and blow-up coefficients for ``Z = l1 V_t + l2 I_t``.

``mu+`` is the smallest ``mu > 0`` with ``t*(mu l1, mu l2) = t``; beyond it
``E exp(mu Z)`` is infinite.  Close to ``mu+`` the cumulant generating
function behaves like

    Lambda(mu) = omega / (mu+ - mu) + (2a/sigma^2) ln(1/(mu+ - mu)) + O(1)

which makes ``x -> Lambda(mu+ - 1/x)`` regularly varying with index 1 and
turns the generic band into ``[a/sigma^2 - 3/4, a/sigma^2]`` for the
correction ``ln P(Z > R) + mu+ R - 2 sqrt(omega R)`` measured in units of
``ln R``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import riccati
from .errors import ConvergenceError, DomainError, InvalidInputError, PreconditionError
from .riccati import Regime
from .tauberian import MgfModel

__all__ = [
    "SuperpositionSpec",
    "CriticalMomentResult",
    "CorollaryBand",
    "OmegaFit",
    "MonotonicityWarning",
    "mu_plus",
    "mu_minus",
    "omega_closed",
    "omega_fit",
    "critical_moments",
    "corollary_band",
    "cir_mgf_model",
]

SCAN_CAP = 2.0**60
FIT_EPS = tuple(10.0 ** (-2.0 - 0.5 * i) for i in range(9))
FIT_COND_MAX = 1e12


class MonotonicityWarning(UserWarning):
    """``t*(mu l1, mu l2)`` was not decreasing across the computed root."""


@dataclass(frozen=True)
class SuperpositionSpec:
    """Weights and horizon of ``Z = l1 V_t + l2 I_t``."""

    l1: float
    l2: float
    t: float

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise InvalidInputError(f"invalid-time: t must be positive and finite, got {self.t}")
        if not (math.isfinite(self.l1) and math.isfinite(self.l2)):
            raise InvalidInputError("invalid-weights: l1 and l2 must be finite")

    def negated(self):
        return SuperpositionSpec(-self.l1, -self.l2, self.t)


@dataclass(frozen=True)
class OmegaFit:
    omega: float
    log_coeff: float
    const: float
    eps_coeff: float
    resid: float


@dataclass(frozen=True)
class CriticalMomentResult:
    """Both critical moments with their blow-up coefficients.

    Quantities for a side whose critical moment is infinite are ``inf`` and
    ``nan``.  Coefficients come from the regression on the closed-form
    cumulant generating function; ``omega_closed_*`` holds the analytic value
    where one is available (``nan`` otherwise).
    """

    mu_plus: float
    omega_plus: float
    log_coeff_plus: float
    resid_plus: float
    omega_closed_plus: float
    mu_minus: float
    omega_minus: float
    log_coeff_minus: float
    resid_minus: float
    omega_closed_minus: float


@dataclass(frozen=True)
class CorollaryBand:
    """Centre and log-coefficient interval for ``ln P(Z > R)``.

    The interval constrains the limsup, as ``R -> inf``, of
    ``(ln P(Z > R) - center) / ln R``; it is not a statement at finite ``R``.
    """

    R: float
    center: float
    c_interval: tuple[float, float]
    mu_plus: float
    omega: float
    asymptotic: bool = True


def _t_star_at(params, spec, mu):
    return riccati.t_star(params, mu * spec.l1, mu * spec.l2)


def mu_plus(params, spec):
    """Right critical moment ``inf{mu > 0 : t*(mu l1, mu l2) = t}``.

    Doubling scan for a bracket, then bisection to full double precision.

    Raises
    ------
    PreconditionError
        If ``max(l1, l2) <= 0``; the moment generating function is then
        finite for every positive argument.
    ConvergenceError
        ``no-bracket`` if the scan passes ``2**60``.
    """
    if not max(spec.l1, spec.l2) > 0:
        raise PreconditionError(
            f"precondition-violated: mu_plus needs max(l1, l2) > 0, got ({spec.l1}, {spec.l2})"
        )
    t = spec.t
    hi = 1.0
    while _t_star_at(params, spec, hi) > t:
        hi *= 2.0
        if hi > SCAN_CAP:
            raise ConvergenceError(f"no-bracket: t*(mu) > t={t} for all mu up to 2**60")
    lo = hi / 2.0
    while _t_star_at(params, spec, lo) <= t:
        lo /= 2.0
        if lo < 1.0 / SCAN_CAP:
            raise ConvergenceError(f"no-bracket: t*(mu) <= t={t} down to mu = 2**-60")
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _t_star_at(params, spec, mid) > t:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    if not _t_star_at(params, spec, root * (1 - 1e-6)) > _t_star_at(params, spec, root * (1 + 1e-6)):
        warnings.warn(f"t*(mu) is not decreasing around mu={root:.17g}", MonotonicityWarning, stacklevel=2)
    return root


def mu_minus(params, spec):
    """Left critical moment, i.e. ``mu_plus`` of ``-Z``."""
    if not min(spec.l1, spec.l2) < 0:
        raise PreconditionError(
            f"precondition-violated: mu_minus needs min(l1, l2) < 0, got ({spec.l1}, {spec.l2})"
        )
    return mu_plus(params, spec.negated())


def _oriented(spec, side):
    if side == "plus":
        return spec
    if side == "minus":
        return spec.negated()
    raise InvalidInputError(f"invalid-side: expected 'plus' or 'minus', got {side!r}")


def omega_closed(params, spec, side="plus"):
    """Analytic ``(omega, log_coeff)`` at the critical moment.

    Supercritical regime at ``mu*``:
    ``omega = v sqrt(2 mu* l2 sigma^2 - b^2) / (sigma^2 d_mu g(t, mu*))`` with
    ``g(t, mu) = sqrt(2 mu l2 sigma^2 - b^2) t / 2
    + arctan((l1 mu sigma^2 - b) / sqrt(2 mu l2 sigma^2 - b^2))``.

    Subcritical regime at ``mu*``: ``omega = 2 v alpha(mu*) / c1`` where
    ``c1`` is the derivative in ``mu`` of ``C(mu) exp(alpha(mu) sigma^2 t)``
    at ``mu*`` (that product equals one exactly at the critical moment).

    Critical regime at ``mu*`` (only generic when ``b = 0`` and ``l2 = 0``):
    ``psi = x / (1 - sigma^2 x t / 2)`` gives ``omega = v l1 mu*^2``.

    ``log_coeff`` is ``2a/sigma^2`` in every regime; the logarithm enters
    with a positive sign, ``+ (2a/sigma^2) ln(1/(mu* - mu))``.
    """
    spec = _oriented(spec, side)
    mu = mu_plus(params, spec)
    l1, l2, t = spec.l1, spec.l2, spec.t
    s2, b, v = params.sigma**2, params.b, params.v
    case = riccati.classify(params, mu * l1, mu * l2)
    log_coeff = 2.0 * params.a / s2
    if case.tag is Regime.Supercritical:
        root = math.sqrt(2.0 * mu * l2 * s2 - b * b)
        d_root = l2 * s2 / root
        q = (l1 * mu * s2 - b) / root
        d_q = (l1 * s2 * root - (l1 * mu * s2 - b) * d_root) / (root * root)
        d_g = 0.5 * d_root * t + d_q / (1.0 + q * q)
        return v * root / (s2 * d_g), log_coeff
    if case.tag is Regime.SubcriticalOutside:
        alpha = case.alpha_or_beta
        x = mu * l1 - b / s2
        d_alpha = -l2 / (s2 * alpha)
        c1 = (l1 - d_alpha) / (x - alpha) - (l1 + d_alpha) / (x + alpha) + s2 * t * d_alpha
        return 2.0 * v * alpha / c1, log_coeff
    if case.tag is Regime.Critical and b == 0 and l2 == 0:
        return v * l1 * mu * mu, log_coeff
    raise DomainError(f"not-applicable: no closed-form omega in regime {case.tag.value} at mu*={mu:.17g}")


def omega_fit(params, spec, side="plus"):
    """Regress ``Lambda(mu* - eps)`` on ``[1/eps, ln(1/eps), 1, eps]``.

    ``eps`` runs over nine geometric points from ``1e-2 mu*`` to
    ``1e-6 mu*``.  The ``eps`` column absorbs the first correction to the
    bounded remainder, which otherwise leaks into ``log_coeff`` at the
    coarse end of the grid.  Columns are normalised before the
    least-squares solve.

    Returns
    -------
    OmegaFit
        ``omega``, ``log_coeff``, the constant, the ``eps`` coefficient and
        the largest absolute residual.

    Raises
    ------
    ConvergenceError
        ``fit-ill-conditioned`` when the normalised design matrix has
        condition number above ``1e12``.
    """
    spec = _oriented(spec, side)
    mu = mu_plus(params, spec)
    eps = mu * np.array(FIT_EPS)
    y = np.array([
        riccati.log_mgf(params, (mu - e) * spec.l1, (mu - e) * spec.l2, spec.t) for e in eps
    ])
    design = np.column_stack([1.0 / eps, np.log(1.0 / eps), np.ones_like(eps), eps])
    norms = np.linalg.norm(design, axis=0)
    scaled = design / norms
    if np.linalg.cond(scaled) > FIT_COND_MAX:
        raise ConvergenceError("fit-ill-conditioned: design matrix condition number above 1e12")
    coef, *_ = np.linalg.lstsq(scaled, y, rcond=None)
    coef = coef / norms
    resid = float(np.max(np.abs(design @ coef - y)))
    return OmegaFit(*(float(c) for c in coef), resid)


def _side_summary(params, spec, side):
    try:
        mu = mu_plus(params, _oriented(spec, side))
    except PreconditionError:
        return math.inf, math.nan, math.nan, math.nan, math.nan
    fit = omega_fit(params, spec, side)
    try:
        closed = omega_closed(params, spec, side)[0]
    except DomainError:
        closed = math.nan
    return mu, fit.omega, fit.log_coeff, fit.resid, closed


def critical_moments(params, spec):
    """Critical moments and coefficients on both sides."""
    plus = _side_summary(params, spec, "plus")
    minus = _side_summary(params, spec, "minus")
    return CriticalMomentResult(*plus, *minus)


def corollary_band(params, spec, R, omega_method="fit"):
    """``center = -mu+ R + 2 sqrt(omega R)`` and ``[a/sigma^2 - 3/4, a/sigma^2]``."""
    if not R > 0:
        raise InvalidInputError(f"invalid-level: R must be positive, got {R}")
    mu = mu_plus(params, spec)
    if omega_method == "fit":
        omega = omega_fit(params, spec).omega
    elif omega_method == "closed":
        omega = omega_closed(params, spec)[0]
    else:
        raise InvalidInputError(f"invalid-method: omega_method must be 'fit' or 'closed', got {omega_method!r}")
    c = params.a / params.sigma**2
    return CorollaryBand(
        R=R,
        center=-mu * R + 2.0 * math.sqrt(omega * R),
        c_interval=(c - 0.75, c),
        mu_plus=mu,
        omega=omega,
    )


def cir_mgf_model(params, spec):
    """Package ``p -> ln E exp(p Z)`` as an :class:`MgfModel` with index 1."""
    mu = mu_plus(params, spec)
    l1, l2, t = spec.l1, spec.l2, spec.t

    def log_mgf(p):
        return riccati.log_mgf(params, p * l1, p * l2, t)

    mean = l1 * riccati.mean_v(params, t) + l2 * riccati.mean_i(params, t)
    return MgfModel(mu_star=mu, log_mgf=log_mgf, alpha=1.0, mean=mean,
                    name=f"cir(l1={l1:g}, l2={l2:g}, t={t:g})")
