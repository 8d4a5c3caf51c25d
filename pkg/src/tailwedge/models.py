"""Closed-form models with an exploding moment generating function.

Gamma (exact tails, index 0), variance-gamma, and the Heston log-price whose
moment generating function reduces to a CIR time-integral problem under a
change of drift.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import riccati
from .errors import ConvergenceError, DomainError, InvalidInputError
from .riccati import CirParams
from .tauberian import MgfModel

__all__ = [
    "GammaParams",
    "VarianceGammaParams",
    "HestonParams",
    "gamma_model",
    "gamma_exact_log_sf",
    "vg_model",
    "heston_log_mgf",
]

SERIES_RTOL = 1e-12
SERIES_MAX_ITER = 10_000


def _positive(owner, **values):
    for name, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise InvalidInputError(f"invalid-params: {owner}.{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class GammaParams:
    k: float
    theta: float

    def __post_init__(self):
        _positive("GammaParams", k=self.k, theta=self.theta)


@dataclass(frozen=True)
class VarianceGammaParams:
    c: float
    g: float
    m: float

    def __post_init__(self):
        _positive("VarianceGammaParams", c=self.c, g=self.g, m=self.m)


@dataclass(frozen=True)
class HestonParams:
    cir: CirParams
    rho: float

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidInputError(f"invalid-params: rho must lie in [-1, 1], got {self.rho}")


def gamma_model(params):
    """Gamma(k, theta): ``Lambda(p) = -k ln(1 - theta p)``, ``mu* = 1/theta``."""
    k, theta = params.k, params.theta

    def log_mgf(p):
        if p * theta >= 1.0:
            raise DomainError(f"domain: gamma log_mgf needs p < {1.0 / theta:.17g}, got {p}")
        return -k * math.log1p(-theta * p)

    return MgfModel(mu_star=1.0 / theta, log_mgf=log_mgf, alpha=0.0, mean=k * theta,
                    name=f"gamma(k={k:g}, theta={theta:g})")


def _log_q_continued_fraction(k, x):
    # modified Lentz evaluation of the continued fraction for Q(k, x)
    tiny = 1e-300
    b = x + 1.0 - k
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, SERIES_MAX_ITER):
        an = -i * (i - k)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < SERIES_RTOL:
            return -x + k * math.log(x) - math.lgamma(k) + math.log(h)
    raise ConvergenceError(f"series-nonconvergence: continued fraction for Q({k}, {x})")


def _log_p_series(k, x):
    term = 1.0 / k
    total = term
    ap = k
    for _ in range(SERIES_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * SERIES_RTOL:
            return -x + k * math.log(x) - math.lgamma(k) + math.log(total)
    raise ConvergenceError(f"series-nonconvergence: power series for P({k}, {x})")


def gamma_exact_log_sf(params, R):
    """``ln P(Z > R)`` for ``Z ~ Gamma(k, theta)``.

    Integer shapes use the Erlang sum ``e^{-x} sum_{j<k} x^j / j!`` with
    ``x = R/theta``; other shapes use the regularised upper incomplete gamma
    function (continued fraction for ``x > k + 1``, power series otherwise).
    """
    if not R > 0:
        raise InvalidInputError(f"invalid-level: R must be positive, got {R}")
    k = params.k
    x = R / params.theta
    if float(k).is_integer():
        j = np.arange(int(k))
        terms = j * math.log(x) - np.array([math.lgamma(i + 1.0) for i in j])
        top = terms.max()
        return -x + top + math.log(np.exp(terms - top).sum())
    if x > k + 1.0:
        return _log_q_continued_fraction(k, x)
    return math.log1p(-math.exp(_log_p_series(k, x)))


def vg_model(params):
    """Variance-gamma: ``Lambda(p) = c (ln(gm) - ln(m - p) - ln(p + g))``.

    The index is declared 0: ``Lambda(m - x)`` diverges like ``c ln(1/x)``,
    which is slowly varying.
    """
    c, g, m = params.c, params.g, params.m

    def log_mgf(p):
        if not -g < p < m:
            raise DomainError(f"domain: variance-gamma log_mgf needs -{g:g} < p < {m:g}, got {p}")
        return -c * (math.log1p(-p / m) + math.log1p(p / g))

    return MgfModel(mu_star=m, log_mgf=log_mgf, alpha=0.0, mean=c * (1.0 / m - 1.0 / g),
                    name=f"vg(c={c:g}, g={g:g}, m={m:g})")


def heston_log_mgf(params, p, t):
    """``ln E exp(p X_t)`` for the Heston log-price started at zero.

    Under the measure that absorbs the correlated part of the price noise,
    the variance keeps its square-root dynamics with reversion rate
    ``b - rho sigma p``, and ``E exp(p X_t)`` becomes
    ``E exp(((p^2 - p)/2) I_t)`` for that CIR process.

    Raises
    ------
    MomentExplodedError
        When ``t`` is at or beyond the explosion time of the shifted problem.
    """
    cir = params.cir
    shifted = CirParams(cir.a, cir.b - params.rho * cir.sigma * p, cir.sigma, cir.v)
    return riccati.log_mgf(shifted, 0.0, 0.5 * (p * p - p), t)
