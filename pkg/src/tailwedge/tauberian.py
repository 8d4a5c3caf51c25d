"""From moment explosion data to right-tail statements.

A model is described by its critical moment ``mu_star``, its cumulant
generating function ``log_mgf`` on ``[0, mu_star)`` and, when known, the
regular-variation index ``alpha`` of ``x -> log_mgf(mu_star - 1/x)``.
Everything here works from those three ingredients alone:

* the Fenchel-Legendre transform ``Lambda*(R) = sup_p (pR - Lambda(p))``
  and its maximiser ``p*(R)``,
* the Chernoff bound ``P(Z > R) <= exp(-Lambda*(R))``,
* the log-correction band ``[-(alpha+2)/(2(alpha+1)), 0]`` that brackets
  ``limsup (ln P(Z > R) + Lambda*(R)) / ln R``,
* the window integral ``int_{R^(beta-1)}^inf z^gamma exp(psi_R(z)) dz`` and
  the regular-variation indices of the derivatives of ``p*``.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import BelowMeanError, ConvergenceError, DomainError, InvalidInputError

__all__ = [
    "MgfModel",
    "LegendrePoint",
    "TailBand",
    "dlog_mgf",
    "phi_shifted",
    "legendre",
    "chernoff_upper",
    "tail_band",
    "band_exponents",
    "psi_R",
    "laplace_window_integral",
    "pstar_derivative_indices",
    "rv_index_estimate",
]

BISECTION_RTOL = 1e-13
NEWTON_STEPS = 3
BRACKET_LO = 1e-8
BRACKET_HI = 1e-12
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8
TRUNCATION = 1e-16
POINTS_PER_DECADE = 5


@dataclass(frozen=True)
class MgfModel:
    """Cumulant generating function with a finite critical moment.

    Attributes
    ----------
    mu_star : float
        Critical moment; ``log_mgf(p)`` is finite on ``[0, mu_star)`` and
        tends to ``+inf`` as ``p`` increases to ``mu_star``.
    log_mgf : callable
        ``p -> ln E exp(pZ)``.
    alpha : float or None
        Regular-variation index of ``x -> log_mgf(mu_star - 1/x)``; ``None``
        when unknown.
    mean : float or None
        ``E Z``, the slope of ``log_mgf`` at zero; estimated numerically
        when ``None``.
    name : str
    """

    mu_star: float
    log_mgf: Callable[[float], float]
    alpha: float | None = None
    mean: float | None = None
    name: str = ""

    def __post_init__(self):
        if not (self.mu_star > 0 and math.isfinite(self.mu_star)):
            raise InvalidInputError(f"invalid-model: mu_star must be positive and finite, got {self.mu_star}")
        if self.alpha is not None and self.alpha < 0:
            raise InvalidInputError(f"invalid-model: alpha must be nonnegative, got {self.alpha}")


@dataclass(frozen=True)
class LegendrePoint:
    R: float
    p_star: float
    lambda_star: float


@dataclass(frozen=True)
class TailBand:
    """Band for ``ln P(Z > R)`` at level ``R``.

    ``log_upper`` is a bound valid at every ``R``.  ``exponent_interval``
    and ``log_lower_limsup`` describe the limsup of
    ``(ln P(Z > R) + Lambda*(R)) / ln R`` as ``R -> inf``; they are an
    asymptotic statement and say nothing about a single finite ``R``.
    """

    R: float
    log_upper: float
    exponent_interval: tuple[float, float]
    log_lower_limsup: float
    asymptotic: bool = True


def _step(model, p, scale=1e-3):
    # power of two, so that p +/- h and p +/- 2h are exact in binary
    _, exponent = math.frexp(scale * (model.mu_star - p))
    return math.ldexp(1.0, exponent - 1)


def dlog_mgf(model, p):
    """Five-point central difference of ``log_mgf`` at ``p``.

    The step shrinks with the distance to ``mu_star`` so that the stencil
    never reaches the explosion point and the truncation error stays
    relative to the local scale of the singularity.
    """
    h = _step(model, p)
    f = model.log_mgf
    return (8.0 * (f(p + h) - f(p - h)) - (f(p + 2 * h) - f(p - 2 * h))) / (12.0 * h)


def _d2log_mgf(model, p):
    h = _step(model, p, 1e-2)
    return (dlog_mgf(model, p + h) - dlog_mgf(model, p - h)) / (2.0 * h)


def _mean(model):
    if model.mean is not None:
        return model.mean
    return dlog_mgf(model, 0.0)


def phi_shifted(model, x):
    """``log_mgf(mu_star - 1/x)`` for ``x > 1/mu_star``."""
    if not x > 1.0 / model.mu_star:
        raise DomainError(f"domain: phi_shifted needs x > 1/mu_star = {1.0 / model.mu_star:.17g}, got {x}")
    return model.log_mgf(model.mu_star - 1.0 / x)


def _solve_pstar(model, R, mean):
    if not R > mean:
        raise BelowMeanError(f"below-mean: R={R:.17g} must exceed the mean {mean:.17g}")
    mu = model.mu_star
    lo = BRACKET_LO * mu
    if dlog_mgf(model, lo) >= R:
        lo = 0.0
    hi = mu * (1.0 - BRACKET_HI)
    if dlog_mgf(model, hi) < R:
        raise ConvergenceError(
            f"no-convergence: Lambda'(p) stays below R={R:.17g} up to p={hi:.17g}"
        )
    width = BISECTION_RTOL * mu
    for _ in range(200):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        if dlog_mgf(model, mid) < R:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    for _ in range(NEWTON_STEPS):
        slope = _d2log_mgf(model, p)
        if not slope > 0:
            break
        candidate = p - (dlog_mgf(model, p) - R) / slope
        if not lo <= candidate <= hi:
            break
        p = candidate
    return p


def legendre(model, R):
    """Fenchel-Legendre transform at ``R`` and its maximiser.

    Solves ``Lambda'(p) = R`` on ``(0, mu_star)`` by bisection followed by a
    few Newton steps, then returns ``Lambda*(R) = p* R - Lambda(p*)``.

    Raises
    ------
    BelowMeanError
        If ``R`` does not exceed the mean.
    ConvergenceError
        If the derivative never reaches ``R`` inside the bracket.
    """
    p = _solve_pstar(model, R, _mean(model))
    return LegendrePoint(R, p, p * R - model.log_mgf(p))


def chernoff_upper(model, R):
    """Chernoff bound ``exp(-Lambda*(R))`` on ``P(Z > R)``."""
    return math.exp(-legendre(model, R).lambda_star)


def band_exponents(alpha):
    """Interval ``[-(alpha+2)/(2(alpha+1)), 0]`` for the log-correction."""
    return (-(alpha + 2.0) / (2.0 * (alpha + 1.0)), 0.0)


def tail_band(model, R):
    """Chernoff bound together with the log-correction band at ``R``.

    Raises
    ------
    InvalidInputError
        ``alpha-unknown`` when the model does not declare its index.
    """
    if model.alpha is None:
        raise InvalidInputError(f"alpha-unknown: model {model.name or '<anonymous>'} declares no index")
    lp = legendre(model, R)
    lower, upper = band_exponents(model.alpha)
    return TailBand(
        R=R,
        log_upper=-lp.lambda_star,
        exponent_interval=(lower, upper),
        log_lower_limsup=-lp.lambda_star + lower * math.log(R),
    )


class _PsiR:
    # p*(R) and Lambda(p*(R)) are shared by every evaluation at a fixed R
    def __init__(self, model, R):
        self.model = model
        self.R = R
        self.mean = _mean(model)
        self.p_R = _solve_pstar(model, R, self.mean)
        self.lam_R = model.log_mgf(self.p_R)

    def __call__(self, z):
        if z == 1.0:
            return 0.0
        Rz = self.R * z
        p_z = _solve_pstar(self.model, Rz, self.mean)
        return (self.p_R - p_z) * Rz + self.model.log_mgf(p_z) - self.lam_R


def psi_R(model, R, z):
    """``(p*(R) - p*(Rz)) Rz + Lambda(p*(Rz)) - Lambda(p*(R))``.

    Zero at ``z = 1`` and negative elsewhere.
    """
    return _PsiR(model, R)(z)


def laplace_window_integral(model, R, gamma, beta, node_cap=200_000):
    """``int_{R^(beta-1)}^inf z^gamma exp(psi_R(z)) dz`` by adaptive quadrature.

    The range is split at the peak ``z = 1``.  Below it, the pieces are
    ``[R^(beta-1), ..., 1/4, 1/2, 1]``; above it, ``[1, 2, 4, ...]`` until
    the integrand drops below ``1e-16`` of its value at ``z = 1``.

    Raises
    ------
    ConvergenceError
        ``quadrature-failure`` when a piece does not meet the tolerance or
        the total number of integrand calls exceeds ``node_cap``.
    """
    if not 0.0 < beta < 1.0:
        raise InvalidInputError(f"invalid-beta: beta must lie in (0, 1), got {beta}")
    shape = _PsiR(model, R)
    calls = [0]

    def integrand(z):
        calls[0] += 1
        if calls[0] > node_cap:
            raise ConvergenceError(f"quadrature-failure: more than {node_cap} integrand calls")
        return z**gamma * math.exp(shape(z))

    lower = R ** (beta - 1.0)
    if lower >= 1.0:
        raise InvalidInputError(f"invalid-window: R^(beta-1) = {lower} must be below 1")
    cuts = [1.0]
    while cuts[-1] / 2.0 > lower:
        cuts.append(cuts[-1] / 2.0)
    cuts.append(lower)
    edges = sorted(cuts)
    z = 1.0
    while True:
        z *= 2.0
        edges.append(z)
        if integrand(z) < TRUNCATION:
            break
    total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        value, _, info, *rest = quad(
            integrand, left, right, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200, full_output=1
        )
        if rest:
            raise ConvergenceError(f"quadrature-failure on [{left:.6g}, {right:.6g}]: {rest[0]}")
        total += value
    return total


def _geometric_grid(R_lo, R_hi):
    decades = math.log10(R_hi / R_lo)
    n = int(round(POINTS_PER_DECADE * decades)) + 1
    return np.geomspace(R_lo, R_hi, n)


def pstar_derivative_indices(model, R_lo, R_hi, rel_step=1e-2):
    """Regular-variation indices of ``1/(p*)'`` and ``1/|(p*)''|``.

    Central differences of ``p*`` with step ``rel_step * R`` on a geometric
    grid (five points per decade), followed by least-squares log-log slopes.
    Under the standing assumptions the pair tends to
    ``((alpha+2)/(alpha+1), (3+2 alpha)/(alpha+1))``.
    """
    if not R_hi >= 10.0 * R_lo:
        raise InvalidInputError(f"insufficient-span: need R_hi >= 10 R_lo, got [{R_lo}, {R_hi}]")
    mean = _mean(model)
    grid = _geometric_grid(R_lo, R_hi)
    d1 = np.empty_like(grid)
    d2 = np.empty_like(grid)
    for i, R in enumerate(grid):
        h = rel_step * R
        left, mid, right = (_solve_pstar(model, r, mean) for r in (R - h, R, R + h))
        d1[i] = (right - left) / (2.0 * h)
        d2[i] = (right - 2.0 * mid + left) / (h * h)
    logs = np.log(grid)
    index1 = np.polyfit(logs, -np.log(np.abs(d1)), 1)[0]
    index2 = np.polyfit(logs, -np.log(np.abs(d2)), 1)[0]
    return float(index1), float(index2)


def rv_index_estimate(samples):
    """Least-squares slope of ``ln f`` against ``ln x``.

    Parameters
    ----------
    samples : iterable of (x, f(x)) pairs
        ``x`` positive and spanning at least one decade, ``f`` positive.
    """
    arr = np.asarray(list(samples), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
        raise InvalidInputError("insufficient-span: need at least two (x, f(x)) pairs")
    x, f = arr[:, 0], arr[:, 1]
    if np.any(x <= 0) or np.any(f <= 0):
        raise InvalidInputError("nonpositive-sample: x and f(x) must be positive")
    if x.max() < 10.0 * x.min():
        raise InvalidInputError(f"insufficient-span: x covers [{x.min()}, {x.max()}], less than a decade")
    return float(np.polyfit(np.log(x), np.log(f), 1)[0])
