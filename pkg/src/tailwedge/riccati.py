"""Closed-form Riccati solutions for the CIR process.

For the square-root diffusion ``dV = (a - bV) dt + sigma sqrt(V) dW`` with
``V_0 = v`` and ``I_t = int_0^t V_u du``,

    E exp(l1 V_t + l2 I_t) = exp(a phi(t) + v psi(t))

where ``psi`` solves

    psi' = (sigma^2 / 2) (psi^2 - 2 (b / sigma^2) psi + 2 l2 / sigma^2),  psi(0) = l1

and ``phi(t) = int_0^t psi``.  Writing ``x = l1 - b/sigma^2`` the right-hand
side is ``(sigma^2/2) ((psi - b/sigma^2)^2 + (2 l2 sigma^2 - b^2)/sigma^4)``,
so the sign of ``2 l2 sigma^2 - b^2`` selects one of three solution families.

The formulas below are the tabulated closed forms rewritten with hyperbolic
and circular identities (``(C e^u + 1)/(C e^u - 1) = coth(u/2 + ln(C)/2)``
and friends) so that they stay accurate close to the explosion time and for
long horizons.
"""

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DomainError, InvalidInputError, MomentExplodedError

__all__ = [
    "CirParams",
    "Regime",
    "RiccatiCase",
    "RiccatiEval",
    "ConditioningWarning",
    "classify",
    "psi",
    "phi",
    "t_star",
    "log_mgf",
    "evaluate",
    "ode_reference",
    "ode_trajectory",
    "mean_v",
    "mean_i",
    "var_v",
]

CLASSIFY_RTOL = 1e-12
CONDITIONING_RTOL = 1e-8
_LN2 = math.log(2.0)


class ConditioningWarning(UserWarning):
    """Inputs sit close to a regime boundary where the formulas lose digits."""


@dataclass(frozen=True)
class CirParams:
    """Parameters of ``dV = (a - bV) dt + sigma sqrt(V) dW``, ``V_0 = v``."""

    a: float
    b: float
    sigma: float
    v: float

    def __post_init__(self):
        for name in ("a", "b", "sigma", "v"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidInputError(f"invalid-params: {name}={value!r} is not finite")
        if self.sigma <= 0:
            raise InvalidInputError(f"invalid-params: sigma must be positive, got {self.sigma}")
        if self.a < 0:
            raise InvalidInputError(f"invalid-params: a must be nonnegative, got {self.a}")
        if self.v < 0:
            raise InvalidInputError(f"invalid-params: v must be nonnegative, got {self.v}")

    @property
    def nu(self):
        return 2.0 * self.a / self.sigma**2


class Regime(enum.Enum):
    SubcriticalOutside = "subcritical-outside"
    SubcriticalInside = "subcritical-inside"
    Critical = "critical"
    Supercritical = "supercritical"


@dataclass(frozen=True)
class RiccatiCase:
    """Regime of the Riccati equation for one ``(l1, l2)`` pair.

    ``alpha_or_beta`` is ``sqrt(|b^2 - 2 l2 sigma^2|) / sigma^2`` (zero in the
    critical regime).  ``C`` is ``|(x - alpha)/(x + alpha)|`` in the
    subcritical regimes, possibly ``inf`` on the stationary point
    ``x = -alpha``, and ``None`` otherwise.
    """

    tag: Regime
    alpha_or_beta: float
    C: float | None


@dataclass(frozen=True)
class RiccatiEval:
    psi: float
    phi: float
    t_star: float
    case: RiccatiCase


def classify(params, l1, l2):
    """Return the regime of ``psi`` for weights ``(l1, l2)``."""
    s2 = params.sigma**2
    b2 = params.b**2
    disc = 2.0 * l2 * s2 - b2
    scale = max(1.0, b2)
    if abs(disc) <= CLASSIFY_RTOL * scale:
        return RiccatiCase(Regime.Critical, 0.0, None)
    if abs(disc) <= CONDITIONING_RTOL * scale:
        warnings.warn(
            f"ill-conditioned: 2*l2*sigma^2 - b^2 = {disc:.3e} is close to the critical boundary",
            ConditioningWarning,
            stacklevel=2,
        )
    root = math.sqrt(abs(disc)) / s2
    if disc > 0:
        return RiccatiCase(Regime.Supercritical, root, None)
    x = l1 - params.b / s2
    C = math.inf if x + root == 0 else abs((x - root) / (x + root))
    tag = Regime.SubcriticalOutside if abs(x) > root else Regime.SubcriticalInside
    return RiccatiCase(tag, root, C)


def _log_abs_sinh(y):
    y = abs(y)
    return y + math.log(-math.expm1(-2.0 * y)) - _LN2


def _log_cosh(y):
    y = abs(y)
    return y + math.log1p(math.exp(-2.0 * y)) - _LN2


def _t_star(params, l1, l2, case):
    s2 = params.sigma**2
    x = l1 - params.b / s2
    if case.tag is Regime.Critical:
        return 2.0 / (s2 * x) if x > 0 else math.inf
    root = case.alpha_or_beta
    if case.tag is Regime.Supercritical:
        return 2.0 * math.atan2(root, x) / (root * s2)
    if case.tag is Regime.SubcriticalOutside and x > root:
        # ln((x + alpha)/(x - alpha)) / (alpha sigma^2), written via log1p
        return math.log1p(2.0 * root / (x - root)) / (root * s2)
    return math.inf


def _psi_phi(params, l1, l2, t, case):
    """Scalar closed forms; assumes ``0 <= t < t*``."""
    if t == 0.0:
        return l1, 0.0
    s2 = params.sigma**2
    m = params.b / s2
    x = l1 - m
    root = case.alpha_or_beta
    if case.tag is Regime.Critical:
        q = 0.5 * s2 * x * t
        return x / (1.0 - q) + m, m * t - (2.0 / s2) * math.log1p(-q)
    if case.tag is Regime.Supercritical:
        angle0 = math.atan2(root, x)
        angle = angle0 - 0.5 * root * s2 * t
        psi_t = m + root / math.tan(angle)
        phi_t = m * t + (2.0 / s2) * (math.log(math.sin(angle0)) - math.log(math.sin(angle)))
        return psi_t, phi_t
    # subcritical: stationary points first, where C is 0 or infinite
    if x == root or x == -root:
        return l1, l1 * t
    half0 = 0.5 * math.log(case.C)
    half = half0 + 0.5 * root * s2 * t
    if case.tag is Regime.SubcriticalOutside:
        psi_t = m - root / math.tanh(half)
        phi_t = m * t - (2.0 / s2) * (_log_abs_sinh(half) - _log_abs_sinh(half0))
    else:
        psi_t = m - root * math.tanh(half)
        phi_t = m * t - (2.0 / s2) * (_log_cosh(half) - _log_cosh(half0))
    return psi_t, phi_t


def _check_t(t):
    if not t >= 0:
        raise InvalidInputError(f"invalid-time: t must be nonnegative, got {t}")


def _scalar_eval(params, l1, l2, t):
    t = float(t)
    _check_t(t)
    case = classify(params, l1, l2)
    ts = _t_star(params, l1, l2, case)
    if t >= ts:
        raise MomentExplodedError(t, ts)
    psi_t, phi_t = _psi_phi(params, l1, l2, t, case)
    return RiccatiEval(psi_t, phi_t, ts, case)


def _map_t(func, t):
    if np.ndim(t) == 0:
        return func(t)
    return np.array([func(ti) for ti in np.asarray(t, dtype=float).ravel()]).reshape(np.shape(t))


def evaluate(params, l1, l2, t):
    """Return ``psi``, ``phi``, ``t*`` and the regime at a scalar horizon ``t``.

    Raises
    ------
    MomentExplodedError
        If ``t >= t*``.
    """
    return _scalar_eval(params, l1, l2, t)


def psi(params, l1, l2, t):
    """Closed-form ``psi_{l1,l2}(t)``; ``t`` may be a scalar or an array."""
    return _map_t(lambda s: _scalar_eval(params, l1, l2, s).psi, t)


def phi(params, l1, l2, t):
    """Closed-form ``phi_{l1,l2}(t) = int_0^t psi``."""
    return _map_t(lambda s: _scalar_eval(params, l1, l2, s).phi, t)


def t_star(params, l1, l2):
    """Explosion time of ``psi_{l1,l2}``, ``math.inf`` when it never explodes."""
    return _t_star(params, l1, l2, classify(params, l1, l2))


def log_mgf(params, l1, l2, t):
    """``ln E exp(l1 V_t + l2 I_t) = a phi(t) + v psi(t)``."""
    def one(s):
        ev = _scalar_eval(params, l1, l2, s)
        return params.a * ev.phi + params.v * ev.psi

    return _map_t(one, t)


def mean_v(params, t):
    """``E[V_t] = v e^{-bt} + a (1 - e^{-bt}) / b``."""
    b = params.b
    decay = math.exp(-b * t)
    growth = t if b == 0 else -math.expm1(-b * t) / b
    return params.v * decay + params.a * growth


def mean_i(params, t):
    """``E[I_t] = int_0^t E[V_s] ds``."""
    b = params.b
    if abs(b * t) < 1e-8:
        g1 = t - 0.5 * b * t * t
        g2 = 0.5 * t * t - b * t**3 / 6.0
    else:
        g1 = -math.expm1(-b * t) / b
        g2 = (t - g1) / b
    return params.v * g1 + params.a * g2


def var_v(params, t):
    """Variance of ``V_t``."""
    b, s2 = params.b, params.sigma**2
    if b == 0:
        return params.v * s2 * t + 0.5 * params.a * s2 * t * t
    decay = math.exp(-b * t)
    gap = -math.expm1(-b * t)
    return params.v * s2 * decay * gap / b + params.a * s2 * gap * gap / (2 * b * b)


def _rhs(params, l2):
    s2 = params.sigma**2
    b = params.b

    def rhs(_, y):
        p = y[0]
        return [0.5 * s2 * p * p - b * p + l2, p]

    return rhs


def ode_trajectory(params, l1, l2, times, tol=1e-12):
    """Integrate ``(psi, phi)`` numerically and return them on ``times``.

    The reference solver is DOP853 (an embedded 8(5,3) Runge-Kutta pair)
    with relative tolerance ``tol``.  ``times`` must be sorted and lie below
    the blow-up time.
    """
    times = np.asarray(times, dtype=float)
    t_end = float(times[-1])
    if t_end == 0.0:
        return np.full_like(times, l1), np.zeros_like(times)
    sol = solve_ivp(
        _rhs(params, l2), (0.0, t_end), [l1, 0.0], method="DOP853",
        t_eval=times, rtol=tol, atol=tol * 1e-3,
    )
    if sol.status != 0:
        raise ConvergenceError(f"step-underflow: {sol.message}")
    return sol.y[0], sol.y[1]


def _rescaled_rhs(params, l2):
    s2 = params.sigma**2
    b = params.b

    def rhs(_, y):
        p = y[1]
        w = 1.0 / (1.0 + abs(p))
        return [w, (0.5 * s2 * p * p - b * p + l2) * w, p * w]

    return rhs


def ode_reference(params, l1, l2, t, tol=1e-12):
    """Numerical counterpart of :func:`evaluate`.

    Integrates the Riccati equation up to ``t``.  Explosion is declared when
    ``psi`` exceeds ``1e12 * max(1, |l1|)``; in that case the returned
    ``t_star`` is the crossing time and ``psi``/``phi`` are ``inf``.  When no
    explosion is seen on ``[0, t]``, ``t_star`` is ``inf``.

    The system is integrated in the rescaled variable ``s`` with
    ``dt/ds = 1/(1 + |psi|)``.  Near a blow-up, time then advances by tiny
    amounts per unit ``s`` while the steps in ``s`` stay of ordinary size,
    so the crossing is located accurately even when ``t*`` is large and the
    remaining gap ``t* - t`` is a few ulps.
    """
    t = float(t)
    _check_t(t)
    case = classify(params, l1, l2)
    if t == 0.0:
        return RiccatiEval(l1, 0.0, math.inf, case)
    threshold = 1e12 * max(1.0, abs(l1))

    def reach(_, y):
        return y[0] - t

    def blowup(_, y):
        return y[1] - threshold

    for event in (reach, blowup):
        event.terminal = True
        event.direction = 1
    # t advances at rate >= 1/(1 + threshold) until one of the events fires
    s_end = t * (1.0 + threshold) + 1.0
    sol = solve_ivp(
        _rescaled_rhs(params, l2), (0.0, s_end), [0.0, l1, 0.0], method="DOP853",
        events=(reach, blowup), rtol=tol, atol=tol * 1e-3,
    )
    if sol.status == -1:
        raise ConvergenceError(f"step-underflow: {sol.message}")
    if len(sol.t_events[1]):
        return RiccatiEval(math.inf, math.inf, float(sol.y_events[1][0][0]), case)
    if len(sol.t_events[0]):
        _, psi_t, phi_t = sol.y_events[0][0]
        return RiccatiEval(float(psi_t), float(phi_t), math.inf, case)
    raise ConvergenceError(f"step-underflow: integration ended at t={sol.y[0, -1]:.17g} before reaching {t}")
