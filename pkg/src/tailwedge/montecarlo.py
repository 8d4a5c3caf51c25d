"""Exact-transition Monte Carlo for ``Z = l1 V_t + l2 I_t``.

``V`` is advanced with its noncentral chi-square transition law, so the only
discretisation error left is the trapezoid rule used for ``I_t``.

Randomness comes from a Philox counter-based generator.  Paths are grouped in
blocks of ``BLOCK_SIZE`` consecutive indices and block ``j`` draws from the
stream keyed by ``(seed, j)``, so the draws of any given path do not depend
on how blocks are spread over workers.  Block accumulators are merged in
block order, which makes every estimate bitwise reproducible for a fixed
seed whatever the worker count.
"""

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .critical import mu_plus
from .errors import InvalidInputError, PreconditionError

__all__ = [
    "McConfig",
    "McTailEstimate",
    "McMgfEstimate",
    "HeavyTailWarning",
    "block_generator",
    "sample_transition",
    "simulate_path",
    "simulate_paths",
    "coupled_trapezoid",
    "wilson_interval",
    "estimate",
    "estimate_tail",
    "estimate_mgf",
    "sweep",
]

BLOCK_SIZE = 8192
MIN_PATHS = 100
MIN_STEPS = 8
WILSON_Z = 1.959963984540054
MGF_GUARD = 0.8
HEAVY_TAIL = 0.5


class HeavyTailWarning(UserWarning):
    """``E exp(2pZ)`` is infinite, so the standard error is not reliable."""


@dataclass(frozen=True)
class McConfig:
    """Path count, time steps, seed and worker count of a simulation."""

    n_paths: int = 200_000
    n_steps: int = 256
    seed: int = 0
    workers: int | str = 1

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < MIN_PATHS:
            raise InvalidInputError(f"invalid-config: n_paths must be an integer >= {MIN_PATHS}, got {self.n_paths}")
        if int(self.n_steps) != self.n_steps or self.n_steps < MIN_STEPS:
            raise InvalidInputError(f"invalid-config: n_steps must be an integer >= {MIN_STEPS}, got {self.n_steps}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidInputError(f"invalid-config: seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.workers != "auto" and not (isinstance(self.workers, int) and self.workers >= 1):
            raise InvalidInputError(f"invalid-config: workers must be a positive integer or 'auto', got {self.workers!r}")

    @property
    def n_blocks(self):
        return -(-self.n_paths // BLOCK_SIZE)

    def resolved_workers(self):
        if self.workers == "auto":
            return max(1, min(os.cpu_count() or 1, self.n_blocks))
        return min(self.workers, self.n_blocks)


@dataclass(frozen=True)
class McTailEstimate:
    """Empirical ``P(Z > R)`` with its 95% Wilson interval.

    With no exceedance the upper end is the rule-of-three bound ``3/n``
    and ``zero_exceedance`` is set.
    """

    R: float
    p_hat: float
    ci_low: float
    ci_high: float
    n_exceed: int
    n_paths: int
    n_steps: int
    seed: int
    zero_exceedance: bool = False


class McMgfEstimate(NamedTuple):
    p: float
    estimate: float
    std_error: float
    heavy_tail: bool = False


def block_generator(seed, block):
    """Philox generator for block ``block`` of the stream ``seed``."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(block)))


def sample_transition(params, v_from, dt, rng):
    """Draw ``V_{s+dt}`` given ``V_s = v_from`` from the exact transition law.

    ``V_{s+dt} = cbar * X`` with ``X`` noncentral chi-square with
    ``d = 4a/sigma^2`` degrees of freedom and noncentrality
    ``v_from e^{-b dt} / cbar``, where
    ``cbar = sigma^2 (1 - e^{-b dt}) / (4b)``.  For ``d > 1`` the draw is
    ``(N + sqrt(lam))^2 + chi2_{d-1}``; otherwise a Poisson mixture of
    central chi-squares.  ``v_from`` may be an array.
    """
    if not dt > 0:
        raise InvalidInputError(f"invalid-dt: dt must be positive, got {dt}")
    b, s2 = params.b, params.sigma**2
    cbar = 0.25 * s2 * dt if b == 0 else 0.25 * s2 * -math.expm1(-b * dt) / b
    d = 4.0 * params.a / s2
    v_from = np.asarray(v_from, dtype=float)
    lam = v_from * math.exp(-b * dt) / cbar
    if d > 1.0:
        z = rng.standard_normal(v_from.shape)
        x = (z + np.sqrt(lam)) ** 2 + 2.0 * rng.gamma(0.5 * (d - 1.0), size=v_from.shape)
    else:
        n = rng.poisson(0.5 * lam)
        x = 2.0 * rng.gamma(0.5 * d + n)
    return cbar * x


def simulate_paths(params, t, n_steps, n_paths, rng):
    """Terminal ``(V_t, I_t)`` arrays for ``n_paths`` independent paths.

    ``I_t`` uses the trapezoid rule on the uniform grid of ``n_steps``
    exact transitions.
    """
    if not t > 0:
        raise InvalidInputError(f"invalid-time: t must be positive, got {t}")
    dt = t / n_steps
    v = np.full(n_paths, float(params.v))
    i = np.zeros(n_paths)
    for _ in range(n_steps):
        nxt = sample_transition(params, v, dt, rng)
        i += 0.5 * dt * (v + nxt)
        v = nxt
    return v, i


def coupled_trapezoid(params, t, n_fine, levels, n_paths, rng):
    """``I_t`` on several grids from the same exact fine paths.

    Every level must divide ``n_fine``.  Subsampling an exactly simulated
    path gives a path with the coarse-grid law, so the estimates for
    different levels share their noise and their differences isolate the
    trapezoid bias.  Returns a dict ``level -> I_t`` array.
    """
    levels = sorted(set(int(n) for n in levels))
    if any(n_fine % n for n in levels):
        raise InvalidInputError(f"invalid-levels: every level must divide n_fine={n_fine}")
    dt = t / n_fine
    v = np.full(n_paths, float(params.v))
    last = {n: v for n in levels}
    out = {n: np.zeros(n_paths) for n in levels}
    for k in range(1, n_fine + 1):
        v = sample_transition(params, v, dt, rng)
        for n in levels:
            if k % (n_fine // n) == 0:
                out[n] += 0.5 * (t / n) * (last[n] + v)
                last[n] = v
    return out


def simulate_path(params, t, n_steps, rng):
    """One path; returns the terminal pair ``(v_t, i_t)``."""
    v, i = simulate_paths(params, t, n_steps, 1, rng)
    return float(v[0]), float(i[0])


def wilson_interval(n_exceed, n):
    """95% Wilson score interval; rule of three when nothing exceeds."""
    if n_exceed == 0:
        return 0.0, min(1.0, 3.0 / n)
    p = n_exceed / n
    z2 = WILSON_Z * WILSON_Z
    denom = 1.0 + z2 / n
    centre = (p + 0.5 * z2 / n) / denom
    half = WILSON_Z * math.sqrt(p * (1.0 - p) / n + 0.25 * z2 / (n * n)) / denom
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


def _block(job):
    params, spec, config, block, R, p = job
    start = block * BLOCK_SIZE
    size = min(BLOCK_SIZE, config.n_paths - start)
    rng = block_generator(config.seed, block)
    v, i = simulate_paths(params, spec.t, config.n_steps, size, rng)
    z = spec.l1 * v + spec.l2 * i
    counts = (z[:, None] > R[None, :]).sum(axis=0)
    w = np.exp(np.outer(z, p))
    mean = w.mean(axis=0)
    m2 = ((w - mean) ** 2).sum(axis=0)
    return counts, size, mean, m2


def _merge(acc, part):
    counts, n, mean, m2 = acc
    c2, n2, mean2, m22 = part
    total = n + n2
    delta = mean2 - mean
    return counts + c2, total, mean + delta * (n2 / total), m2 + m22 + delta * delta * (n * n2 / total)


def sweep(params, spec, config, R_list=(), p_list=()):
    """One pass over all paths scoring every threshold and every ``p``.

    Returns ``(counts, n, mean, m2)``: exceedance counts per ``R``, the path
    count, and the running mean and centred second moment of
    ``exp(p Z)`` per ``p``.
    """
    R = np.asarray(R_list, dtype=float).reshape(-1)
    p = np.asarray(p_list, dtype=float).reshape(-1)
    jobs = [(params, spec, config, j, R, p) for j in range(config.n_blocks)]
    workers = config.resolved_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block, jobs))
    else:
        parts = [_block(job) for job in jobs]
    acc = parts[0]
    for part in parts[1:]:
        acc = _merge(acc, part)
    return acc


def _tail_rows(R_list, counts, n, config):
    out = []
    for r, k in zip(R_list, counts):
        k = int(k)
        low, high = wilson_interval(k, n)
        out.append(McTailEstimate(r, k / n, low, high, k, n, config.n_steps, config.seed, k == 0))
    return out


def _mgf_guard(params, spec, p_list):
    try:
        mu = mu_plus(params, spec)
    except PreconditionError:
        return [False] * len(p_list)
    heavy = []
    for p in p_list:
        if p > MGF_GUARD * mu:
            raise PreconditionError(
                f"p-too-close-to-critical: p={p:.17g} exceeds {MGF_GUARD} * mu+={mu:.17g}"
            )
        heavy.append(p > HEAVY_TAIL * mu)
    if any(heavy):
        warnings.warn("heavy-tail-variance: p > 0.5 mu+, the standard error understates the spread",
                      HeavyTailWarning, stacklevel=3)
    return heavy


def _mgf_rows(p_list, n, mean, m2, heavy):
    return [
        McMgfEstimate(p, float(m), math.sqrt(float(s) / (n - 1) / n), h)
        for p, m, s, h in zip(p_list, mean, m2, heavy)
    ]


def estimate(params, spec, config, R_list=(), p_list=()):
    """Tail and MGF estimates from one shared sweep.

    Returns ``(tails, mgfs)`` as produced by :func:`estimate_tail` and
    :func:`estimate_mgf`.  The ``p`` guard runs before any simulation.
    """
    R_list = [float(r) for r in R_list]
    p_list = [float(p) for p in p_list]
    heavy = _mgf_guard(params, spec, p_list)
    counts, n, mean, m2 = sweep(params, spec, config, R_list, p_list)
    return _tail_rows(R_list, counts, n, config), _mgf_rows(p_list, n, mean, m2, heavy)


def estimate_tail(params, spec, R_list, config):
    """``P(Z > R)`` for every ``R`` in ``R_list`` from a single sweep."""
    if len(R_list) == 0:
        raise InvalidInputError("invalid-levels: R_list must be nonempty")
    return estimate(params, spec, config, R_list=R_list)[0]


def estimate_mgf(params, spec, p_list, config):
    """Empirical ``E exp(p Z)`` with its standard error for each ``p``.

    Beyond ``0.5 mu+`` the second moment is infinite; those entries carry
    ``heavy_tail=True`` and a :class:`HeavyTailWarning` is issued.

    Raises
    ------
    PreconditionError
        ``p-too-close-to-critical`` when some ``p > 0.8 mu+``.
    """
    return estimate(params, spec, config, p_list=p_list)[1]
