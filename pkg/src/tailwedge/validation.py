"""Acceptance checks shared by ``tailwedge validate`` and the test suite.

Each check returns a :class:`CheckResult` carrying the measured values.  In
quick mode the Monte Carlo path counts are divided by ``QUICK_PATH_FACTOR``,
the random-sample counts by ``QUICK_SAMPLE_FACTOR``, and the standard-error
multiplier is widened by ``QUICK_SE_FACTOR``; deterministic tolerances never
change.
"""

import io
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import riccati
from .critical import (
    SuperpositionSpec,
    cir_mgf_model,
    mu_plus,
    omega_closed,
    omega_fit,
)
from .errors import TailwedgeError
from .models import GammaParams, gamma_exact_log_sf, gamma_model
from .montecarlo import HeavyTailWarning, McConfig, estimate_mgf, estimate_tail
from .riccati import CirParams, Regime
from .tauberian import (
    chernoff_upper,
    laplace_window_integral,
    legendre,
    psi_R,
    pstar_derivative_indices,
)

__all__ = [
    "CheckResult",
    "CHECKS",
    "run_check",
    "run_checks",
    "random_riccati_cases",
    "random_supercritical_configs",
    "MGF_SETS",
    "BENCHMARK",
]

QUICK_PATH_FACTOR = 10
QUICK_SAMPLE_FACTOR = 5
QUICK_SE_FACTOR = 4.0 / 3.0
DESK_PATHS = 200_000
DESK_STEPS = 256
SEED = 42

BENCHMARK = (CirParams(1.0, 0.0, 1.0, 1.0), SuperpositionSpec(0.0, 1.0, 1.0))

MGF_SETS = (
    BENCHMARK,
    (CirParams(1.0, 1.0, 1.0, 1.0), SuperpositionSpec(0.3, 0.2, 0.7)),
    (CirParams(1.0, 1.0, 1.0, 1.0), SuperpositionSpec(1.0, 0.0, math.log(2.0))),
    (CirParams(0.5, 2.0, 1.5, 0.3), SuperpositionSpec(0.5, 0.5, 1.0)),
    (CirParams(2.0, 0.5, 0.8, 0.5), SuperpositionSpec(0.2, 1.0, 2.0)),
)

CHERNOFF_SETS = (
    BENCHMARK,
    (CirParams(1.0, 1.0, 1.0, 1.0), SuperpositionSpec(1.0, 0.0, 1.0)),
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: str
    soft: bool = False
    seconds: float = 0.0

    @property
    def status(self):
        return "PASS" if self.passed else "FAIL"

    def line(self):
        tag = " (soft)" if self.soft else ""
        return f"{self.status}{tag} [{self.number:2d}] {self.name}: {self.measured} ({self.seconds:.1f} s)"


# ---------------------------------------------------------------- samplers

def random_riccati_cases(n, seed=7):
    """``n`` random ``(params, l1, l2)`` triples, cycling through all regimes."""
    rng = np.random.default_rng(seed)
    tags = list(Regime)
    out = []
    while len(out) < n:
        want = tags[len(out) % len(tags)]
        a = rng.uniform(0.0, 3.0)
        b = rng.uniform(-2.0, 3.0)
        sigma = rng.uniform(0.3, 2.0)
        params = CirParams(a, b, sigma, rng.uniform(0.0, 2.0))
        s2 = sigma * sigma
        edge = b * b / (2.0 * s2)
        m = b / s2
        if want is Regime.Supercritical:
            l2 = edge + rng.uniform(0.05, 2.0)
            l1 = rng.uniform(-2.0, 2.0)
        elif want is Regime.Critical:
            l2 = edge
            l1 = m + rng.uniform(-2.0, 2.0)
        else:
            if abs(b) < 0.2:
                continue
            l2 = edge - rng.uniform(0.05, 1.0)
            alpha = math.sqrt(b * b - 2.0 * l2 * s2) / s2
            if want is Regime.SubcriticalInside:
                l1 = m + alpha * rng.uniform(-0.95, 0.95)
            else:
                l1 = m + alpha * rng.choice([-1.0, 1.0]) * rng.uniform(1.05, 3.0)
        if riccati.classify(params, l1, l2).tag is want:
            out.append((params, float(l1), float(l2)))
    return out


def random_supercritical_configs(n, seed=11):
    """``n`` random ``(params, spec)`` pairs that are Supercritical at ``mu+``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        params = CirParams(rng.uniform(0.2, 2.0), rng.uniform(-1.0, 2.0),
                           rng.uniform(0.3, 1.5), rng.uniform(0.2, 2.0))
        spec = SuperpositionSpec(rng.uniform(-0.5, 1.0), rng.uniform(0.2, 2.0), rng.uniform(0.5, 2.0))
        mu = mu_plus(params, spec)
        if riccati.classify(params, mu * spec.l1, mu * spec.l2).tag is Regime.Supercritical:
            out.append((params, spec))
    return out


# ---------------------------------------------------------------- checks

def check_riccati(quick=False):
    n = 200 // (QUICK_SAMPLE_FACTOR if quick else 1)
    worst = 0.0
    tags = set()
    for params, l1, l2 in random_riccati_cases(n):
        ts = riccati.t_star(params, l1, l2)
        horizon = 0.9 * ts if math.isfinite(ts) else 3.0
        times = np.linspace(0.0, horizon, 50)
        psi_ode, phi_ode = riccati.ode_trajectory(params, l1, l2, times)
        psi_cf = riccati.psi(params, l1, l2, times)
        phi_cf = riccati.phi(params, l1, l2, times)
        for cf, ode in ((psi_cf, psi_ode), (phi_cf, phi_ode)):
            worst = max(worst, float(np.max(np.abs(cf - ode) / np.maximum(1.0, np.abs(ode)))))
        tags.add(riccati.classify(params, l1, l2).tag)
    ok = worst <= 1e-8 and len(tags) == 4
    return ok, f"{n} cases, {len(tags)} regimes, worst mixed-relative error {worst:.2e} (tol 1e-8)"


def check_explosion(quick=False):
    n = 200 // (QUICK_SAMPLE_FACTOR if quick else 1)
    worst = 0.0
    count = 0
    for params, l1, l2 in random_riccati_cases(n):
        ts = riccati.t_star(params, l1, l2)
        if not math.isfinite(ts):
            continue
        est = riccati.ode_reference(params, l1, l2, 1.5 * ts).t_star
        worst = max(worst, abs(est - ts) / ts)
        count += 1
    unit = CirParams(1.0, 1.0, 1.0, 1.0)
    crit = riccati.t_star(unit, 2.0, 0.5)
    sup = riccati.t_star(CirParams(1.0, 0.0, 1.0, 1.0), 0.0, 1.0)
    e_crit = abs(crit - 2.0) / 2.0
    e_sup = abs(sup - math.pi / math.sqrt(2.0)) / (math.pi / math.sqrt(2.0))
    ok = worst <= 1e-4 and e_crit <= 1e-10 and e_sup <= 1e-10
    return ok, (f"{count} finite t*, worst ODE relative error {worst:.2e} (tol 1e-4); "
                f"t*=2 error {e_crit:.1e}, t*=pi/sqrt2 error {e_sup:.1e} (tol 1e-10)")


def check_gamma_chain(quick=False):
    params = GammaParams(1.0, 1.0)
    model = gamma_model(params)
    worst = 0.0
    worst_ratio = 0.0
    gaps = []
    for R in (10.0, 1e2, 1e4):
        lp = legendre(model, R)
        worst = max(worst, abs(lp.p_star - (1.0 - 1.0 / R)) / (1.0 - 1.0 / R))
        ls = R - 1.0 - math.log(R)
        worst = max(worst, abs(lp.lambda_star - ls) / ls)
        for z in (0.2, 0.5, 2.0, 4.0):
            ref = 1.0 - z + math.log(z)
            worst = max(worst, abs(psi_R(model, R, z) - ref) / abs(ref))
        ratio = (gamma_exact_log_sf(params, R) + lp.lambda_star) / math.log(R)
        worst_ratio = max(worst_ratio, abs(ratio - (-1.0 - 1.0 / math.log(R))))
        gaps.append(abs(ratio + 1.0))
    approaching = all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    ok = worst <= 1e-10 and worst_ratio <= 1e-9 and approaching
    return ok, (f"worst relative error {worst:.2e} (tol 1e-10); ratio error {worst_ratio:.2e} (tol 1e-9); "
                f"|ratio+1| = {', '.join(f'{g:.4f}' for g in gaps)}")


def check_window(quick=False):
    gamma_value = laplace_window_integral(gamma_model(GammaParams(1.0, 1.0)), 1e6, 0.0, 0.25)
    err = abs(gamma_value - math.e)
    params, spec = BENCHMARK
    model = cir_mgf_model(params, spec)
    r1 = laplace_window_integral(model, 1e3, 0.0, 0.5) * 1e3**0.25
    r2 = laplace_window_integral(model, 2e3, 0.0, 0.5) * 2e3**0.25
    ratio = r2 / r1
    ok = err <= 1e-6 and 0.9 <= ratio <= 1.1
    return ok, f"gamma window - e = {gamma_value - math.e:.2e} (tol 1e-6); CIR doubling ratio {ratio:.5f} (band [0.9, 1.1])"


def check_indices(quick=False):
    g1, _ = pstar_derivative_indices(gamma_model(GammaParams(1.0, 1.0)), 1e2, 1e4)
    c1, _ = pstar_derivative_indices(cir_mgf_model(*BENCHMARK), 1e2, 1e4)
    ok = abs(g1 - 2.0) <= 0.05 and abs(c1 - 1.5) <= 0.05
    return ok, f"gamma index {g1:.5f} (expect 2), CIR index {c1:.5f} (expect 1.5), tol 0.05"


def check_critical_moment(quick=False):
    params, spec = BENCHMARK
    m1 = mu_plus(params, spec)
    e1 = abs(m1 - math.pi**2 / 2.0) / (math.pi**2 / 2.0)
    p2 = CirParams(1.0, 1.0, 1.0, 1.0)
    s2 = SuperpositionSpec(1.0, 0.0, math.log(2.0))
    m2 = mu_plus(p2, s2)
    e2 = abs(m2 - 4.0) / 4.0
    worst = 0.0
    for p, s in ((params, spec), (p2, s2), *MGF_SETS[1:]):
        base = mu_plus(p, s)
        for c in (0.5, 2.0, 10.0):
            scaled = mu_plus(p, SuperpositionSpec(c * s.l1, c * s.l2, s.t)) * c
            worst = max(worst, abs(scaled - base) / base)
    ok = e1 <= 1e-10 and e2 <= 1e-10 and worst <= 1e-9
    return ok, f"pi^2/2 error {e1:.1e}, 4 error {e2:.1e} (tol 1e-10); scale covariance {worst:.1e} (tol 1e-9)"


def check_omega(quick=False):
    n = 20 // (QUICK_SAMPLE_FACTOR if quick else 1)
    configs = [BENCHMARK, *random_supercritical_configs(n)]
    worst_omega = 0.0
    worst_kappa = 0.0
    for params, spec in configs:
        fit = omega_fit(params, spec)
        closed, _ = omega_closed(params, spec)
        worst_omega = max(worst_omega, abs(fit.omega - closed) / closed)
        worst_kappa = max(worst_kappa, abs(fit.log_coeff - 2.0 * params.a / params.sigma**2))
    bench = omega_closed(*BENCHMARK)[0]
    ok = worst_omega <= 1e-3 and worst_kappa <= 1e-2 and abs(bench - 2.0 * math.pi**2) <= 1e-9 * bench
    return ok, (f"benchmark omega {bench:.10f} (2 pi^2); {len(configs)} configs, worst omega relative gap "
                f"{worst_omega:.1e} (tol 1e-3), worst log-coefficient gap {worst_kappa:.1e} (tol 1e-2)")


def check_mgf_mc(quick=False):
    paths = DESK_PATHS // (QUICK_PATH_FACTOR if quick else 1)
    k = 3.0 * (QUICK_SE_FACTOR if quick else 1.0)
    config = McConfig(paths, DESK_STEPS, SEED, "auto")
    fails = []
    worst_time = 0.0
    worst_z = 0.0
    for idx, (params, spec) in enumerate(MGF_SETS):
        mu = mu_plus(params, spec)
        start = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HeavyTailWarning)
            rows = estimate_mgf(params, spec, [0.3 * mu, 0.5 * mu, 0.8 * mu], config)
        worst_time = max(worst_time, time.perf_counter() - start)
        for frac, row in zip((0.3, 0.5, 0.8), rows):
            exact = math.exp(riccati.log_mgf(params, row.p * spec.l1, row.p * spec.l2, spec.t))
            z = (row.estimate - exact) / row.std_error
            worst_z = max(worst_z, abs(z))
            if abs(z) > k:
                fails.append(f"set{idx + 1}@{frac}:z={z:.3g}")
    ok = not fails and worst_time < 60.0
    detail = "; outside: " + ", ".join(fails) if fails else ""
    return ok, (f"{len(MGF_SETS)} sets x 3 p at {paths} paths, limit {k:g} SE, worst |z| {worst_z:.3g}, "
                f"slowest set {worst_time:.1f} s{detail}")


def _chernoff_levels(model):
    mean = model.mean
    return sorted({*(mean * f for f in (1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 7.0, 10.0)), 50.0})


def check_chernoff(quick=False):
    paths = DESK_PATHS // (QUICK_PATH_FACTOR if quick else 1)
    config = McConfig(paths, DESK_STEPS, SEED, "auto")
    violations = 0
    tested = 0
    for params, spec in CHERNOFF_SETS:
        model = cir_mgf_model(params, spec)
        levels = _chernoff_levels(model)
        for est in estimate_tail(params, spec, levels, config):
            tested += 1
            if est.ci_low > chernoff_upper(model, est.R):
                violations += 1
    return violations == 0, f"{tested} levels over {len(CHERNOFF_SETS)} models, {violations} violations"


def corollary_diagnostic(paths=DESK_PATHS, steps=DESK_STEPS, seed=SEED, min_exceed=50):
    """``c_emp`` at the deepest level with at least ``min_exceed`` exceedances."""
    params, spec = BENCHMARK
    mu = mu_plus(params, spec)
    omega = omega_fit(params, spec).omega
    levels = np.round(np.arange(2.0, 12.0 + 1e-9, 0.05), 2)
    rows = estimate_tail(params, spec, levels, McConfig(paths, steps, seed, "auto"))
    deep = [r for r in rows if r.n_exceed >= min_exceed][-1]
    c_emp = (math.log(deep.p_hat) + mu * deep.R - 2.0 * math.sqrt(omega * deep.R)) / math.log(deep.R)
    return deep, c_emp


def check_corollary(quick=False):
    paths = DESK_PATHS // (QUICK_PATH_FACTOR if quick else 1)
    params, _ = BENCHMARK
    c = params.a / params.sigma**2
    lo, hi = c - 0.75 - 1.0, c + 1.0
    deep, c_emp = corollary_diagnostic(paths)
    ok = lo <= c_emp <= hi
    return ok, (f"deepest R={deep.R:g} with {deep.n_exceed} exceedances, c_emp={c_emp:.4f}, "
                f"band [{lo:g}, {hi:g}]")


def check_determinism(quick=False):
    from .cli import main

    paths = DESK_PATHS // (QUICK_PATH_FACTOR if quick else 1)
    argv = ["simulate", "--model", "cir", "--a", "1", "--b", "0", "--sigma", "1", "--v0", "1",
            "--l1", "0", "--l2", "1", "--t", "1", "--paths", str(paths), "--steps", str(DESK_STEPS),
            "--seed", str(SEED), "--R", "3,4,5", "--p", "1,2"]
    outputs = []
    for workers in ("1", "1", "4"):
        buf = io.StringIO()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            code = main(argv + ["--workers", workers], stdout=buf, stderr=io.StringIO())
        outputs.append((code, buf.getvalue().encode()))
    same = all(o == outputs[0] for o in outputs)
    ok = same and outputs[0][0] == 0
    return ok, f"3 runs (workers 1, 1, 4), {len(outputs[0][1])} bytes each, identical={same}"


CHECKS = (
    (1, "riccati", "Riccati closed forms vs ODE", check_riccati, False),
    (2, "explosion", "explosion times", check_explosion, False),
    (3, "gamma-chain", "Gamma analytic chain", check_gamma_chain, False),
    (4, "window", "Laplace window integral", check_window, False),
    (5, "indices", "p* derivative indices", check_indices, False),
    (6, "critical-moment", "critical moment exactness", check_critical_moment, False),
    (7, "omega", "omega fit vs closed form", check_omega, False),
    (8, "mgf-mc", "closed-form MGF vs Monte Carlo", check_mgf_mc, False),
    (9, "chernoff", "Chernoff dominance", check_chernoff, False),
    (10, "corollary", "corollary band diagnostic", check_corollary, True),
    (11, "determinism", "simulate determinism", check_determinism, False),
)


def run_check(key, quick=False):
    """Run one check by number or short name."""
    for number, name, title, func, soft in CHECKS:
        if key in (number, name):
            start = time.perf_counter()
            try:
                ok, measured = func(quick)
            except TailwedgeError as exc:
                ok, measured = False, f"raised {type(exc).__name__}: {exc}"
            return CheckResult(number, f"{name} ({title})", bool(ok), measured, soft,
                               time.perf_counter() - start)
    raise KeyError(key)


def run_checks(only=None, quick=False):
    keys = [number for number, *_ in CHECKS] if not only else list(only)
    return [run_check(key, quick) for key in keys]
