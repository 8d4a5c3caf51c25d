import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tailwedge import riccati
from tailwedge.critical import SuperpositionSpec, cir_mgf_model, mu_plus
from tailwedge.errors import InvalidInputError, PreconditionError
from tailwedge.montecarlo import (
    BLOCK_SIZE,
    HeavyTailWarning,
    McConfig,
    block_generator,
    coupled_trapezoid,
    estimate,
    estimate_mgf,
    estimate_tail,
    sample_transition,
    simulate_path,
    simulate_paths,
    wilson_interval,
)
from tailwedge.riccati import CirParams
from tailwedge.tauberian import chernoff_upper

UNIT = CirParams(1.0, 1.0, 1.0, 1.0)
BENCH = CirParams(1.0, 0.0, 1.0, 1.0)
BENCH_SPEC = SuperpositionSpec(0.0, 1.0, 1.0)


def rng(block=0, seed=5):
    return block_generator(seed, block)


# ---------------------------------------------------------------- config

@pytest.mark.parametrize("kwargs", [
    dict(n_paths=50),
    dict(n_paths=1000.5),
    dict(n_steps=4),
    dict(seed=-1),
    dict(seed=2**64),
    dict(workers=0),
    dict(workers="many"),
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidInputError, match="invalid-config"):
        McConfig(**kwargs)


def test_config_blocks_and_workers():
    cfg = McConfig(n_paths=3 * BLOCK_SIZE + 1, workers=16)
    assert cfg.n_blocks == 4
    assert cfg.resolved_workers() == 4
    assert 1 <= McConfig(workers="auto").resolved_workers()


def test_invalid_dt():
    with pytest.raises(InvalidInputError, match="invalid-dt"):
        sample_transition(UNIT, 1.0, 0.0, rng())


# ---------------------------------------------------------------- sampler

def test_unit_means():
    v, i = simulate_paths(UNIT, 1.0, 64, 40_000, rng())
    for x in (v, i):
        se = x.std() / math.sqrt(x.size)
        assert abs(x.mean() - 1.0) < 3 * se


@pytest.mark.parametrize("params", [
    CirParams(1.0, 1.0, 1.0, 1.0),
    CirParams(0.1, 0.5, 1.0, 0.2),   # d = 0.4: Poisson mixture branch
    CirParams(2.0, 0.0, 0.7, 0.5),   # b = 0
])
def test_transition_moments(params):
    dt = 0.7
    x = sample_transition(params, np.full(100_000, params.v), dt, rng(1))
    mean = riccati.mean_v(params, dt)
    var = riccati.var_v(params, dt)
    assert abs(x.mean() - mean) < 4 * math.sqrt(var / x.size)
    # the sample variance has variance about (m4 - var^2)/n; 4 SE via the sample fourth moment
    m4 = np.mean((x - x.mean()) ** 4)
    assert abs(x.var() - var) < 4 * math.sqrt((m4 - var * var) / x.size)


def test_mgf_of_v():
    x = sample_transition(UNIT, np.full(100_000, 1.0), 1.0, rng(2))
    w = np.exp(0.5 * x)
    exact = math.exp(riccati.log_mgf(UNIT, 0.5, 0.0, 1.0))
    assert abs(w.mean() - exact) < 4 * w.std() / math.sqrt(w.size)


def test_zero_process_stays_zero():
    v, i = simulate_paths(CirParams(0.0, 1.0, 1.0, 0.0), 1.0, 16, 500, rng())
    assert np.all(v == 0.0) and np.all(i == 0.0)


def test_small_sigma_is_deterministic():
    params = CirParams(1.0, 1.0, 1e-6, 2.0)
    v, i = simulate_path(params, 1.0, 64, rng())
    assert v == pytest.approx(riccati.mean_v(params, 1.0), abs=1e-4)
    assert i == pytest.approx(riccati.mean_i(params, 1.0), abs=1e-4)


def test_trapezoid_bias_order():
    params = CirParams(1.0, 4.0, 1.0, 10.0)
    levels = (16, 32, 64, 128)
    out = coupled_trapezoid(params, 1.0, 128, levels, 100_000, rng(3))
    f = {n: np.exp(0.2 * out[n]) for n in levels}
    # consecutive differences E f(I_n) - E f(I_2n) scale like n^-2
    diffs = [abs(np.mean(f[n] - f[2 * n])) for n in (16, 32, 64)]
    slope = np.polyfit(np.log([16, 32, 64]), np.log(diffs), 1)[0]
    assert abs(slope + 2.0) < 0.4


def test_coupled_levels_must_divide():
    with pytest.raises(InvalidInputError, match="invalid-levels"):
        coupled_trapezoid(UNIT, 1.0, 100, (16, 32), 10, rng())


# ---------------------------------------------------------------- estimators

SMALL = McConfig(n_paths=4000, n_steps=16, seed=9)


def test_tail_below_support():
    (row,) = estimate_tail(BENCH, BENCH_SPEC, [-1e10], SMALL)
    assert row.p_hat == 1.0 and row.n_exceed == SMALL.n_paths
    assert row.ci_high == 1.0


def test_tail_zero_exceedance_rule_of_three():
    (row,) = estimate_tail(BENCH, BENCH_SPEC, [1e6], SMALL)
    assert row.zero_exceedance
    assert row.ci_low == 0.0 and row.ci_high == 3.0 / SMALL.n_paths


def test_tail_empty_levels():
    with pytest.raises(InvalidInputError, match="invalid-levels"):
        estimate_tail(BENCH, BENCH_SPEC, [], SMALL)


def test_mgf_at_zero():
    (row,) = estimate_mgf(BENCH, BENCH_SPEC, [0.0], SMALL)
    assert row.estimate == 1.0 and row.std_error == 0.0


def test_mgf_guard():
    mu = mu_plus(BENCH, BENCH_SPEC)
    with pytest.raises(PreconditionError, match="p-too-close-to-critical"):
        estimate_mgf(BENCH, BENCH_SPEC, [0.9 * mu], SMALL)
    with pytest.warns(HeavyTailWarning):
        (row,) = estimate_mgf(BENCH, BENCH_SPEC, [0.6 * mu], SMALL)
    assert row.heavy_tail


def test_mgf_light_matches_closed_form():
    mu = mu_plus(BENCH, BENCH_SPEC)
    cfg = McConfig(n_paths=50_000, n_steps=64, seed=1)
    for row in estimate_mgf(BENCH, BENCH_SPEC, [0.1 * mu, 0.2 * mu], cfg):
        exact = math.exp(riccati.log_mgf(BENCH, 0.0, row.p, 1.0))
        assert abs(row.estimate - exact) < 4 * row.std_error


def test_determinism_across_workers():
    base = McConfig(n_paths=3 * BLOCK_SIZE - 7, n_steps=16, seed=123)
    args = (BENCH, BENCH_SPEC)
    kw = dict(R_list=[1.0, 2.0, 4.0], p_list=[0.5, 1.0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        one = estimate(*args, base, **kw)
        again = estimate(*args, base, **kw)
        three = estimate(*args, McConfig(base.n_paths, base.n_steps, base.seed, 3), **kw)
    assert one == again == three


def test_chernoff_at_high_quantile():
    spec = SuperpositionSpec(1.0, 0.0, 1.0)
    cfg = McConfig(n_paths=50_000, n_steps=16, seed=4)
    v, _ = simulate_paths(UNIT, 1.0, 16, 50_000, rng(0, 77))
    R = float(np.quantile(v, 0.999))
    (row,) = estimate_tail(UNIT, spec, [R], cfg)
    assert row.ci_low <= chernoff_upper(cir_mgf_model(UNIT, spec), R)


# ---------------------------------------------------------------- wilson

@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**7), st.data())
def test_wilson_invariants(n, data):
    k = data.draw(st.integers(0, n))
    low, high = wilson_interval(k, n)
    assert 0.0 <= low <= k / n <= high <= 1.0
    if k == 0:
        assert low == 0.0 and high == min(1.0, 3.0 / n)


def test_wilson_example():
    low, high = wilson_interval(50, 100)
    assert low == pytest.approx(0.4038, abs=1e-4)
    assert high == pytest.approx(0.5962, abs=1e-4)
