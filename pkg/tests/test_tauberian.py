import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from tailwedge import riccati
from tailwedge.critical import SuperpositionSpec, cir_mgf_model
from tailwedge.errors import BelowMeanError, DomainError, InvalidInputError
from tailwedge.models import GammaParams, VarianceGammaParams, gamma_model, vg_model
from tailwedge.riccati import CirParams
from tailwedge.tauberian import (
    MgfModel,
    band_exponents,
    chernoff_upper,
    dlog_mgf,
    laplace_window_integral,
    legendre,
    phi_shifted,
    psi_R,
    pstar_derivative_indices,
    rv_index_estimate,
    tail_band,
)

GAMMA = gamma_model(GammaParams(1.0, 1.0))
CIR_PARAMS = CirParams(1.0, 0.0, 1.0, 1.0)
CIR_SPEC = SuperpositionSpec(0.0, 1.0, 1.0)
CIR = cir_mgf_model(CIR_PARAMS, CIR_SPEC)
MODELS = [
    GAMMA,
    gamma_model(GammaParams(3.0, 0.5)),
    vg_model(VarianceGammaParams(1.5, 2.0, 3.0)),
    CIR,
    cir_mgf_model(CirParams(0.5, 2.0, 1.5, 0.3), SuperpositionSpec(0.5, 0.5, 1.0)),
]


def levels_for(model, fractions):
    return [dlog_mgf(model, f * model.mu_star) for f in fractions]


def golden_max(model, R):
    res = minimize_scalar(lambda p: -(p * R - model.log_mgf(p)),
                          bounds=(0.0, model.mu_star * (1 - 1e-12)), method="bounded",
                          options={"xatol": 1e-13 * model.mu_star})
    return -res.fun


# ---------------------------------------------------------------- model contract

@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_log_mgf_zero_and_convex(model):
    assert model.log_mgf(0.0) == 0.0
    grid = np.arange(10) * model.mu_star / 10
    values = np.array([model.log_mgf(p) for p in grid])
    assert np.all(np.diff(values, 2) >= -1e-9)
    if model.mean >= 0:
        # a negative mean makes Lambda dip below zero first
        assert np.all(np.diff(values) >= -1e-12)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_log_mgf_explodes(model):
    values = [model.log_mgf(model.mu_star - 10.0**-k) for k in (2, 4, 6, 8)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_model_validation():
    with pytest.raises(InvalidInputError):
        MgfModel(mu_star=0.0, log_mgf=lambda p: 0.0)
    with pytest.raises(InvalidInputError):
        MgfModel(mu_star=1.0, log_mgf=lambda p: 0.0, alpha=-1.0)


def test_dlog_mgf_gamma():
    for p in (0.1, 0.5, 0.9, 0.999):
        assert dlog_mgf(GAMMA, p) == pytest.approx(1.0 / (1.0 - p), rel=1e-10)


# ---------------------------------------------------------------- phi_shifted

def test_phi_shifted_gamma():
    assert phi_shifted(GAMMA, math.e) == pytest.approx(1.0, rel=1e-15)
    assert abs(phi_shifted(GAMMA, 1.0 / (1.0 - 1e-12))) < 1e-11


def test_phi_shifted_domain():
    with pytest.raises(DomainError):
        phi_shifted(GAMMA, 1.0)


def test_phi_shifted_cir_vs_ode():
    value = phi_shifted(CIR, 10.0)
    mu = CIR.mu_star - 0.1
    ref = riccati.ode_reference(CIR_PARAMS, 0.0, mu, 1.0)
    assert value == pytest.approx(ref.phi + ref.psi, rel=1e-8)


# ---------------------------------------------------------------- legendre

def test_legendre_gamma_example():
    lp = legendre(GAMMA, 10.0)
    assert lp.p_star == pytest.approx(0.9, rel=1e-12)
    assert lp.lambda_star == pytest.approx(10 - 1 - math.log(10), rel=1e-12)
    assert round(lp.lambda_star, 9) == 6.697414907


def test_legendre_round_trip():
    for model in MODELS:
        p0 = model.mu_star / 2
        R = dlog_mgf(model, p0)
        assert legendre(model, R).p_star == pytest.approx(p0, rel=1e-9)


def test_legendre_cir_golden_section():
    assert legendre(CIR, 50.0).lambda_star == pytest.approx(golden_max(CIR, 50.0), rel=1e-8)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_legendre_random_levels_golden(model):
    rng = np.random.default_rng(1)
    for R in levels_for(model, 0.02 + 0.97 * rng.random(20)):
        assert legendre(model, R).lambda_star == pytest.approx(golden_max(model, R), rel=1e-8, abs=1e-12)


def test_below_mean():
    with pytest.raises(BelowMeanError, match="below-mean"):
        legendre(GAMMA, 1.0)
    with pytest.raises(BelowMeanError):
        chernoff_upper(CIR, 1.0)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_pstar_monotone_lambda_convex(model):
    levels = levels_for(model, np.linspace(0.05, 0.97, 25))
    points = [legendre(model, R) for R in levels]
    p = np.array([lp.p_star for lp in points])
    lam = np.array([lp.lambda_star for lp in points])
    assert np.all(np.diff(p) >= 0)
    assert np.all(np.diff(lam, 2) >= -1e-9 * lam.max())
    assert np.all(lam >= 0)
    bounds = [chernoff_upper(model, R) for R in levels]
    assert all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))


def test_chernoff_gamma():
    bound = chernoff_upper(GAMMA, 10.0)
    assert bound == pytest.approx(math.exp(-6.697414907), rel=1e-9)
    assert math.exp(-10.0) <= bound
    assert chernoff_upper(GAMMA, 1.0 + 1e-6) == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------- tail band

def test_band_exponents():
    assert band_exponents(0.0) == (-1.0, 0.0)
    assert band_exponents(1.0) == (-0.75, 0.0)
    assert band_exponents(1e12)[0] == pytest.approx(-0.5)


def test_tail_band_gamma():
    band = tail_band(GAMMA, 10.0)
    assert band.exponent_interval == (-1.0, 0.0)
    assert band.log_upper == pytest.approx(-6.697414907, rel=1e-9)
    assert band.log_lower_limsup == pytest.approx(band.log_upper - math.log(10.0))
    assert band.log_lower_limsup <= band.log_upper
    assert band.asymptotic


def test_tail_band_alpha_unknown():
    model = MgfModel(mu_star=1.0, log_mgf=GAMMA.log_mgf, mean=1.0)
    with pytest.raises(InvalidInputError, match="alpha-unknown"):
        tail_band(model, 5.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 50.0))
def test_band_endpoints_rational(alpha):
    lo, hi = band_exponents(alpha)
    assert hi == 0.0
    assert -1.0 <= lo <= -0.5
    assert lo == pytest.approx(-(alpha + 2) / (2 * (alpha + 1)), rel=1e-15)


# ---------------------------------------------------------------- psi_R

@pytest.mark.parametrize("R", [10.0, 100.0, 1e4])
@pytest.mark.parametrize("z", [0.2, 0.25, 0.5, 0.75, 1.5, 2.0, 4.0, 10.0])
def test_psi_R_gamma_closed_form(R, z):
    ref = 1.0 - z + math.log(z)
    assert psi_R(GAMMA, R, z) == pytest.approx(ref, rel=1e-10)


def test_psi_R_examples():
    assert psi_R(GAMMA, 50.0, 0.5) == pytest.approx(-0.19315, abs=1e-5)
    assert psi_R(GAMMA, 50.0, 2.0) == pytest.approx(-0.30685, abs=1e-5)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_psi_R_shape(model):
    R = dlog_mgf(model, 0.9 * model.mu_star)
    assert psi_R(model, R, 1.0) == 0.0
    zs = np.linspace(0.2, 1.0, 9)
    values = [psi_R(model, R, z) for z in zs]
    assert all(v <= 0.0 for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------- window integral

def test_window_gamma_finite_window():
    # with beta = 1/2 the window starts at x = 1e-3; int_x^inf z e^{1-z} dz
    x = 1e6 ** -0.5
    value = laplace_window_integral(GAMMA, 1e6, 0.0, 0.5)
    assert value == pytest.approx(math.e * math.exp(-x) * (1 + x), rel=1e-9)
    # the missing piece [0, x] is about e x^2 / 2, above 1e-6
    assert math.e - value > 1e-6


def test_window_gamma_limit():
    assert laplace_window_integral(GAMMA, 1e6, 0.0, 0.25) == pytest.approx(math.e, abs=1e-6)


def test_window_gamma_gamma1():
    value = laplace_window_integral(GAMMA, 1e6, 1.0, 0.25)
    assert value == pytest.approx(2 * math.e, rel=1e-6)


def test_window_cir_doubling():
    r1 = laplace_window_integral(CIR, 1e3, 0.0, 0.5) * 1e3**0.25
    r2 = laplace_window_integral(CIR, 2e3, 0.0, 0.5) * 2e3**0.25
    assert 0.9 <= r2 / r1 <= 1.1


def test_window_quadrature_failure():
    with pytest.raises(Exception, match="quadrature-failure"):
        laplace_window_integral(GAMMA, 1e6, 0.0, 0.25, node_cap=10)


# ---------------------------------------------------------------- indices

def test_indices_gamma():
    i1, i2 = pstar_derivative_indices(GAMMA, 1e2, 1e4)
    assert i1 == pytest.approx(2.0, abs=1e-3)
    assert i2 == pytest.approx(3.0, abs=1e-3)


def test_indices_cir():
    i1, i2 = pstar_derivative_indices(CIR, 1e2, 1e4)
    assert abs(i1 - 1.5) < 0.05
    assert abs(i2 - 2.5) < 0.05


def test_indices_span():
    with pytest.raises(InvalidInputError, match="insufficient-span"):
        pstar_derivative_indices(GAMMA, 1e2, 5e2)


def test_rv_index_power():
    assert rv_index_estimate([(x, x * x) for x in range(1, 1025)]) == pytest.approx(2.0, abs=1e-12)


def test_rv_index_gamma_slowly_varying():
    # ln ln x has slope 1/ln x: the fitted index is small and shrinks with the window
    low = rv_index_estimate([(x, phi_shifted(GAMMA, x)) for x in np.geomspace(1e2, 1e6, 21)])
    high = rv_index_estimate([(x, phi_shifted(GAMMA, x)) for x in np.geomspace(1e6, 1e10, 21)])
    assert low == pytest.approx(0.1154, abs=1e-3)
    assert 0 < high < low


def test_rv_index_cir():
    value = rv_index_estimate([(x, phi_shifted(CIR, x)) for x in np.geomspace(1e2, 1e4, 11)])
    assert abs(value - 1.0) < 0.05


def test_rv_index_errors():
    with pytest.raises(InvalidInputError, match="insufficient-span"):
        rv_index_estimate([(1.0, 1.0), (5.0, 2.0)])
    with pytest.raises(InvalidInputError, match="nonpositive-sample"):
        rv_index_estimate([(1.0, 1.0), (50.0, -2.0)])
