import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fastcontrol.errors import DomainError
from fastcontrol.multiplier import (MultiplierConfig, c_nu, est_mul_decay_check, h_beta, link_beta_to_nu,
                                    log_abs_h_beta, minmult_check, multiplier_properties, nu_for, sigma_nu)


def test_sigma_values():
    assert sigma_nu(1, 0.0) == pytest.approx(math.exp(-1))
    np.testing.assert_array_equal(sigma_nu(5, np.array([-1.0, 1.0, 1.5])), 0)
    assert sigma_nu(2, 0.5) == pytest.approx(math.exp(-8 / 3))


def _mass_oracle(nu):
    with mp.workdps(30):
        return mp.quad(lambda t: mp.exp(-nu / (1 - t * t)), [-1, -0.5, 0, 0.5, 1])


def test_c_nu_oracle():
    assert c_nu(4.0) == pytest.approx(1 / float(_mass_oracle(4)), rel=1e-10)


@pytest.mark.parametrize("nu", [1e-9, 1e-6, 1e-3, 0.3])
def test_c_nu_small_nu(nu):
    with mp.workdps(30):
        edge = [nu * 10.0**k for k in range(-2, 3) if nu * 10.0**k < 1]
        mass = 2 * mp.quad(lambda e: mp.exp(-nu / (e * (2 - e))), [0, *edge, 1])
    assert c_nu(nu) == pytest.approx(1 / float(mass), rel=1e-12)
    assert c_nu(1e-9) == pytest.approx(0.5, rel=1e-6)


@pytest.mark.parametrize("nu", [1, 4, 16, 64])
def test_c_nu_bracket(nu):
    assert 0.5 * math.exp(nu) <= c_nu(nu) <= 1.5 * math.sqrt(nu + 1) * math.exp(nu)


def test_link_examples():
    assert link_beta_to_nu(2, 1e-300, math.pi**2).nu == pytest.approx(1.0)
    assert nu_for(2, 0.1, 1.0) == pytest.approx((math.pi + 0.1) ** 2)
    cfg = link_beta_to_nu(3, 0.05, 0.2)
    lhs = cfg.beta * cfg.nu**2
    assert lhs == pytest.approx(((math.pi + 0.05) / math.sin(math.pi / 3)) ** 3, rel=1e-12)


def test_config_rejects_bad_input():
    with pytest.raises(DomainError):
        link_beta_to_nu(1.5, 0.1, 1.0)
    with pytest.raises(DomainError):
        MultiplierConfig(3.0, 1.0, 0.1, 2.0)


def _h_oracle(cfg, z):
    with mp.workdps(40):
        nu, beta = mp.mpf(cfg.nu), mp.mpf(cfg.beta)
        f = lambda t: mp.exp(-nu / (1 - t * t)) * mp.exp(-1j * beta * t * z)
        pts = mp.linspace(-1, 1, 41)
        return complex(mp.quad(f, pts) / _mass_oracle(cfg.nu))


@pytest.mark.parametrize("z", [0.3, 2.0, 15.0, 1.5 + 0.7j, -4.0 - 2.0j, 3j])
def test_h_beta_oracle(z):
    cfg = link_beta_to_nu(2.0, 0.1, 1.0)
    ref = _h_oracle(cfg, z)
    assert abs(h_beta(cfg, z) - ref) <= 1e-11 * max(1.0, abs(ref))


@pytest.mark.parametrize("x, panels, digits", [(400.0, 120, 50), (3000.0, 800, 70)])
def test_h_beta_contour_tail_oracle(x, panels, digits):
    # deep in the tail H is tiny and the integrand oscillates: the oracle uses
    # one panel per fraction of a period and enough digits for the cancellation
    cfg = link_beta_to_nu(3.0, 0.05, 0.5)
    with mp.workdps(digits):
        nu, beta = mp.mpf(cfg.nu), mp.mpf(cfg.beta)
        num = 2 * mp.quad(lambda t: mp.exp(-nu / (1 - t * t)) * mp.cos(beta * t * x), mp.linspace(0, 1, panels))
        ref = float(num / mp.quad(lambda t: mp.exp(-nu / (1 - t * t)), [-1, 0, 1]))
    assert abs(h_beta(cfg, x) - ref) <= 1e-12 * abs(ref)


def test_h_beta_zero_and_unit_bound():
    cfg = link_beta_to_nu(2.0, 0.1, 1.0)
    assert abs(h_beta(cfg, 0.0) - 1) <= 1e-12
    x = np.linspace(-200, 200, 801)
    assert np.all(np.abs(h_beta(cfg, x)) <= 1 + 1e-12)


@given(x=st.floats(0, 1e3), beta=st.floats(0.05, 3), alpha=st.floats(2, 5))
def test_h_beta_conjugate_symmetry(x, beta, alpha):
    cfg = link_beta_to_nu(alpha, 0.05, beta)
    a, b = h_beta(cfg, x), h_beta(cfg, -x)
    assert abs(a - np.conj(b)) <= 1e-13
    assert abs(a.imag) <= 1e-13


@given(re=st.floats(-50, 50), im=st.floats(-20, 20))
def test_paley_wiener_type(re, im):
    cfg = link_beta_to_nu(2.0, 0.1, 1.0)
    z = complex(re, im)
    assert abs(h_beta(cfg, z)) <= math.exp(cfg.beta * abs(im)) * (1 + 1e-9)


def test_decay_check_holds():
    cfg = link_beta_to_nu(2.0, 0.1, 1.0)
    rep = est_mul_decay_check(cfg, np.geomspace(1, 1e4, 200))
    assert rep.holds


def test_decay_x_zero_has_positive_room():
    cfg = link_beta_to_nu(2.0, 0.1, 1.0)
    assert log_abs_h_beta(cfg, 0.0) <= 0.75 * cfg.nu


def test_superpolynomial_decay():
    cfg = link_beta_to_nu(2.0, 0.1, 1.0)
    x = np.geomspace(1e2, 1e5, 40)
    la = log_abs_h_beta(cfg, x)
    slopes = np.diff(la) / np.diff(np.log(x))
    # local log-log slope keeps getting steeper
    assert slopes[-1] < slopes[0] < 0
    assert slopes[-1] < -20


def test_imaginary_axis_lower_bound():
    cfg = link_beta_to_nu(2.0, 0.1, 1.0)
    rep = minmult_check(cfg, np.linspace(0, 400, 200))
    assert rep.holds and rep.c0 >= 0


def test_multiplier_properties_grid():
    cfg = link_beta_to_nu(3.0, 0.05, 0.7)
    rng = np.random.default_rng(0)
    grid = rng.uniform(-60, 60, 100) + 1j * rng.uniform(-15, 15, 100)
    props = multiplier_properties(cfg, grid)
    assert props.holds
