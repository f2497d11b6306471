import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fastcontrol.errors import TruncationError
from fastcontrol.products import (counting_function, counting_profile, leading_constant, phi_growth_report,
                                  phi_n)
from fastcontrol.spectral import heat_spectrum, make_power_law_spectrum, make_two_sided_spectrum


def test_counting_examples():
    s = heat_spectrum(3)
    assert counting_function(s, 1, 3) == 1
    assert counting_function(s, 1, 0) == 0
    assert counting_function(heat_spectrum(5), 3, 10) == 3


def test_counting_envelope():
    s = heat_spectrum(200)
    for n in (1, 5, 20):
        lam = s.eigenvalue(n)
        grid = np.linspace(0, 5000, 400)
        env = (lam + grid) ** 0.5 - np.maximum(lam - grid, 0) ** 0.5 + 2
        assert np.all(counting_function(s, n, grid) <= env)
    assert counting_profile(s, 1, np.linspace(0, 1e4, 50)).max_excess <= 2


def test_phi_basic_values():
    s = heat_spectrum(10)
    ev = phi_n(s, 1, 0.0)
    assert ev.value == 1 and ev.tail_bound == 0
    assert phi_n(s, 1, 3.0).value == 0


@given(n=st.integers(1, 12), seed=st.integers(0, 100))
def test_phi_vanishes_on_shifted_spectrum(n, seed):
    s = make_power_law_spectrum(2.0, 1.0, 12, 0.3, seed)
    roots = s.lambdas - s.eigenvalue(n)
    for k, z in enumerate(roots):
        v = phi_n(s, n, z).value
        assert (v == 1) if k == s.position(n) else (v == 0)


def _mp_product(N, n, z):
    with mp.workdps(40):
        lam_n = n * n
        return mp.fprod(1 - mp.mpf(z) / (k * k - lam_n) for k in range(1, N + 1) if k != n)


def test_phi_against_long_product():
    # K chosen by the tail rule; oracle is a 50x longer product in multiprecision
    s = heat_spectrum(2000)
    ev = phi_n(s, 1, 10.0, tol=0.05)
    assert ev.truncation_index < 2000
    ref = _mp_product(100_000, 1, 10)
    assert abs(ev.log_abs - float(mp.log(abs(ref)))) <= 0.05


def test_phi_truncation_error_reports_required_index():
    s = heat_spectrum(200)
    with pytest.raises(TruncationError) as err:
        phi_n(s, 1, 10.0, tol=1e-8)
    assert err.value.required_index > 200


def test_phi_doubling_within_tail_bound():
    z = np.array([5.5, 30.0 + 10j, -200.0])
    short = phi_n(heat_spectrum(200), 2, z)
    long = phi_n(heat_spectrum(400), 2, z)
    assert np.all(np.abs(long.log_abs - short.log_abs) <= short.tail_bound)


def test_growth_report_heat():
    s = heat_spectrum(100)
    r = np.geomspace(1, 1e4, 120)
    theta = np.linspace(0, 2 * np.pi, 120, endpoint=False)
    grid = r * np.exp(1j * theta)
    rep = phi_growth_report(s, 1, grid)
    assert rep.holds and rep.n_validation > 0


def test_growth_report_zero_point():
    rep = phi_growth_report(heat_spectrum(20), 1, np.array([0.0, 1.0 + 1j, 2.0, 5j]))
    assert rep.rows[0][2] == 0.0


def test_leading_constants():
    s = make_two_sided_spectrum(3, 1, 5)
    assert leading_constant(s, "two-sided") == pytest.approx(2 * math.pi / math.sin(math.pi / 3))
    h = heat_spectrum(5)
    assert leading_constant(h, "complex") == pytest.approx(math.pi)
    assert leading_constant(h, "line") == pytest.approx(math.pi / (2 * math.sin(math.pi / 4)))


def test_line_growth_two_sided():
    s = make_two_sided_spectrum(3, 1, 120)
    rep = phi_growth_report(s, 1, np.geomspace(1, 1e5, 80), mode="two-sided")
    assert rep.holds
