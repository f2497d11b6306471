import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fastcontrol.errors import DomainError
from fastcontrol.lemmas import (default_x_grid, harmonic_frac, hyp2f1, i_closed_form, identity_checks,
                                integral_I, integral_U, integral_V, integral_W, unit_grid, v_from_hypergeometric,
                                v_scaled_monotone, verify_inequality_suite, w_closed_form)

alphas = st.sampled_from([2.0, 2.25, 2.5, 3.0, 4.0, 8.0])
xs = st.floats(1e-3, 1e3)


def mp_U(a, x):
    with mp.workdps(30):
        f = lambda v: ((1 + v) ** (mp.mpf(1) / a) - (1 - v) ** (mp.mpf(1) / a)) / (v * (v + x))
        return float(mp.quad(f, [0, min(x, 0.5), 1]))


def mp_V(a, x):
    with mp.workdps(30):
        return float(mp.quad(lambda v: (v + 1) ** (mp.mpf(1) / a) / (v * (v + x)), [1, max(x, 2), mp.inf]))


@pytest.mark.parametrize("a,x", [(2.0, 0.01), (2.0, 1.0), (3.0, 50.0), (8.0, 0.3)])
def test_U_V_against_mpmath(a, x):
    assert integral_U(a, x) == pytest.approx(mp_U(a, x), rel=1e-10)
    assert integral_V(a, x) == pytest.approx(mp_V(a, x), rel=1e-10)


@pytest.mark.parametrize("a", [2.0, 3.0])
@pytest.mark.parametrize("x", [0.5, 1.0, 10.0])
def test_W_closed_form(a, x):
    assert integral_W(a, x) == pytest.approx(w_closed_form(a, x), rel=1e-8)


@given(alphas, xs)
def test_W_closed_form_property(a, x):
    assert integral_W(a, x) == pytest.approx(w_closed_form(a, x), rel=1e-9)


def test_V_limit():
    assert abs(1e6 ** 0.5 * integral_V(2.0, 1e6) - math.pi) <= 1e-2


def test_U_limit():
    assert 1e6 ** 0.5 * integral_U(2.0, 1e6) <= 1e-2


@pytest.mark.parametrize("a", [2.0, 2.5, 3.0, 4.0, 7.0, 16.0])
def test_I_identity(a):
    assert abs(integral_I(a) - i_closed_form(a)) <= 1e-10 * i_closed_form(a)


def test_I_examples():
    assert integral_I(2.0) == pytest.approx(math.pi, rel=1e-12)
    assert integral_I(4.0) == pytest.approx(math.pi * math.sqrt(2), rel=1e-12)
    assert integral_I(100.0) == pytest.approx(100, rel=0.02)


def test_hyp2f1_constant_term():
    assert hyp2f1(0.3, -1.7, 2.2, 0.0) == 1.0


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.1, 3.0), st.floats(-1.0, 0.95))
def test_hyp2f1_against_mpmath(a, b, c, z):
    ref = float(mp.hyp2f1(a, b, c, z))
    assert hyp2f1(a, b, c, z) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_hyp2f1_bound():
    assert hyp2f1(-0.5, -0.5, 0.5, -1.0) >= 0.52


def test_hyp2f1_domain():
    with pytest.raises(DomainError):
        hyp2f1(1, 1, -2, 0.1)
    with pytest.raises(DomainError):
        hyp2f1(1, 1, 1, 1.0)


def test_v_hypergeometric_form():
    assert v_from_hypergeometric(3.0, 2.0) == pytest.approx(2.0 ** (2 / 3) * integral_V(3.0, 2.0), rel=1e-8)


def test_harmonic():
    assert harmonic_frac(1.0) == pytest.approx(1.0, rel=1e-12)
    assert harmonic_frac(0.5) == pytest.approx(2 - 2 * math.log(2), rel=1e-10)
    assert harmonic_frac(0.5) <= 0.62
    for r in (0.1, 0.3, 0.7):
        assert harmonic_frac(r) == pytest.approx(float(mp.harmonic(r)), rel=1e-10)
    with pytest.raises(DomainError):
        harmonic_frac(1.5)


def test_identity_checks():
    for row in identity_checks():
        assert row.rel_error <= 1e-8, row


def test_inequality_suite_holds():
    reps = verify_inequality_suite()
    assert [r.name for r in reps] == list("abcde")
    for r in reps:
        assert r.max_slack <= 1e-9, r.name
        assert not r.informational


def test_inequality_d_boundary():
    (rep,) = verify_inequality_suite([3.0], unit_x=np.array([0.0]), which="d")
    assert rep.max_slack == 0.0


def test_inequality_c_value():
    (rep,) = verify_inequality_suite([2.0], which="c")
    lhs = rep.witnesses[0][2]
    assert lhs == pytest.approx(1 - 1.04 + 2 * math.sqrt(2)) and lhs <= math.pi


def test_witnesses_below_two():
    reps = {r.name: r for r in verify_inequality_suite([1.5], which="ad")}
    for name in "ad":
        assert reps[name].informational and reps[name].max_slack > 0
        assert reps[name].witnesses[0][-1] == reps[name].max_slack


@pytest.mark.parametrize("a", [2.0, 3.0, 8.0])
def test_v_scaled_monotone(a):
    assert v_scaled_monotone(a)


def test_grids():
    g = default_x_grid()
    assert g.size == 200 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e3)
    u = unit_grid()
    assert u[0] == 0 and u[-1] == 1


def test_domain_errors():
    with pytest.raises(DomainError):
        integral_U(1.0, 1.0)
    with pytest.raises(DomainError):
        integral_V(2.0, -1.0)
