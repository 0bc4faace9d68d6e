import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcxplan.errors import DomainError
from lcxplan.linkbudget import (Frequency, LinkBudgetParams, coupling_loss_from_powers, dbd_to_dbi,
                                dbi_to_dbd, invert_for_coupling_loss, longitudinal_loss,
                                received_power)

finite = st.floats(-50, 50, allow_nan=False)
loss = st.floats(0, 100, allow_nan=False)


def P(pt=18.0, p=2.0, lcon=2.0, gr=2.15, clamp=0.1):
    return LinkBudgetParams(transmit_power=pt, loss_exponent=p, connector_loss=lcon,
                            receiver_gain_dbd=gr, lateral_clamp=clamp)


def test_frequency_wavelength():
    f = Frequency.from_ghz(5.9)
    assert f.wavelength == pytest.approx(0.0508122810, abs=1e-9)
    with pytest.raises(DomainError):
        Frequency(0.0)


@pytest.mark.parametrize("alpha,d,expected", [(0.1, 100, 10.0), (0.37, 0, 0.0), (0.0573, 15, 0.8595)])
def test_longitudinal_loss(alpha, d, expected):
    assert longitudinal_loss(alpha, d) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("alpha,d", [(-0.1, 1), (0.1, -1)])
def test_longitudinal_loss_rejects_negative(alpha, d):
    with pytest.raises(DomainError):
        longitudinal_loss(alpha, d)


def test_coupling_loss_from_powers():
    assert coupling_loss_from_powers(1, 1) == 0.0
    assert coupling_loss_from_powers(1, 1e-7) == pytest.approx(70.0, abs=1e-12)
    assert round(coupling_loss_from_powers(0.5, 2.5e-8), 3) == 73.010
    with pytest.raises(DomainError):
        coupling_loss_from_powers(0, 1)
    with pytest.raises(DomainError):
        coupling_loss_from_powers(1, -1)


def test_received_power_examples():
    assert round(received_power(P(), 5.0, 70.0, 2.0), 2) == -62.87
    assert round(received_power(P(), 5.0, 70.0, 1.0), 2) == -56.85
    assert round(received_power(P(lcon=0, gr=0), 0.0, 60.0, 4.0), 2) == -54.04


def test_received_power_lateral_clamp():
    assert received_power(P(), 5, 70, 0.0) == received_power(P(), 5, 70, 0.1)
    with pytest.raises(DomainError):
        received_power(P(clamp=0.0), 5, 70, 0.0)
    with pytest.raises(DomainError):
        received_power(P(), 5, 70, -1.0)


def test_invert_examples():
    assert invert_for_coupling_loss(P(), 5.0, 2.0, -62.87) == pytest.approx(70.0, abs=1e-3)
    assert round(invert_for_coupling_loss(P(lcon=0, gr=0), 0.86, 2.0, -48.0), 2) == 59.12
    pr = received_power(P(), 5.0, 70.0, 2.0)
    assert invert_for_coupling_loss(P(), 5.0, 2.0, pr) == pytest.approx(70.0, abs=1e-9)


def test_gain_convention():
    assert dbd_to_dbi(0.0) == 2.15
    assert dbi_to_dbd(dbd_to_dbi(3.3)) == pytest.approx(3.3)


def test_params_validation():
    with pytest.raises(DomainError):
        P(p=0.0)
    with pytest.raises(DomainError):
        P(pt=math.inf)


@settings(max_examples=200)
@given(pt=finite, p=st.floats(0.1, 6), lcon=loss, gr=finite, ll=loss, lc=loss,
       d=st.floats(0.1, 500), delta=st.floats(0.01, 10))
def test_monotonicity(pt, p, lcon, gr, ll, lc, d, delta):
    params = P(pt, p, lcon, gr)
    base = received_power(params, ll, lc, d)
    assert received_power(params, ll + delta, lc, d) < base
    assert received_power(params, ll, lc + delta, d) < base
    assert received_power(P(pt, p, lcon + delta, gr), ll, lc, d) < base
    assert received_power(P(pt + delta, p, lcon, gr), ll, lc, d) > base
    assert received_power(P(pt, p, lcon, gr + delta), ll, lc, d) > base


@given(p=st.floats(0.1, 6), d=st.floats(1.0001, 500), step=st.floats(0.01, 50))
def test_decreasing_in_lateral_distance(p, d, step):
    params = P(p=p)
    assert received_power(params, 1, 60, d + step) < received_power(params, 1, 60, d)


@given(pt=finite, lcon=loss, gr=finite, ll=loss, lc=loss, p=st.floats(0.1, 6), d=st.floats(0.1, 500))
def test_inverse_round_trip(pt, lcon, gr, ll, lc, p, d):
    params = P(pt, p, lcon, gr)
    assert invert_for_coupling_loss(params, ll, d, received_power(params, ll, lc, d)) == \
        pytest.approx(lc, abs=1e-9)


@given(pt=finite, ll=loss, lc=loss)
def test_exponent_vanishes_at_one_metre(pt, ll, lc):
    values = {received_power(P(pt=pt, p=p), ll, lc, 1.0) for p in (0.5, 1, 2, 3, 4)}
    assert len(values) == 1
