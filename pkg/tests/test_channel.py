import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beamrefine.channel import (
    SPEED_OF_LIGHT,
    UserState,
    dbsm_to_m2,
    link_coefficients,
    sample_noise,
    wavelength,
)
from beamrefine.errors import DomainError

FC = 60e9


def test_wavelength():
    assert wavelength(FC) == pytest.approx(4.9965e-3, rel=1e-4)


def test_one_way_gain():
    link = link_coefficients(UserState(range=40.0), FC)
    lam = SPEED_OF_LIGHT / FC
    assert abs(link.h_ue) ** 2 == pytest.approx((lam / (4 * math.pi * 40.0)) ** 2, rel=1e-14)
    assert abs(link.h_ue) ** 2 == pytest.approx(9.880961e-11, rel=1e-6)
    assert 10 * math.log10(abs(link.h_ue) ** 2) == pytest.approx(-100.0, abs=0.1)


def test_two_way_gain():
    link = link_coefficients(UserState(range=40.0, rcs=dbsm_to_m2(20.0)), FC)
    lam = SPEED_OF_LIGHT / FC
    expected = lam**2 * 100.0 / ((4 * math.pi) ** 3 * 40.0**4)
    assert abs(link.h_bs) ** 2 == pytest.approx(expected, rel=1e-14)
    # Radar equation at 40 m / 100 m^2 gives 4.914e-13.
    assert abs(link.h_bs) ** 2 == pytest.approx(4.914387e-13, rel=1e-6)


def test_delay_and_doppler():
    link = link_coefficients(UserState(range=40.0, speed=20.0), FC)
    assert link.delay == pytest.approx(266.85e-9, abs=0.01e-9)
    assert link.doppler == pytest.approx(8005.54, abs=0.01)


def test_phases_are_carried():
    link = link_coefficients(UserState(tx_phase=0.4, bs_phase=-1.3), FC)
    assert np.angle(link.h_ue) == pytest.approx(0.4)
    assert np.angle(link.h_bs) == pytest.approx(-1.3)


@given(st.floats(0.5, 500.0), st.floats(0.01, 1e4))
def test_gain_ratio(d, rcs):
    link = link_coefficients(UserState(range=d, rcs=rcs), FC)
    ratio = abs(link.h_bs) ** 2 / abs(link.h_ue) ** 2
    assert ratio == pytest.approx(rcs / (4 * math.pi * d**2), rel=1e-12)


@given(st.floats(1.0, 100.0), st.floats(-50.0, 50.0))
def test_linear_scaling(d, v):
    a = link_coefficients(UserState(range=d, speed=v), FC)
    b = link_coefficients(UserState(range=2 * d, speed=2 * v), FC)
    assert b.delay == pytest.approx(2 * a.delay, rel=1e-14)
    assert b.doppler == pytest.approx(2 * a.doppler, rel=1e-14, abs=1e-12)


@pytest.mark.parametrize("kwargs", [dict(range=0.0), dict(range=-1.0), dict(rcs=0.0), dict(aod=2.0)])
def test_state_invariants(kwargs):
    with pytest.raises(DomainError):
        UserState(**kwargs)


def test_bad_carrier():
    with pytest.raises(DomainError):
        link_coefficients(UserState(), 0.0)


class TestNoise:
    def test_zero_variance(self, rng):
        np.testing.assert_array_equal(sample_noise(rng, (3, 4), 0.0), np.zeros((3, 4)))

    def test_power(self):
        w = sample_noise(np.random.default_rng(7), 10**6, 1.0)
        assert np.mean(np.abs(w) ** 2) == pytest.approx(1.0, abs=0.01)
        assert np.var(w.real) == pytest.approx(0.5, abs=0.01)
        assert np.var(w.imag) == pytest.approx(0.5, abs=0.01)

    def test_seeded(self):
        a = sample_noise(np.random.default_rng(3), (5, 6), 2.0)
        b = sample_noise(np.random.default_rng(3), (5, 6), 2.0)
        np.testing.assert_array_equal(a, b)

    def test_negative_variance(self, rng):
        with pytest.raises(DomainError):
            sample_noise(rng, 4, -1.0)
