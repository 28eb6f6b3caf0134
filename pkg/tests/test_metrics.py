import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamrefine import metrics
from beamrefine.channel import UserState, link_coefficients
from beamrefine.config import default_config
from beamrefine.errors import DomainError
from beamrefine.ofdm_link import OfdmConfig


def cfg_for_snr_bbf(state, snr_bbf, **kw):
    base = OfdmConfig(**kw)
    return dataclasses.replace(base, noise_variance=metrics.noise_for_snr_bbf(state, base, snr_bbf))


def test_worked_example():
    state = UserState()
    lb = metrics.link_budget(state, cfg_for_snr_bbf(state, 0.01), g_t=8.0, rx_gain_sq=4.0)
    assert lb.snr_bbf == pytest.approx(0.01, rel=1e-12)
    assert lb.snr_ue == pytest.approx(2.56, rel=1e-12)
    assert lb.spectral_efficiency == pytest.approx(np.log2(3.56), rel=1e-12)
    assert lb.spectral_efficiency == pytest.approx(1.832, abs=5e-4)


def test_snr_formulas():
    state = UserState(range=25.0, rcs=3.0)
    cfg = OfdmConfig(tx_power=2.0, n_users=3, noise_variance=1e-12)
    g_t = 5.0 - 2.0j
    lb = metrics.link_budget(state, cfg, g_t, rx_gain_sq=2.5, n_rf=4)
    link = link_coefficients(state, cfg.carrier_freq)
    assert lb.snr_bbf == pytest.approx(abs(link.h_ue) ** 2 * 2.0 / (3 * 1e-12), rel=1e-12)
    assert lb.snr_ue == pytest.approx(lb.snr_bbf * 29 * 2.5, rel=1e-12)
    assert lb.snr_bs == pytest.approx(abs(link.h_bs) ** 2 * 29 * 2.0 / (4 * 1e-12), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 500.0), st.floats(0.01, 1000.0), st.floats(0.5, 16.0))
def test_radar_to_user_ratio(rng_m, rcs, gr2):
    state = UserState(range=rng_m, rcs=rcs)
    cfg = OfdmConfig(n_users=4, noise_variance=1e-10)
    lb = metrics.link_budget(state, cfg, g_t=3.0, rx_gain_sq=gr2, n_rf=4)
    assert lb.snr_bs / lb.snr_ue == pytest.approx(rcs / (4 * np.pi * rng_m**2 * gr2), rel=1e-12)


def test_zero_gain():
    lb = metrics.link_budget(UserState(), OfdmConfig(noise_variance=1e-9), g_t=0.0)
    assert lb.snr_ue == 0.0
    assert lb.spectral_efficiency == 0.0


def test_requires_noise():
    with pytest.raises(DomainError):
        metrics.link_budget(UserState(), OfdmConfig(), g_t=1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-30, 30), st.floats(0.1, 10.0), st.floats(0.0, 64.0), st.floats(0.0, 10.0))
def test_se_monotone(snr_db, dsnr_db, gt2, dgt2):
    s = metrics.undb(snr_db)
    base = metrics.spectral_efficiency(s * gt2 * 4)
    assert metrics.spectral_efficiency(metrics.undb(snr_db + dsnr_db) * gt2 * 4) >= base
    assert metrics.spectral_efficiency(s * (gt2 + dgt2) * 4) >= base


def test_db_round_trip():
    assert metrics.undb(metrics.db(123.4)) == pytest.approx(123.4, rel=1e-12)
    assert metrics.db(100.0) == pytest.approx(20.0)


def test_noise_back_solve():
    state = UserState()
    assert metrics.noise_for_snr_bbf(state, OfdmConfig(), np.inf) == 0.0
    with pytest.raises(DomainError):
        metrics.noise_for_snr_bbf(state, OfdmConfig(), 0.0)


def test_default_configuration_loads():
    cfg = default_config()
    arr, ofdm, user = cfg.array(), cfg.ofdm(), cfg.user()
    assert (ofdm.n_symbols, ofdm.n_subcarriers, ofdm.subcarrier_spacing, ofdm.carrier_freq) == (16, 512, 1e6, 60e9)
    assert (arr.n_antennas, arr.n_rf, arr.beta) == (64, 4, 4 / 64)
    assert user.rcs == pytest.approx(100.0)
    assert user.range == 40.0
    assert cfg["link.rx_gain_sq"] == 4.0
