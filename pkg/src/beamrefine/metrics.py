"""Link-budget SNRs and spectral efficiency."""

from dataclasses import dataclass

import numpy as np

from .channel import link_coefficients
from .errors import DomainError


@dataclass(frozen=True)
class LinkBudget:
    snr_ue: float
    snr_bs: float
    snr_bbf: float
    spectral_efficiency: float
    rx_gain_sq: float


def spectral_efficiency(snr):
    return np.log2(1.0 + snr)


def db(x):
    return 10.0 * np.log10(x)


def undb(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def link_budget(state, cfg, g_t, rx_gain_sq=4.0, n_rf=4) -> LinkBudget:
    """
    SNRs for one user.

    ``snr_bbf`` is the user SNR before any beamforming, ``snr_ue`` adds the
    transmit gain ``|g_t|^2`` and the user's combining gain ``rx_gain_sq``,
    ``snr_bs`` is the per-antenna radar SNR before the reduction matrix.
    The ratio ``snr_bs/snr_ue = rcs / (4 pi d^2 rx_gain_sq)`` only holds
    when ``cfg.n_users == n_rf``.
    """
    if not cfg.noise_variance > 0:
        raise DomainError("link budget needs a positive noise variance")
    link = link_coefficients(state, cfg.carrier_freq)
    gt2 = abs(g_t) ** 2
    snr_bbf = abs(link.h_ue) ** 2 * cfg.tx_power / (cfg.n_users * cfg.noise_variance)
    snr_ue = snr_bbf * gt2 * rx_gain_sq
    snr_bs = abs(link.h_bs) ** 2 * gt2 * cfg.tx_power / (n_rf * cfg.noise_variance)
    return LinkBudget(
        snr_ue=snr_ue,
        snr_bs=snr_bs,
        snr_bbf=snr_bbf,
        spectral_efficiency=float(spectral_efficiency(snr_ue)),
        rx_gain_sq=rx_gain_sq,
    )


def noise_for_snr_bbf(state, cfg, snr_bbf):
    """Noise variance giving the requested (linear) pre-beamforming user SNR; 0 for infinite SNR."""
    if np.isinf(snr_bbf):
        return 0.0
    if not snr_bbf > 0:
        raise DomainError("snr_bbf must be positive")
    h2 = abs(link_coefficients(state, cfg.carrier_freq).h_ue) ** 2
    return h2 * cfg.tx_power / (cfg.n_users * snr_bbf)
