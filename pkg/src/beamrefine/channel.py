"""LOS user state, one-way/two-way link coefficients and receiver noise."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class UserState:
    """
    Ground-truth state of one user.

    Attributes
    ----------
    aod : float
        Angle of departure seen from the base station (rad).
    aoa : float
        Angle of arrival at the user terminal (rad).
    range : float
        BS-UE distance (m).
    speed : float
        Radial speed (m/s), positive when receding.
    rcs : float
        Radar cross section (m^2).
    tx_phase, bs_phase : float
        Phases of the one-way and two-way channel coefficients (rad).
    """

    aod: float = 0.0
    aoa: float = 0.0
    range: float = 40.0
    speed: float = 20.0
    rcs: float = 100.0
    tx_phase: float = 0.0
    bs_phase: float = 0.0

    def __post_init__(self):
        if not self.range > 0:
            raise DomainError(f"range must be positive, got {self.range}")
        if not self.rcs > 0:
            raise DomainError(f"rcs must be positive, got {self.rcs}")
        if abs(self.aod) > np.pi / 2:
            raise DomainError("aod must lie in [-pi/2, pi/2]")


@dataclass(frozen=True)
class LinkCoefficients:
    """One-way gain ``h_ue``, two-way gain ``h_bs`` and two-way delay/Doppler."""

    h_ue: complex
    h_bs: complex
    delay: float
    doppler: float


def wavelength(carrier_freq):
    if not carrier_freq > 0:
        raise DomainError(f"carrier frequency must be positive, got {carrier_freq}")
    return SPEED_OF_LIGHT / carrier_freq


def dbsm_to_m2(rcs_dbsm):
    return 10.0 ** (rcs_dbsm / 10.0)


def link_coefficients(state: UserState, carrier_freq) -> LinkCoefficients:
    """
    Free-space LOS coefficients for ``state``.

    ``|h_ue|^2 = lam^2 / (4 pi d)^2`` and
    ``|h_bs|^2 = lam^2 rcs / ((4 pi)^3 d^4)`` (radar equation, unit antenna
    gains); delay and Doppler are round-trip values.
    """
    if not state.range > 0:
        raise DomainError(f"range must be positive, got {state.range}")
    lam = wavelength(carrier_freq)
    d = state.range
    h_ue = lam / (4 * np.pi * d) * np.exp(1j * state.tx_phase)
    h_bs = np.sqrt(lam**2 * state.rcs / ((4 * np.pi) ** 3 * d**4)) * np.exp(1j * state.bs_phase)
    return LinkCoefficients(
        h_ue=complex(h_ue),
        h_bs=complex(h_bs),
        delay=2.0 * d / SPEED_OF_LIGHT,
        doppler=2.0 * state.speed / lam,
    )


def sample_noise(rng: np.random.Generator, dims, variance):
    """
    Circularly-symmetric complex Gaussian samples with per-sample ``variance``.

    Zero variance returns zeros without touching ``rng``.
    """
    if variance < 0:
        raise DomainError(f"noise variance must be nonnegative, got {variance}")
    dims = tuple(np.atleast_1d(dims).tolist())
    if variance == 0:
        return np.zeros(dims, dtype=complex)
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(dims) + 1j * rng.standard_normal(dims))
