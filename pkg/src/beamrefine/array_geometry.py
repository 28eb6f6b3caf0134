"""
ULA geometry and the hybrid receive front end.

The receive reduction matrix is ``U = D(phi_hat) @ Psi`` where ``D`` is a
diagonal network of unit-modulus phase shifters steered to the coarse angle
and ``Psi`` is a fixed bank of Slepian (DPSS) spatial filters concentrated
around broadside. Angles are in radians everywhere in this module.

Phase conventions
-----------------
Element ``i`` (zero based) of a steering vector is ``exp(1j*pi*i*sin(xi))``.
The stored phase-shifter diagonal equals ``a(phi_hat)`` so that applying
``D^H`` multiplies element ``i`` by ``exp(-1j*pi*i*sin(phi_hat))`` and moves a
source at ``phi_hat`` to broadside.

Slepian columns are real eigenvectors; each one is signed so that its
largest-magnitude entry is positive. Eigensolvers are free to return either
sign, so this gauge is what makes ``Psi`` reproducible.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import linalg

from .errors import DomainError

_BETA_SLACK = 1e-9


@dataclass(frozen=True)
class ArrayConfig:
    """
    Base-station array geometry.

    Parameters
    ----------
    n_antennas : int
        Number of ULA elements (half-wavelength spacing).
    n_rf : int
        Number of RF chains, i.e. columns of the reduction matrix.
    beta : float, optional
        Slepian half-bandwidth in normalized spatial frequency
        (``sin(phi)`` units). Defaults to ``n_rf / n_antennas``.
    """

    n_antennas: int = 64
    n_rf: int = 4
    beta: float = None

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise DomainError(f"n_antennas must be a positive integer, got {self.n_antennas}")
        if int(self.n_rf) != self.n_rf or self.n_rf < 1:
            raise DomainError(f"n_rf must be a positive integer, got {self.n_rf}")
        if self.beta is None:
            object.__setattr__(self, "beta", self.n_rf / self.n_antennas)
        if self.n_rf > self.n_antennas:
            raise DomainError("n_rf cannot exceed n_antennas")
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta}")
        if self.beta * self.n_antennas < 1.0 - _BETA_SLACK:
            raise DomainError("beta must be at least 1/n_antennas")
        if self.n_rf > self.beta * self.n_antennas + _BETA_SLACK:
            raise DomainError(
                f"n_rf={self.n_rf} exceeds beta*n_antennas={self.beta * self.n_antennas:g}; "
                "the trailing Slepian filters would not be band-concentrated"
            )

    @property
    def passband_half_width(self):
        """Angular half-width of the Slepian passband, ``asin(beta)``."""
        return float(np.arcsin(self.beta))


@dataclass(frozen=True)
class ReductionBank:
    """Phase shifters, Slepian bank and their product ``u = diag(d_diag) @ psi``."""

    d_diag: np.ndarray
    psi: np.ndarray
    u: np.ndarray
    pointed_angle: float
    beta: float = None

    @property
    def n_antennas(self):
        return self.u.shape[0]

    @property
    def n_rf(self):
        return self.u.shape[1]


def _size(cfg: Union[ArrayConfig, int]) -> int:
    if isinstance(cfg, ArrayConfig):
        return cfg.n_antennas
    n = int(cfg)
    if n < 1:
        raise DomainError(f"array size must be positive, got {cfg}")
    return n


def _check_angle(angle):
    angle = np.asarray(angle, dtype=float)
    if not np.all(np.isfinite(angle)) or np.any(np.abs(angle) > np.pi / 2):
        raise DomainError("angles must lie in [-pi/2, pi/2] radians")
    return angle


def steering_vector(cfg, angle):
    """ULA response ``a(angle)``; squared norm equals the number of elements."""
    n = _size(cfg)
    angle = float(_check_angle(angle))
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def steering_matrix(cfg, angles):
    """Steering vectors for several angles, stacked as columns (n x len(angles))."""
    n = _size(cfg)
    angles = np.atleast_1d(_check_angle(angles))
    return np.exp(1j * np.pi * np.outer(np.arange(n), np.sin(angles)))


def tx_beamformer(cfg, angle):
    """Unit-norm transmit beamformer ``f = a(angle) / sqrt(n)``."""
    n = _size(cfg)
    return steering_vector(n, angle) / np.sqrt(n)


def array_gain(true_angle, pointed_angle, n):
    """Complex transmit gain ``g_t = a(true)^H f(pointed)``; ``|g_t|^2 <= n``."""
    return complex(np.vdot(steering_vector(n, true_angle), tx_beamformer(n, pointed_angle)))


def phase_shift_network(cfg, pointed_angle):
    """
    Diagonal of the phase-shifter network ``D(pointed_angle)``.

    Returned as a vector; ``D^H a(phi) = a(asin(sin(phi) - sin(pointed_angle)))``.
    """
    return steering_vector(cfg, pointed_angle)


def concentration_matrix(n, beta):
    """
    Spatial concentration matrix of the band ``|gamma| <= beta*pi``.

    Entries are ``sin((p-q)*beta*pi) / ((p-q)*pi)`` off the diagonal and
    ``beta`` on it, the closed form of the band-limited Gram integral.
    """
    n = _size(n)
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    lag = np.subtract.outer(np.arange(n), np.arange(n)).astype(float)
    # np.sinc(x) = sin(pi x)/(pi x) handles the zero-lag limit.
    return beta * np.sinc(beta * lag)


@lru_cache(maxsize=32)
def _slepian(n, n_rf, beta):
    gamma = concentration_matrix(n, beta)
    evals, evecs = linalg.eigh(gamma, subset_by_index=[n - n_rf, n - 1])
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    peak = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[peak, np.arange(n_rf)])
    psi = (evecs * signs).astype(complex)
    psi.setflags(write=False)
    evals.setflags(write=False)
    return psi, evals


def slepian_bank(cfg: ArrayConfig):
    """Columns are the leading ``n_rf`` Slepian sequences, by decreasing concentration."""
    try:
        psi, _ = _slepian(cfg.n_antennas, cfg.n_rf, float(cfg.beta))
    except linalg.LinAlgError as exc:
        raise ArithmeticError(f"Slepian eigensolver failed: {exc}") from exc
    return psi


def slepian_concentrations(cfg: ArrayConfig):
    """In-band energy fractions of the columns returned by :func:`slepian_bank`."""
    return _slepian(cfg.n_antennas, cfg.n_rf, float(cfg.beta))[1]


def reduction_matrix(cfg: ArrayConfig, pointed_angle) -> ReductionBank:
    d_diag = phase_shift_network(cfg, pointed_angle)
    psi = slepian_bank(cfg)
    u = d_diag[:, None] * psi
    d_diag.setflags(write=False)
    u.setflags(write=False)
    return ReductionBank(d_diag=d_diag, psi=psi, u=u, pointed_angle=float(pointed_angle), beta=float(cfg.beta))


def beam_pattern(vectors, angles):
    """``|w^H a(angle)|^2`` for every column ``w`` of ``vectors`` (rows) and angle (columns)."""
    vectors = np.atleast_2d(np.asarray(vectors).T).T
    a = steering_matrix(vectors.shape[0], angles)
    return np.abs(vectors.conj().T @ a) ** 2
