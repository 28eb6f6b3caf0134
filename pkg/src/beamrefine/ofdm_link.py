"""
Sampled-domain OFDM synthesis for the radar receiver and the user terminal.

Everything here works on the post-FFT grid indexed by OFDM symbol ``n`` and
subcarrier ``m``. A target with two-way delay ``tau`` and Doppler ``nu``
multiplies symbol ``x[n, m]`` by ``exp(2j*pi*(n*T0*nu - m*df*tau))``; the user
terminal sees half of each.

Array layouts
-------------
symbols   : (K, N, M) complex, one grid per user
snapshots : (N, M, N_rf) complex, ``y[n, m] = U^H (...)``
ue grid   : (N, M) complex
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import array_geometry as geom
from .channel import UserState, link_coefficients, sample_noise
from .errors import DomainError

QPSK = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))


@dataclass(frozen=True)
class OfdmConfig:
    """
    OFDM waveform and link parameters.

    ``noise_variance`` is the per-antenna complex noise power; experiments
    usually back-solve it from a target SNR instead of using this default.
    """

    n_symbols: int = 16
    n_subcarriers: int = 512
    subcarrier_spacing: float = 1e6
    cp_fraction: float = 0.25
    carrier_freq: float = 60e9
    tx_power: float = 1.0
    n_users: int = 4
    noise_variance: float = 0.0

    def __post_init__(self):
        for name in ("n_symbols", "n_subcarriers", "n_users"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value}")
        if not self.subcarrier_spacing > 0:
            raise DomainError("subcarrier_spacing must be positive")
        if not 0.0 < self.cp_fraction < 1.0:
            raise DomainError("cp_fraction must lie in (0, 1)")
        if not self.carrier_freq > 0:
            raise DomainError("carrier_freq must be positive")
        if self.tx_power < 0:
            raise DomainError("tx_power must be nonnegative")
        if self.noise_variance < 0:
            raise DomainError("noise_variance must be nonnegative")

    @property
    def symbol_duration(self):
        """Useful symbol length ``T = 1/df``."""
        return 1.0 / self.subcarrier_spacing

    @property
    def cp_duration(self):
        return self.cp_fraction * self.symbol_duration

    @property
    def total_symbol_duration(self):
        """``T0 = T + T_cp``."""
        return (1.0 + self.cp_fraction) * self.symbol_duration

    @property
    def bandwidth(self):
        return self.n_subcarriers * self.subcarrier_spacing

    @property
    def symbol_power(self):
        """Per-user symbol energy ``P_t / K``."""
        return self.tx_power / self.n_users


def check_compatible(ofdm: OfdmConfig, array: geom.ArrayConfig):
    if ofdm.n_users > array.n_rf:
        raise DomainError(f"n_users={ofdm.n_users} exceeds n_rf={array.n_rf}")


@dataclass
class TimingReport:
    max_delay: float
    max_doppler: float
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations


def validate_timing(cfg: OfdmConfig, states) -> TimingReport:
    """
    Check the sampled model's assumptions against the user states.

    Flags Doppler above ``df/100`` (the ``nu << df`` regime), delays longer
    than the cyclic prefix, and delays that alias past ``1/df``.
    """
    links = [link_coefficients(s, cfg.carrier_freq) for s in states]
    max_delay = max((lk.delay for lk in links), default=0.0)
    max_doppler = max((abs(lk.doppler) for lk in links), default=0.0)
    report = TimingReport(max_delay=max_delay, max_doppler=max_doppler)
    if max_doppler > cfg.subcarrier_spacing / 100:
        report.violations.append(
            f"doppler: {max_doppler:.6g} Hz exceeds df/100 = {cfg.subcarrier_spacing / 100:.6g} Hz"
        )
    if max_delay > cfg.cp_duration:
        report.violations.append(
            f"cyclic prefix: delay {max_delay * 1e9:.6g} ns exceeds T_cp = {cfg.cp_duration * 1e9:.6g} ns"
        )
    if max_delay >= cfg.symbol_duration:
        report.violations.append(
            f"ambiguity: delay {max_delay * 1e9:.6g} ns is not below 1/df = {cfg.symbol_duration * 1e9:.6g} ns"
        )
    return report


def generate_symbols(cfg: OfdmConfig, rng: np.random.Generator):
    """I.i.d. uniform QPSK symbols of energy ``P_t/K``, shape (K, N, M)."""
    idx = rng.integers(0, 4, size=(cfg.n_users, cfg.n_symbols, cfg.n_subcarriers))
    return np.sqrt(cfg.symbol_power) * QPSK[idx]


def delay_doppler_phasor(cfg: OfdmConfig, delay, doppler):
    """``exp(2j*pi*(n*T0*nu - m*df*tau))`` on the (N, M) grid."""
    n = np.arange(cfg.n_symbols)
    m = np.arange(cfg.n_subcarriers)
    slow = np.exp(2j * np.pi * n * cfg.total_symbol_duration * doppler)
    fast = np.exp(-2j * np.pi * m * cfg.subcarrier_spacing * delay)
    return np.outer(slow, fast)


def _check_symbols(symbols, cfg):
    symbols = np.asarray(symbols)
    if symbols.shape[-2:] != (cfg.n_symbols, cfg.n_subcarriers):
        raise ValueError(
            f"symbol grid shape {symbols.shape} does not match (N, M) = "
            f"({cfg.n_symbols}, {cfg.n_subcarriers})"
        )
    return symbols


def _reduced_noise(bank, cfg, rng, antenna_noise=True):
    # U^H U = I, so U^H w with white antenna noise w has the same law as white
    # noise drawn directly per RF chain; the shortcut is N_a/N_rf times cheaper.
    shape = (cfg.n_symbols, cfg.n_subcarriers)
    if cfg.noise_variance == 0:
        return np.zeros(shape + (bank.n_rf,), dtype=complex)
    if not antenna_noise:
        return sample_noise(rng, shape + (bank.n_rf,), cfg.noise_variance)
    w = sample_noise(rng, (cfg.n_symbols, cfg.n_subcarriers, bank.n_antennas), cfg.noise_variance)
    return w @ bank.u.conj()


def radar_snapshots_single(
    state: UserState, bank: geom.ReductionBank, cfg: OfdmConfig, symbols, rng, antenna_noise=True
):
    """
    Single-user radar snapshots with all other users rejected by the bank.

    ``symbols`` is this user's (N, M) grid. The bank's pointed angle is the
    coarse estimate used for the transmit beam. With ``antenna_noise=False``
    the noise is drawn directly after the reduction matrix (same
    distribution, different random stream).
    """
    symbols = _check_symbols(symbols, cfg)
    if symbols.ndim != 2:
        raise ValueError("radar_snapshots_single expects one (N, M) symbol grid")
    link = link_coefficients(state, cfg.carrier_freq)
    g_t = geom.array_gain(state.aod, bank.pointed_angle, bank.n_antennas)
    scalar = link.h_bs * g_t * symbols * delay_doppler_phasor(cfg, link.delay, link.doppler)
    signature = bank.u.conj().T @ geom.steering_vector(bank.n_antennas, state.aod)
    return scalar[..., None] * signature + _reduced_noise(bank, cfg, rng, antenna_noise)


def radar_snapshots_exact(
    states, pointed_angles, bank: geom.ReductionBank, cfg: OfdmConfig, symbols, rng, antenna_noise=True
):
    """
    Multi-user radar snapshots including every cross-beam term.

    Each echo ``k`` carries the full transmit mixture
    ``sum_k' a(phi_k)^H f(phi_hat_k') x_k'[n, m]``.
    """
    symbols = _check_symbols(symbols, cfg)
    pointed_angles = np.atleast_1d(np.asarray(pointed_angles, dtype=float))
    if symbols.ndim != 3 or not (len(states) == len(pointed_angles) == symbols.shape[0]):
        raise ValueError("states, pointed_angles and symbols must describe the same users")
    n_ant = bank.n_antennas
    beams = np.stack([geom.tx_beamformer(n_ant, p) for p in pointed_angles], axis=1)
    y = _reduced_noise(bank, cfg, rng, antenna_noise)
    for state in states:
        link = link_coefficients(state, cfg.carrier_freq)
        a = geom.steering_vector(n_ant, state.aod)
        gains = a.conj() @ beams
        mixture = np.tensordot(gains, symbols, axes=(0, 0))
        scalar = link.h_bs * mixture * delay_doppler_phasor(cfg, link.delay, link.doppler)
        y = y + scalar[..., None] * (bank.u.conj().T @ a)
    return y


def ue_received(state: UserState, pointed_angle, rx_gain, array, cfg: OfdmConfig, symbols, rng):
    """User-side post-FFT grid; the one-way link sees half the two-way delay and Doppler."""
    symbols = _check_symbols(symbols, cfg)
    link = link_coefficients(state, cfg.carrier_freq)
    g_t = geom.array_gain(state.aod, pointed_angle, geom._size(array))
    phasor = delay_doppler_phasor(cfg, link.delay / 2, link.doppler / 2)
    noise = sample_noise(rng, symbols.shape, cfg.noise_variance)
    return link.h_ue * g_t * rx_gain * symbols * phasor + noise


def write_snapshots(path, grid, fmt="bin"):
    """
    Dump an (N, M, N_rf) grid.

    ``bin`` writes little-endian float64 with re/im interleaved in row-major
    n -> m -> rf order. ``csv`` writes one row per (n, m) with the same
    interleaving after the two index columns.
    """
    grid = np.asarray(grid, dtype=complex)
    if grid.ndim != 3:
        raise ValueError("snapshot grid must be 3-D (N, M, N_rf)")
    if fmt == "bin":
        grid.astype("<c16").tofile(path)
    elif fmt == "csv":
        n, m, r = grid.shape
        header = ["n", "m"] + [f"{p}{i}" for i in range(r) for p in ("re", "im")]
        flat = grid.reshape(n * m, r).view(float).reshape(n * m, 2 * r)
        nn, mm = np.divmod(np.arange(n * m), m)
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row, (i, j) in enumerate(zip(nn, mm)):
                fh.write(f"{i},{j}," + ",".join(f"{v:.17g}" for v in flat[row]) + "\n")
    else:
        raise ValueError(f"unknown snapshot format {fmt!r}")


def read_snapshots(path, shape):
    """Inverse of ``write_snapshots(..., fmt='bin')``."""
    return np.fromfile(path, dtype="<c16").reshape(shape)
