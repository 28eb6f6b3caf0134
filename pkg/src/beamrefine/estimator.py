"""
Beam refinement and delay/Doppler estimation from radar snapshots.

The chain is

1. ``sample_covariance`` of the (N, M, N_rf) snapshot grid,
2. ``music_refine``: single-source beamspace MUSIC in the demodulated domain,
   giving the broadside offset ``phi'`` and the refined angle
   ``asin(sin(phi_hat) + sin(phi'))``,
3. ``beamspace_combine``: project each snapshot on ``U^H a(phi_refined)``,
4. ``estimate_delay_doppler``: FFT matched filter against the known symbols,
   grid argmax plus 3-point parabolic interpolation per axis,
5. ``to_range_velocity``.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from . import array_geometry as geom
from .channel import SPEED_OF_LIGHT, wavelength
from .errors import DomainError, EstimationError

GOLDEN_TOL = 1e-6
_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0
_TINY = 1e-300


@dataclass
class MusicResult:
    refined_offset: float
    refined_angle: float
    pointed_angle: float
    scan_offsets: np.ndarray
    pseudospectrum: np.ndarray
    eigenvalues: np.ndarray
    on_boundary: bool = False


@dataclass
class DelayDopplerEstimate:
    delay: float
    doppler: float
    peak: float
    delay_on_boundary: bool = False
    doppler_on_boundary: bool = False


@dataclass
class StateEstimate:
    """Refined angle (rad), delay (s), Doppler (Hz), range (m), velocity (m/s)."""

    angle: float
    delay: float
    doppler: float
    range: float
    velocity: float
    objective_peak: float
    music: MusicResult = None
    flagged: bool = False


def sample_covariance(grid):
    """``(1/NM) sum_{n,m} y[n,m] y[n,m]^H`` for an (N, M, N_rf) grid."""
    grid = np.asarray(grid)
    if grid.ndim != 3 or grid.shape[0] * grid.shape[1] == 0:
        raise DomainError("snapshot grid must be a non-empty (N, M, N_rf) array")
    y = grid.reshape(-1, grid.shape[-1])
    cov = y.T @ y.conj() / y.shape[0]
    return 0.5 * (cov + cov.conj().T)


def refine_angle(pointed_angle, offset):
    """Compose the coarse angle and the demodulated offset (asin argument clamped)."""
    return float(np.arcsin(np.clip(np.sin(pointed_angle) + np.sin(offset), -1.0, 1.0)))


def _golden_min(f, lo, hi, tol):
    # Absolute-tolerance golden-section search; f is assumed unimodal on [lo, hi].
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def music_refine(cov, bank: geom.ReductionBank, half_width=None, n_points=401, tol=GOLDEN_TOL):
    """
    Refine the bank's pointed angle with single-source beamspace MUSIC.

    The scan runs over demodulated offsets ``[-half_width, half_width]``
    (default ``asin(beta)``, the Slepian passband edge) using beamspace
    steering ``Psi^H a(offset)``. The grid peak is polished by golden-section
    search on the MUSIC null spectrum. A peak on the first or last grid
    point sets ``on_boundary``.
    """
    cov = np.asarray(cov)
    n_rf = bank.n_rf
    if n_rf < 2:
        raise DomainError("beamspace MUSIC needs at least two RF chains")
    if cov.shape != (n_rf, n_rf):
        raise DomainError(f"covariance must be {n_rf}x{n_rf}, got {cov.shape}")
    if half_width is None:
        half_width = float(np.arcsin(bank.beta)) if bank.beta is not None else np.pi / 2
    if not np.all(np.isfinite(cov)):
        raise EstimationError("covariance contains non-finite entries")
    try:
        evals, evecs = np.linalg.eigh(cov)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(f"covariance eigendecomposition failed: {exc}") from exc
    noise = evecs[:, : n_rf - 1]
    psi_h = bank.psi.conj().T

    def null_spectrum(offsets):
        b = psi_h @ geom.steering_matrix(bank.n_antennas, offsets)
        proj = np.sum(np.abs(noise.conj().T @ b) ** 2, axis=0)
        return proj / np.sum(np.abs(b) ** 2, axis=0)

    offsets = np.linspace(-half_width, half_width, n_points)
    null = null_spectrum(offsets)
    k = int(np.argmin(null))
    on_boundary = k in (0, n_points - 1)
    best = offsets[k]
    if not on_boundary:
        best = _golden_min(lambda x: null_spectrum(x)[0], offsets[k - 1], offsets[k + 1], tol)
    return MusicResult(
        refined_offset=float(best),
        refined_angle=refine_angle(bank.pointed_angle, best),
        pointed_angle=bank.pointed_angle,
        scan_offsets=offsets,
        pseudospectrum=1.0 / np.maximum(null, _TINY),
        eigenvalues=evals[::-1].copy(),
        on_boundary=on_boundary,
    )


def beamspace_combine(grid, bank: geom.ReductionBank, refined_angle):
    """
    Collapse snapshots to ``y'[n,m] = a^H U y[n,m] / (a^H U U^H a)`` with ``a = a(refined_angle)``.
    """
    w = bank.u.conj().T @ geom.steering_vector(bank.n_antennas, refined_angle)
    denom = float(np.real(np.vdot(w, w)))
    if denom <= 1e-12:
        raise EstimationError("angle outside filter-bank support")
    return np.asarray(grid) @ w.conj() / denom


def default_fft_sizes(shape, oversampling=4):
    return oversampling * shape[0], oversampling * shape[1]


def delay_doppler_objective(y_prime, symbols, fft_sizes=None):
    """
    Matched-filter magnitude ``|sum z[n,m] exp(-2j pi (n T0 nu - m df tau))|``, ``z = y' conj(x)``.

    Row ``p`` is Doppler ``p / (N_fft T0)`` and column ``q`` is delay
    ``q / (M_fft df)``, both in natural FFT order (Doppler wraps at ``N_fft/2``).
    The delay kernel has a positive exponent, hence the inverse transform on
    that axis.
    """
    y_prime = np.asarray(y_prime)
    symbols = np.asarray(symbols)
    if y_prime.shape != symbols.shape:
        raise ValueError(f"y' {y_prime.shape} and symbols {symbols.shape} differ in shape")
    n_fft, m_fft = fft_sizes or default_fft_sizes(y_prime.shape)
    if n_fft < y_prime.shape[0] or m_fft < y_prime.shape[1]:
        raise ValueError("FFT sizes must be at least the grid size")
    z = y_prime * symbols.conj()
    spec = sp_fft.ifft(z, n=m_fft, axis=1, norm="forward")
    spec = sp_fft.fft(spec, n=n_fft, axis=0)
    return np.abs(spec)


def doppler_axis(cfg, n_fft):
    """Doppler of each objective row (Hz), natural FFT order."""
    return np.fft.fftfreq(n_fft, d=cfg.total_symbol_duration)


def delay_axis(cfg, m_fft):
    """Delay of each objective column (s)."""
    return np.arange(m_fft) / (m_fft * cfg.subcarrier_spacing)


def _parabolic(left, mid, right):
    denom = left - 2.0 * mid + right
    if denom >= 0:
        return 0.0
    return 0.5 * (left - right) / denom


def estimate_delay_doppler(y_prime, symbols, cfg, fft_sizes=None) -> DelayDopplerEstimate:
    """
    Maximize the matched-filter objective.

    Returns delay in ``[0, 1/df)`` and Doppler in ``[-1/(2 T0), 1/(2 T0))``.
    Interpolation is skipped on an axis whose peak sits on that axis' edge.
    """
    obj = delay_doppler_objective(y_prime, symbols, fft_sizes)
    n_fft, m_fft = obj.shape
    obj = np.fft.fftshift(obj, axes=0)
    p, q = np.unravel_index(int(np.argmax(obj)), obj.shape)
    peak = float(obj[p, q])

    doppler_edge = p in (0, n_fft - 1)
    delay_edge = q in (0, m_fft - 1)
    dp = 0.0 if doppler_edge else _parabolic(obj[p - 1, q], peak, obj[p + 1, q])
    dq = 0.0 if delay_edge else _parabolic(obj[p, q - 1], peak, obj[p, q + 1])

    doppler = (p - n_fft // 2 + dp) / (n_fft * cfg.total_symbol_duration)
    delay = (q + dq) / (m_fft * cfg.subcarrier_spacing)
    delay = float(np.clip(delay, 0.0, np.nextafter(cfg.symbol_duration, 0.0)))
    return DelayDopplerEstimate(
        delay=delay,
        doppler=float(doppler),
        peak=peak,
        delay_on_boundary=delay_edge,
        doppler_on_boundary=doppler_edge,
    )


def to_range_velocity(delay, doppler, carrier_freq):
    """Round-trip delay/Doppler to range ``c tau / 2`` and velocity ``nu lambda / 2``."""
    return SPEED_OF_LIGHT * delay / 2.0, doppler * wavelength(carrier_freq) / 2.0


def estimate_state(grid, bank, symbols, cfg, fft_sizes=None, n_points=401) -> StateEstimate:
    """Run the full refinement chain on one snapshot grid."""
    music = music_refine(sample_covariance(grid), bank, n_points=n_points)
    y_prime = beamspace_combine(grid, bank, music.refined_angle)
    dd = estimate_delay_doppler(y_prime, symbols, cfg, fft_sizes)
    rng_m, vel = to_range_velocity(dd.delay, dd.doppler, cfg.carrier_freq)
    return StateEstimate(
        angle=music.refined_angle,
        delay=dd.delay,
        doppler=dd.doppler,
        range=rng_m,
        velocity=vel,
        objective_peak=dd.peak,
        music=music,
        flagged=music.on_boundary,
    )


def write_pseudospectrum(path, music: MusicResult):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["offset_deg", "angle_deg", "pseudospectrum"])
        for off, val in zip(music.scan_offsets, music.pseudospectrum):
            ang = refine_angle(music.pointed_angle, off)
            writer.writerow([f"{np.degrees(off):.10g}", f"{np.degrees(ang):.10g}", f"{val:.10g}"])


def write_objective(path, objective, cfg):
    """Objective surface as long-format CSV (delay_s, doppler_hz, magnitude)."""
    n_fft, m_fft = objective.shape
    nu = doppler_axis(cfg, n_fft)
    tau = delay_axis(cfg, m_fft)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["delay_s", "doppler_hz", "magnitude"])
        for p in np.argsort(nu, kind="stable"):
            for q in range(m_fft):
                writer.writerow([f"{tau[q]:.10g}", f"{nu[p]:.10g}", f"{objective[p, q]:.10g}"])
