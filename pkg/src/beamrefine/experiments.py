"""
Monte-Carlo sweeps over SNR and angle discretization error.

Every trial owns a random stream derived from
``SeedSequence(seed, spawn_key=(snr_index, epsilon_index, trial_index))``,
so a sweep is a pure function of its ``SweepSpec`` regardless of the order
(or the process) in which points are evaluated.

Trial protocol: the true angle is uniform in ``[-angle_span, angle_span]``,
the coarse beam points at ``true - epsilon``, both channel phases are
uniform, the per-antenna noise power is set so that the pre-beamforming
user SNR equals the requested value, and the radar chain refines the beam.
A trial fails when the estimator raises or the MUSIC peak lands on the scan
edge; RMSEs use successful trials only.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from . import array_geometry as geom
from .channel import UserState
from .errors import EstimationError
from .estimator import estimate_state
from .metrics import noise_for_snr_bbf, spectral_efficiency, undb
from .ofdm_link import OfdmConfig, generate_symbols, radar_snapshots_single


@dataclass(frozen=True)
class SweepSpec:
    snr_bbf_db: Tuple[float, ...] = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0)
    epsilons_deg: Tuple[float, ...] = (0.5, 1.0, 1.5)
    n_trials: int = 1000
    seed: int = 0
    array: geom.ArrayConfig = field(default_factory=geom.ArrayConfig)
    ofdm: OfdmConfig = field(default_factory=OfdmConfig)
    user: UserState = field(default_factory=UserState)
    rx_gain_sq: float = 4.0
    angle_span_deg: float = 30.0
    oversampling: int = 4
    music_points: int = 401
    noiseless: bool = False
    antenna_noise: bool = False

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if not self.snr_bbf_db or not self.epsilons_deg:
            raise ValueError("SNR and epsilon grids must be non-empty")
        if not 0 <= self.angle_span_deg <= 90:
            raise ValueError("angle_span_deg must lie in [0, 90]")


@dataclass(frozen=True)
class TrialOutcome:
    true_angle: float
    coarse_angle: float
    refined_angle: Optional[float]
    range: float
    velocity: float
    se_refined: float
    se_unrefined: float
    failed: bool


@dataclass(frozen=True)
class PointResult:
    snr_bbf_db: float
    epsilon_deg: float
    se_refined: float
    se_unrefined: float
    rmse_angle_deg: float
    rmse_range_m: float
    rmse_velocity_mps: float
    failures: int
    n_trials: int

    @property
    def all_failed(self):
        return self.failures == self.n_trials


@dataclass
class SweepResult:
    spec: SweepSpec
    points: List[PointResult]

    def point(self, snr_bbf_db, epsilon_deg) -> PointResult:
        for p in self.points:
            if p.snr_bbf_db == snr_bbf_db and p.epsilon_deg == epsilon_deg:
                return p
        raise KeyError((snr_bbf_db, epsilon_deg))


def trial_rng(seed, snr_index, eps_index, trial_index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(snr_index, eps_index, trial_index)))


def run_trial(spec: SweepSpec, snr_bbf_db, epsilon_deg, rng) -> TrialOutcome:
    span = np.radians(spec.angle_span_deg)
    true_angle = rng.uniform(-span, span)
    coarse = true_angle - np.radians(epsilon_deg)
    tx_phase, bs_phase = rng.uniform(0.0, 2 * np.pi, size=2)
    state = replace(spec.user, aod=true_angle, tx_phase=tx_phase, bs_phase=bs_phase)

    snr_bbf = float(undb(snr_bbf_db))
    noise = 0.0 if spec.noiseless else noise_for_snr_bbf(state, spec.ofdm, snr_bbf)
    cfg = replace(spec.ofdm, noise_variance=noise)

    symbols = generate_symbols(cfg, rng)[0]
    bank = geom.reduction_matrix(spec.array, coarse)
    grid = radar_snapshots_single(state, bank, cfg, symbols, rng, antenna_noise=spec.antenna_noise)

    n_ant = spec.array.n_antennas
    fft_sizes = (spec.oversampling * cfg.n_symbols, spec.oversampling * cfg.n_subcarriers)
    try:
        est = estimate_state(grid, bank, symbols, cfg, fft_sizes=fft_sizes, n_points=spec.music_points)
    except EstimationError:
        est = None
    failed = est is None or est.flagged
    steer = coarse if est is None else est.angle

    def se(pointed):
        gt2 = abs(geom.array_gain(true_angle, pointed, n_ant)) ** 2
        return float(spectral_efficiency(snr_bbf * gt2 * spec.rx_gain_sq))

    return TrialOutcome(
        true_angle=float(true_angle),
        coarse_angle=float(coarse),
        refined_angle=None if est is None else est.angle,
        range=np.nan if est is None else est.range,
        velocity=np.nan if est is None else est.velocity,
        se_refined=se(steer),
        se_unrefined=se(coarse),
        failed=failed,
    )


def _rmse(errors):
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        return float("nan")
    return float(np.sqrt(np.mean(errors**2)))


def run_point(spec: SweepSpec, snr_index, eps_index) -> PointResult:
    snr_db = spec.snr_bbf_db[snr_index]
    eps = spec.epsilons_deg[eps_index]
    outcomes = [
        run_trial(spec, snr_db, eps, trial_rng(spec.seed, snr_index, eps_index, t))
        for t in range(spec.n_trials)
    ]
    ok = [o for o in outcomes if not o.failed]
    return PointResult(
        snr_bbf_db=float(snr_db),
        epsilon_deg=float(eps),
        se_refined=float(np.mean([o.se_refined for o in outcomes])),
        se_unrefined=float(np.mean([o.se_unrefined for o in outcomes])),
        rmse_angle_deg=_rmse([np.degrees(o.refined_angle - o.true_angle) for o in ok]),
        rmse_range_m=_rmse([o.range - spec.user.range for o in ok]),
        rmse_velocity_mps=_rmse([o.velocity - spec.user.speed for o in ok]),
        failures=len(outcomes) - len(ok),
        n_trials=len(outcomes),
    )


def _run_point_args(args):
    return run_point(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """
    Evaluate every (SNR, epsilon) point; ``workers > 1`` spreads points over processes.

    Results are identical for any ``workers`` value.
    """
    jobs = [(spec, i, j) for i in range(len(spec.snr_bbf_db)) for j in range(len(spec.epsilons_deg))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_run_point_args, jobs))
    else:
        points = [_run_point_args(job) for job in jobs]
    return SweepResult(spec=spec, points=points)


SE_COLUMNS = ("snr_bbf_db", "epsilon_deg", "se_refined", "se_unrefined")
RMSE_COLUMNS = ("snr_bbf_db", "epsilon_deg", "rmse_angle_deg", "rmse_range_m", "rmse_velocity_mps", "failures")


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.10g}"


def sweep_rows(result: SweepResult, kind):
    if kind == "se":
        columns = SE_COLUMNS
    elif kind == "rmse":
        columns = RMSE_COLUMNS
    else:
        raise ValueError(f"unknown sweep kind {kind!r}")
    rows = [list(columns)]
    for p in result.points:
        rows.append([_fmt(getattr(p, c)) for c in columns])
    return rows


def write_sweep_csv(path, result: SweepResult, kind):
    text = "".join(",".join(row) + "\n" for row in sweep_rows(result, kind))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
