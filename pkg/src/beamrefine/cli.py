"""
Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 estimation failure.
"""

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from . import array_geometry as geom
from .config import load_config
from .errors import ConfigError, EstimationError
from .estimator import estimate_state, write_pseudospectrum
from .experiments import run_sweep, sweep_rows
from .metrics import noise_for_snr_bbf, spectral_efficiency, undb
from .ofdm_link import generate_symbols, radar_snapshots_single, validate_timing, write_snapshots

EXIT_OK, EXIT_USAGE, EXIT_ESTIMATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(parser):
    parser.add_argument("-c", "--config", help="key=value configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    parser.add_argument("--seed", type=int, help="random seed (overrides sweep.seed)")
    parser.add_argument("--out", help="output path (default: stdout)")


def build_parser():
    parser = _Parser(prog="beamrefine", description="OFDM beam refinement and user state acquisition simulator")
    sub = parser.add_subparsers(dest="command", metavar="{refine,sweep,slepian-dump,snapshots}", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("refine", help="run one seeded end-to-end refinement trial and print a report")
    _common(p)
    p.add_argument("--spectrum-out", help="also write the MUSIC pseudospectrum CSV here")

    p = sub.add_parser("sweep", help="Monte-Carlo sweep over SNR and angle error, CSV output")
    _common(p)
    p.add_argument("--kind", choices=("se", "rmse"), required=True)

    p = sub.add_parser("slepian-dump", help="beam patterns of the Slepian filter bank as CSV")
    _common(p)

    p = sub.add_parser("snapshots", help="dump one synthesized radar snapshot grid")
    _common(p)
    p.add_argument("--format", choices=("bin", "csv"), default="bin")
    return parser


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _trial_setup(cfg, seed):
    rng = np.random.default_rng(seed)
    array, ofdm, state = cfg.array(), cfg.ofdm(), cfg.user()
    tx_phase, bs_phase = rng.uniform(0.0, 2 * np.pi, size=2)
    state = replace(state, tx_phase=tx_phase, bs_phase=bs_phase)
    snr_bbf = float(undb(cfg["trial.snr_bbf_db"]))
    noise = 0.0 if cfg["trial.noiseless"] else noise_for_snr_bbf(state, ofdm, snr_bbf)
    ofdm = replace(ofdm, noise_variance=noise)
    coarse = state.aod - math.radians(cfg["trial.epsilon_deg"])
    bank = geom.reduction_matrix(array, coarse)
    symbols = generate_symbols(ofdm, rng)[0]
    grid = radar_snapshots_single(state, bank, ofdm, symbols, rng)
    return array, ofdm, state, snr_bbf, bank, symbols, grid


def cmd_refine(args, cfg):
    seed = cfg["sweep.seed"] if args.seed is None else args.seed
    array, ofdm, state, snr_bbf, bank, symbols, grid = _trial_setup(cfg, seed)
    lines = [f"seed                 : {seed}"]
    timing = validate_timing(ofdm, [state])
    for v in timing.violations:
        lines.append(f"warning              : {v}")
    try:
        est = estimate_state(grid, bank, symbols, ofdm, n_points=cfg["sweep.music_points"])
    except EstimationError as exc:
        _emit("\n".join(lines) + f"\nestimation failed    : {exc}\n", args.out)
        return EXIT_ESTIMATION
    if args.spectrum_out:
        write_pseudospectrum(args.spectrum_out, est.music)

    def se(pointed):
        gt2 = abs(geom.array_gain(state.aod, pointed, array.n_antennas)) ** 2
        return float(spectral_efficiency(snr_bbf * gt2 * cfg["link.rx_gain_sq"]))

    lines += [
        f"true angle  [deg]    : {math.degrees(state.aod):.6f}",
        f"coarse angle [deg]   : {math.degrees(bank.pointed_angle):.6f}",
        f"refined angle [deg]  : {math.degrees(est.angle):.6f}",
        f"angle error [deg]    : {math.degrees(est.angle - state.aod):.6f}",
        f"range [m]            : {est.range:.6f} (true {state.range:g})",
        f"velocity [m/s]       : {est.velocity:.6f} (true {state.speed:g})",
        f"SE unrefined [b/s/Hz]: {se(bank.pointed_angle):.6f}",
        f"SE refined [b/s/Hz]  : {se(est.angle):.6f}",
    ]
    if est.flagged:
        lines.append("estimation failed    : MUSIC peak on the scan boundary")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_ESTIMATION if est.flagged else EXIT_OK


def cmd_sweep(args, cfg):
    spec = cfg.sweep(seed=args.seed)
    result = run_sweep(spec, workers=cfg["sweep.workers"])
    text = "".join(",".join(row) + "\n" for row in sweep_rows(result, args.kind))
    _emit(text, args.out)
    return EXIT_OK


def slepian_dump_rows(array):
    angles_deg = np.arange(-90, 91)
    pattern = geom.beam_pattern(geom.slepian_bank(array), np.radians(angles_deg))
    pattern_db = 10.0 * np.log10(np.maximum(pattern, 1e-300))
    rows = [["angle_deg"] + [f"psi{i + 1}_db" for i in range(array.n_rf)]]
    for k, ang in enumerate(angles_deg):
        rows.append([str(ang)] + [f"{v:.10g}" for v in pattern_db[:, k]])
    return rows


def cmd_slepian_dump(args, cfg):
    text = "".join(",".join(row) + "\n" for row in slepian_dump_rows(cfg.array()))
    _emit(text, args.out)
    return EXIT_OK


def cmd_snapshots(args, cfg):
    if args.out is None:
        raise ConfigError("snapshots needs --out")
    seed = cfg["sweep.seed"] if args.seed is None else args.seed
    grid = _trial_setup(cfg, seed)[-1]
    write_snapshots(args.out, grid, fmt=args.format)
    return EXIT_OK


COMMANDS = {
    "refine": cmd_refine,
    "sweep": cmd_sweep,
    "slepian-dump": cmd_slepian_dump,
    "snapshots": cmd_snapshots,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"beamrefine: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"beamrefine: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
