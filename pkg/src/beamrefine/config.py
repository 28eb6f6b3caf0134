"""
Flat ``section.key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Every key has a default, unknown
or repeated keys are errors, and list values are comma separated. Angles are
in degrees and the RCS in dBsm at this boundary; everything is converted to
radians and m^2 when the model objects are built.
"""

import math
from dataclasses import dataclass, field
from typing import Dict

from .array_geometry import ArrayConfig
from .channel import UserState, dbsm_to_m2
from .errors import ConfigError
from .experiments import SweepSpec
from .ofdm_link import OfdmConfig, check_compatible


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _optional_float(text):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


def _float_list(text):
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    if not items:
        raise ValueError("empty list")
    return tuple(float(t) for t in items)


# key -> (parser, default)
SCHEMA = {
    "array.n_antennas": (_int, 64),
    "array.n_rf": (_int, 4),
    "array.beta": (_optional_float, None),
    "ofdm.n_symbols": (_int, 16),
    "ofdm.n_subcarriers": (_int, 512),
    "ofdm.subcarrier_spacing": (float, 1e6),
    "ofdm.cp_fraction": (float, 0.25),
    "ofdm.carrier_freq": (float, 60e9),
    "ofdm.tx_power": (float, 1.0),
    "ofdm.n_users": (_int, 4),
    "user.aod_deg": (float, 20.0),
    "user.aoa_deg": (float, 0.0),
    "user.range": (float, 40.0),
    "user.speed": (float, 20.0),
    "user.rcs_dbsm": (float, 20.0),
    "link.rx_gain_sq": (float, 4.0),
    "trial.epsilon_deg": (float, 1.0),
    "trial.snr_bbf_db": (float, -10.0),
    "trial.noiseless": (_bool, False),
    "sweep.snr_bbf_db": (_float_list, (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0)),
    "sweep.epsilons_deg": (_float_list, (0.5, 1.0, 1.5)),
    "sweep.n_trials": (_int, 1000),
    "sweep.seed": (_int, 0),
    "sweep.angle_span_deg": (float, 30.0),
    "sweep.oversampling": (_int, 4),
    "sweep.music_points": (_int, 401),
    "sweep.noiseless": (_bool, False),
    "sweep.workers": (_int, 1),
}


@dataclass
class RunConfig:
    values: Dict[str, object] = field(default_factory=lambda: {k: d for k, (_, d) in SCHEMA.items()})
    lines: Dict[str, int] = field(default_factory=dict)
    source: str = None

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key, text, line=None, source=None):
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line=line, source=source)
        parser, _ = SCHEMA[key]
        try:
            self.values[key] = parser(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line=line, source=source) from None
        if line is not None:
            self.lines[key] = line

    def _fail(self, keys, exc):
        if isinstance(exc, ConfigError):
            raise exc
        lines = [self.lines[k] for k in keys if k in self.lines]
        raise ConfigError(str(exc), line=min(lines) if lines else None, source=self.source) from None

    def array(self) -> ArrayConfig:
        keys = [k for k in SCHEMA if k.startswith("array.")]
        try:
            return ArrayConfig(self["array.n_antennas"], self["array.n_rf"], self["array.beta"])
        except ValueError as exc:
            self._fail(keys, exc)

    def ofdm(self) -> OfdmConfig:
        keys = [k for k in SCHEMA if k.startswith("ofdm.")]
        try:
            cfg = OfdmConfig(
                n_symbols=self["ofdm.n_symbols"],
                n_subcarriers=self["ofdm.n_subcarriers"],
                subcarrier_spacing=self["ofdm.subcarrier_spacing"],
                cp_fraction=self["ofdm.cp_fraction"],
                carrier_freq=self["ofdm.carrier_freq"],
                tx_power=self["ofdm.tx_power"],
                n_users=self["ofdm.n_users"],
            )
            check_compatible(cfg, self.array())
        except ValueError as exc:
            self._fail(keys, exc)
        return cfg

    def user(self) -> UserState:
        keys = [k for k in SCHEMA if k.startswith("user.")]
        try:
            return UserState(
                aod=math.radians(self["user.aod_deg"]),
                aoa=math.radians(self["user.aoa_deg"]),
                range=self["user.range"],
                speed=self["user.speed"],
                rcs=dbsm_to_m2(self["user.rcs_dbsm"]),
            )
        except ValueError as exc:
            self._fail(keys, exc)

    def sweep(self, seed=None) -> SweepSpec:
        keys = [k for k in SCHEMA if k.startswith("sweep.")]
        try:
            return SweepSpec(
                snr_bbf_db=self["sweep.snr_bbf_db"],
                epsilons_deg=self["sweep.epsilons_deg"],
                n_trials=self["sweep.n_trials"],
                seed=self["sweep.seed"] if seed is None else seed,
                array=self.array(),
                ofdm=self.ofdm(),
                user=self.user(),
                rx_gain_sq=self["link.rx_gain_sq"],
                angle_span_deg=self["sweep.angle_span_deg"],
                oversampling=self["sweep.oversampling"],
                music_points=self["sweep.music_points"],
                noiseless=self["sweep.noiseless"],
            )
        except ValueError as exc:
            self._fail(keys, exc)

    def validate(self):
        """Build every model object once so invariant violations surface at load time."""
        self.sweep()
        if self["sweep.workers"] < 1:
            self._fail(["sweep.workers"], ValueError("sweep.workers must be at least 1"))
        if not abs(self["trial.epsilon_deg"]) < 90:
            self._fail(["trial.epsilon_deg"], ValueError("trial.epsilon_deg must lie in (-90, 90)"))
        coarse = self["user.aod_deg"] - self["trial.epsilon_deg"]
        if abs(coarse) > 90:
            self._fail(["trial.epsilon_deg", "user.aod_deg"], ValueError("coarse angle leaves [-90, 90] deg"))
        return self


def parse_config_text(text, source=None) -> RunConfig:
    cfg = RunConfig(source=source)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno, source=source)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in cfg.lines:
            raise ConfigError(f"duplicate key {key!r} (first set on line {cfg.lines[key]})", line=lineno, source=source)
        cfg.set(key, value, line=lineno, source=source)
    return cfg


def load_config(path=None, overrides=()) -> RunConfig:
    """Read ``path`` (or start from defaults), apply ``key=value`` overrides, validate."""
    if path is None:
        cfg = RunConfig()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
        cfg = parse_config_text(text, source=str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value", source="--set")
        key, value = (s.strip() for s in item.split("=", 1))
        cfg.set(key, value, source="--set")
    return cfg.validate()


def render_config(cfg: RunConfig) -> str:
    """Serialize ``cfg`` back to the key=value format (round-trips through ``parse_config_text``)."""
    out = []
    for key in SCHEMA:
        value = cfg.values[key]
        if isinstance(value, tuple):
            text = ", ".join(f"{v:g}" for v in value)
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif value is None:
            text = "auto"
        else:
            text = repr(value) if isinstance(value, float) else str(value)
        out.append(f"{key} = {text}")
    return "\n".join(out) + "\n"


def default_config() -> RunConfig:
    """Default configuration (N=16, M=512, 1 MHz, 60 GHz, 64 antennas, 4 RF chains, 20 dBsm, |g_r|^2=4, 40 m)."""
    return RunConfig().validate()

