"""Declarative experiment configuration.

One INI-style file with flat key=value sections drives simulation and
analysis; CLI flags override file values.  Parsing either succeeds with a
fully validated `ExperimentConfig` or fails with a field-precise
`ConfigError` naming the section and key.  Emit/parse round-trips are
identity (floats are written with repr precision).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from . import modes as _modes
from . import states as _states
from .errors import ConfigError
from .simulate import DetectorModel, PulseTrainConfig, StationaryThermalConfig

__all__ = ["ExperimentConfig"]


def _opt_float(text):
    return None if text.strip().lower() == "none" else float(text)


def _opt_str(text):
    return None if text.strip().lower() == "none" else text.strip()


# (section, key) -> (attribute, parser)
_SCHEMA = {
    ("run", "kind"): ("kind", str.strip),
    ("run", "seed"): ("seed", int),
    ("run", "workers"): ("workers", int),
    ("state", "spec"): ("state_spec", str.strip),
    ("mode", "spec"): ("mode_spec", str.strip),
    ("detector", "efficiency"): ("efficiency", float),
    ("detector", "timing_jitter_sigma"): ("timing_jitter_sigma", float),
    ("detector", "dead_time"): ("dead_time", float),
    ("pulsed", "num_pulses"): ("num_pulses", lambda s: int(float(s))),
    ("pulsed", "repetition_period"): ("repetition_period", float),
    ("stationary", "mean_rate"): ("mean_rate", float),
    ("stationary", "spectral_bandwidth"): ("spectral_bandwidth", float),
    ("stationary", "duration"): ("duration", float),
    ("stationary", "field_timestep"): ("field_timestep", _opt_float),
    ("stationary", "spectral_shape"): ("spectral_shape", str.strip),
    ("estimator", "bin_width"): ("bin_width", _opt_float),
    ("estimator", "max_tau"): ("max_tau", _opt_float),
    ("estimator", "scope"): ("scope", str.strip),
    ("output", "stream"): ("out_stream", str.strip),
    ("output", "sidecar"): ("out_sidecar", _opt_str),
    ("output", "report"): ("out_report", str.strip),
    ("output", "histogram"): ("out_histogram", _opt_str),
    ("output", "format"): ("stream_format", str.strip),
}

_ATTR_TO_KEY = {attr: sk for sk, (attr, _) in _SCHEMA.items()}


@dataclass
class ExperimentConfig:
    kind: str = "pulsed"
    seed: int = 1
    workers: int = 1
    state_spec: str = "coherent:1"
    mode_spec: str = "gauss:1e-9"
    efficiency: float = 1.0
    timing_jitter_sigma: float = 0.0
    dead_time: float = 0.0
    num_pulses: int = 100000
    repetition_period: float = 12.5e-9
    mean_rate: float = 1e5
    spectral_bandwidth: float = 1e6
    duration: float = 1.0
    field_timestep: float | None = None
    spectral_shape: str = "gaussian"
    bin_width: float | None = None
    max_tau: float | None = None
    scope: str = "same_pulse"
    out_stream: str = "stream.csv"
    out_sidecar: str | None = None
    out_report: str = "report.json"
    out_histogram: str | None = "histogram.csv"
    stream_format: str = "csv"

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        cfg = cls()
        for section in parser.sections():
            for key, raw in parser.items(section):
                entry = _SCHEMA.get((section, key))
                if entry is None:
                    raise ConfigError(f"[{section}] {key}: unknown key")
                attr, parse = entry
                try:
                    setattr(cfg, attr, parse(raw))
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
        cfg.validate()
        return cfg

    def to_file(self, path) -> None:
        parser = configparser.ConfigParser()
        for (section, key), (attr, _) in _SCHEMA.items():
            if not parser.has_section(section):
                parser.add_section(section)
            value = getattr(self, attr)
            parser.set(section, key, "none" if value is None else repr(value)
                       if isinstance(value, float) else str(value))
        with open(path, "w") as fh:
            parser.write(fh)

    def apply_overrides(self, **overrides) -> "ExperimentConfig":
        for attr, value in overrides.items():
            if value is None:
                continue
            if attr not in _ATTR_TO_KEY:
                raise ConfigError(f"unknown config attribute {attr!r}")
            setattr(self, attr, value)
        self.validate()
        return self

    def validate(self) -> None:
        if self.kind not in ("pulsed", "stationary"):
            raise ConfigError("[run] kind: must be 'pulsed' or 'stationary'")
        if self.workers < 1:
            raise ConfigError("[run] workers: must be >= 1")
        if self.stream_format not in ("csv", "binary"):
            raise ConfigError("[output] format: must be 'csv' or 'binary'")
        if self.scope not in ("same_pulse", "all_pairs", "all_pairs_within_max_tau"):
            raise ConfigError("[estimator] scope: unknown scope")
        # build every module-level object so bad values fail at load time
        self.state()
        self.mode()
        self.detector()
        if self.kind == "pulsed":
            self.train()
        else:
            self.stationary()

    def state(self) -> _states.QuantumState:
        try:
            return _states.parse_state_spec(self.state_spec)
        except (ValueError, OSError) as exc:
            raise ConfigError(f"[state] spec: {exc}") from exc

    def mode(self) -> _modes.TemporalMode:
        try:
            return _modes.parse_mode_spec(self.mode_spec)
        except (ValueError, OSError) as exc:
            raise ConfigError(f"[mode] spec: {exc}") from exc

    def detector(self) -> DetectorModel:
        try:
            return DetectorModel(self.efficiency, self.timing_jitter_sigma,
                                 self.dead_time)
        except ValueError as exc:
            raise ConfigError(f"[detector]: {exc}") from exc

    def train(self) -> PulseTrainConfig:
        try:
            return PulseTrainConfig(self.num_pulses, self.repetition_period,
                                    self.mode())
        except ValueError as exc:
            raise ConfigError(f"[pulsed]: {exc}") from exc

    def stationary(self) -> StationaryThermalConfig:
        try:
            return StationaryThermalConfig(self.mean_rate, self.spectral_bandwidth,
                                           self.duration, self.field_timestep,
                                           self.spectral_shape)
        except ValueError as exc:
            raise ConfigError(f"[stationary]: {exc}") from exc
