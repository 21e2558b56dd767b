"""Versioned JSON scenario configuration for the CLI.

A single human-editable document describes the link budget, fading
channel, harvester dataset and model, charging parameters, RFID
power-splitting parameters, numerics, and optional parameter sweeps.
Parsing is strict: unknown keys and out-of-range values raise
``ValidationError``, and parse -> serialize -> parse is the identity on
the normalized form.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import FadingChannel, LinkBudget
from .density import ChargingSpec
from .errors import ValidationError
from .rfid import RfidScenario

CONFIG_VERSION = 1

SPACING_CHOICES = ("datapoints", "linear", "db")
SCALE_CHOICES = ("linear", "log")


def _take(mapping: dict, section: str, fields: dict):
    """Pop known fields (applying defaults) and reject unknown keys."""
    if not isinstance(mapping, dict):
        raise ValidationError(f"section {section!r} must be an object")
    unknown = set(mapping) - set(fields)
    if unknown:
        raise ValidationError(f"unknown keys in {section!r}: {sorted(unknown)}")
    out = {}
    for name, default in fields.items():
        if name in mapping:
            out[name] = mapping[name]
        elif default is _REQUIRED:
            raise ValidationError(f"missing required key {section}.{name}")
        else:
            out[name] = default
    return out


_REQUIRED = object()


@dataclass(frozen=True)
class SweepSpec:
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise ValidationError("sweep count must be at least 1")
        if self.scale not in SCALE_CHOICES:
            raise ValidationError(f"sweep scale must be one of {SCALE_CHOICES}")
        if self.scale == "log" and (self.start <= 0.0 or self.stop <= 0.0):
            raise ValidationError("log sweeps need positive endpoints")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.asarray([self.start], dtype=float)
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class HarvesterConfig:
    dataset: str = "rectenna-A"
    efficiency_degree: int = 10
    segments: int = 585
    spacing: str = "db"
    eta_l: float = 0.204
    eta_cl: float = 0.204
    eta_clc: float = 0.204

    def __post_init__(self):
        if self.spacing not in SPACING_CHOICES:
            raise ValidationError(f"spacing must be one of {SPACING_CHOICES}")
        if self.segments < 1:
            raise ValidationError("segments must be at least 1")
        if self.efficiency_degree < 0:
            raise ValidationError("efficiency degree must be non-negative")


@dataclass(frozen=True)
class ChargingConfig:
    capacitance_uf: float = 10.0
    voltage_v: float = 1.8
    packet_duration_ms: float = 50.0
    coherence_time_ms: float = 50.0
    density_blocks: tuple = (1, 20, 50)

    def spec(self) -> ChargingSpec:
        return ChargingSpec(capacitance_f=self.capacitance_uf * 1e-6,
                            voltage_v=self.voltage_v,
                            packet_duration_s=self.packet_duration_ms * 1e-3)

    @property
    def coherence_time_s(self) -> float:
        return self.coherence_time_ms * 1e-3


@dataclass(frozen=True)
class NumericsConfig:
    grid_intervals: int = 1 << 16
    quadrature_rtol: float = 1e-8
    mc_trials: int = 1_000_000
    seed: int = 20260810
    chunk_size: int = 1 << 17
    workers: int = 1

    def __post_init__(self):
        for name in ("grid_intervals", "mc_trials", "seed", "chunk_size", "workers"):
            value = getattr(self, name)
            if not isinstance(value, int) or (value < 0 if name == "seed" else value < 1):
                raise ValidationError(f"numerics.{name} must be a positive integer")
        if not 0.0 < self.quadrature_rtol < 1e-2:
            raise ValidationError("quadrature_rtol must lie in (0, 1e-2)")


@dataclass(frozen=True)
class ScenarioConfig:
    link: dict = field(default_factory=dict)
    channel: dict = field(default_factory=dict)
    harvester: HarvesterConfig = field(default_factory=HarvesterConfig)
    charging: ChargingConfig = field(default_factory=ChargingConfig)
    rfid: dict = field(default_factory=dict)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    sweeps: dict = field(default_factory=dict)

    def link_budget(self, *, distance_m=None, transmit_power_mw=None) -> LinkBudget:
        params = dict(self.link)
        if distance_m is not None:
            params["distance_m"] = float(distance_m)
        if transmit_power_mw is not None:
            params["transmit_power_mw"] = float(transmit_power_mw)
        return LinkBudget(**params)

    def fading_channel(self) -> FadingChannel:
        return FadingChannel(**self.channel)

    def rfid_scenario(self, *, tag_consumption_mw=None) -> RfidScenario:
        params = dict(self.rfid)
        if tag_consumption_mw is not None:
            params["tag_consumption_mw"] = float(tag_consumption_mw)
        return RfidScenario(**params)

    def sweep(self, name: str) -> SweepSpec | None:
        return self.sweeps.get(name)


_LINK_FIELDS = {"transmit_power_mw": 1500.0, "distance_m": 5.0,
                "path_loss_exponent": 2.1, "wavelength_m": 0.3456,
                "reference_distance_m": 1.0}
_CHANNEL_FIELDS = {"nakagami_m": 5.0, "omega": 1.0}
_HARVESTER_FIELDS = {"dataset": "rectenna-A", "efficiency_degree": 10, "segments": 585,
                     "spacing": "db", "eta_l": 0.204, "eta_cl": 0.204, "eta_clc": 0.204}
_CHARGING_FIELDS = {"capacitance_uf": 10.0, "voltage_v": 1.8, "packet_duration_ms": 50.0,
                    "coherence_time_ms": 50.0, "density_blocks": (1, 20, 50)}
_RFID_FIELDS = {"absorb_fraction": 0.5, "harvest_split": 0.5, "backscatter_share": 0.01,
                "noise_var_mw": 1e-11, "ber_threshold": 1e-5, "tag_consumption_mw": 1e-4}
_NUMERICS_FIELDS = {"grid_intervals": 1 << 16, "quadrature_rtol": 1e-8,
                    "mc_trials": 1_000_000, "seed": 20260810, "chunk_size": 1 << 17,
                    "workers": 1}
_SWEEP_FIELDS = {"start": _REQUIRED, "stop": _REQUIRED, "count": _REQUIRED,
                 "scale": "linear"}
_TOP_LEVEL = ("version", "link", "channel", "harvester", "charging", "rfid",
              "numerics", "sweeps")

SWEEP_NAMES = ("distance_m", "transmit_power_dbm", "sensitivity_dbm", "tag_consumption_mw")


def config_from_dict(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(raw) - set(_TOP_LEVEL)
    if unknown:
        raise ValidationError(f"unknown top-level keys: {sorted(unknown)}")
    version = raw.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ValidationError(f"unsupported config version {version!r}")
    link = _take(raw.get("link", {}), "link", _LINK_FIELDS)
    chan = _take(raw.get("channel", {}), "channel", _CHANNEL_FIELDS)
    harvester = HarvesterConfig(**_take(raw.get("harvester", {}), "harvester",
                                        _HARVESTER_FIELDS))
    charging_raw = _take(raw.get("charging", {}), "charging", _CHARGING_FIELDS)
    charging_raw["density_blocks"] = tuple(int(n) for n in charging_raw["density_blocks"])
    charging = ChargingConfig(**charging_raw)
    rfid = _take(raw.get("rfid", {}), "rfid", _RFID_FIELDS)
    numerics = NumericsConfig(**_take(raw.get("numerics", {}), "numerics",
                                      _NUMERICS_FIELDS))
    sweeps_raw = raw.get("sweeps", {})
    if not isinstance(sweeps_raw, dict):
        raise ValidationError("sweeps must be an object")
    unknown_sweeps = set(sweeps_raw) - set(SWEEP_NAMES)
    if unknown_sweeps:
        raise ValidationError(f"unknown sweep parameters: {sorted(unknown_sweeps)}")
    sweeps = {name: SweepSpec(**_take(spec, f"sweeps.{name}", _SWEEP_FIELDS))
              for name, spec in sweeps_raw.items()}
    cfg = ScenarioConfig(link=link, channel=chan, harvester=harvester,
                         charging=charging, rfid=rfid, numerics=numerics, sweeps=sweeps)
    # Fail fast on invalid physical parameters.
    cfg.link_budget()
    cfg.fading_channel()
    cfg.rfid_scenario()
    cfg.charging.spec()
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "version": CONFIG_VERSION,
        "link": dict(cfg.link),
        "channel": dict(cfg.channel),
        "harvester": asdict(cfg.harvester),
        "charging": {**asdict(cfg.charging),
                     "density_blocks": list(cfg.charging.density_blocks)},
        "rfid": dict(cfg.rfid),
        "numerics": asdict(cfg.numerics),
        "sweeps": {name: asdict(spec) for name, spec in sorted(cfg.sweeps.items())},
    }


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON in {path}: {exc}") from exc
    return config_from_dict(raw)


def dump_config(cfg: ScenarioConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def default_config() -> ScenarioConfig:
    return config_from_dict({"version": CONFIG_VERSION})
