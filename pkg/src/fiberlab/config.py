"""Experiment configuration (YAML) and seed derivation.

All physical quantities carry explicit unit suffixes in their key names. Every
random stream is derived from the single root seed as SeedSequence([root,
purpose, *indices]); purposes: 1 = transmit symbols, 2 = ASE noise, 3 =
synthetic channels.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
import yaml

from .core import FiberParams, TaskInfo

PURPOSE_SYMBOLS = 1
PURPOSE_ASE = 2
PURPOSE_SYNTH = 3


class ConfigError(ValueError):
    """Invalid or unparsable experiment configuration."""


def derive_rng(root_seed: int, purpose: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([root_seed, purpose, *indices]))


def grid_seed(root_seed: int, grid_index: int) -> int:
    """Per-grid-point sub-seed, stable under grid reordering."""
    return int(np.random.SeedSequence([root_seed, 100, grid_index]).generate_state(1)[0])


@dataclasses.dataclass(frozen=True)
class GridConfig:
    powers_dbm: tuple[float, ...]
    symbol_rates_baud: tuple[float, ...]
    n_channels: tuple[int, ...]
    channel_spacing_hz: float | None = None  # None -> spacing_factor * R_s
    channel_spacing_factor: float = 1.2

    def spacing_for(self, symbol_rate: float) -> float:
        if self.channel_spacing_hz is not None:
            return self.channel_spacing_hz
        return self.channel_spacing_factor * symbol_rate

    def tasks(self) -> list[TaskInfo]:
        out = []
        for p in self.powers_dbm:
            for rs in self.symbol_rates_baud:
                for nch in self.n_channels:
                    out.append(TaskInfo(p, rs, nch, self.spacing_for(rs)))
        return out


@dataclasses.dataclass(frozen=True)
class SimConfig:
    n_symbols: int = 4000
    phi_max_rad: float = 1e-3
    min_steps_per_span: int = 50
    max_steps_per_span: int | None = 800
    noise: bool = True


@dataclasses.dataclass(frozen=True)
class DspConfig:
    method: str = "edc"
    steps_per_span: float = 1.0
    nl_kernel_taps: int = 401
    adf_taps: int = 32
    adf_stride: int = 2
    pilot_count: int = 200
    adf_optimizer: str = "lms"
    adf_eta: float = 2.0**-7
    adf_gamma0: float = 0.999
    adf_gamma1: float = 0.9
    adf_gamma2: float = 0.999
    adf_eps: float = 1e-8


@dataclasses.dataclass(frozen=True)
class TrainBlock:
    truncation_len: int = 200
    outer_lr: float = 1e-4
    epochs: int = 5
    hypernet_hidden: int = 100
    dbp_steps_per_span: float = 0.2


@dataclasses.dataclass(frozen=True)
class SeedsConfig:
    root: int = 1234
    train: int = 1
    test_a: int = 2
    test_b: int = 3


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    fiber: FiberParams
    grid: GridConfig
    sim: SimConfig
    dsp: DspConfig
    train: TrainBlock
    seeds: SeedsConfig

    @classmethod
    def desk_scale(cls) -> "ExperimentConfig":
        return cls(
            fiber=FiberParams(),
            grid=GridConfig(powers_dbm=(-2.0, 0.0), symbol_rates_baud=(20e9, 40e9),
                            n_channels=(1, 3)),
            sim=SimConfig(),
            dsp=DspConfig(),
            train=TrainBlock(),
            seeds=SeedsConfig(),
        )

    @classmethod
    def paper_scale(cls) -> "ExperimentConfig":
        return cls(
            fiber=FiberParams(),
            grid=GridConfig(powers_dbm=tuple(float(p) for p in range(-8, 7)),
                            symbol_rates_baud=(20e9, 40e9, 80e9, 160e9),
                            n_channels=(1, 3, 5, 7, 9, 11),
                            channel_spacing_hz=192e9),
            sim=SimConfig(n_symbols=100_000, max_steps_per_span=None),
            dsp=DspConfig(pilot_count=2000),
            train=TrainBlock(),
            seeds=SeedsConfig(),
        )


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ConfigError(f"missing key '{path}{key}'")
    return mapping[key]


def _block(doc: dict, name: str) -> dict:
    block = doc.get(name, {})
    if block is None:
        block = {}
    if not isinstance(block, dict):
        raise ConfigError(f"block '{name}' must be a mapping")
    return block


def load_config(path: str | Path, scale: str = "desk") -> ExperimentConfig:
    """Load a YAML config on top of desk- or paper-scale defaults.

    Unknown keys are rejected with the offending key path in the message; YAML
    syntax errors surface with the parser's line/column.
    """
    base = ExperimentConfig.paper_scale() if scale == "paper" else ExperimentConfig.desk_scale()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    known = {"fiber", "grid", "sim", "dsp", "train", "seeds"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown top-level key '{key}'")

    def coerce(value, like, where):
        # YAML 1.1 reads "2.0e10" as a string; coerce onto the default's type
        if like is None or value is None:
            return value
        try:
            if isinstance(like, bool):
                return bool(value)
            if isinstance(like, int):
                return int(value)
            if isinstance(like, float):
                return float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for '{where}': {value!r}") from exc
        return value

    def merge(cls, defaults, block: dict, path: str, fields: dict):
        kwargs = {}
        for key, value in block.items():
            if key not in fields:
                raise ConfigError(f"unknown key '{path}{key}'")
            kwargs[fields[key]] = coerce(value, getattr(defaults, fields[key]),
                                         f"{path}{key}")
        try:
            return dataclasses.replace(defaults, **kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value in '{path[:-1]}': {exc}") from exc

    fiber = merge(FiberParams, base.fiber, _block(doc, "fiber"), "fiber.", {
        "attenuation_db_per_km": "attenuation_db_per_km",
        "dispersion_ps_nm_km": "dispersion_ps_nm_km",
        "gamma_per_w_km": "gamma_per_w_km",
        "wavelength_nm": "wavelength_nm",
        "span_length_km": "span_length_km",
        "n_spans": "n_spans",
        "noise_figure_db": "noise_figure_db",
    })
    gblock = _block(doc, "grid")
    gkw = {}
    for key in gblock:
        if key not in {"powers_dbm", "symbol_rates_baud", "n_channels",
                       "channel_spacing_hz", "channel_spacing_factor"}:
            raise ConfigError(f"unknown key 'grid.{key}'")
    for key, kind in (("powers_dbm", float), ("symbol_rates_baud", float),
                      ("n_channels", int)):
        if key in gblock:
            value = gblock[key]
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(f"'grid.{key}' must be a nonempty list")
            try:
                gkw[key] = tuple(kind(v) for v in value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid value in 'grid.{key}'") from exc
    for key in ("channel_spacing_hz", "channel_spacing_factor"):
        if key in gblock and gblock[key] is not None:
            try:
                gkw[key] = float(gblock[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid value for 'grid.{key}'") from exc
    grid = dataclasses.replace(base.grid, **gkw)
    sim = merge(SimConfig, base.sim, _block(doc, "sim"), "sim.", {
        k: k for k in ("n_symbols", "phi_max_rad", "min_steps_per_span",
                       "max_steps_per_span", "noise")})
    dsp = merge(DspConfig, base.dsp, _block(doc, "dsp"), "dsp.", {
        k: k for k in ("method", "steps_per_span", "nl_kernel_taps", "adf_taps",
                       "adf_stride", "pilot_count", "adf_optimizer", "adf_eta",
                       "adf_gamma0", "adf_gamma1", "adf_gamma2", "adf_eps")})
    train = merge(TrainBlock, base.train, _block(doc, "train"), "train.", {
        k: k for k in ("truncation_len", "outer_lr", "epochs", "hypernet_hidden",
                       "dbp_steps_per_span")})
    seeds = merge(SeedsConfig, base.seeds, _block(doc, "seeds"), "seeds.", {
        k: k for k in ("root", "train", "test_a", "test_b")})
    try:
        grid.tasks()
    except ValueError as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc
    return ExperimentConfig(fiber, grid, sim, dsp, train, seeds)
