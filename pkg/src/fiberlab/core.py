"""Foundational types: complex baseband waveforms, fiber link constants, task descriptors.

All internal quantities are SI (meters, seconds, watts, hertz). dB and dBm appear
only at configuration boundaries.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

C_LIGHT = 299792458.0  # m/s
PLANCK = 6.62607015e-34  # J*s

_LN10 = math.log(10.0)


@dataclasses.dataclass(frozen=True)
class Waveform:
    """Uniformly sampled complex baseband signal.

    samples carry amplitudes in sqrt(W); sample_rate_hz is the simulation or
    receiver sampling rate F_s. Treated as immutable: operations return new
    instances.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("waveform needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform samples must be finite")
        if not (self.sample_rate_hz > 0):
            raise ValueError("sample_rate_hz must be positive")

    def __len__(self) -> int:
        return self.samples.size

    def with_samples(self, samples: np.ndarray) -> "Waveform":
        return Waveform(samples, self.sample_rate_hz)

    def power(self) -> float:
        """Mean |u|^2 in watts."""
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclasses.dataclass(frozen=True)
class FiberParams:
    """Physical constants of one amplified fiber link (Table-1 style)."""

    attenuation_db_per_km: float = 0.2
    dispersion_ps_nm_km: float = 16.5
    gamma_per_w_km: float = 1.31
    wavelength_nm: float = 1550.0
    span_length_km: float = 80.0
    n_spans: int = 25
    noise_figure_db: float = 4.5

    def __post_init__(self) -> None:
        for name in ("attenuation_db_per_km", "dispersion_ps_nm_km", "gamma_per_w_km",
                     "wavelength_nm", "span_length_km", "noise_figure_db"):
            if not (getattr(self, name) >= 0):
                raise ValueError(f"{name} must be nonnegative")
        if self.n_spans < 1:
            raise ValueError("n_spans must be >= 1")

    @property
    def alpha_per_m(self) -> float:
        """Power attenuation coefficient (nepers per meter): P(z) = P0*exp(-alpha*z)."""
        return self.attenuation_db_per_km * _LN10 / 10.0 / 1000.0

    @property
    def beta2_s2_per_m(self) -> float:
        from .signal import dispersion_to_beta2

        return dispersion_to_beta2(self.dispersion_ps_nm_km, self.wavelength_nm)

    @property
    def gamma_per_w_m(self) -> float:
        return self.gamma_per_w_km / 1000.0

    @property
    def span_length_m(self) -> float:
        return self.span_length_km * 1000.0

    @property
    def total_length_m(self) -> float:
        return self.span_length_m * self.n_spans

    @property
    def carrier_freq_hz(self) -> float:
        return C_LIGHT / (self.wavelength_nm * 1e-9)

    @property
    def span_gain_db(self) -> float:
        """EDFA gain that exactly cancels one span's loss."""
        return self.attenuation_db_per_km * self.span_length_km


@dataclasses.dataclass(frozen=True)
class TaskInfo:
    """Per-experiment modality: launch power, symbol rate, WDM layout."""

    power_dbm_per_channel: float
    symbol_rate_baud: float
    n_channels: int = 1
    channel_spacing_hz: float = 0.0

    def __post_init__(self) -> None:
        if self.n_channels < 1 or self.n_channels % 2 == 0:
            raise ValueError("n_channels must be odd and >= 1")
        if not (self.symbol_rate_baud > 0):
            raise ValueError("symbol_rate_baud must be positive")
        spacing = self.channel_spacing_hz or self.symbol_rate_baud
        object.__setattr__(self, "channel_spacing_hz", float(spacing))
        if self.channel_spacing_hz < self.symbol_rate_baud:
            raise ValueError("channel_spacing_hz must be >= symbol_rate_baud")

    @property
    def power_watts_per_channel(self) -> float:
        from .signal import dbm_to_watts

        return dbm_to_watts(self.power_dbm_per_channel)

    @property
    def total_power_watts(self) -> float:
        return self.n_channels * self.power_watts_per_channel

    @property
    def aggregate_bandwidth_hz(self) -> float:
        return self.n_channels * self.channel_spacing_hz
