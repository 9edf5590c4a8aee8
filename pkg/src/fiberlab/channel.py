"""Forward model: WDM transmit waveform, fine-step SSFM over the amplified link,
coherent receiver front end producing per-channel 2-SpS waveforms.

Forward split-step: per dz, nonlinear phase rotation u*exp(-i*gamma*dz*|u|^2),
then the linear step exp(-alpha/2*dz - i*beta2*omega^2/2*dz) in the spectral
domain. With this ordering the Alg.-style backpropagation (inverse dispersion
first, then inverse nonlinear) telescopes against the forward chain exactly.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy import fft as sfft

from .core import PLANCK, FiberParams, TaskInfo, Waveform
from .constellation import SymbolFrame
from .signal import central_convolve, frequency_shift, resample_decimate, rrc_taps

RRC_ROLLOFF = 0.1
# Span sized so the truncated-RRC cascade's symbol-sampled ISI stays below 1e-3
# relative (rolloff 0.1 tails decay slowly; 32 symbols would leave ~6e-3).
RRC_SPAN_SYMBOLS = 128


@dataclasses.dataclass(frozen=True)
class SimStepPlan:
    """Simulation resolution: transmit oversampling and per-span step size."""

    sps_tx: int
    dz_m: float
    n_steps_per_span: int

    def __post_init__(self) -> None:
        if self.sps_tx < 2 or self.sps_tx & (self.sps_tx - 1):
            raise ValueError("sps_tx must be a power of two >= 2")
        if not (self.dz_m > 0):
            raise ValueError("dz_m must be positive")

    def validate_against(self, params: FiberParams) -> None:
        if abs(self.n_steps_per_span * self.dz_m - params.span_length_m) > 1e-9 * params.span_length_m:
            raise ValueError("n_steps_per_span * dz_m must equal the span length")

    @classmethod
    def create(cls, params: FiberParams, task: TaskInfo, phi_max: float = 1e-3,
               min_steps_per_span: int = 50,
               max_steps_per_span: int | None = None) -> "SimStepPlan":
        """Plan from choose_sps/choose_dz; steps per span clamped to
        [min_steps_per_span, max_steps_per_span] for desk-scale runtime."""
        sps = choose_sps(task)
        dz = choose_dz(params, task, phi_max)
        steps = max(min_steps_per_span, int(np.ceil(params.span_length_m / dz)))
        if max_steps_per_span is not None:
            steps = min(steps, max_steps_per_span)
        return cls(sps, params.span_length_m / steps, steps)


@dataclasses.dataclass(frozen=True)
class LinkOutput:
    """Received center-channel waveform at 2 SpS plus the ground truth."""

    rx_waveform: Waveform
    tx_symbols: SymbolFrame
    task: TaskInfo
    seed: int

    def __post_init__(self) -> None:
        if len(self.rx_waveform) != 2 * self.tx_symbols.n_symbols:
            raise ValueError("rx waveform must be 2 samples per symbol")


def choose_sps(task: TaskInfo) -> int:
    """Transmit oversampling 2^(ceil(log2(N_ch*df/R_s))+1), sampling-theorem safe."""
    ratio = task.n_channels * task.channel_spacing_hz / task.symbol_rate_baud
    return 2 ** (int(np.ceil(np.log2(ratio) - 1e-12)) + 1)


def choose_dz(params: FiberParams, task: TaskInfo, phi_max: float = 1e-3) -> float:
    """Step size: min of a nonlinear-phase bound phi_max/(gamma*P_s), a
    dispersive-phase bound 2*phi_max/(|beta2|*(2*pi*B_w)^2), and span/50."""
    if not (phi_max > 0):
        raise ValueError("phi_max must be positive")
    candidates = [params.span_length_m / 50.0]
    nl = params.gamma_per_w_m * task.total_power_watts
    if nl > 0:
        candidates.append(phi_max / nl)
    disp = abs(params.beta2_s2_per_m) * (2.0 * np.pi * task.aggregate_bandwidth_hz) ** 2
    if disp > 0:
        candidates.append(2.0 * phi_max / disp)
    return min(candidates)


def build_tx_waveform(frame: SymbolFrame, task: TaskInfo, sps: int,
                      rolloff: float = RRC_ROLLOFF,
                      span_symbols: int = RRC_SPAN_SYMBOLS) -> Waveform:
    """RRC-shaped, power-scaled, frequency-stacked WDM transmit waveform.

    Channel k (k = -M..M) is shifted to k*channel_spacing and scaled so its
    average power is the per-channel launch power. F_s = sps * R_s.
    """
    fs = sps * task.symbol_rate_baud
    if task.aggregate_bandwidth_hz > fs:
        raise ValueError("aggregate WDM bandwidth exceeds the simulation rate")
    taps = rrc_taps(rolloff, span_symbols, sps)
    m = task.n_channels // 2
    p_chan = task.power_watts_per_channel
    scale = math.sqrt(p_chan * sps)
    total = np.zeros(frame.n_symbols * sps, dtype=np.complex128)
    for ch, symbols in enumerate(frame.channels):
        up = np.zeros(len(symbols) * sps, dtype=np.complex128)
        up[::sps] = symbols
        shaped = central_convolve(up, taps) * scale
        k = ch - m
        if k != 0:
            n = np.arange(len(shaped))
            shaped = shaped * np.exp(2j * np.pi * k * task.channel_spacing_hz / fs * n)
        total += shaped
    return Waveform(total, fs)


def ssfm_span(w: Waveform, params: FiberParams, plan: SimStepPlan) -> Waveform:
    """One span of forward split-step propagation (no amplification)."""
    plan.validate_against(params)
    n = len(w)
    wgrid = 2.0 * np.pi * w.sample_rate_hz * sfft.fftfreq(n)
    dz = plan.dz_m
    lin = np.exp(-0.5 * params.alpha_per_m * dz - 0.5j * params.beta2_s2_per_m * wgrid**2 * dz)
    gdz = params.gamma_per_w_m * dz
    u = w.samples.copy()
    for _ in range(plan.n_steps_per_span):
        phi = gdz * (u.real**2 + u.imag**2)
        u *= np.cos(phi) - 1j * np.sin(phi)
        u = sfft.ifft(sfft.fft(u, overwrite_x=True) * lin, overwrite_x=True)
    return w.with_samples(u)


def inverse_ssfm_span(w: Waveform, params: FiberParams, plan: SimStepPlan) -> Waveform:
    """Exact inverse of ssfm_span: reversed operator order, negated dz."""
    plan.validate_against(params)
    n = len(w)
    wgrid = 2.0 * np.pi * w.sample_rate_hz * sfft.fftfreq(n)
    dz = plan.dz_m
    lin = np.exp(+0.5 * params.alpha_per_m * dz + 0.5j * params.beta2_s2_per_m * wgrid**2 * dz)
    gdz = params.gamma_per_w_m * dz
    u = w.samples.copy()
    for _ in range(plan.n_steps_per_span):
        u = sfft.ifft(sfft.fft(u, overwrite_x=True) * lin, overwrite_x=True)
        phi = gdz * (u.real**2 + u.imag**2)
        u *= np.cos(phi) + 1j * np.sin(phi)
    return w.with_samples(u)


def edfa_amplify(w: Waveform, gain_db: float, nf_db: float | None, carrier_hz: float,
                 rng: np.random.Generator | None) -> Waveform:
    """Flat gain plus circular complex ASE.

    Total added noise power over the simulation band is
    P_ase = (G-1)*h*nu*(NF_lin/2)*F_s, split equally between real and
    imaginary parts. nf_db=None or rng=None disables the noise.
    """
    if gain_db < 0:
        raise ValueError("gain_db must be >= 0")
    g_lin = 10.0 ** (gain_db / 10.0)
    out = w.samples * math.sqrt(g_lin)
    if nf_db is not None and rng is not None:
        nf_lin = 10.0 ** (nf_db / 10.0)
        p_ase = (g_lin - 1.0) * PLANCK * carrier_hz * (nf_lin / 2.0) * w.sample_rate_hz
        sigma = math.sqrt(p_ase / 2.0)
        out = out + sigma * (rng.standard_normal(len(w)) + 1j * rng.standard_normal(len(w)))
    return w.with_samples(out)


def receiver_frontend(w: Waveform, task: TaskInfo, channel: int = 0,
                      rolloff: float = RRC_ROLLOFF,
                      span_symbols: int = RRC_SPAN_SYMBOLS,
                      out_sps: int = 2) -> Waveform:
    """Demultiplex one channel: shift to baseband, matched RRC filter, decimate.

    channel is the WDM offset index (0 = center). The matched filter is
    normalized to unit passband gain so the output keeps the channel's physical
    power scale (the backpropagation stage reads launch power off |u|^2); with
    unit-energy taps the passband power gain would be ~1/band-occupancy.
    Decimation keeps phase 0, which is symbol-center aligned for waveforms
    built by build_tx_waveform.
    """
    sps = int(round(w.sample_rate_hz / task.symbol_rate_baud))
    if sps % out_sps:
        raise ValueError("simulation sps must be divisible by the output sps")
    base = frequency_shift(w, -channel * task.channel_spacing_hz) if channel else w
    taps = rrc_taps(rolloff, span_symbols, sps)
    taps = taps / np.sum(taps)
    filtered = base.with_samples(central_convolve(base.samples, taps))
    return resample_decimate(filtered, sps // out_sps, 0)


def propagate_link(frame: SymbolFrame, task: TaskInfo, params: FiberParams,
                   plan: SimStepPlan, rng: np.random.Generator | None,
                   noise: bool = True) -> LinkOutput:
    """Transmit, propagate through n_spans of fiber+EDFA, receive the center channel."""
    w = build_tx_waveform(frame, task, plan.sps_tx)
    nf = params.noise_figure_db if noise else None
    for _ in range(params.n_spans):
        w = ssfm_span(w, params, plan)
        w = edfa_amplify(w, params.span_gain_db, nf, params.carrier_freq_hz, rng if noise else None)
    rx = receiver_frontend(w, task)
    return LinkOutput(rx, frame, task, frame.seed)
