"""Classical receiver compensation: EDC, digital backpropagation, filtered DBP.

All compensators are length- and sample-rate-preserving and operate on 2-SpS
waveforms in the receiver pipeline. dbp/fdbp apply their inverse dispersion
steps as whole-signal spectral multiplies; edc additionally offers a streaming
FIR mode (time-domain kernel + overlap-save blocks).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .core import FiberParams, Waveform
from .signal import angular_freq_grid, central_convolve, overlap_save_convolve


@dataclasses.dataclass(frozen=True)
class DispersionKernel:
    """Time-domain dispersion operator taps (odd length, zero-delay centered)."""

    taps: np.ndarray
    dz_m: float
    sample_rate_hz: float


@dataclasses.dataclass(frozen=True)
class DbpConfig:
    """Backpropagation resolution: steps per span, may be fractional (e.g. 0.2).

    include_attenuation=True selects the exact-inverse mode: the linear step
    restores attenuation (sign-reversed alpha), span gains are divided out, and
    the nonlinear phase uses plain gamma*dz. The default mode keeps the
    waveform at span-input power and weights the nonlinear phase by the
    span-profile effective length of each step.
    """

    steps_per_span: float = 1.0
    include_attenuation: bool = False


def kernel_length(dz_m: float, beta2_s2_per_m: float, sample_rate_hz: float) -> int:
    """Smallest odd integer >= ceil(2*pi*|dz|*|beta2|*F_s^2); at least 1."""
    raw = 2.0 * np.pi * abs(dz_m) * abs(beta2_s2_per_m) * sample_rate_hz**2
    n = max(1, int(np.ceil(raw)))
    return n if n % 2 == 1 else n + 1


def dispersion_kernel(dz_m: float, beta2_s2_per_m: float, sample_rate_hz: float,
                      n_taps: int | None = None) -> DispersionKernel:
    """FIR taps for exp(-i*beta2*omega^2*dz/2), sampled on the length-N_d FFT grid.

    The inverse transform is rolled so the zero-delay tap sits at the center;
    'same'-aligned convolution is then delay-free. Unit tap energy by Parseval.
    """
    n = n_taps if n_taps is not None else kernel_length(dz_m, beta2_s2_per_m, sample_rate_hz)
    if n % 2 != 1:
        raise ValueError("n_taps must be odd")
    w = angular_freq_grid(n, sample_rate_hz)
    taps = np.fft.fftshift(np.fft.ifft(np.exp(-0.5j * beta2_s2_per_m * w**2 * dz_m)))
    return DispersionKernel(taps, dz_m, sample_rate_hz)


def _dispersion_response(n: int, sample_rate_hz: float, beta2: float, dz_m: float,
                         alpha_half_dz: float = 0.0) -> np.ndarray:
    w = angular_freq_grid(n, sample_rate_hz)
    return np.exp(-alpha_half_dz - 0.5j * beta2 * w**2 * dz_m)


def edc(w: Waveform, params: FiberParams, link_length_m: float | None = None, *,
        taps: int | None = None, block_size: int | None = None) -> Waveform:
    """Electronic dispersion compensation: applies exp(+i*beta2*omega^2*L/2).

    Default path multiplies the whole-signal spectrum by the exact response.
    Passing taps and/or block_size selects the streaming FIR mode: the
    time-domain kernel (dispersion_kernel with sign-reversed dz) applied by
    direct or overlap-save block convolution; the two FIR execution paths
    compute the identical linear convolution.
    """
    length = params.total_length_m if link_length_m is None else link_length_m
    if length == 0.0:
        return w
    beta2 = params.beta2_s2_per_m
    if taps is None and block_size is None:
        resp = _dispersion_response(len(w), w.sample_rate_hz, beta2, -length)
        return w.with_samples(np.fft.ifft(np.fft.fft(w.samples) * resp))
    n_taps = taps if taps is not None else kernel_length(length, beta2, w.sample_rate_hz)
    kern = dispersion_kernel(-length, beta2, w.sample_rate_hz, n_taps)
    if block_size is None:
        out = central_convolve(w.samples, kern.taps)
    else:
        out = overlap_save_convolve(w.samples, kern.taps, block_size)
    return w.with_samples(out)


def _resolve_steps(params: FiberParams, cfg: DbpConfig) -> int:
    total = cfg.steps_per_span * params.n_spans
    steps = int(round(total))
    if steps < 1 or abs(total - steps) > 1e-9:
        raise ValueError("steps_per_span * n_spans must round to an integer >= 1")
    if cfg.steps_per_span < 1.0:
        spans_per_step = 1.0 / cfg.steps_per_span
        if abs(spans_per_step - round(spans_per_step)) > 1e-9 or params.n_spans % round(spans_per_step):
            raise ValueError("fractional steps_per_span must divide n_spans evenly")
    return steps


def backward_effective_lengths(params: FiberParams, steps: int) -> np.ndarray:
    """Per-backward-step effective length, accumulated across the span profile.

    Step k (k=0 processes the link's final segment) covers forward positions
    [L-(k+1)*dz, L-k*dz]; each overlapped span contributes
    integral exp(-alpha*(z - span_start)) dz over the overlap.
    """
    alpha = params.alpha_per_m
    span = params.span_length_m
    total = params.total_length_m
    dz = total / steps
    out = np.empty(steps)
    for k in range(steps):
        a, b = total - (k + 1) * dz, total - k * dz
        first = int(np.floor(a / span + 1e-12))
        last = int(np.ceil(b / span - 1e-12))
        acc = 0.0
        for s in range(first, last):
            lo = max(a, s * span) - s * span
            hi = min(b, (s + 1) * span) - s * span
            if hi <= lo:
                continue
            if alpha == 0.0:
                acc += hi - lo
            else:
                acc += (math.exp(-alpha * lo) - math.exp(-alpha * hi)) / alpha
        out[k] = acc
    return out


def _dbp_loop(w: Waveform, params: FiberParams, cfg: DbpConfig, total_length_m: float,
              phase_fn) -> Waveform:
    """Shared DBP chassis. phase_fn(power_array, gamma_dz) -> nonlinear phase."""
    steps = _resolve_steps(params, cfg)
    dz = total_length_m / steps
    u = w.samples.copy()
    n = len(u)
    gamma = params.gamma_per_w_m
    if cfg.include_attenuation:
        if cfg.steps_per_span < 1.0 or abs(cfg.steps_per_span - round(cfg.steps_per_span)) > 1e-9:
            raise ValueError("include_attenuation requires an integer steps_per_span")
        per_span = int(round(cfg.steps_per_span))
        gain_amp = 10.0 ** (params.span_gain_db / 20.0)
        resp = _dispersion_response(n, w.sample_rate_hz, params.beta2_s2_per_m, -dz,
                                    alpha_half_dz=-0.5 * params.alpha_per_m * dz)
        for _ in range(params.n_spans):
            u /= gain_amp
            for _ in range(per_span):
                u = np.fft.ifft(np.fft.fft(u) * resp)
                u *= np.exp(1j * phase_fn(u.real**2 + u.imag**2, gamma * dz))
    else:
        eff = backward_effective_lengths(params, steps)
        resp = _dispersion_response(n, w.sample_rate_hz, params.beta2_s2_per_m, -dz)
        for k in range(steps):
            u = np.fft.ifft(np.fft.fft(u) * resp)
            u *= np.exp(1j * phase_fn(u.real**2 + u.imag**2, gamma * eff[k]))
    return w.with_samples(u)


def dbp(w: Waveform, params: FiberParams, cfg: DbpConfig,
        total_length_m: float | None = None) -> Waveform:
    """Digital backpropagation: per step, inverse dispersion then inverse
    nonlinear phase +gamma_eff*dz*|u|^2."""
    length = params.total_length_m if total_length_m is None else total_length_m
    return _dbp_loop(w, params, cfg, length, lambda p2, gdz: gdz * p2)


def fdbp(w: Waveform, params: FiberParams, cfg: DbpConfig, c: np.ndarray,
         total_length_m: float | None = None) -> Waveform:
    """Filtered DBP: the nonlinear phase uses the low-pass-filtered power
    (|u|^2 convolved with the odd-length kernel c, zero-padded, delay-free)."""
    c = np.asarray(c, dtype=np.float64)
    if len(c) % 2 != 1:
        raise ValueError("nonlinear kernel c must have odd length")
    length = params.total_length_m if total_length_m is None else total_length_m
    return _dbp_loop(w, params, cfg, length,
                     lambda p2, gdz: gdz * central_convolve(p2, c).real)
