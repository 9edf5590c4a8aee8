"""Pure signal primitives: unit conversions, pulse shaping, spectral ops, convolution.

Transform convention used across the package: the forward spectral transform is the
unnormalized DFT (numpy fft), the inverse divides by N. The angular frequency grid for
a length-N waveform sampled at F_s is omega = 2*pi*F_s*fftfreq(N).
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .core import C_LIGHT, Waveform


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def watts_to_dbm(p_watts: float) -> float:
    return 10.0 * np.log10(p_watts / 1e-3)


def dispersion_to_beta2(dispersion_ps_nm_km: float, wavelength_nm: float) -> float:
    """Convert the dispersion parameter D (ps/nm/km) to beta2 in s^2/m.

    beta2 = -D * lambda^2 / (2*pi*c); negative for standard fiber in C band.
    """
    d_si = dispersion_ps_nm_km * 1e-6  # s/m^2
    lam = wavelength_nm * 1e-9
    return -d_si * lam**2 / (2.0 * np.pi * C_LIGHT)


def angular_freq_grid(n: int, sample_rate_hz: float) -> np.ndarray:
    return 2.0 * np.pi * sample_rate_hz * np.fft.fftfreq(n)


def rrc_taps(rolloff: float, span_symbols: int, sps: int) -> np.ndarray:
    """Root-raised-cosine taps, span_symbols*sps+1 long, unit energy.

    Transmit and matched receive filtering with these taps cascade to the
    raised-cosine end-to-end response.
    """
    if not (0.0 < rolloff <= 1.0):
        raise ValueError("rolloff must be in (0, 1]")
    if span_symbols < 2 or span_symbols % 2 != 0:
        raise ValueError("span_symbols must be even and >= 2")
    if sps < 2:
        raise ValueError("sps must be >= 2")
    n = span_symbols * sps + 1
    t = (np.arange(n) - (n - 1) / 2) / sps  # in symbol periods
    taps = np.empty(n, dtype=np.float64)
    b = rolloff
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            taps[i] = 1.0 - b + 4.0 * b / np.pi
        elif abs(abs(ti) - 1.0 / (4.0 * b)) < 1e-9:
            taps[i] = (b / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * b))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * b))
            )
        else:
            num = np.sin(np.pi * ti * (1.0 - b)) + 4.0 * b * ti * np.cos(np.pi * ti * (1.0 + b))
            den = np.pi * ti * (1.0 - (4.0 * b * ti) ** 2)
            taps[i] = num / den
    return taps / np.sqrt(np.sum(taps**2))


def frequency_shift(w: Waveform, df_hz: float) -> Waveform:
    """Multiply sample n by exp(i*2*pi*df*n/F_s); phase-only, magnitude preserved."""
    if df_hz == 0.0:
        return w
    n = np.arange(len(w))
    return w.with_samples(w.samples * np.exp(2j * np.pi * df_hz / w.sample_rate_hz * n))


def resample_decimate(w: Waveform, factor: int, phase: int = 0) -> Waveform:
    """Keep every factor-th sample starting at `phase`; no anti-alias filtering."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if not (0 <= phase < factor):
        raise ValueError("phase must satisfy 0 <= phase < factor")
    if len(w) % factor != 0:
        raise ValueError("waveform length must be divisible by factor")
    if factor == 1:
        return w
    return Waveform(w.samples[phase::factor], w.sample_rate_hz / factor)


def normalize_power(w: Waveform) -> tuple[Waveform, float]:
    """Rescale to unit average power; returns (waveform, applied scale)."""
    p = w.power()
    if p <= 0:
        raise ValueError("cannot normalize an all-zero waveform")
    scale = 1.0 / np.sqrt(p)
    return w.with_samples(w.samples * scale), scale


_DIRECT_CONV_MAX_TAPS = 1024


def overlap_save_convolve(x: np.ndarray, taps: np.ndarray, block_size: int | None = None) -> np.ndarray:
    """'same'-aligned linear convolution with an odd-length kernel via overlap-save.

    Zero-padded boundaries; the first/last (len(taps)-1)/2 output samples are
    edge-affected and should be trimmed by metrics. block_size selects the FFT
    length (power of two, > len(taps)); default picks a throughput-friendly size.
    """
    x = np.asarray(x)
    m = len(taps)
    if m % 2 != 1:
        raise ValueError("kernel length must be odd")
    half = (m - 1) // 2
    if block_size is None:
        block_size = 1 << max(int(np.ceil(np.log2(max(2 * m, 1024)))), 1)
    if block_size <= m - 1:
        raise ValueError("block_size must exceed len(taps)-1")
    n = len(x)
    step = block_size - (m - 1)
    xp = np.concatenate([np.zeros(m - 1, dtype=np.complex128), x.astype(np.complex128),
                         np.zeros(block_size, dtype=np.complex128)])
    h_f = sfft.fft(np.asarray(taps, dtype=np.complex128), block_size)
    out = np.empty(n + m - 1, dtype=np.complex128)
    pos = 0
    while pos < n + m - 1:
        block = xp[pos:pos + block_size]
        y = sfft.ifft(sfft.fft(block) * h_f)
        take = min(step, n + m - 1 - pos)
        out[pos:pos + take] = y[m - 1:m - 1 + take]
        pos += step
    return out[half:half + n]


def central_convolve(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """'same'-aligned linear convolution; direct for short kernels, overlap-save beyond.

    Both paths compute the identical FIR response (tested to 1e-10).
    """
    taps = np.asarray(taps)
    if len(taps) % 2 != 1:
        raise ValueError("kernel length must be odd")
    if len(taps) <= _DIRECT_CONV_MAX_TAPS:
        x = np.asarray(x)
        half = (len(taps) - 1) // 2
        return np.convolve(x, taps, mode="full")[half:half + len(x)]
    return overlap_save_convolve(x, taps)
