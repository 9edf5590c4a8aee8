"""Closed-form per-symbol complexity (RMPS, real multiplications per symbol).

FFT sizes are restricted to powers of two (the log2-based cost model presumes
radix-2); minimizations search N in {2^1 .. 2^26}.
"""

from __future__ import annotations

import dataclasses
import math

_N_MAX_EXP = 26


@dataclasses.dataclass(frozen=True)
class ComplexityReport:
    method: str
    rmps: float
    params: dict


def _pow2_candidates(min_exclusive: float):
    for e in range(1, _N_MAX_EXP + 1):
        n = 1 << e
        if n > min_exclusive:
            yield n


def rmps_ddlms(taps: int) -> float:
    """4 real mults per complex mult, 2*(taps+1) complex mults per symbol."""
    if taps < 1:
        raise ValueError("taps must be >= 1")
    return 4.0 * 2.0 * (taps + 1)


def rmps_edc(n_d: int) -> tuple[float, int]:
    """Overlap-save EDC cost: min over power-of-two N of 8*N*log2(N)/(N-N_d+1).

    Returns (minimum, argmin N). The search floor is N=2.
    """
    if n_d < 1:
        raise ValueError("n_d must be >= 1")
    best = None
    for n in _pow2_candidates(n_d - 1):
        cost = 8.0 * n * math.log2(n) / (n - n_d + 1)
        if best is None or cost < best[0]:
            best = (cost, n)
    if best is None:
        raise ValueError("no feasible FFT size up to 2^26")
    return best


def rmps_dbp(n_span: int, n_stps: float, n_d: int) -> tuple[float, int]:
    """DBP cost with N_span*N_stps steps, per-step kernel about N_d/steps long."""
    steps = n_span * n_stps
    if steps < 1:
        raise ValueError("n_span*n_stps must be >= 1")
    kernel = n_d / steps
    best = None
    for n in _pow2_candidates(kernel - 1):
        cost = 4.0 * steps * (2.0 * n * (math.log2(n) + 1) / (n - kernel + 1) + 2.0)
        if best is None or cost < best[0]:
            best = (cost, n)
    if best is None:
        raise ValueError("no feasible FFT size up to 2^26")
    return best


def rmps_fdbp(n_span: int, n_stps: float, n_d: int, n_f: int) -> tuple[float, tuple[int, int]]:
    """Filtered-DBP cost; the dispersion and nonlinear-filter convolutions are
    minimized over independent power-of-two FFT sizes."""
    steps = n_span * n_stps
    if steps < 1:
        raise ValueError("n_span*n_stps must be >= 1")
    if n_f < 1:
        raise ValueError("n_f must be >= 1")
    kernel = n_d / steps
    best_d = None
    for n in _pow2_candidates(kernel - 1):
        cost = 2.0 * n * (math.log2(n) + 1) / (n - kernel + 1)
        if best_d is None or cost < best_d[0]:
            best_d = (cost, n)
    best_f = None
    for n in _pow2_candidates(n_f - 1):
        cost = 2.0 * n * (math.log2(n) + 1) / (n - n_f + 1)
        if best_f is None or cost < best_f[0]:
            best_f = (cost, n)
    total = 4.0 * steps * (best_d[0] + best_f[0])
    return total, (best_d[1], best_f[1])


def rmps_meta_dbp(n_span: int, n_stps: float, n_d: int, n_f: int) -> tuple[float, tuple[int, int]]:
    """The hypernetwork runs once per task, so Meta-DBP's per-symbol cost equals FDBP's."""
    return rmps_fdbp(n_span, n_stps, n_d, n_f)


def rmps_meta_adf(taps: int, h: int = 1, h_i: int = 2, depth: int = 2) -> float:
    """EGRU-driven ADF cost: 4*(H_i*H + 3*L*(2*H^2+H))*(taps+1)."""
    if taps < 1:
        raise ValueError("taps must be >= 1")
    return 4.0 * (h_i * h + 3.0 * depth * (2.0 * h * h + h)) * (taps + 1)


def rmps_meta_dsp(n_span: int, n_stps: float, n_d: int, n_f: int, taps: int,
                  h: int = 1, h_i: int = 2, depth: int = 2) -> float:
    fdbp, _ = rmps_fdbp(n_span, n_stps, n_d, n_f)
    return fdbp + rmps_meta_adf(taps, h, h_i, depth)
