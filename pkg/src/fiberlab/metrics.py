"""Signal quality metrics: BER by direct counting, Q-factor, effective SNR, MPQ."""

from __future__ import annotations

import dataclasses
import math

import numpy as np


@dataclasses.dataclass(frozen=True)
class QualityReport:
    ber: float
    q_db: float
    eff_snr_db: float
    n_bits_counted: int


def ber_count(decided_bits: np.ndarray, true_bits: np.ndarray) -> float:
    """Fraction of differing bits; symmetric in its arguments."""
    a = np.asarray(decided_bits).reshape(-1)
    b = np.asarray(true_bits).reshape(-1)
    if a.size != b.size:
        raise ValueError("bit streams must have equal length")
    if a.size == 0:
        raise ValueError("bit streams must be nonempty")
    return float(np.count_nonzero(a != b)) / a.size


def _norm_quantile(p: float) -> float:
    """Acklam's rational approximation of the standard normal quantile."""
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low, p_high = 0.02425, 1 - 0.02425
    if p < p_low:
        q = math.sqrt(-2 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)
    if p <= p_high:
        q = p - 0.5
        r = q * q
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1)
    q = math.sqrt(-2 * math.log(1 - p))
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)


def erfc_inv(y: float) -> float:
    """Inverse complementary error function on (0, 2).

    Rational initial guess (normal quantile) refined by Newton iterations on
    erfc(x) - y to below 1e-12 absolute.
    """
    if not (0.0 < y < 2.0):
        raise ValueError("erfc_inv domain is (0, 2)")
    # erfc(x) = y  <=>  x = -Phi^{-1}(y/2)/sqrt(2)
    x = -_norm_quantile(y / 2.0) / math.sqrt(2.0)
    for _ in range(60):
        f = math.erfc(x) - y
        df = -2.0 / math.sqrt(math.pi) * math.exp(-x * x)
        step = f / df
        x -= step
        if abs(step) < 1e-13 * max(1.0, abs(x)):
            break
    return x


def q_from_ber(ber: float) -> float:
    """Q-factor in dB: 20*log10(sqrt(2)*erfc_inv(2*ber)).

    Out-of-domain BER returns signed-infinity sentinels: +inf for ber <= 0
    (error-free at this sample size), -inf for ber >= 0.5.
    """
    if ber <= 0.0:
        return math.inf
    if ber >= 0.5:
        return -math.inf
    return 20.0 * math.log10(math.sqrt(2.0) * erfc_inv(2.0 * ber))


def effective_snr_db(y_hat: np.ndarray, y: np.ndarray) -> float:
    """10*log10(mean|y|^2 / mean|y_hat - y|^2); +inf when the error vanishes."""
    y_hat = np.asarray(y_hat)
    y = np.asarray(y)
    if y_hat.size != y.size:
        raise ValueError("sequences must have equal length")
    err = np.mean(np.abs(y_hat - y) ** 2)
    if err == 0.0:
        return math.inf
    return float(10.0 * np.log10(np.mean(np.abs(y) ** 2) / err))


def evm_percent(y_hat: np.ndarray, y: np.ndarray) -> float:
    """Error vector magnitude relative to the reference RMS, in percent."""
    y_hat = np.asarray(y_hat)
    y = np.asarray(y)
    return float(100.0 * np.sqrt(np.mean(np.abs(y_hat - y) ** 2) / np.mean(np.abs(y) ** 2)))


def mpq(q_grid: dict[tuple[float, float, int], float],
        cells: list[tuple[float, int]] | None = None) -> float:
    """Mean peak Q: per (R_s, N_ch) cell take the max over power, then average.

    q_grid maps (power_dbm, symbol_rate, n_channels) -> q_db. An explicitly
    requested cell with no power points is an error.
    """
    by_cell: dict[tuple[float, int], list[float]] = {}
    for (p, rs, nch), q in q_grid.items():
        by_cell.setdefault((rs, nch), []).append(q)
    if cells is None:
        cells = sorted(by_cell.keys())
    if not cells:
        raise ValueError("mpq needs at least one (R_s, N_ch) cell")
    peaks = []
    for cell in cells:
        if cell not in by_cell or not by_cell[cell]:
            raise ValueError(f"no power points for cell {cell}")
        peaks.append(max(by_cell[cell]))
    return float(np.mean(peaks))
