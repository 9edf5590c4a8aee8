"""End-to-end glue: dataset generation, compensation pipelines, metric rows.

A compensation run is: linear/nonlinear compensator -> unit-power normalization
-> adaptive filter (DDLMS or Meta-ADF) -> edge-trimmed metrics. The edge trim
drops the RRC span plus the ADF warm-up pilots from the measured region.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .adf import AdfRunConfig, adf_run, pad_for_adf
from .channel import RRC_SPAN_SYMBOLS, SimStepPlan, propagate_link
from .config import PURPOSE_ASE, ExperimentConfig, derive_rng
from .constellation import Constellation, SymbolFrame
from .core import FiberParams, TaskInfo, Waveform
from .dataset import DatasetRecord
from .dsp import DbpConfig, dbp, edc, fdbp, kernel_length
from .metrics import QualityReport, ber_count, effective_snr_db, q_from_ber
from . import complexity
from .meta import MetaParams, meta_adf_run, meta_dbp
from .signal import normalize_power

METHODS = ("edc", "dbp", "fdbp", "meta-dsp")


def simulate_record(cfg: ExperimentConfig, task: TaskInfo, seed: int,
                    constellation: Constellation) -> DatasetRecord:
    """Propagate one grid point and package it as a dataset record."""
    frame = SymbolFrame.random(cfg.sim.n_symbols, task.n_channels, constellation, seed)
    plan = SimStepPlan.create(cfg.fiber, task, cfg.sim.phi_max_rad,
                              cfg.sim.min_steps_per_span, cfg.sim.max_steps_per_span)
    rng = derive_rng(seed, PURPOSE_ASE) if cfg.sim.noise else None
    link = propagate_link(frame, task, cfg.fiber, plan, rng, noise=cfg.sim.noise)
    return DatasetRecord(task, seed, frame.center_channel(), link.rx_waveform.samples)


@dataclasses.dataclass(frozen=True)
class CompensateOptions:
    method: str = "edc"
    steps_per_span: float = 1.0
    nl_kernel_taps: int = 401
    adf: AdfRunConfig = dataclasses.field(default_factory=AdfRunConfig)
    discard_prefix: int = 0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")


def edge_trim_symbols(adf_cfg: AdfRunConfig) -> int:
    """Symbols dropped at each end before metrics (filter transients)."""
    return RRC_SPAN_SYMBOLS + adf_cfg.taps


def run_adf_stage(samples_2sps: np.ndarray, tx_symbols: np.ndarray, adf_cfg: AdfRunConfig,
                  constellation: Constellation, meta: MetaParams | None = None) -> np.ndarray:
    """Normalize, pad so outputs align one-per-symbol, run the ADF; returns y_hat."""
    x = samples_2sps / np.sqrt(np.mean(np.abs(samples_2sps) ** 2))
    padded = pad_for_adf(x, adf_cfg.taps, adf_cfg.stride)
    pilots = tx_symbols[:max(adf_cfg.pilot_count, 1)]
    if meta is None:
        result = adf_run(padded, pilots, adf_cfg, constellation)
    else:
        result = meta_adf_run(padded, pilots, adf_cfg, meta.egru, constellation)
    return result.y_hat


def compensate_record(record: DatasetRecord, fiber: FiberParams, opts: CompensateOptions,
                      constellation: Constellation,
                      meta: MetaParams | None = None) -> tuple[QualityReport, float]:
    """Full receiver chain on one dataset record; returns (quality, rmps)."""
    task = record.task
    rx = Waveform(record.rx_samples, 2.0 * task.symbol_rate_baud)
    if opts.method == "edc":
        comp = edc(rx, fiber)
    elif opts.method == "dbp":
        comp = dbp(rx, fiber, DbpConfig(opts.steps_per_span))
    elif opts.method == "fdbp":
        c = np.zeros(opts.nl_kernel_taps)
        c[opts.nl_kernel_taps // 2] = 1.0
        comp = fdbp(rx, fiber, DbpConfig(opts.steps_per_span), c)
    elif opts.method == "meta-dsp":
        if meta is None:
            raise ValueError("meta-dsp needs a checkpoint (MetaParams)")
        normed, _ = normalize_power(rx)
        comp = meta_dbp(normed, task, fiber, DbpConfig(opts.steps_per_span), meta.hyper)
    else:
        raise ValueError(f"unknown method {opts.method!r}")
    y_hat = run_adf_stage(comp.samples, record.tx_symbols, opts.adf, constellation,
                          meta if opts.method == "meta-dsp" else None)
    report = measure_quality(y_hat, record.tx_symbols, opts.adf, constellation,
                             opts.discard_prefix)
    return report, method_rmps(opts.method, fiber, task, opts)


def measure_quality(y_hat: np.ndarray, tx_symbols: np.ndarray, adf_cfg: AdfRunConfig,
                    constellation: Constellation, discard_prefix: int = 0) -> QualityReport:
    """BER by direct error counting plus the effective-SNR surrogate, over the
    post-pilot, edge-trimmed, prefix-discarded region."""
    trim = edge_trim_symbols(adf_cfg)
    lo = max(trim, adf_cfg.pilot_count, discard_prefix)
    hi = min(len(y_hat), len(tx_symbols)) - trim
    if hi <= lo:
        raise ValueError("no symbols left after trimming")
    y = y_hat[lo:hi]
    ref = tx_symbols[lo:hi]
    dec_idx = constellation.decide_index(y)
    ref_idx = constellation.decide_index(ref)
    dec_bits = constellation.indices_to_bits(dec_idx)
    ref_bits = constellation.indices_to_bits(ref_idx)
    ber = ber_count(dec_bits, ref_bits)
    return QualityReport(ber=ber, q_db=q_from_ber(ber),
                         eff_snr_db=effective_snr_db(y, ref),
                         n_bits_counted=len(ref_bits))


def method_rmps(method: str, fiber: FiberParams, task: TaskInfo,
                opts: CompensateOptions) -> float:
    """Per-symbol complexity of the full receiver (compensator + its ADF)."""
    fs = 2.0 * task.symbol_rate_baud
    n_d = kernel_length(fiber.total_length_m, fiber.beta2_s2_per_m, fs)
    taps = opts.adf.taps
    if method == "edc":
        return complexity.rmps_edc(n_d)[0] + complexity.rmps_ddlms(taps)
    if method == "dbp":
        return complexity.rmps_dbp(fiber.n_spans, opts.steps_per_span, n_d)[0] + \
            complexity.rmps_ddlms(taps)
    if method == "fdbp":
        return complexity.rmps_fdbp(fiber.n_spans, opts.steps_per_span, n_d,
                                    opts.nl_kernel_taps)[0] + complexity.rmps_ddlms(taps)
    if method == "meta-dsp":
        return complexity.rmps_meta_dsp(fiber.n_spans, opts.steps_per_span, n_d,
                                        opts.nl_kernel_taps, taps)
    raise ValueError(f"unknown method {method!r}")
