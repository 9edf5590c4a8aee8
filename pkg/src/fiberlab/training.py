"""Training of the meta-DSP parameters: log-MSE loss, reverse-mode gradients,
Adam outer optimizer, truncated backpropagation through time over the ADF
recurrence (hidden state and filter weights carry across segments, gradients
stop at segment boundaries).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import torch

from .adf import AdfRunConfig, AdfWeights
from .core import FiberParams, TaskInfo
from .dsp import DbpConfig
from .meta import MetaParams, egru_initial_state, meta_adf_torch, meta_dbp_torch

LOG_MSE_FLOOR = 1e-12


class TrainingDiverged(RuntimeError):
    """Raised when the training loss turns NaN."""


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    truncation_len: int = 200
    outer_lr: float = 1e-4
    epochs: int = 5
    seed: int = 0
    use_meta_dbp: bool = True
    dbp_steps_per_span: float = 0.2
    adf: AdfRunConfig = dataclasses.field(default_factory=AdfRunConfig)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    grad_clip: float | None = 1.0

    def __post_init__(self) -> None:
        if self.truncation_len < 1:
            raise ValueError("truncation_len must be >= 1")
        if not (self.outer_lr >= 0):
            raise ValueError("outer_lr must be nonnegative")


@dataclasses.dataclass
class TrainTask:
    """One training stream: received 2-SpS samples plus its transmit symbols."""

    task_id: str
    task: TaskInfo
    rx: np.ndarray  # complex, 2 samples per symbol, unit average power
    tx_symbols: np.ndarray

    def __post_init__(self) -> None:
        if len(self.rx) != 2 * len(self.tx_symbols):
            raise ValueError("rx must carry 2 samples per transmit symbol")


@dataclasses.dataclass
class HistoryRow:
    epoch: int
    segment: int
    task_id: str
    loss: float


def log_mse(y_hat: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """ln(mean |y_hat - y|^2 + 1e-12)."""
    if y_hat.numel() == 0 or y_hat.numel() != y.numel():
        raise ValueError("log_mse needs equal, nonzero lengths")
    err = y_hat - y
    return torch.log(torch.mean(err.real**2 + err.imag**2) + LOG_MSE_FLOOR)


def clip_gradients(grads: dict[str, torch.Tensor], max_norm: float) -> dict[str, torch.Tensor]:
    """Scale all gradients jointly so their global L2 norm is at most max_norm
    (stabilizes backpropagation through the long ADF recurrence)."""
    total = math.sqrt(sum(float(torch.sum(torch.abs(g) ** 2)) for g in grads.values()))
    if total <= max_norm or total == 0.0:
        return grads
    scale = max_norm / total
    return {k: g * scale for k, g in grads.items()}


def backward(loss: torch.Tensor, params: dict[str, torch.Tensor]) -> dict[str, torch.Tensor]:
    """Adjoints of every parameter; complex tensors use the real-pair convention
    (grad.real = dL/dRe, grad.imag = dL/dIm). Parameters the loss does not
    depend on get exact zeros."""
    names = list(params.keys())
    grads = torch.autograd.grad(loss, [params[n] for n in names], allow_unused=True)
    out = {}
    for name, g in zip(names, grads):
        out[name] = torch.zeros_like(params[name]) if g is None else g
    return out


@dataclasses.dataclass
class AdamState:
    m: dict[str, torch.Tensor]
    v: dict[str, torch.Tensor]
    t: int = 0

    @classmethod
    def initial(cls, params: dict[str, torch.Tensor]) -> "AdamState":
        zeros_r = {k: torch.zeros_like(torch.view_as_real(p) if p.is_complex() else p)
                   for k, p in params.items()}
        zeros_v = {k: torch.zeros_like(torch.view_as_real(p) if p.is_complex() else p)
                   for k, p in params.items()}
        return cls(zeros_r, zeros_v, 0)


def adam_update(params: dict[str, torch.Tensor], grads: dict[str, torch.Tensor],
                state: AdamState, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                eps: float = 1e-8) -> tuple[dict[str, torch.Tensor], AdamState]:
    """Standard Adam with bias correction, applied in place on the real-pair
    view of each (possibly complex) parameter."""
    t = state.t + 1
    with torch.no_grad():
        for name, p in params.items():
            g = grads[name]
            if p.is_complex():
                g = torch.view_as_real(g)
                target = torch.view_as_real(p)
            else:
                target = p
            m = state.m[name]
            v = state.v[name]
            m.mul_(beta1).add_(g, alpha=1.0 - beta1)
            v.mul_(beta2).addcmul_(g, g, value=1.0 - beta2)
            m_hat = m / (1.0 - beta1**t)
            v_hat = v / (1.0 - beta2**t)
            target.addcdiv_(m_hat, v_hat.sqrt().add_(eps), value=-lr)
    state.t = t
    return params, state


def _segment_bounds(n_symbols: int, trim: int, k: int) -> list[tuple[int, int, int, int]]:
    """(start, stop, loss_lo, loss_hi) per segment; loss range excludes the
    d/2-symbol edge trim at both ends of the signal."""
    lo, hi = trim, n_symbols - trim
    out = []
    for start in range(0, n_symbols, k):
        stop = min(start + k, n_symbols)
        l_lo, l_hi = max(start, lo), min(stop, hi)
        out.append((start, stop, l_lo, l_hi))
    return out


def tbptt_train(dataset: list[TrainTask], cfg: TrainConfig, params: MetaParams,
                fiber: FiberParams) -> tuple[MetaParams, list[HistoryRow]]:
    """Teacher-forced TBPTT over every task: one Adam update of the meta
    parameters per truncation segment; the ADF weights and EGRU state carry
    across segments detached. Aborts on NaN loss."""
    torch.manual_seed(cfg.seed)
    named = params.named_tensors()
    for p in named.values():
        p.requires_grad_(True)
    adam_state = AdamState.initial(named)
    history: list[HistoryRow] = []
    d, q = cfg.adf.taps, cfg.adf.stride
    dbp_cfg = DbpConfig(steps_per_span=cfg.dbp_steps_per_span)
    for epoch in range(cfg.epochs):
        for tt in dataset:
            n_sym = len(tt.tx_symbols)
            refs_all = torch.tensor(np.asarray(tt.tx_symbols, dtype=np.complex128))
            rx = torch.tensor(np.asarray(tt.rx, dtype=np.complex128))
            left = d // 2
            w0 = AdfWeights.initial(d)
            theta_w = torch.tensor(w0.w)
            theta_v = torch.tensor(w0.v, dtype=torch.complex128)
            state = egru_initial_state(d + 1)
            seg_idx = 0
            for start, stop, l_lo, l_hi in _segment_bounds(n_sym, d // 2, cfg.truncation_len):
                if cfg.use_meta_dbp:
                    u_all = meta_dbp_torch(rx, tt.task, fiber, dbp_cfg, params.hyper,
                                           2.0 * tt.task.symbol_rate_baud)
                else:
                    u_all = rx
                pad = torch.zeros(left, dtype=torch.complex128)
                tail = torch.zeros(d - q - left, dtype=torch.complex128)
                padded = torch.cat([pad, u_all, tail])
                x_seg = padded[start * q:(stop - 1) * q + d]
                y_hat, theta_w, theta_v, state = meta_adf_torch(
                    x_seg, refs_all[start:stop], cfg.adf, params.egru,
                    theta_w, theta_v, state, teacher_forced=True)
                if l_hi > l_lo:
                    loss = log_mse(y_hat[l_lo - start:l_hi - start], refs_all[l_lo:l_hi])
                    loss_val = float(loss.item())
                    if math.isnan(loss_val):
                        raise TrainingDiverged(
                            f"NaN loss at epoch {epoch} segment {seg_idx} task {tt.task_id}")
                    grads = backward(loss, named)
                    if cfg.grad_clip is not None:
                        grads = clip_gradients(grads, cfg.grad_clip)
                    adam_update(named, grads, adam_state, cfg.outer_lr,
                                cfg.beta1, cfg.beta2, cfg.eps)
                    history.append(HistoryRow(epoch, seg_idx, tt.task_id, loss_val))
                theta_w = theta_w.detach()
                theta_v = theta_v.detach()
                state = state.detach()
                seg_idx += 1
    for p in named.values():
        p.requires_grad_(False)
    return params, history
