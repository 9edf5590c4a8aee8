"""Streaming adaptive filter: h(u, theta) = v*(w^T u), decision-directed LMS and
the NLMS/RMSProp/Adam optimizer variants, windowed over 2-SpS input.

Gradient convention: adf_gradient returns the conjugated (steepest-descent)
gradient g-bar, so every optimizer applies theta <- theta + v with
v = -eta*g-bar for LMS. The plain transpose in w^T u (no conjugation) is
deliberate.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .constellation import Constellation
from .core import Waveform

OPTIMIZERS = ("lms", "nlms", "rmsprop", "adam")


@dataclasses.dataclass
class AdfWeights:
    w: np.ndarray  # complex taps, length d
    v: complex  # phase estimator

    @classmethod
    def initial(cls, taps: int) -> "AdfWeights":
        w = np.zeros(taps, dtype=np.complex128)
        w[taps // 2] = 1.0
        return cls(w, 1.0 + 0.0j)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.w, [self.v]])


@dataclasses.dataclass(frozen=True)
class AdfRunConfig:
    taps: int = 32
    stride: int = 2
    pilot_count: int = 200
    optimizer: str = "lms"
    eta: float = 2.0**-7
    gamma0: float = 0.999
    gamma1: float = 0.9
    gamma2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.taps < 1:
            raise ValueError("taps must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.pilot_count < 0:
            raise ValueError("pilot_count must be >= 0")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")


@dataclasses.dataclass
class OptimizerState:
    """Variant state over the d+1 weight coordinates.

    lms: nothing. nlms/rmsprop: mu (running power). adam: (m, b, t).
    """

    mu: np.ndarray | None = None
    m: np.ndarray | None = None
    b: np.ndarray | None = None
    t: int = 0

    @classmethod
    def initial(cls, variant: str, n: int) -> "OptimizerState":
        if variant == "lms":
            return cls()
        if variant == "nlms":
            return cls(mu=np.ones(n))
        if variant == "rmsprop":
            return cls(mu=np.zeros(n))
        if variant == "adam":
            return cls(m=np.zeros(n, dtype=np.complex128), b=np.zeros(n), t=0)
        raise ValueError(f"unknown optimizer variant {variant!r}")


def filter_apply(u_window: np.ndarray, weights: AdfWeights) -> complex:
    if len(u_window) != len(weights.w):
        raise ValueError("window length must equal the tap count")
    return weights.v * np.dot(weights.w, u_window)


def adf_gradient(u_window: np.ndarray, weights: AdfWeights,
                 y_ref: complex) -> tuple[np.ndarray, complex, complex]:
    """Conjugated gradients of |y_hat - y_ref|^2: (gbar_w, gbar_v, error)."""
    inner = np.dot(weights.w, u_window)
    e = weights.v * inner - y_ref
    gbar_w = e * np.conj(weights.v) * np.conj(u_window)
    gbar_v = e * np.conj(inner)
    return gbar_w, gbar_v, e


def optimizer_step(variant: str, xi: tuple, state: OptimizerState,
                   cfg: AdfRunConfig) -> tuple[np.ndarray, OptimizerState]:
    """One MetaOpt update: returns (weight increment v_k, next state).

    xi is (gbar,) for lms/rmsprop/adam and (gbar, o) for nlms, over the d+1
    coordinates. Running averages are refreshed with the current sample before
    use (the Adam bias-correction semantics).
    """
    gbar = np.asarray(xi[0], dtype=np.complex128)
    if variant == "lms":
        if state.mu is not None or state.m is not None:
            raise ValueError("state does not match the lms variant")
        return -cfg.eta * gbar, state
    if variant == "nlms":
        if state.mu is None:
            raise ValueError("state does not match the nlms variant")
        o = np.asarray(xi[1], dtype=np.complex128)
        mu = cfg.gamma0 * state.mu + (1.0 - cfg.gamma0) * np.abs(o) ** 2
        return -cfg.eta * gbar / (mu + cfg.eps), OptimizerState(mu=mu)
    if variant == "rmsprop":
        if state.mu is None:
            raise ValueError("state does not match the rmsprop variant")
        mu = cfg.gamma0 * state.mu + (1.0 - cfg.gamma0) * np.abs(gbar) ** 2
        return -cfg.eta * gbar / (np.sqrt(mu) + cfg.eps), OptimizerState(mu=mu)
    if variant == "adam":
        if state.m is None or state.b is None:
            raise ValueError("state does not match the adam variant")
        t = state.t + 1
        m = cfg.gamma1 * state.m + (1.0 - cfg.gamma1) * gbar
        b = cfg.gamma2 * state.b + (1.0 - cfg.gamma2) * np.abs(gbar) ** 2
        m_hat = m / (1.0 - cfg.gamma1**t)
        b_hat = b / (1.0 - cfg.gamma2**t)
        return -cfg.eta * m_hat / (np.sqrt(b_hat) + cfg.eps), OptimizerState(m=m, b=b, t=t)
    raise ValueError(f"unknown optimizer variant {variant!r}")


@dataclasses.dataclass
class AdfResult:
    y_hat: np.ndarray
    weights: AdfWeights
    trajectory: np.ndarray  # (n_out, d+1) weight history after each update


def pad_for_adf(samples: np.ndarray, taps: int, stride: int) -> np.ndarray:
    """Zero-pad so adf_run emits one output per symbol and the initial
    center-spike filter (w[taps//2] = 1) reads exactly the symbol-center
    samples: window k covers padded[k*q : k*q+d], so with left padding of
    taps//2 the spike lands on samples[k*q]."""
    left = taps // 2
    right = taps - stride - left
    if right < 0:
        raise ValueError("stride must not exceed taps - taps//2")
    return np.concatenate([np.zeros(left, dtype=np.complex128), samples,
                           np.zeros(right, dtype=np.complex128)])


def adf_run(w: Waveform | np.ndarray, pilots: np.ndarray, cfg: AdfRunConfig,
            constellation: Constellation,
            weights: AdfWeights | None = None) -> AdfResult:
    """Run the streaming ADF over the input.

    Output k comes from the window [k*q, k*q+d); the reference is pilots[k]
    for the first pilot_count outputs and the hard decision afterwards. Output
    count is floor((len-d)/q)+1 (pad with pad_for_adf to get one output per
    symbol on 2-SpS input).
    """
    x = w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.complex128)
    d, q = cfg.taps, cfg.stride
    if len(x) < d:
        raise ValueError("input shorter than one filter window")
    n_out = (len(x) - d) // q + 1
    if cfg.pilot_count > 0 and len(pilots) < min(cfg.pilot_count, n_out):
        raise ValueError("not enough pilot symbols for the configured pilot_count")
    theta = weights if weights is not None else AdfWeights.initial(d)
    state = OptimizerState.initial(cfg.optimizer, d + 1)
    y_hat = np.empty(n_out, dtype=np.complex128)
    traj = np.empty((n_out, d + 1), dtype=np.complex128)
    for k in range(n_out):
        u = x[k * q:k * q + d]
        inner = np.dot(theta.w, u)
        yk = theta.v * inner
        y_hat[k] = yk
        if k < cfg.pilot_count:
            ref = pilots[k]
        else:
            ref = constellation.points[constellation.decide_index(yk)]
        e = yk - ref
        gbar = np.empty(d + 1, dtype=np.complex128)
        gbar[:d] = e * np.conj(theta.v) * np.conj(u)
        gbar[d] = e * np.conj(inner)
        if cfg.optimizer == "nlms":
            o = np.empty(d + 1, dtype=np.complex128)
            o[:d] = theta.v * u
            o[d] = inner
            xi = (gbar, o)
        else:
            xi = (gbar,)
        upd, state = optimizer_step(cfg.optimizer, xi, state, cfg)
        theta.w = theta.w + upd[:d]
        theta.v = theta.v + upd[d]
        traj[k, :d] = theta.w
        traj[k, d] = theta.v
    return AdfResult(y_hat, theta, traj)
