import numpy as np
import pytest
import torch

from fiberlab.training import backward as _backward

from fiberlab.constellation import Constellation
from fiberlab.core import FiberParams

torch.set_num_threads(1)


@pytest.fixture(scope="session")
def qam16():
    return Constellation.gray16qam()


@pytest.fixture(scope="session")
def fiber():
    return FiberParams()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def bandlimited_noise(n: int, occupancy: float, rng: np.random.Generator) -> np.ndarray:
    """Complex noise bandlimited to `occupancy` of the sampling band."""
    spec = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    spec[np.abs(np.fft.fftfreq(n)) > occupancy / 2.0] = 0.0
    x = np.fft.ifft(spec)
    return x / np.sqrt(np.mean(np.abs(x) ** 2))


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def fd_check(loss_fn, params: dict, eps: float = 1e-6, rtol: float = 1e-5,
             atol: float = 1e-8) -> float:
    """Central finite differences on every Re/Im parameter component.

    Passing means |analytic - fd| <= max(rtol*|fd|, rtol*|analytic|, atol); the
    absolute floor covers components whose true derivative sits at the FD
    roundoff noise (~1e-9 for O(1) losses).
    """
    loss = loss_fn()
    grads = _backward(loss, params)
    worst = 0.0
    for name, p in params.items():
        g = grads[name]
        flat = p.data.reshape(-1)
        for i in range(flat.numel()):
            units = (1.0, 1j) if p.is_complex() else (1.0,)
            for unit in units:
                with torch.no_grad():
                    flat[i] += eps * unit
                up = loss_fn().item()
                with torch.no_grad():
                    flat[i] -= 2 * eps * unit
                down = loss_fn().item()
                with torch.no_grad():
                    flat[i] += eps * unit
                fd = (up - down) / (2 * eps)
                an = g.reshape(-1)[i]
                an = float(an.real if unit == 1.0 else an.imag) if p.is_complex() \
                    else float(an)
                err = abs(an - fd)
                if err > max(rtol * abs(fd), rtol * abs(an), atol):
                    raise AssertionError(
                        f"{name}[{i}] {'im' if unit == 1j else 're'}: "
                        f"analytic={an:.3e} fd={fd:.3e} err={err:.3e}")
                worst = max(worst, err / max(abs(fd), abs(an), 1e-30))
    return worst




def nudge_params(named: dict, scale: float = 0.05, seed: int = 99) -> None:
    """Move every parameter to a generic position (off ReLU kinks) before
    finite-difference checks; central differences are ill-defined across the
    split-activation kinks that the zero-bias initialization sits on."""
    g = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for p in named.values():
            if p.is_complex():
                re = torch.randn(p.shape, generator=g, dtype=torch.float64)
                im = torch.randn(p.shape, generator=g, dtype=torch.float64)
                p += scale * torch.complex(re, im)
            else:
                p += scale * torch.randn(p.shape, generator=g, dtype=torch.float64)
