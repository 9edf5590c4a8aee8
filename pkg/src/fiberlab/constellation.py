"""16-QAM constellation with Gray bit labels, symbol framing, hard decisions."""

from __future__ import annotations

import dataclasses

import numpy as np

# 2-bit Gray code per I/Q rail: bits (b1, b0) -> amplitude level
_GRAY_LEVELS = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}


@dataclasses.dataclass(frozen=True)
class Constellation:
    """Unit-mean-energy constellation with per-point bit labels.

    points[i] carries bit_labels[i] (shape (M, bits_per_symbol)). The canonical
    point ordering is the construction order; decision ties break toward the
    smaller index.
    """

    points: np.ndarray
    bit_labels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.complex128))
        object.__setattr__(self, "bit_labels", np.asarray(self.bit_labels, dtype=np.int8))
        if len(self.points) != len(self.bit_labels):
            raise ValueError("points and bit_labels must have equal length")

    @property
    def bits_per_symbol(self) -> int:
        return self.bit_labels.shape[1]

    @classmethod
    def gray16qam(cls) -> "Constellation":
        """Standard 16-QAM, independent 2-bit Gray per rail, mean |x|^2 = 1."""
        points = []
        labels = []
        for bi in range(4):
            i_bits = ((bi >> 1) & 1, bi & 1)
            for bq in range(4):
                q_bits = ((bq >> 1) & 1, bq & 1)
                points.append(_GRAY_LEVELS[i_bits] + 1j * _GRAY_LEVELS[q_bits])
                labels.append([*i_bits, *q_bits])
        points = np.asarray(points) / np.sqrt(10.0)
        return cls(points, np.asarray(labels))

    def decide_index(self, y: np.ndarray | complex) -> np.ndarray | int:
        """Nearest-point index in Euclidean distance; ties -> smaller index."""
        y_arr = np.atleast_1d(np.asarray(y, dtype=np.complex128))
        d = np.abs(y_arr[:, None] - self.points[None, :])
        idx = np.argmin(d, axis=1)
        return int(idx[0]) if np.isscalar(y) or np.ndim(y) == 0 else idx

    def indices_to_bits(self, idx: np.ndarray) -> np.ndarray:
        return self.bit_labels[np.asarray(idx, dtype=np.intp)].reshape(-1)

    def indices_to_symbols(self, idx: np.ndarray) -> np.ndarray:
        return self.points[np.asarray(idx, dtype=np.intp)]


def decide(y: complex, constellation: Constellation) -> complex:
    """Hard decision: the constellation point closest to y."""
    return complex(constellation.points[constellation.decide_index(y)])


@dataclasses.dataclass(frozen=True)
class SymbolFrame:
    """Per-channel transmit symbol sequences, plus the seed that drew them."""

    channels: tuple[np.ndarray, ...]  # complex symbols per channel
    indices: tuple[np.ndarray, ...]  # constellation indices per channel
    seed: int

    def __post_init__(self) -> None:
        lengths = {len(ch) for ch in self.channels}
        if len(lengths) != 1:
            raise ValueError("all channels must carry equally many symbols")

    @property
    def n_symbols(self) -> int:
        return len(self.channels[0])

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def center_channel(self) -> np.ndarray:
        return self.channels[self.n_channels // 2]

    def center_indices(self) -> np.ndarray:
        return self.indices[self.n_channels // 2]

    @classmethod
    def random(cls, n_symbols: int, n_channels: int, constellation: Constellation,
               seed: int) -> "SymbolFrame":
        """Draw i.i.d. uniform symbols; channel k uses the derived stream (seed, 1, k)."""
        channels = []
        indices = []
        for k in range(n_channels):
            rng = np.random.default_rng(np.random.SeedSequence([seed, 1, k]))
            idx = rng.integers(0, len(constellation.points), size=n_symbols)
            indices.append(idx)
            channels.append(constellation.points[idx])
        return cls(tuple(channels), tuple(indices), seed)
