"""Binary dataset files (FDSP) and the accompanying index CSV.

Layout: magic "FDSP" (4 bytes) | u32 version=1 LE | header of little-endian f64
fields (R_s, P_dbm, delta_f, N_ch, rx_sps=2, n_symbols) | u64 seed | payload of
n_symbols complex tx symbols as f64 pairs, then 2*n_symbols complex rx samples
as f64 pairs.
"""

from __future__ import annotations

import dataclasses
import struct
from pathlib import Path

import numpy as np

from .core import TaskInfo

_MAGIC = b"FDSP"
_VERSION = 1

INDEX_COLUMNS = ("file", "power_dbm", "symbol_rate_baud", "n_channels",
                 "channel_spacing_hz", "n_symbols", "seed")


@dataclasses.dataclass(frozen=True)
class DatasetRecord:
    task: TaskInfo
    seed: int
    tx_symbols: np.ndarray  # complex, n_symbols
    rx_samples: np.ndarray  # complex, 2*n_symbols at 2 SpS

    def __post_init__(self) -> None:
        if len(self.rx_samples) != 2 * len(self.tx_symbols):
            raise ValueError("payload sizes must match: rx must be 2 samples/symbol")

    @property
    def n_symbols(self) -> int:
        return len(self.tx_symbols)


def _pack_complex(arr: np.ndarray) -> bytes:
    flat = np.empty(arr.size * 2, dtype="<f8")
    flat[0::2] = arr.real
    flat[1::2] = arr.imag
    return flat.tobytes()


def _unpack_complex(buf: bytes, n: int) -> np.ndarray:
    flat = np.frombuffer(buf, dtype="<f8", count=2 * n)
    return (flat[0::2] + 1j * flat[1::2]).astype(np.complex128)


def write_dataset(path: str | Path, record: DatasetRecord) -> None:
    t = record.task
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", _VERSION))
        f.write(struct.pack("<6d", t.symbol_rate_baud, t.power_dbm_per_channel,
                            t.channel_spacing_hz, float(t.n_channels), 2.0,
                            float(record.n_symbols)))
        f.write(struct.pack("<Q", record.seed))
        f.write(_pack_complex(np.asarray(record.tx_symbols, dtype=np.complex128)))
        f.write(_pack_complex(np.asarray(record.rx_samples, dtype=np.complex128)))


def read_dataset(path: str | Path) -> DatasetRecord:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not an FDSP dataset (bad magic)")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported dataset version {version}")
    rs, p_dbm, df, n_ch, rx_sps, n_sym = struct.unpack_from("<6d", raw, 8)
    (seed,) = struct.unpack_from("<Q", raw, 56)
    if rx_sps != 2.0:
        raise ValueError(f"{path}: unsupported rx_sps {rx_sps}")
    n_symbols = int(n_sym)
    offset = 64
    expected = offset + 16 * n_symbols + 16 * 2 * n_symbols
    if len(raw) != expected:
        raise ValueError(f"{path}: payload size {len(raw)} does not match header ({expected})")
    tx = _unpack_complex(raw[offset:], n_symbols)
    rx = _unpack_complex(raw[offset + 16 * n_symbols:], 2 * n_symbols)
    task = TaskInfo(power_dbm_per_channel=p_dbm, symbol_rate_baud=rs,
                    n_channels=int(n_ch), channel_spacing_hz=df)
    return DatasetRecord(task, seed, tx, rx)


def format_float(x: float) -> str:
    """Canonical float formatting (shortest round-trip repr) for stable CSVs."""
    return repr(float(x))


def index_row(filename: str, task: TaskInfo, n_symbols: int, seed: int) -> list[str]:
    return [filename, format_float(task.power_dbm_per_channel),
            format_float(task.symbol_rate_baud), str(task.n_channels),
            format_float(task.channel_spacing_hz), str(n_symbols), str(seed)]
