"""Figure rendering for the report paths: PNGs written next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams.update({
    "figure.figsize": (7.0, 4.4),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 130,
})

_SAVE_KW = {"metadata": {"Software": None}}  # keep PNGs byte-stable across runs


def _finite(rows, key):
    return [r for r in rows if r[key] not in ("inf", "-inf", "nan")]


def render_power_sweep(rows: list[dict], out_png: str | Path) -> None:
    """Q (or effective SNR) versus launch power, one line per (method, R_s, N_ch)."""
    fig, ax = plt.subplots()
    groups: dict[tuple, list] = {}
    for r in _finite(rows, "eff_snr_db"):
        groups.setdefault((r["method"], r["symbol_rate_baud"], r["n_channels"]), []).append(r)
    for (method, rs, nch), pts in sorted(groups.items()):
        pts.sort(key=lambda r: float(r["power_dbm"]))
        ax.plot([float(r["power_dbm"]) for r in pts],
                [float(r["eff_snr_db"]) for r in pts],
                marker="o", label=f"{method} {float(rs) / 1e9:.0f}G x{nch}")
    ax.set_xlabel("launch power per channel [dBm]")
    ax.set_ylabel("effective SNR [dB]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_png, **_SAVE_KW)
    plt.close(fig)


def render_rmps(rows: list[dict], out_png: str | Path) -> None:
    """Quality versus per-symbol complexity, one marker per method."""
    fig, ax = plt.subplots()
    by_method: dict[str, list] = {}
    for r in _finite(rows, "eff_snr_db"):
        by_method.setdefault(r["method"], []).append(r)
    for method, pts in sorted(by_method.items()):
        best = max(float(r["eff_snr_db"]) for r in pts)
        rmps = float(pts[0]["rmps"])
        ax.semilogx([rmps], [best], marker="s", markersize=9, label=method)
    ax.set_xlabel("RMPS (real multiplications per symbol)")
    ax.set_ylabel("peak effective SNR [dB]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_png, **_SAVE_KW)
    plt.close(fig)


def render_loss_history(history: list, out_png: str | Path) -> None:
    fig, ax = plt.subplots()
    ax.plot([row.loss for row in history], lw=0.8)
    ax.set_xlabel("update (task-segment)")
    ax.set_ylabel("log-MSE loss")
    fig.tight_layout()
    fig.savefig(out_png, **_SAVE_KW)
    plt.close(fig)


def render_complexity_table(reports: list, out_png: str | Path) -> None:
    fig, ax = plt.subplots()
    names = [r.method for r in reports]
    values = [r.rmps for r in reports]
    ax.bar(range(len(names)), values)
    ax.set_yscale("log")
    ax.set_xticks(range(len(names)), names, rotation=20)
    ax.set_ylabel("RMPS")
    fig.tight_layout()
    fig.savefig(out_png, **_SAVE_KW)
    plt.close(fig)
