"""Command-line harness: generate / compensate / train / complexity / sweep.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
Every command is deterministic for a fixed root seed when --threads 1.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import torch

from .adf import AdfRunConfig
from .config import ConfigError, ExperimentConfig, grid_seed, load_config
from .constellation import Constellation
from .dataset import (INDEX_COLUMNS, DatasetRecord, format_float, index_row,
                      read_dataset, write_dataset)
from .dsp import kernel_length
from .metrics import mpq
from .meta import MetaParams, load_checkpoint, save_checkpoint
from .pipeline import (METHODS, CompensateOptions, compensate_record, method_rmps,
                       simulate_record)
from .training import TrainConfig, TrainingDiverged, TrainTask, tbptt_train
from . import complexity, report

COMPENSATE_COLUMNS = ("method", "power_dbm", "symbol_rate_baud", "n_channels",
                      "ber", "q_db", "eff_snr_db", "rmps")
SWEEP_COLUMNS = ("row_type", "method", "power_dbm", "symbol_rate_baud", "n_channels",
                 "discard_prefix", "ber", "q_db", "eff_snr_db", "rmps")
HISTORY_COLUMNS = ("epoch", "segment", "task_id", "loss")


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        writer.writerows(rows)


def _adf_config(cfg: ExperimentConfig) -> AdfRunConfig:
    d = cfg.dsp
    return AdfRunConfig(taps=d.adf_taps, stride=d.adf_stride, pilot_count=d.pilot_count,
                        optimizer=d.adf_optimizer, eta=d.adf_eta, gamma0=d.adf_gamma0,
                        gamma1=d.adf_gamma1, gamma2=d.adf_gamma2, eps=d.adf_eps)


def _load_experiment(args) -> ExperimentConfig:
    scale = "paper" if args.paper_scale else "desk"
    if args.config:
        cfg = load_config(args.config, scale)
    else:
        cfg = ExperimentConfig.paper_scale() if args.paper_scale else ExperimentConfig.desk_scale()
    if args.seed is not None:
        import dataclasses
        cfg = dataclasses.replace(cfg, seeds=dataclasses.replace(cfg.seeds, root=args.seed))
    return cfg


def _simulate_point(payload):
    cfg, task, seed = payload
    return simulate_record(cfg, task, seed, Constellation.gray16qam())


def cmd_generate(args) -> int:
    cfg = _load_experiment(args)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        print(f"error: output dir not writable: {exc}", file=sys.stderr)
        return 3
    tasks = cfg.grid.tasks()
    payloads = [(cfg, task, grid_seed(cfg.seeds.root, i)) for i, task in enumerate(tasks)]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            records = list(pool.map(_simulate_point, payloads))
    else:
        records = [_simulate_point(p) for p in payloads]
    rows = []
    for i, record in enumerate(records):
        name = f"ds_{i:04d}.fdsp"
        write_dataset(out / name, record)
        rows.append(index_row(name, record.task, record.n_symbols, record.seed))
    _write_csv(out / "index.csv", INDEX_COLUMNS, rows)
    print(f"wrote {len(records)} dataset files to {out}")
    return 0


def _dataset_paths(arg: str) -> list[Path]:
    p = Path(arg)
    if p.is_dir():
        return sorted(p.glob("*.fdsp"))
    if not p.exists():
        raise OSError(f"dataset path {p} does not exist")
    return [p]


def _compensate_rows(records: list[DatasetRecord], fiber, opts: CompensateOptions,
                     meta: MetaParams | None) -> list[list[str]]:
    constellation = Constellation.gray16qam()
    rows = []
    for record in records:
        quality, rmps = compensate_record(record, fiber, opts, constellation, meta)
        t = record.task
        rows.append([opts.method, format_float(t.power_dbm_per_channel),
                     format_float(t.symbol_rate_baud), str(t.n_channels),
                     format_float(quality.ber), format_float(quality.q_db),
                     format_float(quality.eff_snr_db), format_float(rmps)])
    return rows


def cmd_compensate(args) -> int:
    cfg = _load_experiment(args)
    if args.method not in METHODS:
        print(f"error: unknown method {args.method!r}", file=sys.stderr)
        return 2
    meta = None
    if args.method == "meta-dsp":
        if not args.checkpoint:
            print("error: meta-dsp requires --checkpoint", file=sys.stderr)
            return 2
        meta = load_checkpoint(args.checkpoint)
    steps = args.steps_per_span
    if steps is None:
        steps = cfg.train.dbp_steps_per_span if args.method == "meta-dsp" else cfg.dsp.steps_per_span
    opts = CompensateOptions(method=args.method, steps_per_span=steps,
                             nl_kernel_taps=cfg.dsp.nl_kernel_taps,
                             adf=_adf_config(cfg), discard_prefix=args.discard_prefix)
    records = [read_dataset(p) for p in _dataset_paths(args.dataset)]
    rows = _compensate_rows(records, cfg.fiber, opts, meta)
    _write_csv(Path(args.out), COMPENSATE_COLUMNS, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_experiment(args)
    paths = _dataset_paths(args.data)
    if not paths:
        print("error: no datasets found", file=sys.stderr)
        return 3
    tasks = []
    for p in paths:
        rec = read_dataset(p)
        rx = rec.rx_samples / np.sqrt(np.mean(np.abs(rec.rx_samples) ** 2))
        tasks.append(TrainTask(p.stem, rec.task, rx, rec.tx_symbols))
    tcfg = TrainConfig(truncation_len=cfg.train.truncation_len, outer_lr=cfg.train.outer_lr,
                       epochs=args.epochs if args.epochs is not None else cfg.train.epochs,
                       seed=cfg.seeds.root, dbp_steps_per_span=cfg.train.dbp_steps_per_span,
                       adf=_adf_config(cfg))
    params = MetaParams.create(n_taps=cfg.dsp.nl_kernel_taps,
                               hidden=(cfg.train.hypernet_hidden, cfg.train.hypernet_hidden),
                               seed=cfg.seeds.root)
    params, history = tbptt_train(tasks, tcfg, params, cfg.fiber)
    out = Path(args.out)
    save_checkpoint(out, params)
    hist_path = out.with_suffix(".history.csv")
    _write_csv(hist_path, HISTORY_COLUMNS,
               [[str(h.epoch), str(h.segment), h.task_id, format_float(h.loss)] for h in history])
    report.render_loss_history(history, out.with_suffix(".loss.png"))
    print(f"wrote checkpoint {out}, history {hist_path}")
    return 0


def cmd_complexity(args) -> int:
    cfg = _load_experiment(args)
    fiber = cfg.fiber
    rs = args.symbol_rate if args.symbol_rate else max(cfg.grid.symbol_rates_baud)
    fs = 2.0 * rs
    n_d = kernel_length(fiber.total_length_m, fiber.beta2_s2_per_m, fs)
    taps = cfg.dsp.adf_taps
    n_f = cfg.dsp.nl_kernel_taps
    stps = args.steps_per_span if args.steps_per_span is not None else 10.0
    reports = []
    edc_v, edc_n = complexity.rmps_edc(n_d)
    reports.append(complexity.ComplexityReport("ddlms", complexity.rmps_ddlms(taps),
                                               {"taps": taps}))
    reports.append(complexity.ComplexityReport("edc", edc_v, {"n_d": n_d, "fft_n": edc_n}))
    dbp_v, dbp_n = complexity.rmps_dbp(fiber.n_spans, stps, n_d)
    reports.append(complexity.ComplexityReport("dbp", dbp_v, {
        "n_d": n_d, "n_stps": stps, "fft_n": dbp_n}))
    fdbp_v, fdbp_n = complexity.rmps_fdbp(fiber.n_spans, 0.2, n_d, n_f)
    reports.append(complexity.ComplexityReport("fdbp", fdbp_v, {
        "n_d": n_d, "n_f": n_f, "n_stps": 0.2, "fft_n": fdbp_n}))
    madf = complexity.rmps_meta_adf(taps)
    reports.append(complexity.ComplexityReport("meta-adf", madf, {"taps": taps}))
    reports.append(complexity.ComplexityReport("meta-dsp", fdbp_v + madf, {
        "n_d": n_d, "n_f": n_f, "n_stps": 0.2, "taps": taps}))
    rows = [[r.method, format_float(r.rmps), repr(r.params)] for r in reports]
    out = Path(args.out)
    _write_csv(out, ("method", "rmps", "params"), rows)
    report.render_complexity_table(reports, out.with_suffix(".png"))
    print(f"wrote complexity table to {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_experiment(args)
    methods = [m.strip() for m in args.methods.split(",")]
    for m in methods:
        if m not in METHODS:
            print(f"error: unknown method {m!r}", file=sys.stderr)
            return 2
    meta = load_checkpoint(args.checkpoint) if args.checkpoint else None
    if "meta-dsp" in methods and meta is None:
        print("error: meta-dsp in sweep requires --checkpoint", file=sys.stderr)
        return 2
    records = [read_dataset(p) for p in _dataset_paths(args.data)]
    constellation = Constellation.gray16qam()
    discards = [int(k) for k in args.discard_prefix.split(",")] if args.discard_prefix else [0]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    point_rows = []
    for method in methods:
        steps = cfg.train.dbp_steps_per_span if method == "meta-dsp" else cfg.dsp.steps_per_span
        for discard in discards:
            opts = CompensateOptions(method=method, steps_per_span=steps,
                                     nl_kernel_taps=cfg.dsp.nl_kernel_taps,
                                     adf=_adf_config(cfg), discard_prefix=discard)
            per_cell: dict[tuple, list] = {}
            q_grid: dict[tuple, float] = {}
            snr_grid: dict[tuple, float] = {}
            for record in records:
                quality, rmps = compensate_record(
                    record, cfg.fiber, opts, constellation,
                    meta if method == "meta-dsp" else None)
                t = record.task
                row = {"row_type": "point", "method": method,
                       "power_dbm": format_float(t.power_dbm_per_channel),
                       "symbol_rate_baud": format_float(t.symbol_rate_baud),
                       "n_channels": str(t.n_channels), "discard_prefix": str(discard),
                       "ber": format_float(quality.ber), "q_db": format_float(quality.q_db),
                       "eff_snr_db": format_float(quality.eff_snr_db),
                       "rmps": format_float(rmps)}
                rows.append(row)
                point_rows.append(row)
                key = (t.power_dbm_per_channel, t.symbol_rate_baud, t.n_channels)
                q_grid[key] = quality.q_db
                snr_grid[key] = quality.eff_snr_db
                cell = (t.symbol_rate_baud, t.n_channels)
                per_cell.setdefault(cell, []).append((quality.eff_snr_db, row))
            for cell, entries in sorted(per_cell.items()):
                best = max(entries, key=lambda e: e[0])[1]
                rows.append({**best, "row_type": "max"})
            finite_q = all(np.isfinite(v) for v in q_grid.values())
            value = mpq(q_grid) if finite_q else mpq({k: v for k, v in snr_grid.items()})
            rows.append({"row_type": "mpq", "method": method, "power_dbm": "",
                         "symbol_rate_baud": "", "n_channels": "",
                         "discard_prefix": str(discard), "ber": "",
                         "q_db": format_float(value) if finite_q else "",
                         "eff_snr_db": "" if finite_q else format_float(value),
                         "rmps": ""})
    csv_path = out_dir / "sweep.csv"
    _write_csv(csv_path, SWEEP_COLUMNS, [[r[c] for c in SWEEP_COLUMNS] for r in rows])
    report.render_power_sweep(point_rows, out_dir / "q_vs_power.png")
    report.render_rmps(point_rows, out_dir / "q_vs_rmps.png")
    print(f"wrote sweep results to {csv_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fiberlab",
                                     description="Coherent fiber transmission laboratory")
    parser.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="YAML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override root seed")
        scale = p.add_mutually_exclusive_group()
        scale.add_argument("--desk-scale", action="store_true", default=True)
        scale.add_argument("--paper-scale", dest="paper_scale", action="store_true",
                           default=False)

    g = sub.add_parser("generate", help="simulate the config grid into dataset files")
    common(g)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_generate)

    c = sub.add_parser("compensate", help="run one compensation method over datasets")
    common(c)
    c.add_argument("dataset", help="dataset file or directory")
    c.add_argument("--method", required=True)
    c.add_argument("--out", required=True, help="output CSV")
    c.add_argument("--checkpoint", default=None)
    c.add_argument("--steps-per-span", type=float, default=None)
    c.add_argument("--discard-prefix", type=int, default=0)
    c.set_defaults(fn=cmd_compensate)

    t = sub.add_parser("train", help="TBPTT-train the meta-DSP parameters")
    common(t)
    t.add_argument("--data", required=True, help="dataset directory")
    t.add_argument("--out", required=True, help="output checkpoint (.mdsp)")
    t.add_argument("--epochs", type=int, default=None)
    t.set_defaults(fn=cmd_train)

    x = sub.add_parser("complexity", help="emit the RMPS table")
    common(x)
    x.add_argument("--out", required=True, help="output CSV")
    x.add_argument("--symbol-rate", type=float, default=None)
    x.add_argument("--steps-per-span", type=float, default=None)
    x.set_defaults(fn=cmd_complexity)

    s = sub.add_parser("sweep", help="grid sweep: quality vs power and vs RMPS")
    common(s)
    s.add_argument("--data", required=True, help="dataset directory")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--methods", default="edc")
    s.add_argument("--checkpoint", default=None)
    s.add_argument("--discard-prefix", default=None,
                   help="comma-separated prefix lengths to discard before metrics")
    s.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads == 1:
        torch.set_num_threads(1)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except (TrainingDiverged, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
