"""Command-line surface: sweep, circuit, verify and plot subcommands.

Exit codes: 0 success, 1 failed rows or failed checks, 2 configuration or
input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace

from .config import ConfigError, load_config, parse_frame
from .experiments import run_circuit, run_sweep, verify_invariants
from .plotting import render_sweep_figure

SWEEP_CSV_HEADER = [
    "omega_b",
    "alpha_abs",
    "alpha_phase",
    "n_max",
    "fidelity",
    "trace_error",
    "tail_weight",
]
CIRCUIT_CSV_HEADER = ["segment", "elapsed", "readout", "fidelity"]


def _fmt(x: float) -> str:
    # 17 significant digits: lossless for doubles, supports bytewise
    # golden-file comparisons
    return format(float(x), ".17g")


def _write_csv(path: str, header: list[str], rows: list[list]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _apply_sweep_overrides(cfg, args):
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.frame is not None:
        updates["frame"] = parse_frame(args.frame, "--frame")
    if args.readout is not None:
        updates["readout"] = args.readout
    if getattr(args, "fast", False):
        updates["fast"] = True
    if getattr(args, "alpha_grid", None) is not None:
        try:
            grid = tuple(float(a) for a in args.alpha_grid.split(","))
        except ValueError as exc:
            raise ConfigError(f"--alpha-grid: expected comma-separated numbers") from exc
        updates["alpha_abs_grid"] = grid
    if updates:
        cfg.sweep = replace(cfg.sweep, **updates)
    if args.out is not None:
        cfg.out_dir = args.out
    if args.workers is not None:
        cfg.workers = max(1, args.workers)
    return cfg


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if cfg.sweep is None:
        raise ConfigError(f"{args.config}: missing required 'sweep' section")
    cfg = _apply_sweep_overrides(cfg, args)
    os.makedirs(cfg.out_dir, exist_ok=True)

    rows = run_sweep(cfg.sweep, workers=cfg.workers)
    csv_rows = [
        [
            _fmt(r.omega_b),
            _fmt(r.alpha_abs),
            _fmt(r.alpha_phase),
            str(r.n_max),
            _fmt(r.fidelity),
            _fmt(r.trace_error),
            _fmt(r.tail_weight),
        ]
        for r in rows
    ]
    csv_path = os.path.join(cfg.out_dir, "sweep.csv")
    svg_path = os.path.join(cfg.out_dir, "sweep.svg")
    _write_csv(csv_path, SWEEP_CSV_HEADER, csv_rows)

    ok_rows = [r for r in rows if r.error is None]
    failed = [r for r in rows if r.error is not None]
    if ok_rows:
        render_sweep_figure(ok_rows, svg_path)

    print(f"sweep: {len(ok_rows)} rows ok, {len(failed)} failed -> {csv_path}")
    for wb in cfg.sweep.mode_freqs:
        fids = [r.fidelity for r in ok_rows if r.omega_b == wb]
        if fids:
            print(
                f"  omega_b={wb:g}: F in [{min(fids):.6f}, {max(fids):.6f}]"
                f" over {len(fids)} couplings"
            )
    for r in failed:
        print(f"  FAILED omega_b={r.omega_b:g} alpha={r.alpha_abs:g}: {r.error}")
    return 1 if failed else 0


def cmd_circuit(args) -> int:
    cfg = load_config(args.config)
    if cfg.circuit is None:
        raise ConfigError(f"{args.config}: missing required 'circuit' section")
    if args.out is not None:
        cfg.out_dir = args.out
    readout = args.readout if args.readout is not None else cfg.circuit.readout
    os.makedirs(cfg.out_dir, exist_ok=True)

    rows = run_circuit(
        list(cfg.circuit.segments),
        cfg.circuit.params,
        readout=readout,
        seed=cfg.circuit.seed,
    )
    csv_path = os.path.join(cfg.out_dir, "circuit.csv")
    _write_csv(
        csv_path,
        CIRCUIT_CSV_HEADER,
        [[str(r.segment), _fmt(r.elapsed), r.readout, _fmt(r.fidelity)] for r in rows],
    )
    print(f"circuit: {len(rows)} segments -> {csv_path}")
    for r in rows:
        print(f"  segment {r.segment}: t={r.elapsed:.4f} F={r.fidelity:.9f}")
    return 0


def cmd_verify(args) -> int:
    report = verify_invariants(
        seed=args.seed if args.seed is not None else 6,
        inject_nonhermitian=args.inject_nonhermitian,
    )
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        width = max(len(c.name) for c in report.checks)
        for c in report.checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{c.name:<{width}}  {status}  value={c.value:.6g}  want {c.threshold}")
        print("overall:", "PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


class _PlotRow:
    __slots__ = ("omega_b", "alpha_abs", "fidelity")

    def __init__(self, omega_b, alpha_abs, fidelity):
        self.omega_b = omega_b
        self.alpha_abs = alpha_abs
        self.fidelity = fidelity


def cmd_plot(args) -> int:
    try:
        with open(args.csv, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != SWEEP_CSV_HEADER:
                raise ConfigError(
                    f"{args.csv}: unexpected header {header!r}, want {SWEEP_CSV_HEADER}"
                )
            rows = []
            for i, rec in enumerate(reader):
                if len(rec) != len(SWEEP_CSV_HEADER):
                    raise ConfigError(f"{args.csv}: row {i + 1} has {len(rec)} fields")
                try:
                    rows.append(_PlotRow(float(rec[0]), float(rec[1]), float(rec[4])))
                except ValueError as exc:
                    raise ConfigError(f"{args.csv}: row {i + 1}: {exc}") from exc
    except FileNotFoundError:
        raise ConfigError(f"csv file not found: {args.csv}")
    rows = [r for r in rows if not math.isnan(r.fidelity)]
    if not rows:
        raise ConfigError(f"{args.csv}: no data rows")
    render_sweep_figure(rows, args.svg)
    print(f"plot: {len(rows)} rows -> {args.svg}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dressedsim",
        description="Dressed-basis spin-boson simulator: fidelity sweeps, "
        "circuit runs, invariant verification and plotting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a fidelity-vs-coupling sweep")
    sweep.add_argument("--config", required=True, help="YAML run configuration")
    sweep.add_argument("--out", help="output directory (default from config)")
    sweep.add_argument("--workers", type=int, help="parallel row workers")
    sweep.add_argument("--seed", type=int, help="override the sweep seed")
    sweep.add_argument("--frame", choices=["exact", "first-order"], help="simulation frame")
    sweep.add_argument("--readout", choices=["bare", "dressed"], help="readout basis")
    sweep.add_argument("--alpha-grid", help="comma-separated coupling magnitudes")
    sweep.add_argument(
        "--fast",
        action="store_true",
        help="CI smoke mode: rescale beta for rows needing very large truncations",
    )
    sweep.set_defaults(func=cmd_sweep)

    circuit = sub.add_parser("circuit", help="run a control-segment circuit")
    circuit.add_argument("--config", required=True)
    circuit.add_argument("--out")
    circuit.add_argument("--readout", choices=["bare", "dressed"])
    circuit.set_defaults(func=cmd_circuit)

    verify = sub.add_parser("verify", help="run the invariant verification suite")
    verify.add_argument("--json", action="store_true", help="emit a JSON report")
    verify.add_argument("--seed", type=int)
    verify.add_argument(
        "--inject-nonhermitian",
        action="store_true",
        help="test hook: corrupt a Hamiltonian so the hermiticity check fails",
    )
    verify.set_defaults(func=cmd_verify)

    plot = sub.add_parser("plot", help="render a sweep CSV to SVG")
    plot.add_argument("csv", help="sweep.csv produced by the sweep subcommand")
    plot.add_argument("svg", help="output SVG path")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
