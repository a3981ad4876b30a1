"""Command-line interface: batch figure-reproduction runs emitting CSV + JSON.

Subcommands: populations (driven population dynamics vs the closed form),
steady (one steady state in full detail), concurrence-map and timescale-map
(parameter-grid sweeps), g2 (one correlation trace), validate (invariant
battery). Every data command writes a CSV plus a <out>.meta.json sidecar;
CSV bytes are reproducible for identical configuration.

Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure,
3 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .liouvillian import NumericalError, build_liouvillian, evolve, steady_state
from .models import (
    build_full_model,
    boson_number,
    closed_form_inputs,
    analytic_populations,
    dicke_populations,
    ground_state,
    rabi_frequency,
)
from .observables import (
    DarkEmitterError,
    FlatSpectrumError,
    concurrence,
    default_tau_max,
    g2_trace,
)
from .operators import QUBIT_NUMBER, embed, partial_trace
from .sweep import GridSpec, run_sweep
from .validate import run_validation

_MAP_DEFAULT_AXES = {
    "concurrence-map": (("delta0", -0.05, 0.05, 41), ("delta1", -0.05, 0.05, 41)),
    "timescale-map": (("eta0", 0.0, 0.1, 41), ("eta1", 0.0, 0.1, 41)),
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _write_csv(path: str, comments: list[str], header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_meta(csv_path: str, command: str, cfg: RunConfig, wall_clock: float,
                extra: dict) -> None:
    meta = {
        "command": command,
        "version": __version__,
        "params": dataclasses.asdict(cfg.params),
        "n_max": cfg.params.n_max,
        "settings": {k: v for k, v in cfg.as_dict().items() if k != "params"},
        "wall_clock_seconds": wall_clock,
        "csv": csv_path,
    }
    meta.update(extra)
    with open(csv_path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _provenance(command: str, cfg: RunConfig) -> list[str]:
    p = cfg.params
    fields = ", ".join(
        f"{f.name}={_fmt(getattr(p, f.name))}" for f in dataclasses.fields(p))
    return [f"ddesim {command} (version {__version__})", fields]


def _solve_steady(cfg: RunConfig):
    h, jumps, layout = build_full_model(cfg.params)
    liou = build_liouvillian(h, jumps, layout)
    return liou, steady_state(liou), layout


def cmd_populations(cfg: RunConfig):
    p = cfg.params
    t_max = cfg.t_max
    if t_max is None:
        omega = rabi_frequency(p)
        if omega <= 0:
            raise ConfigError("t_max is required when parameters define no oscillation")
        t_max = 2 * np.pi / omega  # two full population periods
    times = np.linspace(0.0, t_max, cfg.n_times)

    h, jumps, layout = build_full_model(p)
    liou = build_liouvillian(h, jumps, layout)
    res = evolve(liou, ground_state(layout), times)
    numeric = np.array([dicke_populations(s) for s in res.states])

    comments = _provenance("populations", cfg)
    try:
        delta, eta = closed_form_inputs(p)
        analytic = np.stack(analytic_populations(delta, eta, times), axis=1)
    except ValueError as exc:
        analytic = np.full((times.size, 4), np.nan)
        comments.append(f"closed form unavailable: {exc}")
    comments.append(f"propagation method: {res.method}")

    header = ["t_native", "t_seconds",
              "rho_e", "rho_s", "rho_a", "rho_g",
              "rho_e_analytic", "rho_s_analytic", "rho_a_analytic", "rho_g_analytic"]
    rows = [[t, t / p.gamma_a_abs, *num, *ana]
            for t, num, ana in zip(times, numeric, analytic)]
    return comments, header, rows, {"propagation_method": res.method}


def cmd_steady(cfg: RunConfig):
    p = cfg.params
    liou, rho_ss, layout = _solve_steady(cfg)
    rho2q = partial_trace(rho_ss, (0, 1))
    conc = concurrence(rho2q).value
    pops = dicke_populations(rho_ss)

    rows = [("concurrence", conc),
            ("rho_e", pops[0]), ("rho_s", pops[1]),
            ("rho_a", pops[2]), ("rho_g", pops[3]),
            ("n_qubit0", rho_ss.expect(embed(QUBIT_NUMBER, 0, layout)).real),
            ("n_qubit1", rho_ss.expect(embed(QUBIT_NUMBER, 1, layout)).real),
            ("n_boson", rho_ss.expect(boson_number(layout)).real),
            ("purity", float(np.trace(rho_ss.matrix @ rho_ss.matrix).real))]
    for i in range(4):
        for j in range(4):
            rows.append((f"rho2q_{i}_{j}_re", rho2q.matrix[i, j].real))
            rows.append((f"rho2q_{i}_{j}_im", rho2q.matrix[i, j].imag))
    d = layout.total_dim
    for i in range(d):
        for j in range(d):
            rows.append((f"rho_ss_{i}_{j}_re", rho_ss.matrix[i, j].real))
            rows.append((f"rho_ss_{i}_{j}_im", rho_ss.matrix[i, j].imag))

    comments = _provenance("steady", cfg)
    return comments, ["quantity", "value"], rows, {"concurrence": conc}


def cmd_g2(cfg: RunConfig):
    p = cfg.params
    liou, rho_ss, _ = _solve_steady(cfg)
    tau_max = cfg.tau_max if cfg.tau_max is not None else default_tau_max(p)
    trace = g2_trace(liou, rho_ss, tau_max, cfg.n_samples)

    comments = _provenance("g2", cfg)
    comments.append(
        f"g2_zero={_fmt(trace.g2_zero)}, asymptote={_fmt(trace.asymptote)}, "
        f"bright_emitters={list(trace.bright_emitters)}, method={trace.method}")
    header = ["tau_native", "tau_seconds", "raw", "normalized"]
    rows = [[t, t / p.gamma_a_abs, r, n]
            for t, r, n in zip(trace.taus, trace.raw, trace.normalized)]
    extra = {"g2_zero": trace.g2_zero, "asymptote": trace.asymptote,
             "tau_max": tau_max, "method": trace.method,
             "bright_emitters": list(trace.bright_emitters),
             "dark_emitters": list(trace.dark_emitters)}
    return comments, header, rows, extra


def _grid_spec(cfg: RunConfig, command: str, observables: tuple[str, ...]) -> GridSpec:
    default1, default2 = _MAP_DEFAULT_AXES[command]
    axis1 = cfg.axis_override(1) or default1
    axis2 = cfg.axis_override(2)
    if axis2 is None and cfg.axis_override(1) is None:
        axis2 = default2  # untouched config keeps the full 2-D default map
    try:
        return GridSpec(axis1=axis1, axis2=axis2, base=cfg.params, observables=observables)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cell_error(cell) -> str:
    # keep the single-record-per-row CSV intact
    return (cell.error or "").replace(",", ";").replace("\n", " ")


def _sweep_rows(result, value_fields):
    rows = []
    for cell in result.rows:
        axis2_value = cell.axis_values[1] if len(cell.axis_values) > 1 else None
        row = [cell.axis_values[0], axis2_value]
        row.extend(getattr(cell, f) for f in value_fields)
        row.append(_cell_error(cell))
        rows.append(row)
    return rows


def cmd_concurrence_map(cfg: RunConfig, workers: int):
    spec = _grid_spec(cfg, "concurrence-map", ("concurrence", "g2_zero"))
    result = run_sweep(spec, workers=workers)
    comments = _provenance("concurrence-map", cfg)
    comments.append(f"axis1={spec.axis1}, axis2={spec.axis2}")
    header = ["axis1_value", "axis2_value", "concurrence", "g2_zero", "error"]
    rows = _sweep_rows(result, ("concurrence", "g2_zero"))
    failed = sum(0 if r.ok else 1 for r in result.rows)
    extra = {"axis1": list(spec.axis1), "axis2": list(spec.axis2) if spec.axis2 else None,
             "cells": len(result.rows), "failed_cells": failed}
    return comments, header, rows, extra


def cmd_timescale_map(cfg: RunConfig, workers: int):
    spec = _grid_spec(cfg, "timescale-map", ("timescale",))
    result = run_sweep(spec, workers=workers)
    p = cfg.params
    unit_scale = np.pi if cfg.pi_units else 1.0
    unit_name = "T = 1/(pi*gamma_a)" if cfg.pi_units else "T = 1/gamma_a"

    comments = _provenance("timescale-map", cfg)
    comments.append(f"axis1={spec.axis1}, axis2={spec.axis2}")
    comments.append(f"period_display unit: {unit_name}")
    header = ["axis1_value", "axis2_value", "period_native", "period_seconds",
              "period_display", "error"]
    rows = []
    for cell in result.rows:
        axis2_value = cell.axis_values[1] if len(cell.axis_values) > 1 else None
        if cell.period_native is None:
            rows.append([cell.axis_values[0], axis2_value, None, None, None,
                         _cell_error(cell)])
        else:
            rows.append([cell.axis_values[0], axis2_value, cell.period_native,
                         cell.period_native / p.gamma_a_abs,
                         cell.period_native * unit_scale, _cell_error(cell)])
    failed = sum(0 if r.ok else 1 for r in result.rows)
    extra = {"axis1": list(spec.axis1), "axis2": list(spec.axis2) if spec.axis2 else None,
             "cells": len(result.rows), "failed_cells": failed,
             "display_unit": unit_name}
    return comments, header, rows, extra


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddesim",
        description="Steady states, entanglement, and photon correlations of "
                    "two driven qubits coupled through a lossy bosonic mode.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("populations", "population dynamics vs the closed-form oracle"),
            ("steady", "steady state, Dicke populations, concurrence"),
            ("concurrence-map", "parameter-grid map of concurrence and g2(0)"),
            ("g2", "photon correlation trace g2(tau)"),
            ("timescale-map", "parameter-grid map of the anti-bunching timescale"),
            ("validate", "run the invariant battery")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="key = value config file")
        cmd.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="override one config key (repeatable)")
        cmd.add_argument("--out", help="output CSV path (default <command>.csv)")
        cmd.add_argument("--workers", type=int,
                         help="parallel worker processes for map commands")
        cmd.add_argument("--pi-units", action="store_true",
                         help="format map legend in T = 1/(pi*gamma_a) units")
    return parser


_HANDLERS = {
    "populations": cmd_populations,
    "steady": cmd_steady,
    "g2": cmd_g2,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, tuple(args.set))
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out=args.out)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError(f"invalid value for key 'workers': {args.workers}")
            cfg = dataclasses.replace(cfg, workers=args.workers)
        if args.pi_units:
            cfg = dataclasses.replace(cfg, pi_units=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        failures = run_validation()
        if failures:
            print(f"validation failed: {failures} check(s)", file=sys.stderr)
            return 3
        return 0

    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    out = cfg.out or args.command.replace("-", "_") + ".csv"
    t0 = time.perf_counter()
    try:
        if args.command == "concurrence-map":
            payload = cmd_concurrence_map(cfg, workers)
        elif args.command == "timescale-map":
            payload = cmd_timescale_map(cfg, workers)
        else:
            payload = _HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, DarkEmitterError, FlatSpectrumError, ValueError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2

    comments, header, rows, extra = payload
    try:
        _write_csv(out, comments, header, rows)
        _write_meta(out, args.command, cfg, time.perf_counter() - t0, extra)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out} and {out}.meta.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
