"""Command-line front end.

Subcommands write plot-ready CSV series and JSON reports into ``--out``.
Exit codes: 0 ok, 2 configuration error, 3 numerical-health failure,
4 reference-diff failure (``table1`` only).
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .analysis import (AsymptoticRegimeWarning, central_lobe_slope, critical_alpha,
                       find_special_momenta, flux_difference, local_momentum, moments)
from .bohmian import (asymptotic_velocities, equivariance_distance, integrate_trajectories,
                      sample_initial_positions, tag_special_trajectories)
from .classical import (evolve_ensemble, extremal_crossing_time, fig6_preset, init_ensemble,
                        is_momentum_ordered, ordering_time)
from .config import FORMATS, SimConfig, load_config, with_overrides
from .errors import ConfigError, NoExtremumError, NumericalHealthError
from .grid import propagate
from .output import write_columns, write_csv, write_json
from .reference import FLUX_TOLERANCE, FLUXES, WEIGHT_RATIO, compare_row
from .synthesis import state_spectrum

EXIT_OK, EXIT_CONFIG, EXIT_HEALTH, EXIT_DIFF = 0, 2, 3, 4
NORM_DRIFT_LIMIT = 1e-10
ASYMPTOTIC_T_END = 50.0

log = logging.getLogger("superband")


class Run:
    """Per-invocation context: config, output directory and file bookkeeping."""

    def __init__(self, command: str, cfg: SimConfig, threads: int = 1):
        self.command = command
        self.cfg = cfg
        self.threads = threads
        self.out = Path(cfg.output.directory)
        self.files: list[Path] = []

    @property
    def want_csv(self) -> bool:
        return self.cfg.output.formats in ("csv", "both")

    @property
    def want_json(self) -> bool:
        return self.cfg.output.formats in ("json", "both")

    def meta(self, **extra) -> dict:
        m = {"software": f"superband {__version__}", "command": self.command,
             "config_hash": self.cfg.hash(), "seed": self.cfg.run.seed}
        m.update(extra)
        return m

    def csv(self, name: str, columns, rows, **extra):
        if self.want_csv:
            self.files.append(write_csv(self.out / name, columns, rows, self.meta(**extra)))

    def columns(self, name: str, data: dict, **extra):
        if self.want_csv:
            self.files.append(write_columns(self.out / name, data, self.meta(**extra)))

    def report(self, name: str, body: dict, force: bool = False):
        if self.want_json or force:
            doc = {"meta": self.meta(), "config": self.cfg.echo(), "results": body}
            self.files.append(write_json(self.out / name, doc))


def _tag(value: float) -> str:
    return f"{value:g}"


def _record_dict(rec) -> dict:
    return asdict(rec)


# -- evolve --------------------------------------------------------------------

def cmd_evolve(run: Run) -> int:
    cfg = run.cfg
    summary = []
    status = EXIT_OK
    for alpha in cfg.run.alphas:
        params = cfg.params(alpha)
        grid = cfg.make_grid(states=[params])
        spectrum0 = state_spectrum(params, grid)
        norm0 = spectrum0.norm()
        for t in cfg.run.times:
            field = propagate(spectrum0, t)
            drift = abs(field.norm() - norm0) / norm0
            lm = local_momentum(field, cfg.run.floor)
            rho = field.density
            keep = np.flatnonzero(rho >= cfg.output.x_window * rho.max())
            sl = slice(keep[0], keep[-1] + 1, cfg.output.stride)
            run.columns(f"evolve_alpha{_tag(alpha)}_t{_tag(t)}.csv", {
                "x": field.x[sl], "re_psi": field.amplitudes.real[sl],
                "im_psi": field.amplitudes.imag[sl], "density": rho[sl],
                "local_momentum_over_k0": lm.values[sl] / params.kappa0,
                "valid_mask": lm.valid_mask[sl]}, alpha=alpha, t=t)
            mean, std = moments(field)
            entry = {"alpha": alpha, "t": t, "norm": field.norm(), "norm_drift": drift,
                     "mean_x": mean, "std_x": std}
            try:
                sup, sub = find_special_momenta(field, params, cfg.run.floor)
                entry["super"], entry["sub"] = _record_dict(sup), _record_dict(sub)
            except NoExtremumError:
                entry["super"] = entry["sub"] = None
            summary.append(entry)
            if drift > NORM_DRIFT_LIMIT:
                log.error("norm drift %.3g at alpha=%g t=%g", drift, alpha, t)
                status = EXIT_HEALTH
    if summary:
        run.report("evolve_report.json", {"fields": summary})
    return status


# -- table1 --------------------------------------------------------------------

TABLE1_COLUMNS = ("alpha", "t", "kappa_max_over_k0", "kappa_min_over_k0", "x_max", "x_min",
                  "density_at", "density_at_min", "spectrum_weight_log10", "weight_ratio")


def table1_rows(cfg: SimConfig) -> list[dict]:
    """Super/sub extremum summary for every configured ``(alpha, t)``."""
    rows = []
    for alpha in cfg.run.alphas:
        params = cfg.params(alpha)
        grid = cfg.make_grid(states=[params])
        spectrum0 = state_spectrum(params, grid)
        for t in cfg.run.times:
            try:
                sup, sub = find_special_momenta(propagate(spectrum0, t), params, cfg.run.floor)
            except NoExtremumError:
                rows.append({"alpha": alpha, "t": t, **{k: math.nan for k in TABLE1_COLUMNS[2:]}})
                continue
            rows.append({"alpha": alpha, "t": t,
                         "kappa_max_over_k0": sup.kappa_over_kappa0,
                         "kappa_min_over_k0": sub.kappa_over_kappa0,
                         "x_max": sup.x_at, "x_min": sub.x_at,
                         "density_at": sup.density_at, "density_at_min": sub.density_at,
                         "spectrum_weight_log10": sup.log10_spectrum_weight,
                         "weight_ratio": sup.weight_ratio})
    return rows


def table1_diff(rows: list[dict], tol_scale: float = 1.0) -> dict:
    """Cell-by-cell comparison against the embedded reference values."""
    diff_rows, ok = [], True
    for row in rows:
        computed = dict(row, density=row["density_at"],
                        log10_spectrum_weight=row["spectrum_weight_log10"])
        try:
            cells = compare_row(computed, tol_scale)
        except KeyError:
            continue
        ok &= all(c["pass"] for c in cells.values())
        diff_rows.append({"alpha": row["alpha"], "t": row["t"], "cells": cells})
    anchors = []
    for row in rows:
        if math.isclose(row["alpha"], 1.0) and row["t"] in WEIGHT_RATIO:
            want, tol = WEIGHT_RATIO[row["t"]]
            got = row["weight_ratio"]
            if tol == "decade":
                err = abs(math.log10(got) - math.log10(want))
                passed = err <= 1.0 * tol_scale
            else:
                err = abs(got - want) / want
                passed = err <= tol * tol_scale
            ok &= passed
            anchors.append({"t": row["t"], "computed": got, "reference": want,
                            "error": err, "tolerance": tol, "pass": passed})
    return {"pass": ok, "tol_scale": tol_scale, "rows": diff_rows, "weight_ratio": anchors}


def cmd_table1(run: Run, tol_scale: float = 1.0) -> int:
    rows = table1_rows(run.cfg)
    run.csv("table1.csv", TABLE1_COLUMNS, ([r[c] for c in TABLE1_COLUMNS] for r in rows),
            normalization=run.cfg.state.normalization)
    diff = table1_diff(rows, tol_scale)
    run.report("table1_diff.json", diff, force=True)
    return EXIT_OK if diff["pass"] else EXIT_DIFF


# -- flux ----------------------------------------------------------------------

def flux_planes(cfg: SimConfig, params, spectrum0) -> tuple[float, float]:
    """Planes at the extremum positions at ``flux_time`` unless overridden."""
    if cfg.run.flux_planes is not None:
        return tuple(sorted(cfg.run.flux_planes))
    sup, sub = find_special_momenta(propagate(spectrum0, cfg.run.flux_time), params,
                                    cfg.run.floor)
    return tuple(sorted((sup.x_at, sub.x_at)))


def cmd_flux(run: Run) -> int:
    cfg = run.cfg
    t_i, t_f = cfg.run.flux_window
    rows, body = [], []
    for alpha in cfg.run.alphas:
        params = cfg.params(alpha)
        spectrum0 = state_spectrum(params, cfg.make_grid(states=[params]))
        x_l, x_r = flux_planes(cfg, params, spectrum0)
        fd = flux_difference(spectrum0, x_l, x_r, t_i, t_f)
        entry = {"alpha": alpha, "x_left": x_l, "x_right": x_r, "delta": fd.delta,
                 "p_initial": fd.p_initial, "p_final": fd.p_final, "verdict": fd.verdict,
                 "planes": {}}
        for side, rep in (("left", fd.left), ("right", fd.right)):
            rows.append((alpha, side, rep.x_plane, rep.t_i, rep.t_f, rep.flux_by_current,
                         rep.flux_by_probability, rep.discrepancy))
            plane = asdict(rep)
            ref = FLUXES.get((alpha, side))
            if ref is not None:
                err = abs(rep.flux_by_current - ref) / ref
                plane["reference"] = {"value": ref, "relative_error": err,
                                      "pass": err <= FLUX_TOLERANCE}
            entry["planes"][side] = plane
        body.append(entry)
    run.csv("flux.csv", ("alpha", "plane", "x_plane", "t_i", "t_f", "flux_by_current",
                         "flux_by_probability", "discrepancy"), rows)
    run.report("flux_report.json", {"scenarios": body})
    return EXIT_OK


# -- bohm ----------------------------------------------------------------------

def cmd_bohm(run: Run) -> int:
    cfg = run.cfg
    r = cfg.run
    params = cfg.params()
    x0 = sample_initial_positions(params, r.n_trajectories, r.initial_mode, r.seed,
                                  grid=cfg.make_grid(states=[params]))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ts = integrate_trajectories(params, x0, r.t_end, r.dt, r.output_dt,
                                    num_threads=run.threads, initial_mode=r.initial_mode,
                                    seed=r.seed)
        ts = tag_special_trajectories(ts)
    flag = np.zeros(ts.n_trajectories, dtype=int)
    if ts.super_index is not None:
        flag[ts.super_index] = 1
    if ts.sub_index is not None:
        flag[ts.sub_index] = 2
    n, m = ts.positions.shape
    run.columns(f"bohm_alpha{_tag(params.alpha)}.csv", {
        "trajectory_id": np.repeat(np.arange(n), m), "t": np.tile(ts.times, n),
        "x": ts.positions.ravel(), "special_flag": np.repeat(flag, m)},
        alpha=params.alpha, special_flag="0 none, 1 super, 2 sub")
    body = {"alpha": params.alpha, "n_trajectories": n, "initial_mode": r.initial_mode,
            "dt": r.dt, "t_end": r.t_end, "failed": int(ts.failed.sum()),
            "non_crossing": ts.is_non_crossing(), "super_index": ts.super_index,
            "sub_index": ts.sub_index, "warnings": [str(w.message) for w in caught]}
    if r.initial_mode == "born_sampled":
        body["equivariance"] = {_tag(t): equivariance_distance(ts, t)
                                for t in r.times if np.any(np.isclose(ts.times, t))}
    if r.t_end >= ASYMPTOTIC_T_END:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AsymptoticRegimeWarning)
            hist = asymptotic_velocities(ts)
        body["asymptotic_velocities"] = asdict(hist)
    run.report(f"bohm_alpha{_tag(params.alpha)}.json", body)
    return EXIT_HEALTH if ts.failed.any() else EXIT_OK


# -- classical -----------------------------------------------------------------

def _ensemble_rows(label, ens, times):
    for t in times:
        x = evolve_ensemble(ens, t)
        for i in range(ens.n):
            yield (label, i, ens.velocities[i], t, x[i])


def cmd_classical(run: Run) -> int:
    cfg = run.cfg
    r = cfg.run
    m, hbar = cfg.state.mass, cfg.state.hbar
    fig6 = fig6_preset(r.seed, m=m)
    rand = init_ensemble(r.classical_n, (0.0, 1.0), (m * 1.0, m * 2.3), m, r.seed,
                         "extremal_swapped")
    rows = list(_ensemble_rows("fig6", fig6, r.classical_times))
    rows += list(_ensemble_rows("random", rand, r.classical_times))
    run.csv("classical_positions.csv", ("ensemble", "particle", "velocity", "t", "x"), rows)
    body = {}
    for label, ens in (("fig6", fig6), ("random", rand)):
        dx = float(ens.x0.max() - ens.x0.min())
        body[label] = {"x0": ens.x0, "p": ens.p, "ordering_time": ordering_time(ens),
                       "extremal_crossing_time": extremal_crossing_time(ens),
                       "interference_time_width": m * dx * dx / hbar,
                       "ordered": {_tag(t): is_momentum_ordered(ens, t)
                                   for t in r.classical_times}}
    run.report("classical_report.json", body)
    return EXIT_OK


# -- sweep-alpha ---------------------------------------------------------------

def cmd_sweep_alpha(run: Run, t_probe: float = 1.0) -> int:
    cfg = run.cfg
    base = cfg.params()
    grid = cfg.make_grid(states=[base])
    rows = []
    for alpha in cfg.run.alpha_sweep:
        p = cfg.params(alpha)
        try:
            slope = central_lobe_slope(propagate(state_spectrum(p, grid), t_probe), p)
        except NoExtremumError:
            slope = math.nan
        rows.append((alpha, t_probe, slope))
    run.csv("sweep_alpha.csv", ("alpha", "t", "central_lobe_slope"), rows)
    body = {"t_probe": t_probe, "slopes": [{"alpha": a, "slope": s} for a, _, s in rows]}
    try:
        ca = critical_alpha(base, grid, t_probe)
        body["critical_alpha"] = asdict(ca)
    except NoExtremumError as exc:
        body["critical_alpha"] = None
        body["critical_alpha_error"] = str(exc)
    run.report("sweep_alpha.json", body)
    return EXIT_OK


# -- entry point ---------------------------------------------------------------

COMMANDS = {"evolve": cmd_evolve, "table1": cmd_table1, "flux": cmd_flux, "bohm": cmd_bohm,
            "classical": cmd_classical, "sweep-alpha": cmd_sweep_alpha}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    common.add_argument("--seed", type=int, metavar="N", help="random seed (overrides config)")
    common.add_argument("--alpha", type=float, metavar="X", help="single alpha (overrides config)")
    common.add_argument("--times", metavar="CSVLIST",
                        help="comma-separated evaluation times; empty string for none")
    common.add_argument("--format", choices=FORMATS, help="output formats")
    common.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads for trajectory integration")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="superband", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"superband {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="density and local momentum per time")
    t1 = sub.add_parser("table1", parents=[common], help="extremum summary and reference diff")
    t1.add_argument("--tol-scale", type=float, default=1.0, metavar="S",
                    help="multiply every reference tolerance by S")
    sub.add_parser("flux", parents=[common], help="probability flux through the extremum planes")
    sub.add_parser("bohm", parents=[common], help="Bohmian trajectories")
    sub.add_parser("classical", parents=[common], help="classical ensemble ordering")
    sub.add_parser("sweep-alpha", parents=[common], help="central-lobe slope and critical alpha")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = with_overrides(load_config(args.config), out=args.out, seed=args.seed,
                             alpha=args.alpha, times=args.times, formats=args.format)
    except ConfigError as exc:
        print(f"superband: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run = Run(args.command, cfg, args.threads)
    start = time.perf_counter()
    try:
        if args.command == "table1":
            status = cmd_table1(run, args.tol_scale)
        else:
            status = COMMANDS[args.command](run)
    except NumericalHealthError as exc:
        print(f"superband: numerical health failure: {exc}", file=sys.stderr)
        return EXIT_HEALTH
    except NoExtremumError as exc:
        # e.g. automatic flux planes for a state without extrema
        print(f"superband: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("%s finished in %.2f s (backend %s, config %s); %d file(s)", args.command,
             time.perf_counter() - start, kernels.BACKEND, cfg.hash(), len(run.files))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
