"""Batch front end: run simulations and single-shot analyses reproducibly.

Subcommands:

* ``run``      full simulation from a configuration file
* ``analyze``  diagnostics for one state read back from a snapshot file
* ``identity`` flux-identity defect sweep over grid refinement
* ``fit``      double-exponential lower-bound fit of a diagnostics CSV

The tool is unconditionally deterministic: it uses no random state and stamps
every output with the configuration hash, so identical configurations produce
identical files.  ``--seed-free`` merely records that contract in the outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import continuation_report, fit_double_exponential, identity_defect
from .config import ParsedConfig, parse_config, with_grid
from .errors import ConfigError, ContourError
from .evolve import SimState, run as run_simulation
from .geometry import Model
from .io import (
    DiagnosticsCsvSink,
    SnapshotJsonlSink,
    read_diagnostics,
    read_snapshots,
)
from .kernels import VorticityStrength
from .muskat import solve_vorticity_equal, solve_vorticity_general
from .profiles import build_initial

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def initial_state(parsed: ParsedConfig) -> SimState:
    """Build the initial state; Muskat strength comes from the model closure."""
    curve, omega = build_initial(parsed.initial, parsed.sim.grid)
    if parsed.sim.params.model is Model.MUSKAT:
        if abs(parsed.sim.params.viscosity_jump) <= 1e-14 * parsed.sim.params.viscosity_mean:
            omega = solve_vorticity_equal(curve, parsed.sim.params)
        else:
            omega = solve_vorticity_general(
                curve,
                parsed.sim.params,
                tol=parsed.sim.picard_tol,
                max_iter=parsed.sim.picard_max_iter,
            )
    return SimState(curve=curve, omega=omega, t=0.0)


def _cmd_run(args: argparse.Namespace) -> int:
    parsed = parse_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    state = initial_state(parsed)
    with open(outdir / "diagnostics.csv", "w", encoding="utf-8") as diag_fh, open(
        outdir / "snapshots.jsonl", "w", encoding="utf-8"
    ) as snap_fh:
        sinks = (
            DiagnosticsCsvSink(diag_fh, parsed.sha256, __version__),
            SnapshotJsonlSink(snap_fh, parsed.sha256, __version__),
        )
        summary = run_simulation(parsed.sim, state, sinks)
    record = dataclasses.asdict(summary)
    record["config_sha256"] = parsed.sha256
    record["version"] = __version__
    record["seed_free"] = True
    (outdir / "summary.json").write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(record))
    return EXIT_OK if summary.status == "completed" else EXIT_RUNTIME


def _cmd_analyze(args: argparse.Namespace) -> int:
    parsed = parse_config(args.config)
    snapshots = read_snapshots(args.infile)
    t, curve = snapshots[args.index]
    params = parsed.sim.params
    if params.model is Model.MUSKAT:
        if abs(params.viscosity_jump) <= 1e-14 * params.viscosity_mean:
            omega = solve_vorticity_equal(curve, params)
        else:
            omega = solve_vorticity_general(curve, params)
        omega_source = "model closure"
    else:
        omega = VorticityStrength(curve.grid, np.zeros(curve.grid.node_count))
        omega_source = "zero (sheet strength is prognostic and not stored in snapshots)"
    report = continuation_report(curve, omega, params, t=t)
    value_i, value_it, defect = identity_defect(curve)
    record = dataclasses.asdict(report)
    record.update(
        {
            "identity_I": value_i,
            "identity_Itilde": value_it,
            "identity_defect": defect,
            "omega_source": omega_source,
            "config_sha256": parsed.sha256,
            "version": __version__,
        }
    )
    print(json.dumps(record, indent=2))
    return EXIT_OK


def _cmd_identity(args: argparse.Namespace) -> int:
    parsed = parse_config(args.config)
    base_n = parsed.sim.grid.node_count
    sweep = sorted({max(64, base_n // 8), max(64, base_n // 4), max(64, base_n // 2), base_n})
    rows = []
    for n in sweep:
        refined = with_grid(parsed, n)
        curve, _ = build_initial(refined.initial, refined.sim.grid)
        _, _, defect = identity_defect(curve)
        rows.append((n, defect))
        print(f"{n:8d}  {defect:.6e}")
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "identity.csv", "w", encoding="utf-8") as fh:
            fh.write(f"# contourdyn.identity v{__version__}\n")
            fh.write(f"# config_sha256={parsed.sha256}\n")
            fh.write("N,defect\n")
            for n, defect in rows:
                fh.write(f"{n},{defect!r}\n")
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    data = read_diagnostics(args.infile)
    fit = fit_double_exponential(data["t"], data["m"], fit_slack=args.slack)
    record = dataclasses.asdict(fit)
    record["version"] = __version__
    print(json.dumps(record, indent=2))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contourdyn",
        description="Contour dynamics for confined two-phase interfaces.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a full simulation")
    p_run.add_argument("--config", required=True, help="configuration file")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--seed-free", action="store_true", help="assert deterministic operation")
    p_run.add_argument("--verbose", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze", help="diagnostics for one stored snapshot")
    p_an.add_argument("--config", required=True)
    p_an.add_argument("--in", dest="infile", required=True, help="snapshots.jsonl path")
    p_an.add_argument("--index", type=int, default=-1, help="snapshot index (default: last)")
    p_an.add_argument("--verbose", action="store_true")
    p_an.set_defaults(func=_cmd_analyze)

    p_id = sub.add_parser("identity", help="flux-identity defect refinement sweep")
    p_id.add_argument("--config", required=True)
    p_id.add_argument("--out", default=None, help="optional output directory")
    p_id.add_argument("--verbose", action="store_true")
    p_id.set_defaults(func=_cmd_identity)

    p_fit = sub.add_parser("fit", help="double-exponential bound fit of a diagnostics CSV")
    p_fit.add_argument("--in", dest="infile", required=True, help="diagnostics.csv path")
    p_fit.add_argument("--slack", type=float, default=1e-2, help="certificate slack")
    p_fit.add_argument("--verbose", action="store_true")
    p_fit.set_defaults(func=_cmd_fit)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        record = {"error": type(exc).__name__, "detail": str(exc)}
        if hasattr(exc, "line"):
            record["line"] = exc.line
        print(json.dumps(record), file=sys.stderr)
        return EXIT_CONFIG
    except ContourError as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
