"""Command-line interface: ``simulate``, ``calibrate``, ``compare``, ``sweep``.

Exit codes: 0 success, 1 usage or input error, 2 coverage verdict failed.
``LCXPLAN_WORKERS`` sets the default worker count.
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
import tempfile
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import formats
from .calibration import apply_calibration, error_table, estimate_coupling_loss, rssi_table
from .environment import ENGINES
from .errors import LcxError, ParseError
from .linkbudget import Frequency
from .propagation import EngineConfig, simulate

EXIT_OK, EXIT_USAGE, EXIT_VERDICT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_workers() -> int:
    raw = os.environ.get("LCXPLAN_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"LCXPLAN_WORKERS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"LCXPLAN_WORKERS must be a positive integer, got {raw!r}")
    return n


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lcxplan", description="Coverage planning for leaky coaxial cable installations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def engine_flags(p):
        p.add_argument("--engine", action="append", choices=ENGINES,
                       help="engine to run (repeatable); overrides the scenario")
        p.add_argument("--quantile", choices=("lc50", "lc95"), help="coupling-loss quantile")
        p.add_argument("--workers", type=_positive_int, help="worker threads (default $LCXPLAN_WORKERS or 1)")
        p.add_argument("--cable", type=Path, help="cable spec overriding the scenario's")
        p.add_argument("--output", type=Path, help="output directory")
        p.add_argument("--band", action="store_true",
                       help="also write best/worst grids for the coupling-loss tolerance")

    p = sub.add_parser("simulate", help="coverage maps for a scenario")
    p.add_argument("scenario", type=Path, nargs="?")
    p.add_argument("--manifest", type=Path, help="re-run the computation recorded in a manifest")
    p.add_argument("--frequency", type=float, action="append", metavar="GHZ",
                   help="frequency in GHz (repeatable); overrides the scenario")
    engine_flags(p)

    p = sub.add_parser("sweep", help="coverage maps over the preset service frequencies")
    p.add_argument("scenario", type=Path)
    engine_flags(p)

    p = sub.add_parser("calibrate", help="coupling loss from a measurement set")
    p.add_argument("measurements", type=Path)
    p.add_argument("cable", type=Path)
    p.add_argument("--output", type=Path, default=Path("."), help="output directory")

    p = sub.add_parser("compare", help="measurement-vs-simulation error and RSSI tables")
    p.add_argument("measurements", type=Path)
    p.add_argument("--maps", type=Path, action="append", default=[],
                   help="grid file or simulate output directory (repeatable)")
    p.add_argument("--scenario", type=Path, help="simulate maps from this scenario instead")
    p.add_argument("--sensitivity", type=float, metavar="DBM",
                   help="receiver sensitivity for the coverage verdict")
    p.add_argument("--workers", type=_positive_int)
    p.add_argument("--output", type=Path, default=Path("."), help="output directory")
    return parser


# --------------------------------------------------------------------------

def _load_inputs(scenario: formats.ScenarioConfig, cable_path: Path):
    spec = formats.parse_cable_spec(cable_path)
    layout = formats.parse_layout(scenario.layout)
    env = formats.parse_environment(scenario.environment)
    _check_units(scenario.layout, layout, env)
    return spec, layout, env


def _check_units(layout_path, layout, env):
    """Refuse a cable that lies nowhere near the grid: usually a unit mix-up."""
    ox, oy = env.grid_origin
    w, h = env.grid_extent
    margin = max(w, h)
    lo = layout.path.min(axis=0)
    hi = layout.path.max(axis=0)
    near = (hi[0] >= ox - margin and lo[0] <= ox + w + margin
            and hi[1] >= oy - margin and lo[1] <= oy + h + margin)
    span = float(np.hypot(*(hi - lo)))
    scale_ok = span <= 10 * np.hypot(w, h)
    if not (near and scale_ok):
        raise ParseError(layout_path, None,
                         f"cable ({layout.length:g} m long, bbox {lo.tolist()}..{hi.tolist()}) does not "
                         f"fit the environment grid ({w:g} x {h:g} m at {env.grid_origin}); "
                         "check that layout and environment use metres")


def _engine_configs(scenario, args, workers):
    engines = args.engine or scenario.engines
    quantile = args.quantile or scenario.quantile
    return [EngineConfig(engine=e, quantile=quantile, discretization_interval=scenario.interval,
                         include_barrier_reflection=scenario.include_barrier_reflection,
                         worker_count=workers, velocity_factor=scenario.velocity_factor)
            for e in engines]


def _map_dirname(cmap) -> str:
    return f"{cmap.engine}_{cmap.frequency.ghz:g}GHz"


def _commit(output: Path, files: dict[str, str]):
    """Write all files or none: stage in a sibling temp dir, then move into place."""
    output.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".lcxplan-", dir=output))
    try:
        formats.write_files(staging, files)
        for name in files:
            target = output / name
            target.parent.mkdir(parents=True, exist_ok=True)
            os.replace(staging / name, target)
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def _run_maps(scenario, args, frequencies, workers, out):
    cable_path = (args.cable or scenario.cable).resolve()
    spec, layout, env = _load_inputs(scenario, cable_path)
    files, maps = {}, []
    for cfg in _engine_configs(scenario, args, workers):
        for f in frequencies:
            cmap = simulate(layout, spec, env, f, scenario.params, cfg)
            manifest = formats.manifest_text(cmap, replace(scenario, cable=cable_path), cable_path)
            for name, text in formats.coverage_files(cmap, manifest, scenario.window,
                                                     band=args.band).items():
                files[f"{_map_dirname(cmap)}/{name}"] = text
            maps.append(cmap)
    _commit(out, files)
    return maps


def cmd_simulate(args, workers) -> int:
    if (args.scenario is None) == (args.manifest is None):
        raise UsageError("simulate: give either a scenario file or --manifest")
    if args.manifest is not None:
        scenario = formats.parse_manifest(args.manifest)
    else:
        scenario = formats.parse_scenario(args.scenario)
    freqs = [Frequency.from_ghz(g) for g in args.frequency] if args.frequency else scenario.frequencies
    out = args.output or scenario.output
    maps = _run_maps(scenario, args, freqs, workers, out)
    for m in maps:
        print(f"{_map_dirname(m)}\tmin {m.cells.min():.2f} dBm\tmax {m.cells.max():.2f} dBm")
    return EXIT_OK


def cmd_sweep(args, workers) -> int:
    scenario = formats.parse_scenario(args.scenario)
    out = args.output or scenario.output
    maps = _run_maps(scenario, args, formats.preset_frequencies(), workers, out)
    lines = ["engine\tf_ghz\tmin_dbm\tmean_dbm\tmax_dbm"]
    for m in maps:
        lines.append(f"{m.engine}\t{m.frequency.ghz:g}\t{m.cells.min():.2f}\t"
                     f"{m.cells.mean():.2f}\t{m.cells.max():.2f}")
    summary = "\n".join(lines) + "\n"
    _commit(out, {"sweep_summary.tsv": summary})
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    mset = formats.parse_measurements(args.measurements)
    spec = formats.parse_cable_spec(args.cable)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = estimate_coupling_loss(mset, spec)
    calibrated = apply_calibration(spec, result)
    calibrated = replace(calibrated, name=f"{spec.name} calibrated with {mset.source}")
    _commit(args.output, {"calibrated_cable.txt": formats.cable_spec_text(calibrated),
                          "calibration.tsv": formats.calibration_text(result)})
    sys.stdout.write(formats.calibration_text(result))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return EXIT_OK


def _load_maps(paths):
    maps = []
    for p in paths:
        if p.is_dir():
            grids = sorted(p.glob("grid.csv")) or sorted(p.glob("*/grid.csv"))
            if not grids:
                raise ParseError(p, None, "no grid.csv found")
            maps.extend(formats.parse_grid(g) for g in grids)
        else:
            maps.append(formats.parse_grid(p))
    return maps


def cmd_compare(args, workers) -> int:
    mset = formats.parse_measurements(args.measurements)
    maps = _load_maps(args.maps)
    if args.scenario is not None:
        scenario = formats.parse_scenario(args.scenario)
        spec, layout, env = _load_inputs(scenario, scenario.cable)
        for cfg in _engine_configs(scenario, argparse.Namespace(engine=None, quantile=None), workers)[:1]:
            maps.extend(simulate(layout, spec, env, f, scenario.params, cfg) for f in mset.frequencies)
    files, verdict = {}, True
    if maps:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table = error_table(mset, maps)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        files["error_table.tsv"] = formats.error_table_text(table)
        sys.stdout.write("mean error (simulated - measured) in dB\n" + files["error_table.tsv"])
    sensitivity = args.sensitivity if args.sensitivity is not None else float("-inf")
    freqs = mset.frequencies
    for f in freqs:
        sub = replace(mset, records=tuple(r for r in mset.records if r.frequency == f))
        rt = rssi_table(sub, sensitivity)
        name = "rssi_table.tsv" if len(freqs) == 1 else f"rssi_table_{f.ghz:g}GHz.tsv"
        files[name] = formats.rssi_table_text(rt)
        verdict &= rt.verdict
        sys.stdout.write(f"mean received power at {f} in dBm\n" + files[name])
    _commit(args.output, files)
    if args.sensitivity is not None:
        print(f"verdict: {'covered' if verdict else 'NOT covered'} at {args.sensitivity:g} dBm")
        if not verdict:
            return EXIT_VERDICT
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        workers = getattr(args, "workers", None) or _default_workers()
        if args.command == "simulate":
            return cmd_simulate(args, workers)
        if args.command == "sweep":
            return cmd_sweep(args, workers)
        if args.command == "calibrate":
            return cmd_calibrate(args)
        return cmd_compare(args, workers)
    except UsageError as exc:
        print(f"lcxplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LcxError, OSError) as exc:
        print(f"lcxplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
