"""Line-oriented text formats.

Every document opens with a ``<kind> <version>`` header line. ``#`` starts
a comment anywhere on a line. Keys are single words followed by
whitespace-separated values; column order is fixed. dBm values in emitted
grids carry two decimals.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cable import CableLayout, CableRow, CableSpec
from .calibration import (CalibrationResult, ErrorTable, MeasurementRecord, MeasurementSet,
                          RssiTable)
from .environment import Barrier, CoverageMap, Environment, Obstacle
from .errors import DomainError, ParseError
from .linkbudget import DEFAULT_LATERAL_CLAMP, DEFAULT_LOSS_EXPONENT, Frequency, LinkBudgetParams

SCHEMA_VERSION = 1
DEFAULT_WINDOW = (-120.0, -20.0)

PRESET_FREQUENCIES_GHZ = {
    "fm_tmc": 0.1,
    "dab_plus": 0.2,
    "gsm_2g": 0.9,
    "lte_4g": 1.8,
    "wifi_2g4": 2.4,
    "nr_5g": 3.6,
    "its_g5": 5.9,
}


def preset_frequencies() -> list[Frequency]:
    return sorted(Frequency.from_ghz(v) for v in PRESET_FREQUENCIES_GHZ.values())


# --------------------------------------------------------------------------
# reading

def _lines(path, kind: str):
    """Yield ``(line_no, key, values)`` after validating the header."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(path, None, f"cannot read file: {exc.strerror or exc}") from None
    header_seen = False
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if not header_seen:
            if tokens[0] != kind:
                raise ParseError(path, no, f"expected header '{kind} {SCHEMA_VERSION}', got {line!r}")
            if len(tokens) != 2 or tokens[1] != str(SCHEMA_VERSION):
                raise ParseError(path, no, f"unsupported {kind} schema version {' '.join(tokens[1:])!r}")
            header_seen = True
            continue
        yield no, tokens[0], tokens[1:]
    if not header_seen:
        raise ParseError(path, None, f"missing '{kind} {SCHEMA_VERSION}' header")


def _floats(path, no, key, values, count=None):
    if count is not None and len(values) != count:
        raise ParseError(path, no, f"'{key}' expects {count} value(s), got {len(values)}")
    try:
        out = [float(v) for v in values]
    except ValueError:
        raise ParseError(path, no, f"'{key}' has a non-numeric value in {values}") from None
    if not all(math.isfinite(v) for v in out):
        raise ParseError(path, no, f"'{key}' has a non-finite value")
    return out


def _single(path, no, key, values):
    if len(values) != 1:
        raise ParseError(path, no, f"'{key}' expects 1 value, got {len(values)}")
    return values[0]


def _bool(path, no, key, values):
    v = _single(path, no, key, values).lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ParseError(path, no, f"'{key}' expects true/false, got {v!r}")


def _unknown(path, no, key):
    raise ParseError(path, no, f"unknown key {key!r}")


def _build(where, factory, /, **kwargs):
    try:
        return factory(**kwargs)
    except DomainError as exc:
        raise ParseError(where, None, f"invariant violated: {exc}") from None


def parse_cable_spec(path) -> CableSpec:
    name, tol, ref, rows = Path(path).stem, 0.0, 2.0, []
    for no, key, vals in _lines(path, "lcx-cable"):
        if key == "name":
            name = " ".join(vals)
        elif key == "lc_tolerance":
            tol = _floats(path, no, key, vals, 1)[0]
        elif key == "reference_lateral_distance":
            ref = _floats(path, no, key, vals, 1)[0]
        elif key == "row":
            f_ghz, alpha, lc50, lc95 = _floats(path, no, key, vals, 4)
            if f_ghz <= 0:
                raise ParseError(path, no, "frequency must be > 0")
            if alpha < 0:
                raise ParseError(path, no, "invariant violated: alpha >= 0")
            if lc95 < lc50:
                raise ParseError(path, no, "invariant violated: lc95 >= lc50")
            rows.append(CableRow(Frequency.from_ghz(f_ghz), alpha, lc50, lc95))
        else:
            _unknown(path, no, key)
    return _build(path, CableSpec, name=name, rows=tuple(rows), lc_tolerance=tol,
                  reference_lateral_distance=ref)


def parse_layout(path) -> CableLayout:
    verts, opts = [], {}
    for no, key, vals in _lines(path, "lcx-layout"):
        if key == "vertex":
            verts.append(_floats(path, no, key, vals, 2))
        elif key in ("feed_end", "termination"):
            opts[key] = _single(path, no, key, vals)
        elif key == "mount_height":
            opts[key] = _floats(path, no, key, vals, 1)[0]
        else:
            _unknown(path, no, key)
    return _build(path, CableLayout, path=np.array(verts, dtype=float).reshape(-1, 2), **opts)


def parse_environment(path) -> Environment:
    opts, barriers, obstacles = {}, [], []
    for no, key, vals in _lines(path, "lcx-environment"):
        if key in ("grid_origin", "grid_extent"):
            opts[key] = tuple(_floats(path, no, key, vals, 2))
        elif key in ("grid_resolution", "receiver_height"):
            opts[key] = _floats(path, no, key, vals, 1)[0]
        elif key == "barrier":
            x1, y1, x2, y2, gain = _floats(path, no, key, vals, 5)
            try:
                barriers.append(Barrier((x1, y1), (x2, y2), gain))
            except DomainError as exc:
                raise ParseError(path, no, str(exc)) from None
        elif key == "obstacle":
            nums = _floats(path, no, key, vals)
            if len(nums) < 7 or len(nums) % 2 != 1:
                raise ParseError(path, no, "obstacle expects a loss followed by >= 3 x y pairs")
            try:
                obstacles.append(Obstacle(np.array(nums[1:]).reshape(-1, 2), nums[0]))
            except DomainError as exc:
                raise ParseError(path, no, f"invariant violated: {exc}") from None
        else:
            _unknown(path, no, key)
    for required in ("grid_origin", "grid_extent", "grid_resolution"):
        if required not in opts:
            raise ParseError(path, None, f"missing required key {required!r}")
    return _build(path, Environment, barriers=tuple(barriers), obstacles=tuple(obstacles), **opts)


_RIG_KEYS = ("transmit_power", "loss_exponent", "connector_loss", "receiver_gain_dbd", "lateral_clamp")


def parse_measurements(path) -> MeasurementSet:
    path = Path(path)
    rig, records, opts = {}, [], {"source": path.name}
    layout_ref = None
    for no, key, vals in _lines(path, "lcx-measurements"):
        try:
            float(key)
            is_record = True
        except ValueError:
            is_record = False
        if is_record:
            nums = _floats(path, no, "record", [key, *vals])
            if len(nums) < 4:
                raise ParseError(path, no, "record expects d_lon d_lat f_ghz and at least one sample")
            try:
                records.append(MeasurementRecord(nums[0], nums[1], Frequency.from_ghz(nums[2]),
                                                 tuple(nums[3:])))
            except DomainError as exc:
                raise ParseError(path, no, f"invariant violated: {exc}") from None
        elif key == "layout":
            layout_ref = (no, _single(path, no, key, vals))
        elif key == "side":
            opts["side"] = _single(path, no, key, vals)
        elif key == "source":
            opts["source"] = " ".join(vals)
        elif key in _RIG_KEYS:
            rig[key] = _floats(path, no, key, vals, 1)[0]
        else:
            _unknown(path, no, key)
    if layout_ref is None:
        raise ParseError(path, None, "missing required key 'layout'")
    if "transmit_power" not in rig:
        raise ParseError(path, None, "missing required key 'transmit_power'")
    layout = parse_layout(path.parent / layout_ref[1])
    params = _build(path, LinkBudgetParams, **rig)
    return _build(path, MeasurementSet, records=tuple(records), rig=params, layout=layout, **opts)


# --------------------------------------------------------------------------
# scenarios and manifests

@dataclass
class ScenarioConfig:
    cable: Path
    layout: Path
    environment: Path
    frequencies: list
    params: LinkBudgetParams
    engines: list = field(default_factory=lambda: ["spl"])
    quantile: str = "lc50"
    interval: float | None = None
    include_barrier_reflection: bool = False
    velocity_factor: float = 0.88
    measurements: Path | None = None
    output: Path = Path("lcx-output")
    window: tuple = DEFAULT_WINDOW
    source: Path | None = None


def parse_scenario(path, kind: str = "lcx-scenario") -> ScenarioConfig:
    path = Path(path)
    base = path.parent
    opts, rig, freqs, engines = {}, {}, [], []
    digests = {}
    for no, key, vals in _lines(path, kind):
        if key in ("cable", "layout", "environment", "measurements", "output"):
            opts[key] = (base / " ".join(vals)).resolve()
        elif key in ("frequency", "frequency_hz"):
            values = _floats(path, no, key, vals)
            if any(v <= 0 for v in values):
                raise ParseError(path, no, "frequencies must be > 0")
            scale = 1e9 if key == "frequency" else 1.0
            freqs.extend(Frequency(v * scale) for v in values)
        elif key == "engine":
            engines.extend(vals)
        elif key in _RIG_KEYS:
            rig[key] = _floats(path, no, key, vals, 1)[0]
        elif key == "quantile":
            opts[key] = _single(path, no, key, vals)
        elif key == "interval":
            opts[key] = _floats(path, no, key, vals, 1)[0]
        elif key == "velocity_factor":
            opts[key] = _floats(path, no, key, vals, 1)[0]
        elif key == "barrier_reflection":
            opts["include_barrier_reflection"] = _bool(path, no, key, vals)
        elif key == "heatmap_window":
            opts["window"] = tuple(_floats(path, no, key, vals, 2))
        elif kind == "lcx-manifest":
            digests[key] = " ".join(vals)
        else:
            _unknown(path, no, key)
    for required in ("cable", "layout", "environment"):
        if required not in opts:
            raise ParseError(path, None, f"missing required key {required!r}")
    if not freqs:
        raise ParseError(path, None, "frequency list is empty")
    if "transmit_power" not in rig:
        raise ParseError(path, None, "missing required key 'transmit_power'")
    rig.setdefault("loss_exponent", DEFAULT_LOSS_EXPONENT)
    rig.setdefault("lateral_clamp", DEFAULT_LATERAL_CLAMP)
    cfg = ScenarioConfig(
        frequencies=freqs,
        params=_build(path, LinkBudgetParams, **rig),
        engines=engines or ["spl"],
        source=path,
        **opts,
    )
    if kind == "lcx-manifest":
        _check_manifest_inputs(path, cfg, digests)
    return cfg


def parse_manifest(path) -> ScenarioConfig:
    """Scenario that re-runs exactly the computation a manifest describes."""
    return parse_scenario(path, kind="lcx-manifest")


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _check_manifest_inputs(path, cfg: ScenarioConfig, digests: dict):
    for key in ("cable", "layout", "environment"):
        expected = digests.get(f"{key}_sha256")
        src = getattr(cfg, key)
        if expected is None:
            raise ParseError(path, None, f"manifest lacks {key}_sha256")
        if not src.exists() or file_sha256(src) != expected:
            raise ParseError(path, None, f"input {src} changed since the manifest was written")


def _fmt(v: float) -> str:
    return repr(float(v))


def manifest_text(cmap: CoverageMap, scenario: ScenarioConfig, cable_path: Path) -> str:
    d = cmap.params_digest
    interval = d.get("discretization_interval_m")
    lines = [
        f"lcx-manifest {SCHEMA_VERSION}",
        f"cable {Path(cable_path).resolve()}",
        f"cable_sha256 {file_sha256(cable_path)}",
        f"layout {scenario.layout.resolve()}",
        f"layout_sha256 {file_sha256(scenario.layout)}",
        f"environment {scenario.environment.resolve()}",
        f"environment_sha256 {file_sha256(scenario.environment)}",
        f"frequency_hz {_fmt(cmap.frequency.hertz)}",
        f"engine {cmap.engine}",
        f"quantile {d['quantile']}",
        f"interval {interval}",
        f"barrier_reflection {d['include_barrier_reflection']}",
        f"velocity_factor {d['velocity_factor']}",
        f"transmit_power {d['transmit_power_dbm']}",
        f"loss_exponent {d['loss_exponent']}",
        f"connector_loss {d['connector_loss_db']}",
        f"receiver_gain_dbd {d['receiver_gain_dbd']}",
        f"lateral_clamp {d['lateral_clamp_m']}",
        f"heatmap_window {_fmt(scenario.window[0])} {_fmt(scenario.window[1])}",
    ]
    skip = {"quantile", "include_barrier_reflection", "velocity_factor", "transmit_power_dbm",
            "loss_exponent", "connector_loss_db", "receiver_gain_dbd", "lateral_clamp_m",
            "engine", "discretization_interval_m", "frequency_hz"}
    lines += [f"{k} {v}" for k, v in d.items() if k not in skip]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# coverage output

def grid_text(cmap: CoverageMap, cells: np.ndarray | None = None) -> str:
    env = cmap.environment
    cells = cmap.cells if cells is None else cells
    ny, nx = env.shape
    head = [
        f"lcx-grid {SCHEMA_VERSION}",
        f"engine {cmap.engine}",
        f"frequency_hz {_fmt(cmap.frequency.hertz)}",
        f"grid_origin {_fmt(env.grid_origin[0])} {_fmt(env.grid_origin[1])}",
        f"grid_resolution {_fmt(env.grid_resolution)}",
        f"shape {ny} {nx}",
        "# dBm, row-major; first row is the lowest y, first column the lowest x",
    ]
    body = [",".join(f"{v:.2f}" for v in row) for row in cells]
    return "\n".join(head + body) + "\n"


def parse_grid(path) -> CoverageMap:
    path = Path(path)
    meta, rows = {}, []
    for no, key, vals in _lines(path, "lcx-grid"):
        if "," in key or _is_number(key):
            try:
                rows.append([float(v) for v in (key + "".join(vals)).split(",")])
            except ValueError:
                raise ParseError(path, no, "malformed grid row") from None
        elif key in ("engine",):
            meta[key] = _single(path, no, key, vals)
        elif key in ("frequency_hz", "grid_resolution"):
            meta[key] = _floats(path, no, key, vals, 1)[0]
        elif key == "grid_origin":
            meta[key] = tuple(_floats(path, no, key, vals, 2))
        elif key == "shape":
            meta[key] = tuple(int(v) for v in _floats(path, no, key, vals, 2))
        else:
            _unknown(path, no, key)
    for required in ("engine", "frequency_hz", "grid_origin", "grid_resolution", "shape"):
        if required not in meta:
            raise ParseError(path, None, f"missing required key {required!r}")
    ny, nx = meta["shape"]
    cells = np.array(rows, dtype=float)
    if cells.shape != (ny, nx):
        raise ParseError(path, None, f"grid has shape {cells.shape}, header says {(ny, nx)}")
    res = meta["grid_resolution"]
    env = _build(path, Environment, grid_origin=meta["grid_origin"],
                 grid_extent=(nx * res, ny * res), grid_resolution=res)
    return _build(path, CoverageMap, environment=env, frequency=Frequency(meta["frequency_hz"]),
                  engine=meta["engine"], cells=cells, params_digest={"source": str(path)})


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def heatmap_pixels(cells: np.ndarray, window=DEFAULT_WINDOW) -> np.ndarray:
    """Linear map of the dB window onto 0..255, rounding half up, clamped."""
    lo, hi = window
    if not hi > lo:
        raise DomainError("heatmap window must have floor < ceiling")
    scaled = (np.asarray(cells, dtype=float) - lo) / (hi - lo) * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(int)


def pgm_text(cmap: CoverageMap, window=DEFAULT_WINDOW) -> str:
    """Plain PGM, north up: the top image row is the highest grid row."""
    pix = heatmap_pixels(cmap.cells, window)[::-1]
    ny, nx = cmap.environment.shape
    head = ["P2", f"# lcxplan {cmap.engine} {cmap.frequency.ghz:g} GHz, "
                  f"window {window[0]:g}..{window[1]:g} dBm", f"{nx} {ny}", "255"]
    return "\n".join(head + [" ".join(str(v) for v in row) for row in pix]) + "\n"


def coverage_files(cmap: CoverageMap, manifest: str, window=DEFAULT_WINDOW,
                   band: bool = False) -> dict[str, str]:
    """File name -> content for one coverage map."""
    files = {"grid.csv": grid_text(cmap), "heatmap.pgm": pgm_text(cmap, window),
             "manifest.txt": manifest}
    if band:
        best, worst = cmap.band()
        files["grid_best.csv"] = grid_text(cmap, best)
        files["grid_worst.csv"] = grid_text(cmap, worst)
    return files


def emit_coverage(cmap: CoverageMap, directory, manifest: str | None = None,
                  window=DEFAULT_WINDOW, band: bool = False) -> list[Path]:
    """Write grid, heatmap and manifest of ``cmap`` into ``directory``."""
    if manifest is None:
        manifest = "\n".join([f"lcx-manifest {SCHEMA_VERSION}"]
                             + [f"{k} {v}" for k, v in cmap.params_digest.items()]) + "\n"
    return write_files(directory, coverage_files(cmap, manifest, window, band))


def write_files(directory, files: dict[str, str]) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in files.items():
        target = directory / name
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + ".tmp")
        with open(tmp, "w", newline="\n") as fh:
            fh.write(content)
        os.replace(tmp, target)
        written.append(target)
    return written


# --------------------------------------------------------------------------
# tables and calibrated specs

def cable_spec_text(spec: CableSpec) -> str:
    lines = [f"lcx-cable {SCHEMA_VERSION}", f"name {spec.name}",
             f"lc_tolerance {_fmt(spec.lc_tolerance)}",
             f"reference_lateral_distance {_fmt(spec.reference_lateral_distance)}",
             "# f_ghz alpha_db_per_m lc50_db lc95_db"]
    lines += [f"row {_fmt(r.frequency.ghz)} {_fmt(r.alpha)} {_fmt(r.lc50)} {_fmt(r.lc95)}"
              for r in spec.rows]
    return "\n".join(lines) + "\n"


def calibration_text(result: CalibrationResult) -> str:
    lines = ["f_ghz\tlc50_db\tlc95_db\tsamples"]
    for f in sorted(result.entries):
        e = result.entries[f]
        lines.append(f"{f.ghz:g}\t{e.lc50_est:.2f}\t{e.lc95_est:.2f}\t{e.sample_count}")
    return "\n".join(lines) + "\n"


def _cell(v: float) -> str:
    return "" if np.isnan(v) else f"{v:.2f}"


def error_table_text(table: ErrorTable) -> str:
    lines = ["d_lat_m\\f_ghz\t" + "\t".join(f"{f.ghz:g}" for f in table.frequencies)]
    for i, d in enumerate(table.d_lats):
        lines.append(f"{d:g}\t" + "\t".join(_cell(v) for v in table.entries[i]))
    return "\n".join(lines) + "\n"


def rssi_table_text(table: RssiTable) -> str:
    lines = ["d_lat_m\\d_lon_m\t" + "\t".join(f"{d:g}" for d in table.d_lons)]
    for i, d in enumerate(table.d_lats):
        lines.append(f"{d:g}\t" + "\t".join(_cell(v) for v in table.means[i]))
    lines.append(f"# sensitivity {table.sensitivity:g} dBm: "
                 f"{'covered' if table.verdict else 'NOT covered'}")
    return "\n".join(lines) + "\n"
