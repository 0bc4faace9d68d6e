"""Coupling-loss calibration from measurement campaigns and error reporting.

Averages are arithmetic means of dB values, not linear-power means.
Quantiles use the nearest-rank rule on the sorted inverted losses.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field, replace

import numpy as np

from .cable import CableLayout, CableRow, CableSpec, interpolate_cable_params
from .environment import CoverageMap
from .errors import CalibrationError, DomainError
from .linkbudget import Frequency, LinkBudgetParams, PowerDbm, invert_for_coupling_loss, longitudinal_loss

REFERENCE_TOLERANCE = 0.01  # m around the 2 m reference distance


@dataclass(frozen=True)
class MeasurementRecord:
    d_lon: float
    d_lat: float
    frequency: Frequency
    samples: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(float(s) for s in self.samples))
        if not self.samples:
            raise DomainError("measurement record needs at least one sample")
        if not self.d_lat > 0:
            raise DomainError(f"d_lat must be > 0, got {self.d_lat}")
        if self.d_lon < 0:
            raise DomainError(f"d_lon must be >= 0, got {self.d_lon}")

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))


@dataclass(frozen=True)
class MeasurementSet:
    """Received-power records of one campaign.

    ``side`` says on which side of the cable (looking from the feed) the
    lateral offsets were taken.
    """

    records: tuple[MeasurementRecord, ...]
    rig: LinkBudgetParams
    layout: CableLayout
    side: str = "left"
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        slack = 1e-9
        for r in self.records:
            if r.d_lon > self.layout.length + slack:
                raise DomainError(f"record d_lon={r.d_lon} m exceeds cable length {self.layout.length:g} m")
        if self.side not in ("left", "right"):
            raise DomainError(f"side must be 'left' or 'right', got {self.side!r}")

    @property
    def frequencies(self) -> list[Frequency]:
        return sorted({r.frequency for r in self.records})

    def positions(self, records=None) -> np.ndarray:
        recs = self.records if records is None else records
        if not recs:
            return np.zeros((0, 2))
        return self.layout.locate([r.d_lon for r in recs], [r.d_lat for r in recs], self.side)


@dataclass(frozen=True)
class CalibrationEntry:
    lc50_est: float
    lc95_est: float
    sample_count: int


@dataclass(frozen=True)
class CalibrationResult:
    entries: dict
    source: str = ""
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        for f, e in self.entries.items():
            if e.lc95_est < e.lc50_est:
                raise DomainError(f"lc95_est >= lc50_est violated at {f}")
            if e.sample_count <= 0:
                raise DomainError(f"no samples behind the estimate at {f}")


def nearest_rank(values, q: float) -> float:
    """Smallest value with at least ``q`` of the data at or below it."""
    if not 0 < q <= 1:
        raise DomainError("quantile must be in (0, 1]")
    ordered = sorted(values)
    if not ordered:
        raise DomainError("no values")
    rank = max(1, math.ceil(q * len(ordered) - 1e-9))
    return ordered[rank - 1]


def estimate_coupling_loss(mset: MeasurementSet, spec: CableSpec) -> CalibrationResult:
    """Invert the link budget for every reference-distance sample, per frequency."""
    ref = spec.reference_lateral_distance
    by_freq = defaultdict(list)
    for rec in mset.records:
        by_freq[rec.frequency].append(rec)
    if not by_freq:
        raise CalibrationError("measurement set is empty")

    missing = [f for f, recs in by_freq.items()
               if not any(abs(r.d_lat - ref) <= REFERENCE_TOLERANCE for r in recs)]
    if missing:
        names = ", ".join(str(f) for f in sorted(missing))
        raise CalibrationError(f"no records at d_lat = {ref:g} m for {names}")

    entries, flags = {}, []
    for f in sorted(by_freq):
        alpha, _, _ = interpolate_cable_params(spec, f)
        losses = []
        for rec in by_freq[f]:
            if abs(rec.d_lat - ref) > REFERENCE_TOLERANCE:
                continue
            l_l = longitudinal_loss(alpha, rec.d_lon)
            losses.extend(invert_for_coupling_loss(mset.rig, l_l, rec.d_lat, s) for s in rec.samples)
        entries[f] = CalibrationEntry(lc50_est=nearest_rank(losses, 0.50),
                                      lc95_est=nearest_rank(losses, 0.95),
                                      sample_count=len(losses))
        if mset.layout.length < 10.0 * f.wavelength:
            msg = (f"short-cable: {mset.layout.length:g} m cable is shorter than "
                   f"10 wavelengths ({10 * f.wavelength:.3g} m) at {f}")
            flags.append(msg)
            warnings.warn(msg, stacklevel=2)
    return CalibrationResult(entries=entries, source=mset.source, flags=tuple(flags))


def apply_calibration(spec: CableSpec, result: CalibrationResult) -> CableSpec:
    """New spec with the calibrated coupling losses; other rows are kept as they are."""
    if not result.entries:
        return spec
    rows = {r.frequency: r for r in spec.rows}
    for f, e in result.entries.items():
        if f in rows:
            rows[f] = replace(rows[f], lc50=e.lc50_est, lc95=e.lc95_est)
        else:
            alpha, _, _ = interpolate_cable_params(spec, f)
            rows[f] = CableRow(frequency=f, alpha=alpha, lc50=e.lc50_est, lc95=e.lc95_est)
    return replace(spec, rows=tuple(rows[f] for f in sorted(rows)))


@dataclass(frozen=True)
class ErrorTable:
    """Mean (simulated - measured) in dB; rows are lateral distances, columns frequencies."""

    d_lats: tuple[float, ...]
    frequencies: tuple[Frequency, ...]
    entries: np.ndarray
    counts: np.ndarray
    skipped: tuple[MeasurementRecord, ...] = field(default=())

    def entry(self, d_lat: float, f: Frequency) -> float:
        return float(self.entries[self.d_lats.index(d_lat), self.frequencies.index(f)])


def _match_map(maps, f: Frequency) -> CoverageMap:
    for m in maps:
        if math.isclose(m.frequency.hertz, f.hertz, rel_tol=1e-9):
            return m
    raise DomainError(f"no coverage map for {f}")


def error_table(mset: MeasurementSet, maps) -> ErrorTable:
    """Per (d_lat, frequency), the mean over positions of simulated minus measured power."""
    maps = list(maps)
    diffs = defaultdict(list)
    skipped = []
    for f in mset.frequencies:
        cmap = _match_map(maps, f)
        recs = [r for r in mset.records if r.frequency == f]
        sim = cmap.sample(mset.positions(recs))
        for rec, value in zip(recs, sim):
            if np.isnan(value):
                skipped.append(rec)
                warnings.warn(f"measurement at d_lon={rec.d_lon:g} m, d_lat={rec.d_lat:g} m, {f} "
                              "lies outside the map grid; skipped", stacklevel=2)
                continue
            diffs[(rec.d_lat, f)].append(float(value) - rec.mean)
    d_lats = tuple(sorted({r.d_lat for r in mset.records}))
    freqs = tuple(mset.frequencies)
    entries = np.full((len(d_lats), len(freqs)), np.nan)
    counts = np.zeros((len(d_lats), len(freqs)), dtype=int)
    for (d_lat, f), vals in diffs.items():
        i, j = d_lats.index(d_lat), freqs.index(f)
        entries[i, j] = float(np.mean(vals))
        counts[i, j] = len(vals)
    return ErrorTable(d_lats=d_lats, frequencies=freqs, entries=entries, counts=counts,
                      skipped=tuple(skipped))


@dataclass(frozen=True)
class RssiTable:
    """Mean power per (d_lat, d_lon) position and the coverage verdict."""

    d_lats: tuple[float, ...]
    d_lons: tuple[float, ...]
    means: np.ndarray
    sensitivity: PowerDbm
    verdict: bool


def rssi_table(mset: MeasurementSet, sensitivity: PowerDbm) -> RssiTable:
    if not mset.records:
        raise DomainError("measurement set is empty")
    if len(mset.frequencies) != 1:
        raise DomainError("rssi table needs a single-frequency measurement set")
    groups = defaultdict(list)
    for r in mset.records:
        groups[(r.d_lat, r.d_lon)].extend(r.samples)
    d_lats = tuple(sorted({k[0] for k in groups}))
    d_lons = tuple(sorted({k[1] for k in groups}))
    means = np.full((len(d_lats), len(d_lons)), np.nan)
    for (d_lat, d_lon), samples in groups.items():
        means[d_lats.index(d_lat), d_lons.index(d_lon)] = float(np.mean(samples))
    present = means[~np.isnan(means)]
    verdict = bool(np.all(present >= sensitivity))
    return RssiTable(d_lats=d_lats, d_lons=d_lons, means=means, sensitivity=sensitivity,
                     verdict=verdict)


def synthesize_measurements(maps, layout: CableLayout, rig: LinkBudgetParams, d_lons, d_lats,
                            side: str = "left", source: str = "synthetic") -> MeasurementSet:
    """Noise-free campaign read off coverage maps with the same bilinear rule as
    :func:`error_table`. One single-sample record per (map, d_lon, d_lat)."""
    records = []
    for cmap in maps:
        grid_lon, grid_lat = np.meshgrid(np.asarray(d_lons, float), np.asarray(d_lats, float))
        pts = layout.locate(grid_lon.ravel(), grid_lat.ravel(), side)
        values = cmap.sample(pts)
        for d_lon, d_lat, v in zip(grid_lon.ravel(), grid_lat.ravel(), values):
            if np.isnan(v):
                raise DomainError(f"position d_lon={d_lon:g}, d_lat={d_lat:g} lies outside the map grid")
            records.append(MeasurementRecord(float(d_lon), float(d_lat), cmap.frequency, (float(v),)))
    return MeasurementSet(records=tuple(records), rig=rig, layout=layout, side=side, source=source)
