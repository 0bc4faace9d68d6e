"""Installed cable: datasheet parameters, plan-view layout and radiator chain.

The cable is modelled as a row of point radiators placed along its path.
Each radiator carries the feed power left after longitudinal attenuation
up to its position.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry
from .errors import DomainError
from .linkbudget import Frequency, LossDb, PowerDbm

REFERENCE_LATERAL_DISTANCE = 2.0  # m, datasheet coupling-loss reference
DEFAULT_POWER_INTERVAL = 1.0  # m, spl and dominant_path engines
QUANTILES = ("lc50", "lc95")


@dataclass(frozen=True)
class CableRow:
    frequency: Frequency
    alpha: float  # dB/m
    lc50: LossDb
    lc95: LossDb


@dataclass(frozen=True)
class CableSpec:
    """Frequency-tabulated electrical parameters of a leaky cable."""

    name: str
    rows: tuple[CableRow, ...]
    lc_tolerance: LossDb = 0.0
    reference_lateral_distance: float = REFERENCE_LATERAL_DISTANCE

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise DomainError("cable spec needs at least one frequency row")
        freqs = [r.frequency.hertz for r in self.rows]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise DomainError("cable spec rows must be sorted by strictly increasing frequency")
        for r in self.rows:
            if r.alpha < 0:
                raise DomainError(f"alpha >= 0 violated at {r.frequency}")
            if r.lc95 < r.lc50:
                raise DomainError(f"lc95 >= lc50 violated at {r.frequency}")
        if self.lc_tolerance < 0:
            raise DomainError("lc_tolerance must be >= 0")

    @property
    def frequencies(self) -> list[Frequency]:
        return [r.frequency for r in self.rows]


def interpolate_cable_params(spec: CableSpec, f: Frequency) -> tuple[float, LossDb, LossDb]:
    """``(alpha, lc50, lc95)`` at ``f``, linear in log10 frequency.

    Queries outside the table are clamped to the nearest row with a warning;
    anything beyond half the lowest or twice the highest row is refused.
    """
    lo = spec.rows[0].frequency.hertz
    hi = spec.rows[-1].frequency.hertz
    hz = f.hertz
    if hz < 0.5 * lo or hz > 2.0 * hi:
        raise DomainError(f"{f} is outside the usable range of cable spec {spec.name!r} "
                          f"({lo / 2e9:g}-{2 * hi / 1e9:g} GHz)")
    if hz < lo or hz > hi:
        warnings.warn(f"{f} outside the table of {spec.name!r}; using edge row values",
                      stacklevel=2)
        row = spec.rows[0] if hz < lo else spec.rows[-1]
        return row.alpha, row.lc50, row.lc95
    for row in spec.rows:
        if row.frequency.hertz == hz:
            return row.alpha, row.lc50, row.lc95
    x = math.log10(hz)
    for a, b in zip(spec.rows, spec.rows[1:]):
        if a.frequency.hertz < hz < b.frequency.hertz:
            xa, xb = math.log10(a.frequency.hertz), math.log10(b.frequency.hertz)
            w = (x - xa) / (xb - xa)
            return (a.alpha + w * (b.alpha - a.alpha),
                    a.lc50 + w * (b.lc50 - a.lc50),
                    a.lc95 + w * (b.lc95 - a.lc95))
    raise AssertionError("unreachable: frequency bracketed by table")


def coupling_loss(spec: CableSpec, f: Frequency, quantile: str) -> LossDb:
    if quantile not in QUANTILES:
        raise DomainError(f"quantile must be one of {QUANTILES}, got {quantile!r}")
    _, lc50, lc95 = interpolate_cable_params(spec, f)
    return lc50 if quantile == "lc50" else lc95


@dataclass(frozen=True)
class CableLayout:
    """Plan-view path of the installed cable.

    ``feed_end`` names the path end carrying the feed ("start" or "end");
    arc lengths elsewhere in the package are measured from the feed.
    """

    path: np.ndarray
    feed_end: str = "start"
    mount_height: float = 0.0
    termination: str = "matched_load"
    length: float = field(init=False)

    def __post_init__(self):
        path = np.array(self.path, dtype=float)
        if path.ndim != 2 or path.shape[1] != 2 or len(path) < 2:
            raise DomainError("cable layout needs at least 2 vertices")
        if not np.all(np.isfinite(path)):
            raise DomainError("cable layout vertices must be finite")
        seg = geometry.segment_lengths(path)
        if np.any(seg == 0):
            raise DomainError("consecutive cable layout vertices must be distinct")
        if self.feed_end not in ("start", "end"):
            raise DomainError(f"feed_end must be 'start' or 'end', got {self.feed_end!r}")
        if self.termination != "matched_load":
            raise DomainError(f"unsupported termination {self.termination!r}")
        path.setflags(write=False)
        object.__setattr__(self, "path", path)
        object.__setattr__(self, "length", float(seg.sum()))

    @property
    def from_feed(self) -> np.ndarray:
        """Vertices ordered from the feed end."""
        return self.path if self.feed_end == "start" else self.path[::-1]

    def reversed(self) -> "CableLayout":
        """Same cable with the path listed in the opposite direction."""
        other = "end" if self.feed_end == "start" else "start"
        return replace(self, path=self.path[::-1].copy(), feed_end=other)

    def locate(self, d_lon, d_lat=0.0, side: str = "left") -> np.ndarray:
        """Plan coordinates ``d_lat`` metres off the cable at ``d_lon`` from the feed.

        ``side`` is taken looking from the feed along the cable.
        """
        pts, tangent = geometry.point_at_arc_length(self.from_feed, d_lon)
        sign = {"left": 1.0, "right": -1.0}.get(side)
        if sign is None:
            raise DomainError(f"side must be 'left' or 'right', got {side!r}")
        normal = np.column_stack((-tangent[:, 1], tangent[:, 0])) * sign
        return pts + normal * np.atleast_1d(np.asarray(d_lat, dtype=float))[:, None]


@dataclass(frozen=True)
class RadiatorChain:
    """Point radiators standing in for the cable at one frequency."""

    positions: np.ndarray
    d_lon: np.ndarray
    feed_power: np.ndarray
    spacing: float
    frequency: Frequency

    def __len__(self) -> int:
        return len(self.d_lon)


def default_interval(engine: str, f: Frequency) -> float:
    return f.wavelength / 4.0 if engine == "coherent" else DEFAULT_POWER_INTERVAL


def radiator_offsets(length: float, interval: float) -> np.ndarray:
    """Arc lengths of radiators: the midpoint of every ``interval`` piece.

    A trailing partial piece gets a radiator at its own midpoint, so the
    chain always spans the cable to within one interval.
    """
    full = int(math.floor(length / interval + 1e-9))
    offsets = (np.arange(full) + 0.5) * interval
    rem = length - full * interval
    if rem > 1e-9 * interval:
        offsets = np.append(offsets, full * interval + 0.5 * rem)
    return offsets


def discretize(layout: CableLayout, spec: CableSpec, f: Frequency, p_t: PowerDbm,
               interval: float) -> RadiatorChain:
    """Place radiators along ``layout`` and attenuate the feed power to each."""
    if not interval > 0:
        raise DomainError(f"discretization interval must be > 0, got {interval}")
    if interval > layout.length:
        raise DomainError(f"interval {interval} m exceeds cable length {layout.length} m")
    alpha, _, _ = interpolate_cable_params(spec, f)
    d_lon = radiator_offsets(layout.length, interval)
    positions, _ = geometry.point_at_arc_length(layout.from_feed, d_lon)
    feed = p_t - alpha * d_lon
    for arr in (positions, d_lon, feed):
        arr.setflags(write=False)
    return RadiatorChain(positions=positions, d_lon=d_lon, feed_power=feed,
                         spacing=float(interval), frequency=f)
