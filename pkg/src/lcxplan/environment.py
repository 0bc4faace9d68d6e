"""Plan-view scene: receiver grid, barrier reflectors and obstacles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .cable import CableLayout
from .errors import DomainError
from .linkbudget import DEFAULT_LATERAL_CLAMP, Frequency, LossDb

ENGINES = ("spl", "dominant_path", "coherent")


@dataclass(frozen=True)
class Barrier:
    """Reflecting segment. ``reflection_gain`` may be negative (a loss) or positive."""

    start: tuple[float, float]
    end: tuple[float, float]
    reflection_gain: float = 0.0

    def __post_init__(self):
        if tuple(self.start) == tuple(self.end):
            raise DomainError("barrier endpoints must differ")


@dataclass(frozen=True)
class Obstacle:
    """Convex polygon with a penetration loss; vertices are stored counter-clockwise."""

    vertices: np.ndarray
    penetration_loss: LossDb

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DomainError("obstacle polygon needs at least 3 vertices")
        area = geometry.polygon_signed_area(v)
        if abs(area) <= geometry.LENGTH_EPS:
            raise DomainError("obstacle polygon is degenerate (zero area)")
        if not geometry.is_convex(v):
            raise DomainError("obstacle polygon must be strictly convex")
        if area < 0:
            v = v[::-1].copy()
        if self.penetration_loss < 0:
            raise DomainError("penetration_loss must be >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def normals(self) -> np.ndarray:
        return geometry.inward_normals(self.vertices)


@dataclass(frozen=True)
class Environment:
    grid_origin: tuple[float, float]
    grid_extent: tuple[float, float]
    grid_resolution: float
    barriers: tuple[Barrier, ...] = ()
    obstacles: tuple[Obstacle, ...] = ()
    receiver_height: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "grid_origin", tuple(float(v) for v in self.grid_origin))
        object.__setattr__(self, "grid_extent", tuple(float(v) for v in self.grid_extent))
        object.__setattr__(self, "barriers", tuple(self.barriers))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if not self.grid_resolution > 0:
            raise DomainError("grid_resolution must be > 0")
        if not all(v > 0 for v in self.grid_extent):
            raise DomainError("grid extents must be > 0")

    @property
    def shape(self) -> tuple[int, int]:
        """Grid shape as ``(rows, columns)``: rows run along y, columns along x."""
        w, h = self.grid_extent
        res = self.grid_resolution
        return math.ceil(h / res - 1e-9), math.ceil(w / res - 1e-9)

    @property
    def cell_count(self) -> int:
        ny, nx = self.shape
        return ny * nx


def grid_cells(env: Environment) -> np.ndarray:
    """Cell centres, row-major: x varies fastest, then y."""
    ny, nx = env.shape
    res = env.grid_resolution
    ox, oy = env.grid_origin
    xs = ox + (np.arange(nx) + 0.5) * res
    ys = oy + (np.arange(ny) + 0.5) * res
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack((gx.ravel(), gy.ravel()))


def lateral_distance(point, layout: CableLayout, clamp: float = DEFAULT_LATERAL_CLAMP):
    """Nearest distance from ``point`` to the cable axis, never below ``clamp``.

    Accepts one point or an ``(n, 2)`` array.
    """
    pts = geometry.as_points(point)
    d = np.maximum(geometry.point_polyline_distance(pts, layout.path), clamp)
    return float(d[0]) if np.ndim(point) == 1 else d


def path_obstruction_loss(a, b, env: Environment) -> LossDb:
    """Total penetration loss of the obstacles that segment ``a``-``b`` passes through."""
    if tuple(np.asarray(a, float)) == tuple(np.asarray(b, float)):
        raise DomainError("path endpoints must differ")
    return float(sum(ob.penetration_loss for ob in env.obstacles
                     if geometry.segment_crosses_convex(a, b, ob.vertices, ob.normals)))


@dataclass(frozen=True)
class CoverageMap:
    """Received power per receive spot for one frequency and one engine.

    ``cells[j, i]`` is the spot at column ``i`` (x) and row ``j`` (y).
    ``radiator_index`` and ``reflector_index`` record the winning path of the
    single-path engines (reflector -1 for the direct path).
    """

    environment: Environment
    frequency: Frequency
    engine: str
    cells: np.ndarray
    params_digest: dict = field(default_factory=dict)
    lc_tolerance: LossDb = 0.0
    radiator_index: np.ndarray | None = None
    reflector_index: np.ndarray | None = None

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise DomainError(f"unknown engine {self.engine!r}")
        cells = np.asarray(self.cells, dtype=float)
        if cells.shape != self.environment.shape:
            raise DomainError(f"cells shape {cells.shape} does not match grid {self.environment.shape}")
        if not np.all(np.isfinite(cells)):
            raise DomainError("coverage map contains non-finite cells")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    def band(self) -> tuple[np.ndarray, np.ndarray]:
        """``(best, worst)`` grids for the datasheet coupling-loss tolerance."""
        return self.cells + self.lc_tolerance, self.cells - self.lc_tolerance

    def sample(self, points) -> np.ndarray:
        """Bilinear interpolation between cell centres; NaN outside the grid.

        Points inside the grid but beyond the outermost centres take the
        edge value along that axis.
        """
        pts = geometry.as_points(points)
        env = self.environment
        ny, nx = env.shape
        res = env.grid_resolution
        ox, oy = env.grid_origin
        u = (pts[:, 0] - ox) / res - 0.5
        v = (pts[:, 1] - oy) / res - 0.5
        tol = 1e-9
        outside = (u < -0.5 - tol) | (u > nx - 0.5 + tol) | (v < -0.5 - tol) | (v > ny - 0.5 + tol)
        u = np.clip(u, 0.0, nx - 1)
        v = np.clip(v, 0.0, ny - 1)
        i0 = np.minimum(np.floor(u).astype(int), max(nx - 2, 0))
        j0 = np.minimum(np.floor(v).astype(int), max(ny - 2, 0))
        i1 = np.minimum(i0 + 1, nx - 1)
        j1 = np.minimum(j0 + 1, ny - 1)
        wu = u - i0
        wv = v - j0
        c = self.cells
        out = ((1 - wu) * (1 - wv) * c[j0, i0] + wu * (1 - wv) * c[j0, i1]
               + (1 - wu) * wv * c[j1, i0] + wu * wv * c[j1, i1])
        out[outside] = np.nan
        return out
