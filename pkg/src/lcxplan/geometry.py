"""Plan-view geometry: polylines, segment distances and convex-polygon clipping."""

from __future__ import annotations

import numpy as np

# Clip intervals shorter than this (in segment parameter) are contacts, not crossings.
PARAM_EPS = 1e-12
# A point closer than this to a polygon edge is on the boundary.
LENGTH_EPS = 1e-9


def as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) coordinates, got shape {arr.shape}")
    return arr


def segment_lengths(vertices: np.ndarray) -> np.ndarray:
    return np.hypot(*np.diff(vertices, axis=0).T)


def cumulative_length(vertices: np.ndarray) -> np.ndarray:
    """Arc length at each vertex, starting at 0."""
    return np.concatenate(([0.0], np.cumsum(segment_lengths(vertices))))


def point_at_arc_length(vertices: np.ndarray, s) -> tuple[np.ndarray, np.ndarray]:
    """Points and unit tangents at arc lengths ``s`` along a polyline.

    Arc lengths are clamped to ``[0, total]``. At an interior vertex the
    tangent of the following segment is used.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    cum = cumulative_length(vertices)
    s = np.clip(s, 0.0, cum[-1])
    seg = np.searchsorted(cum, s, side="right") - 1
    seg = np.clip(seg, 0, len(vertices) - 2)
    start = vertices[seg]
    delta = vertices[seg + 1] - vertices[seg]
    seglen = np.hypot(delta[:, 0], delta[:, 1])
    tangent = delta / seglen[:, None]
    pts = start + tangent * (s - cum[seg])[:, None]
    return pts, tangent


def point_segment_distance(points, a, b) -> np.ndarray:
    """Euclidean distance from each point to the closed segment ``a``-``b``."""
    p = as_points(points)
    a = np.asarray(a, dtype=float)
    ab = np.asarray(b, dtype=float) - a
    denom = float(ab @ ab)
    if denom == 0.0:
        t = np.zeros(len(p))
    else:
        t = np.clip(((p - a) @ ab) / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.hypot(*(p - closest).T)


def point_polyline_distance(points, vertices: np.ndarray) -> np.ndarray:
    p = as_points(points)
    best = np.full(len(p), np.inf)
    for a, b in zip(vertices[:-1], vertices[1:]):
        best = np.minimum(best, point_segment_distance(p, a, b))
    return best


def polygon_signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def is_convex(vertices: np.ndarray) -> bool:
    """True for a strictly convex polygon in either orientation."""
    n = len(vertices)
    if n < 3:
        return False
    d1 = np.roll(vertices, -1, axis=0) - vertices
    d2 = np.roll(d1, -1, axis=0)
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return bool(np.all(cross > 0) or np.all(cross < 0))


def inward_normals(ccw_vertices: np.ndarray) -> np.ndarray:
    """Unit inward normals of each edge of a counter-clockwise polygon."""
    d = np.roll(ccw_vertices, -1, axis=0) - ccw_vertices
    n = np.column_stack((-d[:, 1], d[:, 0]))
    return n / np.hypot(n[:, 0], n[:, 1])[:, None]


def segment_crosses_convex(a, b, ccw_vertices: np.ndarray, normals: np.ndarray | None = None) -> bool:
    """Whether segment ``a``-``b`` passes through the polygon's boundary.

    The segment must overlap the open interior over a positive length, and
    not both endpoints may lie strictly inside. Touching a vertex or running
    along an edge is a graze and does not count.
    """
    if normals is None:
        normals = inward_normals(ccw_vertices)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    t0, t1 = 0.0, 1.0
    for v, n in zip(ccw_vertices, normals):
        num = float(n @ (a - v))
        den = float(n @ d)
        if den == 0.0:
            if num < 0.0:
                return False
        elif den > 0.0:
            t0 = max(t0, -num / den)
        else:
            t1 = min(t1, -num / den)
        if t1 - t0 <= PARAM_EPS:
            return False
    mid = a + 0.5 * (t0 + t1) * d
    if _edge_clearance(mid, ccw_vertices, normals) <= LENGTH_EPS:
        return False
    inside_a = _edge_clearance(a, ccw_vertices, normals) > LENGTH_EPS
    inside_b = _edge_clearance(b, ccw_vertices, normals) > LENGTH_EPS
    return not (inside_a and inside_b)


def _edge_clearance(point: np.ndarray, ccw_vertices: np.ndarray, normals: np.ndarray) -> float:
    """Smallest signed distance from ``point`` to the polygon's edge lines (> 0 inside)."""
    return float(np.min(np.einsum("ij,ij->i", normals, point - ccw_vertices)))
