"""Coverage engines: smallest path loss, dominant path and coherent summation.

``spl`` and ``dominant_path`` keep the single strongest radiator path per
receive spot. ``coherent`` adds the complex field of every radiator, which
reproduces the interference notches along the cable.

Cells are processed in fixed blocks of :data:`BLOCK_SIZE`; workers only
change which thread runs a block, so output is independent of worker count.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cable import (QUANTILES, CableLayout, CableSpec, RadiatorChain, coupling_loss,
                    default_interval, discretize, interpolate_cable_params)
from .environment import ENGINES, CoverageMap, Environment, grid_cells
from .errors import ConfigurationError, DomainError
from .linkbudget import Frequency, LinkBudgetParams

BLOCK_SIZE = 256
DEFAULT_VELOCITY_FACTOR = 0.88


@dataclass(frozen=True)
class EngineConfig:
    engine: str = "spl"
    quantile: str = "lc50"
    discretization_interval: float | None = None
    include_barrier_reflection: bool = False
    worker_count: int = 1
    velocity_factor: float = DEFAULT_VELOCITY_FACTOR

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigurationError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.quantile not in QUANTILES:
            raise ConfigurationError(f"quantile must be one of {QUANTILES}, got {self.quantile!r}")
        if int(self.worker_count) != self.worker_count or self.worker_count < 1:
            raise ConfigurationError(f"worker_count must be a positive integer, got {self.worker_count!r}")
        if self.discretization_interval is not None and not self.discretization_interval > 0:
            raise ConfigurationError("discretization_interval must be > 0")
        if not 0 < self.velocity_factor <= 1:
            raise ConfigurationError("velocity_factor must lie in (0, 1]")

    def interval_for(self, f: Frequency) -> float:
        if self.discretization_interval is not None:
            return float(self.discretization_interval)
        return default_interval(self.engine, f)


def _pack_obstacles(env: Environment):
    verts, normals, starts, losses = [], [], [0], []
    for ob in env.obstacles:
        verts.append(ob.vertices)
        normals.append(ob.normals)
        starts.append(starts[-1] + len(ob.vertices))
        losses.append(ob.penetration_loss)
    if verts:
        ev = np.ascontiguousarray(np.vstack(verts))
        en = np.ascontiguousarray(np.vstack(normals))
    else:
        ev = np.zeros((0, 2))
        en = np.zeros((0, 2))
    return ev, en, np.asarray(starts, dtype=np.int64), np.asarray(losses, dtype=float)


def _pack_barriers(env: Environment | None):
    if env is None or not env.barriers:
        return np.zeros((0, 4)), np.zeros(0)
    bar = np.array([[*b.start, *b.end] for b in env.barriers], dtype=float)
    gain = np.array([b.reflection_gain for b in env.barriers], dtype=float)
    return np.ascontiguousarray(bar), gain


def _run_blocks(fn, points: np.ndarray, workers: int) -> list:
    cx = np.ascontiguousarray(points[:, 0])
    cy = np.ascontiguousarray(points[:, 1])
    spans = [(s, min(s + BLOCK_SIZE, len(cx))) for s in range(0, len(cx), BLOCK_SIZE)]

    def job(span):
        a, b = span
        return fn(cx[a:b].copy(), cy[a:b].copy())

    if workers == 1 or len(spans) == 1:
        return [job(s) for s in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, spans))


def radiator_base(chain: RadiatorChain, l_c: float, params: LinkBudgetParams) -> np.ndarray:
    """Per-radiator budget before the distance term: feed power - L_C - L_con + G_R."""
    return np.ascontiguousarray(chain.feed_power - l_c + params.fixed_terms)


def build_chain(layout: CableLayout, spec: CableSpec, f: Frequency, params: LinkBudgetParams,
                cfg: EngineConfig) -> RadiatorChain:
    interval = cfg.interval_for(f)
    if cfg.engine == "coherent" and interval > f.wavelength / 4.0 * (1 + 1e-12):
        raise ConfigurationError(
            f"coherent engine needs an interval <= lambda/4 = {f.wavelength / 4:.6g} m at {f}, "
            f"got {interval:g} m")
    return discretize(layout, spec, f, params.transmit_power, interval)


def evaluate_points(points, layout: CableLayout, spec: CableSpec, env: Environment | None,
                    f: Frequency, params: LinkBudgetParams, cfg: EngineConfig):
    """Engine output at arbitrary plan points.

    Returns ``(power_dbm, radiator_index, reflector_index)``; the index arrays
    are None for the coherent engine.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    chain = build_chain(layout, spec, f, params, cfg)
    l_c = coupling_loss(spec, f, cfg.quantile)
    rbase = radiator_base(chain, l_c, params)
    rx = np.ascontiguousarray(chain.positions[:, 0])
    ry = np.ascontiguousarray(chain.positions[:, 1])
    p = float(params.loss_exponent)
    clamp = float(params.lateral_clamp)

    if cfg.engine == "coherent":
        lam = f.wavelength
        guided = np.ascontiguousarray(2.0 * math.pi * chain.d_lon / (cfg.velocity_factor * lam))
        k0 = 2.0 * math.pi / lam

        def fn(cx, cy):
            return kernels.coherent_block(cx, cy, rx, ry, rbase, guided, k0, p, clamp)

        parts = _run_blocks(fn, pts, cfg.worker_count)
        return np.concatenate(parts) if parts else np.zeros(0), None, None

    if cfg.engine == "dominant_path" and env is not None:
        obstacles = _pack_obstacles(env)
        bar, gain = _pack_barriers(env if cfg.include_barrier_reflection else None)
    else:
        obstacles = _pack_obstacles(Environment((0, 0), (1, 1), 1.0))
        bar, gain = _pack_barriers(None)
    ev, en, pstart, ploss = obstacles

    def fn(cx, cy):
        return kernels.single_path_block(cx, cy, rx, ry, rbase, p, clamp,
                                         ev, en, pstart, ploss, bar, gain)

    parts = _run_blocks(fn, pts, cfg.worker_count)
    if not parts:
        empty = np.zeros(0)
        return empty, empty.astype(np.int64), empty.astype(np.int64)
    return tuple(np.concatenate([part[i] for part in parts]) for i in range(3))


def _sha(*chunks) -> str:
    h = hashlib.sha256()
    for c in chunks:
        h.update(c if isinstance(c, bytes) else repr(c).encode())
    return h.hexdigest()[:16]


def params_digest(layout: CableLayout, spec: CableSpec, env: Environment, f: Frequency,
                  params: LinkBudgetParams, cfg: EngineConfig) -> dict[str, str]:
    """Every input that determines a map, as strings. Worker count is excluded on purpose."""
    alpha, lc50, lc95 = interpolate_cable_params(spec, f)
    interval = cfg.interval_for(f)
    spec_rows = [(r.frequency.hertz, r.alpha, r.lc50, r.lc95) for r in spec.rows]
    env_desc = (env.grid_origin, env.grid_extent, env.grid_resolution,
                [(b.start, b.end, b.reflection_gain) for b in env.barriers],
                [(ob.vertices.tobytes(), ob.penetration_loss) for ob in env.obstacles])
    return {
        "engine": cfg.engine,
        "frequency_hz": repr(f.hertz),
        "quantile": cfg.quantile,
        "alpha_db_per_m": repr(alpha),
        "lc50_db": repr(lc50),
        "lc95_db": repr(lc95),
        "lc_tolerance_db": repr(spec.lc_tolerance),
        "discretization_interval_m": repr(interval),
        "include_barrier_reflection": str(bool(cfg.include_barrier_reflection)).lower(),
        "velocity_factor": repr(cfg.velocity_factor),
        "transmit_power_dbm": repr(params.transmit_power),
        "loss_exponent": repr(params.loss_exponent),
        "connector_loss_db": repr(params.connector_loss),
        "receiver_gain_dbd": repr(params.receiver_gain_dbd),
        "lateral_clamp_m": repr(params.lateral_clamp),
        "cable_name": spec.name,
        "cable_digest": _sha(spec_rows, spec.lc_tolerance, spec.reference_lateral_distance),
        "layout_digest": _sha(layout.path.tobytes(), layout.feed_end, layout.termination),
        "cable_length_m": repr(layout.length),
        "environment_digest": _sha(env_desc),
        "grid_shape": "{}x{}".format(*env.shape),
        "kernel_backend": kernels.BACKEND,
    }


def _simulate(layout, spec, env, f, params, cfg, expected: str) -> CoverageMap:
    if cfg.engine != expected:
        raise ConfigurationError(f"engine config is {cfg.engine!r}, expected {expected!r}")
    values, ridx, bidx = evaluate_points(grid_cells(env), layout, spec, env, f, params, cfg)
    shape = env.shape
    return CoverageMap(
        environment=env, frequency=f, engine=cfg.engine, cells=values.reshape(shape),
        params_digest=params_digest(layout, spec, env, f, params, cfg),
        lc_tolerance=spec.lc_tolerance,
        radiator_index=None if ridx is None else ridx.reshape(shape),
        reflector_index=None if bidx is None else bidx.reshape(shape),
    )


def simulate_spl(layout, spec, env, f, params, cfg) -> CoverageMap:
    """Strongest direct radiator path per cell; obstacles and reflectors are ignored."""
    return _simulate(layout, spec, env, f, params, cfg, "spl")


def simulate_dominant_path(layout, spec, env, f, params, cfg) -> CoverageMap:
    """Strongest of the direct and single-bounce barrier paths, with obstacle losses."""
    return _simulate(layout, spec, env, f, params, cfg, "dominant_path")


def simulate_coherent(layout, spec, env, f, params, cfg) -> CoverageMap:
    """Power of the complex sum over all radiators."""
    return _simulate(layout, spec, env, f, params, cfg, "coherent")


def simulate(layout, spec, env, f, params, cfg) -> CoverageMap:
    return _simulate(layout, spec, env, f, params, cfg, cfg.engine)


@dataclass(frozen=True)
class EngineComparison:
    difference: np.ndarray
    mean: float
    max_abs: float
    rms: float


def compare_engines(a: CoverageMap, b: CoverageMap) -> EngineComparison:
    """Cellwise ``a - b`` in dB with summary statistics."""
    ea, eb = a.environment, b.environment
    same_grid = (ea.shape == eb.shape and ea.grid_origin == eb.grid_origin
                 and ea.grid_resolution == eb.grid_resolution)
    if not same_grid:
        raise DomainError("coverage maps are on different grids")
    if a.frequency != b.frequency:
        raise DomainError(f"coverage maps are at different frequencies ({a.frequency}, {b.frequency})")
    diff = a.cells - b.cells
    return EngineComparison(difference=diff, mean=float(diff.mean()),
                            max_abs=float(np.abs(diff).max()),
                            rms=float(np.sqrt(np.mean(diff * diff))))
