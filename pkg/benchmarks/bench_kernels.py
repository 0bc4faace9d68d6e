"""Time the compiled and numpy kernels on the test-field fixture.

    python benchmarks/bench_kernels.py [--repeat N] [--workers N]

Prints one line per (engine, backend) with the best wall time and the
speed-up of the compiled core over the fallback.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from lcxplan import formats, kernels
from lcxplan.environment import Environment
from lcxplan.linkbudget import Frequency, LinkBudgetParams
from lcxplan.propagation import EngineConfig, simulate

DATA = Path(__file__).resolve().parents[1] / "src" / "lcxplan" / "data"


def available():
    names = ["python"]
    try:
        kernels.get_backend("cython")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def use(name):
    impl = kernels.get_backend(name)
    kernels.single_path_block = impl.single_path_block
    kernels.coherent_block = impl.coherent_block


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    spec = formats.parse_cable_spec(DATA / "synthetic_cable.txt")
    layout = formats.parse_layout(DATA / "testfield_layout.txt")
    field = formats.parse_environment(DATA / "testfield_environment.txt")
    # add a few buildings so the obstruction test runs too
    from lcxplan.environment import Obstacle
    blocks = tuple(Obstacle(np.array([[x, y], [x + 6, y], [x + 6, y + 4], [x, y + 4]], float), 10.0)
                   for x, y in ((10, 20), (25, 50), (8, 70)))
    field = Environment(field.grid_origin, field.grid_extent, field.grid_resolution,
                        barriers=field.barriers, obstacles=blocks)
    rig = LinkBudgetParams(18.0)
    cases = [
        ("spl", field, Frequency.from_ghz(5.9), EngineConfig("spl", worker_count=args.workers)),
        ("dominant_path", field, Frequency.from_ghz(5.9),
         EngineConfig("dominant_path", include_barrier_reflection=True, worker_count=args.workers)),
        ("coherent", Environment((30.0, 0.0), (20.0, 50.0), 1.0), Frequency.from_ghz(2.4),
         EngineConfig("coherent", worker_count=args.workers)),
    ]
    print(f"{'engine':<15}{'backend':<9}{'cells':>7}{'seconds':>10}{'speed-up':>10}")
    for engine, env, f, cfg in cases:
        results = {}
        for name in available():
            use(name)
            results[name] = best_time(lambda: simulate(layout, spec, env, f, rig, cfg), args.repeat)
        ref = results["python"][0]
        for name, (secs, cmap) in results.items():
            print(f"{engine:<15}{name:<9}{cmap.cells.size:>7}{secs:>10.3f}{ref / secs:>9.1f}x")
        if len(results) == 2:
            diff = np.max(np.abs(results["cython"][1].cells - results["python"][1].cells))
            print(f"{'':<15}max |cython - python| = {diff:.1e} dB")


if __name__ == "__main__":
    main()
