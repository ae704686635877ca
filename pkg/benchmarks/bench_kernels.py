"""Time the compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the comparison does not depend on
``BILLIARDLAB_PURE_PYTHON``.  Each row reports the best wall time over the
repeats and the largest absolute difference between the two outputs.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from billiardlab import _kernels_py as pure

try:
    from billiardlab import _kernels as compiled
except ImportError:  # pragma: no cover - extension not built
    compiled = None


def cases(rng):
    N = 64
    a = 0.01 * rng.standard_normal(N) / np.arange(1, N + 1) ** 3
    b = 0.01 * rng.standard_normal(N) / np.arange(1, N + 1) ** 3
    x = rng.uniform(0, 2 * np.pi, 100_000)
    X, Y = rng.standard_normal((2, 100_000))
    ang = 2 * np.pi * np.arange(6) / 6 + np.pi / 6
    normals = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    offsets = np.full(6, np.sqrt(3) / 2)
    cells = 4096
    step = 2 * np.pi / cells
    grid = np.arange(cells + 1) * step
    slopes = 1.0 + 0.3 * np.cos(grid)
    values = grid + 0.3 * np.sin(grid)
    t = rng.uniform(-10, 10, 100_000)
    s = rng.uniform(-10, 10, 100_000)
    return {
        "trig_series (1e5 pts, N=64, 3 derivs)": ("trig_series", (1.0, a, b, x, 3)),
        "support_gauge (1e5 pts, N=64)": ("support_gauge", (1.0, a, b, X, Y)),
        "polygon_gauge (1e5 pts, hexagon)": ("polygon_gauge", (normals, offsets, X, Y)),
        "lift_eval (1e5 pts, 4096 cells)": ("lift_eval", (step, values, slopes, t)),
        "lift_invert (1e5 pts, 4096 cells)": ("lift_invert", (step, values, slopes, s)),
    }


def _diff(u, v):
    if isinstance(u, tuple):
        return max(_diff(p, q) for p, q in zip(u, v))
    return float(np.max(np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':40s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for name, (fn, inputs) in cases(rng).items():
        f_py, f_cy = getattr(pure, fn), getattr(compiled, fn)
        t_py = min(timeit.repeat(lambda: f_py(*inputs), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: f_cy(*inputs), number=1, repeat=args.repeat))
        d = _diff(f_py(*inputs), f_cy(*inputs))
        print(f"{name:40s} {1e3 * t_py:11.2f} {1e3 * t_cy:12.2f} {t_py / t_cy:8.1f} {d:10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
