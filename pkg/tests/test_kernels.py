"""The compiled kernels and the numpy fallback compute the same thing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiardlab import _kernels_py as pure
from billiardlab import kernels
from oracles import support_values

compiled = pytest.importorskip("billiardlab._kernels")

coeffs = st.lists(st.floats(-0.02, 0.02), min_size=1, max_size=12)


def _series(a, b):
    n = max(len(a), len(b))
    a = np.pad(np.array(a, dtype=float), (0, n - len(a)))
    b = np.pad(np.array(b, dtype=float), (0, n - len(b)))
    # keep the body strictly convex so the gauge is well defined
    scale = np.arange(1, n + 1) ** 2
    return a / scale, b / scale


def test_backend_names():
    assert pure.BACKEND != compiled.BACKEND
    assert kernels.BACKEND in (pure.BACKEND, compiled.BACKEND)


@settings(max_examples=40, deadline=None)
@given(coeffs, coeffs, st.integers(0, 3))
def test_trig_series_matches_oracle(a, b, nd):
    a, b = _series(a, b)
    x = np.linspace(-7, 7, 301)
    ref = support_values(1.0, a, b, x)
    for impl in (pure, compiled):
        out = impl.trig_series(1.0, a, b, x, nd)
        for d in range(nd + 1):
            np.testing.assert_allclose(out[d], ref[d], atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(coeffs, coeffs, st.integers(0, 2**32 - 1))
def test_support_gauge_backends_agree(a, b, seed):
    a, b = _series(a, b)
    X, Y = np.random.default_rng(seed).normal(size=(2, 200)) * 3
    g1, p1, h1 = pure.support_gauge(1.0, a, b, X, Y)
    g2, p2, h2 = compiled.support_gauge(1.0, a, b, X, Y)
    np.testing.assert_allclose(g1, g2, rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(np.cos(p1 - p2), 1.0, atol=1e-13)


def test_polygon_gauge_backends_agree(rng):
    ang = 2 * np.pi * np.arange(5) / 5
    normals = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    offsets = rng.uniform(0.5, 1.5, 5)
    X, Y = rng.normal(size=(2, 1000))
    g1, e1 = pure.polygon_gauge(normals, offsets, X, Y)
    g2, e2 = compiled.polygon_gauge(normals, offsets, X, Y)
    np.testing.assert_array_equal(g1, g2)
    np.testing.assert_array_equal(e1, e2)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.9), st.integers(0, 2**32 - 1))
def test_lift_backends_agree(amp, seed):
    cells = 256
    step = 2 * np.pi / cells
    grid = np.arange(cells + 1) * step
    values = grid + amp * np.sin(grid)
    slopes = 1 + amp * np.cos(grid)
    t = np.random.default_rng(seed).uniform(-20, 20, 500)
    for u, v in zip(pure.lift_eval(step, values, slopes, t), compiled.lift_eval(step, values, slopes, t)):
        np.testing.assert_allclose(u, v, rtol=1e-14, atol=1e-13)
    s = pure.lift_eval(step, values, slopes, t)[0]
    for impl in (pure, compiled):
        np.testing.assert_allclose(impl.lift_invert(step, values, slopes, s), t, atol=1e-11)

