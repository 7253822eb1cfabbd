import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arw.curves import build_curve
from arw.errors import ResolutionTooCoarse, SamplingTooCoarse, UnsupportedDimension
from arw.field import (FieldSample, draw_coefficients, restrict_to_curve, single_mode,
                       synthesize_grid)
from arw.lattice import enumerate_points
from arw.levelset import (contour_segments, crossings, level_length, nodal_area_3d,
                          nodal_area_refinement)

from oracles import dense_scan_sign_changes, oracle_geodesic_length, oracle_line_circle_crossings

FS25 = enumerate_points(25, 2)


def _mode(fs, lam, M):
    return synthesize_grid(single_mode(fs, lam), M)


def test_geodesic_34():
    m = level_length(_mode(FS25, (3, 4), 512), 0.0)
    assert m.length == pytest.approx(oracle_geodesic_length((3, 4), 2), abs=0.05)
    assert m.grid == 512 and m.segments > 0


def test_geodesic_axis():
    fs = enumerate_points(1, 2)
    assert level_length(_mode(fs, (1, 0), 64), 0.0).length == pytest.approx(
        oracle_geodesic_length((1, 0), 2), abs=1e-12)


@pytest.mark.parametrize("lam", [(1, 1), (1, 2), (2, 3)])
def test_geodesic_diagonal(lam):
    fs = enumerate_points(lam[0] ** 2 + lam[1] ** 2, 2)
    got = level_length(_mode(fs, lam, 256), 0.0).length
    assert got == pytest.approx(oracle_geodesic_length(lam, 2), rel=1e-3)


def test_geodesic_rejects_non_primitive():
    with pytest.raises(ValueError):
        oracle_geodesic_length((2, 4), 2)


def test_empty_level():
    m = level_length(_mode(FS25, (3, 4), 128), 2.0)
    assert m.length == 0 and m.segments == 0


def test_resolution_guard():
    with pytest.raises(ResolutionTooCoarse):
        level_length(_mode(FS25, (3, 4), 16), 0.0)
    with pytest.raises(UnsupportedDimension):
        level_length(_mode(enumerate_points(1, 3), (0, 0, 1), 8), 0.0)


def test_refinement_cauchy():
    lengths = [level_length(_mode(FS25, (3, 4), M), 0.5).length for M in (64, 128, 256, 512)]
    diffs = np.abs(np.diff(lengths))
    assert np.all(diffs[1:] <= diffs[:-1])
    assert all(d * M <= diffs[0] * 128 for d, M in zip(diffs, (128, 256, 512)))
    # cos = 1/2 twice per period: two geodesics of length 5
    assert lengths[-1] == pytest.approx(10, rel=1e-3)


def test_refinement_delta_reported():
    m = level_length(synthesize_grid(draw_coefficients(FS25, 0, 0), 256), 0.0)
    assert 0 <= m.refinement_delta < 0.02 * m.length


@given(st.integers(0, 10**6), st.floats(-1.5, 1.5))
def test_sign_symmetry_is_exact(idx, u):
    s = synthesize_grid(draw_coefficients(FS25, 1, idx), 64)
    neg = FieldSample(s.draw, s.M, -s.values)
    assert level_length(s, u).length == level_length(neg, -u).length


def test_periodic_wrap_segments():
    v = np.cos(2 * np.pi * np.arange(8) / 8)[:, None] * np.ones((1, 8))
    wrap = contour_segments(v, 0.0)
    open_ = contour_segments(v, 0.0, (False, False))
    assert wrap.shape[0] > open_.shape[0]


def test_crossings_fixture():
    cc = crossings(restrict_to_curve(single_mode(FS25, (5, 0)), build_curve("circle:r=0.2")))
    assert cc.count == oracle_line_circle_crossings(0.1, 0.05, 0.2)[0] == 8
    assert np.all(np.diff(cc.locations) > 0)
    assert cc.count == len(cc.locations)
    # every located zero sits on one of the lines x1 = 0.05 + k/10
    x1 = build_curve("circle:r=0.2").position_at(cc.locations)[:, 0]
    assert np.allclose((x1 - 0.05) * 10, np.round((x1 - 0.05) * 10), atol=1e-9)


def test_crossings_origin_centre():
    c = build_curve("circle:r=0.2,cx=0,cy=0")
    assert crossings(restrict_to_curve(single_mode(FS25, (5, 0)), c)).count == 8


def test_crossings_tangent_line_counted_once():
    cc = crossings(restrict_to_curve(single_mode(FS25, (5, 0)), build_curve("circle:r=0.15")))
    want, tangential = oracle_line_circle_crossings(0.1, 0.05, 0.15)
    assert (cc.count, len(cc.tangential)) == (want, tangential) == (6, 2)


def test_crossings_none():
    c = build_curve("circle:r=0.01,cx=0,cy=0.3")
    assert crossings(restrict_to_curve(single_mode(FS25, (5, 0)), c)).count == 0
    assert oracle_line_circle_crossings(0.1, 0.05, 0.01, 0.0) == (0, 0)
    assert oracle_line_circle_crossings(0.1, 0.05, 0.01, 0.05) == (2, 0)


def test_crossings_dense_scan_oracle():
    theta = 2 * np.pi * np.arange(1_000_000) / 1_000_000
    x = 0.5 + 0.2 * np.cos(theta)
    y = 0.5 + 0.2 * np.sin(theta)
    scan = dense_scan_sign_changes(np.cos(2 * np.pi * (3 * x + 4 * y)))
    cc = crossings(restrict_to_curve(single_mode(FS25, (3, 4)), build_curve("circle:r=0.2")))
    assert cc.count == scan


def test_crossings_sampling_guard():
    fs = enumerate_points(1105, 2)
    with pytest.raises(SamplingTooCoarse):
        crossings(restrict_to_curve(draw_coefficients(fs, 0, 0), build_curve("circle:r=0.2", 256)))


@given(st.integers(0, 10**6))
def test_crossing_parity(idx):
    cc = crossings(restrict_to_curve(draw_coefficients(FS25, 3, idx), build_curve("circle:r=0.2")))
    assert cc.count % 2 == 0


def test_nodal_area_planes():
    fs = enumerate_points(1, 3)
    assert nodal_area_3d(_mode(fs, (0, 0, 1), 32), 0.0) == pytest.approx(2, rel=1e-2)
    assert nodal_area_3d(_mode(fs, (0, 0, 1), 32), 1.5) == 0.0
    fs2 = enumerate_points(2, 3)
    assert nodal_area_3d(_mode(fs2, (1, 1, 0), 48), 0.0) == pytest.approx(2 * math.sqrt(2), rel=1e-2)


def test_nodal_area_guards_and_refinement():
    fs = enumerate_points(1, 3)
    with pytest.raises(ResolutionTooCoarse):
        nodal_area_3d(_mode(enumerate_points(9, 3), (0, 0, 3), 8), 0.0)
    with pytest.raises(UnsupportedDimension):
        nodal_area_3d(_mode(FS25, (3, 4), 64), 0.0)
    area, delta = nodal_area_refinement(_mode(fs, (0, 0, 1), 32), 0.0)
    assert area == pytest.approx(2, rel=1e-2) and delta < 1e-2
