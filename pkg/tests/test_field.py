import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arw.curves import build_curve
from arw.errors import ArwError, GridAliasesFrequencies
from arw.field import (draw_coefficients, dump_field_csv, empirical_covariance, evaluate,
                       exact_covariance, l2_norm_fluctuation, restrict_to_curve, single_mode,
                       stub_draw, synthesize_grid)
from arw.lattice import enumerate_points

from oracles import dense_scan_sign_changes

FS25 = enumerate_points(25, 2)


def test_stub_value_at_origin():
    for n in (5, 25, 65):
        fs = enumerate_points(n, 2)
        assert evaluate(stub_draw(fs, 1.0), [[0.0, 0.0]])[0] == pytest.approx(math.sqrt(fs.count))


def test_draw_is_deterministic():
    a = draw_coefficients(FS25, 11, 3).coeffs
    b = draw_coefficients(FS25, 11, 3).coeffs
    assert a.tobytes() == b.tobytes()
    assert draw_coefficients(FS25, 11, 4).coeffs.tobytes() != a.tobytes()
    assert draw_coefficients(FS25, 12, 3).coeffs.tobytes() != a.tobytes()


def test_coefficient_law():
    fs = enumerate_points(5, 2)
    re = np.concatenate([draw_coefficients(fs, 1, i).coeffs.real for i in range(50_000)])
    assert re.var() == pytest.approx(0.5, abs=0.005)
    # 2|a|^2 is chi-squared with two degrees of freedom: mean 2, variance 4
    im = np.concatenate([draw_coefficients(fs, 2, i).coeffs for i in range(20_000)])
    chi = 2 * np.abs(im) ** 2
    assert chi.mean() == pytest.approx(2, abs=0.03)
    assert chi.var() == pytest.approx(4, abs=0.15)


def test_l2_norm_fluctuation():
    fs = enumerate_points(65, 2)
    assert l2_norm_fluctuation(stub_draw(fs, 1.0)) == 0
    assert l2_norm_fluctuation(stub_draw(fs, 1 + 1j)) == pytest.approx(fs.count / 2)
    z = np.array([l2_norm_fluctuation(draw_coefficients(fs, 5, i)) for i in range(20_000)])
    assert abs(z.mean()) < 3 * math.sqrt(fs.count / 2 / len(z))
    assert z.var() == pytest.approx(fs.count / 2, rel=0.05)


def test_grid_matches_direct_sum():
    draw = stub_draw(FS25, 1.0)
    sample = synthesize_grid(draw, 64, method="fft")
    rng = np.random.default_rng(0)
    ij = rng.integers(0, 64, (100, 2))
    direct = evaluate(draw, ij / 64)
    assert np.max(np.abs(sample.values[ij[:, 0], ij[:, 1]] - direct)) < 1e-9


@given(st.sampled_from([1, 2, 5, 10, 13, 25, 65]), st.integers(0, 2**32), st.integers(0, 10**6))
def test_fft_and_direct_agree(n, seed, idx):
    fs = enumerate_points(n, 2)
    draw = draw_coefficients(fs, seed, idx)
    M = 2 * math.ceil(math.sqrt(n)) + 2
    a = synthesize_grid(draw, M, with_gradient=True, method="fft")
    b = synthesize_grid(draw, M, with_gradient=True, method="direct")
    assert np.max(np.abs(a.values - b.values)) < 1e-9
    for ga, gb in zip(a.grad, b.grad):
        assert np.max(np.abs(ga - gb)) < 1e-9 * max(1.0, np.max(np.abs(gb)))


def test_grid_mean_and_parseval():
    draw = draw_coefficients(FS25, 3, 0)
    v = synthesize_grid(draw, 64).values
    assert abs(v.mean()) < 1e-10
    # spatial variance of one draw is (2/N) sum |a|^2 exactly
    assert v.var() == pytest.approx(2 * np.sum(np.abs(draw.coeffs) ** 2) / FS25.count, rel=1e-12)
    spatial = [synthesize_grid(draw_coefficients(FS25, 3, i), 32).values.var() for i in range(2000)]
    assert np.mean(spatial) == pytest.approx(1.0, abs=3 * np.std(spatial) / math.sqrt(2000))


def test_gradient_matches_exact():
    draw = draw_coefficients(FS25, 4, 1)
    s = synthesize_grid(draw, 32, with_gradient=True)
    pts = np.array([[3, 7], [10, 0], [31, 31]])
    _, g = evaluate(draw, pts / 32, with_gradient=True)
    for k in range(2):
        assert np.allclose(s.grad[k][pts[:, 0], pts[:, 1]], g[:, k], atol=1e-9)


def test_laplacian_eigenfunction():
    draw = draw_coefficients(FS25, 8, 0)
    errs = []
    for M in (128, 256):
        v = synthesize_grid(draw, M).values
        lap = sum(np.roll(v, 1, a) + np.roll(v, -1, a) - 2 * v for a in (0, 1)) * M * M
        errs.append(np.max(np.abs(lap + 4 * math.pi**2 * 25 * v)))
    assert errs[1] < errs[0] / 3.5  # second-order convergence
    assert errs[1] < 0.01 * 4 * math.pi**2 * 25 * np.max(np.abs(v))


def test_aliasing_guard():
    with pytest.raises(GridAliasesFrequencies):
        synthesize_grid(stub_draw(FS25, 1.0), 10)
    synthesize_grid(stub_draw(FS25, 1.0), 11)
    with pytest.raises(ArwError):
        synthesize_grid(stub_draw(FS25, 1.0), 16, method="spline")


def test_stationarity_covariance():
    lags = [(i, j) for i in range(5) for j in range(4)]
    S = 400
    emp = np.mean([empirical_covariance(synthesize_grid(draw_coefficients(FS25, 9, i), 32).values,
                                        lags) for i in range(S)], axis=0)
    exact = exact_covariance(FS25, np.array(lags) / 32)
    assert exact[0] == 1.0
    assert np.max(np.abs(emp - exact)) < 5 / math.sqrt(S)


def test_restriction_matches_direct():
    c = build_curve("circle:r=0.2", 1024)
    draw = stub_draw(FS25, 1.0)
    r = restrict_to_curve(draw, c)
    assert np.max(np.abs(r.values - evaluate(draw, c.position))) < 1e-10
    h = 1e-6
    t = np.array([0.1, 0.7])
    fd = (r.evaluate(t + h) - r.evaluate(t - h)) / (2 * h)
    assert np.allclose(r.derivative(t), fd, atol=1e-5)


def test_restriction_sign_changes():
    c = build_curve("circle:r=0.2")
    r = restrict_to_curve(single_mode(FS25, (5, 0)), c)
    assert dense_scan_sign_changes(r.values) == 8
    tiny = build_curve("circle:r=0.01,cx=0,cy=0.3")
    r = restrict_to_curve(single_mode(FS25, (5, 0)), tiny)
    assert dense_scan_sign_changes(r.values) == 0


def test_single_mode_either_half():
    x = np.array([[0.1, 0.3]])
    a = evaluate(single_mode(FS25, (3, 4)), x)[0]
    b = evaluate(single_mode(FS25, (-3, -4)), x)[0]
    assert a == pytest.approx(b) == pytest.approx(math.cos(2 * math.pi * (0.3 + 1.2)))
    with pytest.raises(ArwError):
        single_mode(FS25, (1, 1))


def test_dump_field_csv(tmp_path):
    s = synthesize_grid(draw_coefficients(FS25, 42, 0), 16)
    path = tmp_path / "f.csv"
    dump_field_csv(s, path, 42)
    lines = path.read_text().splitlines()
    assert lines[:3] == ["n,25", "M,16", "seed,42"]
    back = np.array([[float(x) for x in ln.split(",")] for ln in lines[3:]])
    assert np.array_equal(back, s.values)
