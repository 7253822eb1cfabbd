import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arw.curves import (a_functional, audit, b_functional, build_curve, direction_integral,
                        lattice_measure, parse_descriptor, uniform_measure)
from arw.errors import ArwError, CurvatureVanishes, CurveDoesNotClose, WeightsNotNormalized
from arw.lattice import enumerate_points

KFOLD = [f"kfold:k={k},r=0.2,eps=0.05" for k in (3, 4, 5, 6)]
STATIC = ["circle:r=0.2", *KFOLD, "custom:a4=0.05,b4=0.02", "kfold:k=4,r=0.15,eps=0.15"]


@pytest.fixture(scope="module")
def audits():
    return {s: audit(build_curve(s)) for s in STATIC + ["ellipse:a=0.2,b=0.1", "custom:b2=0.1"]}


def test_circle_length():
    c = build_curve("circle:r=0.2", 1024)
    assert c.length == pytest.approx(2 * math.pi * 0.2, abs=1e-12)


@pytest.mark.parametrize("spec", STATIC + ["ellipse:a=0.2,b=0.1"])
def test_curve_invariants(spec):
    c = build_curve(spec)
    assert np.max(np.abs(np.linalg.norm(c.tangent, axis=1) - 1)) < 1e-10
    assert np.min(np.abs(c.curvature)) > 1e-6
    assert c.closure_error() < 1e-10
    # finite differences of the positions reproduce the tangents
    h = c.length / c.K
    fd = (np.roll(c.position, -1, axis=0) - np.roll(c.position, 1, axis=0)) / (2 * h)
    assert np.max(np.abs(fd - c.tangent)) < 1e-4


def test_circle_audit(audits):
    a = audits["circle:r=0.2"]
    assert a.A == pytest.approx(1 / 8, abs=1e-12)
    assert a.B == pytest.approx(0, abs=1e-12)
    assert a.I4 == pytest.approx(3 / 8, abs=1e-12)
    assert a.I4prime == pytest.approx(0, abs=1e-12)
    assert a.classification == "doubly_static"


@pytest.mark.parametrize("k, cls", [(3, "doubly_static"), (4, "static"), (5, "doubly_static"),
                                    (6, "doubly_static")])
def test_kfold_classification(audits, k, cls):
    assert audits[f"kfold:k={k},r=0.2,eps=0.05"].classification == cls


def test_kfold4_is_not_circular(audits):
    a = audits["kfold:k=4,r=0.2,eps=0.05"]
    assert a.I4 > 0.375 + 1e-4


def test_generic_curves(audits):
    for spec in ("ellipse:a=0.2,b=0.1", "custom:b2=0.1"):
        a = audits[spec]
        assert a.classification == "generic"
        assert 4 * a.B_uniform - a.length**2 > 1e-3 * a.length**2


@pytest.mark.parametrize("spec", STATIC)
def test_static_relations(audits, spec):
    a = audits[spec]
    assert a.I4 - (0.5 + 8 * a.A**2 - 2 * a.A + 8 * a.B**2) == pytest.approx(0, abs=1e-9)
    assert a.I4prime == pytest.approx(1 - 8 * a.A, abs=1e-12)
    assert a.I2 == pytest.approx(0.5, abs=1e-8)
    assert a.I2perp == pytest.approx(0.5, abs=1e-8)
    assert 0 < a.A < 0.25 and a.B**2 < a.A * (1 - 4 * a.A) / 4
    assert 0.375 - 1e-9 <= a.I4 < 0.5 and -1 < a.I4prime < 1
    assert 4 * a.B_uniform - a.length**2 == pytest.approx(0, abs=1e-8 * a.length**2)


def test_quadrature_converged():
    for spec in ("kfold:k=4,r=0.2,eps=0.05", "ellipse:a=0.2,b=0.1"):
        a, b = audit(build_curve(spec, 2048)), audit(build_curve(spec, 4096))
        for f in ("A", "B", "I4", "I4prime", "I2"):
            assert abs(getattr(a, f) - getattr(b, f)) < 1e-10


def test_rotation_and_reflection():
    base = audit(build_curve("custom:a4=0.05,b4=0.02"))
    rot = audit(build_curve(f"custom:a4=0.05,b4=0.02,rot={math.pi / 2!r}"))
    mirror = audit(build_curve("custom:a4=-0.05,b4=0.02"))
    for f in ("A", "I4", "I2"):
        assert getattr(rot, f) == pytest.approx(getattr(base, f), abs=1e-12)
        assert getattr(mirror, f) == pytest.approx(getattr(base, f), abs=1e-12)
    # for static curves the quarter turn preserves B; the reflection flips it
    assert rot.B == pytest.approx(base.B, abs=1e-12)
    assert mirror.B == pytest.approx(-base.B, abs=1e-12)
    assert rot.classification == mirror.classification == base.classification == "static"


def test_direction_integrals():
    c = build_curve("circle:r=0.2")
    assert direction_integral(c, (1, 0), (1, 0), 2, 2) == pytest.approx(3 / 8, abs=1e-12)
    assert direction_integral(c, (1, 0), (1, 0), 4, 0) == pytest.approx(3 / 8, abs=1e-12)
    k4 = build_curve("kfold:k=4,r=0.2,eps=0.05")
    k3 = build_curve("kfold:k=3,r=0.2,eps=0.05")
    rng = np.random.default_rng(0)
    for th, th2 in rng.uniform(0, 2 * math.pi, (10, 2)):
        u, v = (math.cos(th), math.sin(th)), (math.cos(th2), math.sin(th2))
        assert direction_integral(k4, u, u, 2, 0) == pytest.approx(0.5, abs=1e-12)
        assert direction_integral(k3, u, u, 4, 0) == pytest.approx(3 / 8, abs=1e-12)
        dot = math.cos(th - th2)
        assert direction_integral(k3, u, v, 2, 2) == pytest.approx((1 + 2 * dot**2) / 8, abs=1e-12)
    with pytest.raises(ArwError):
        direction_integral(c, (1, 0), (0, 1), 5, 0)


def test_functionals():
    c = build_curve("circle:r=0.2")
    d, w = lattice_measure(enumerate_points(5, 2))
    assert 4 * b_functional(c, d, w) - c.length**2 == pytest.approx(0, abs=1e-12)
    e = build_curve("ellipse:a=0.2,b=0.1")
    assert 4 * b_functional(e, *uniform_measure()) - e.length**2 > 0
    assert a_functional(c, *uniform_measure(64)) > 0
    with pytest.raises(WeightsNotNormalized):
        b_functional(c, d, w * 2)
    with pytest.raises(WeightsNotNormalized):
        b_functional(c, d, -w)


def test_construction_errors():
    with pytest.raises(ArwError):
        build_curve("circle:r=0.2", 128)
    with pytest.raises(ArwError):
        build_curve("circle:r=0.2", 1001)
    with pytest.raises(ArwError):
        build_curve("circle:r=0.6")
    with pytest.raises(CurvatureVanishes):
        build_curve("kfold:k=3,r=0.2,eps=0.4")
    with pytest.raises(CurveDoesNotClose):
        build_curve("custom:a1=0.3")
    for bad in ("square:r=1", "circle:r", "circle:r=x", "custom:c3=1", "kfold:k=3,q=1"):
        with pytest.raises(ArwError):
            build_curve(bad)


def test_descriptor_roundtrip():
    s = parse_descriptor("kfold:k=3,r=0.2,eps=0.05")
    assert s.kind == "kfold" and s.params == {"k": 3.0, "r": 0.2, "eps": 0.05}
    assert str(s) == "kfold:k=3,r=0.2,eps=0.05"
    assert parse_descriptor(str(s)) == s


@given(st.integers(3, 8), st.floats(0.0, 0.1), st.floats(0.05, 0.3), st.floats(0, 2 * math.pi))
def test_kfold_family_is_static(k, eps, r, rot):
    a = audit(build_curve(f"kfold:k={k},r={r!r},eps={eps!r},rot={rot!r}", 512))
    assert a.is_static
    if k != 4:
        assert a.is_doubly_static
    assert a.I4 - (0.5 + 8 * a.A**2 - 2 * a.A + 8 * a.B**2) == pytest.approx(0, abs=1e-9)
