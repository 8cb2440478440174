import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levelcross.connection import diagonal_holonomy, solid_angle
from levelcross.errors import DegeneratePointError, InvalidParameterError, InvalidPathError
from levelcross.paths import (circle_path, custom_path, load_path, path_from_dict, path_to_dict,
                              real_plane_loop, save_path)
from levelcross.spectra import hamiltonian_at


def test_circle_geometry():
    p = circle_path(1.0, math.pi / 2, 100.0)
    r, theta, phi, theta_dot, phi_dot = p.angles()
    assert np.max(np.abs(r - 1)) < 1e-12
    assert np.ptp(theta) < 1e-12
    assert np.allclose(phi_dot, 2 * math.pi / 100)
    assert p.cyclic and p.n_samples == 4096 and p.t[0] == 0 and p.t[-1] == 100
    assert abs(solid_angle(p) - 2 * math.pi) < 1e-12


def test_near_crossing_circle_same_solid_angle():
    p = circle_path(1e-4, math.pi / 2, 100.0)
    assert abs(p.grT() - 0.01) < 1e-15
    assert abs(solid_angle(p) - 2 * math.pi) < 1e-12


def test_revolutions_double_holonomy():
    one = diagonal_holonomy(circle_path(1.0, 1.0, 10.0), "minus")
    two = diagonal_holonomy(circle_path(1.0, 1.0, 10.0, revolutions=2), "minus")
    assert abs(two - 2 * one) < 1e-12


@pytest.mark.parametrize("kw", [dict(r=0.0), dict(r=-1.0), dict(T=0.0), dict(n_samples=63),
                                dict(revolutions=0), dict(g=0.0)])
def test_circle_rejects(kw):
    args = dict(r=1.0, theta=1.0, T=1.0)
    args.update(kw)
    with pytest.raises(InvalidParameterError):
        circle_path(**args)


@pytest.mark.parametrize("path", [circle_path(0.7, 1.1, 5.0, revolutions=3, e_shift=0.2),
                                  real_plane_loop(0.5, 5.0)], ids=["circle", "real-plane"])
def test_derivative_matches_finite_difference(path):
    errs = []
    for h in (1e-3, 5e-4):
        t = np.linspace(0.1, 4.9, 50)
        _, yp, _ = path.evaluate(t + h)
        _, ym, _ = path.evaluate(t - h)
        _, _, yd = path.evaluate(t)
        errs.append(np.max(np.abs((yp - ym) / (2 * h) - yd)))
    assert errs[0] < 1e-5
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_real_plane_loop_is_real():
    p = real_plane_loop(2.0, 10.0)
    assert np.max(np.abs(p.y[:, 1])) == 0.0
    assert p.cyclic
    for E, y in zip(p.E[::97], p.y[::97]):
        assert np.max(np.abs(hamiltonian_at(E, p.g, y).matrix.imag)) == 0.0
    # encircles the origin once in the (y1, y3) plane
    ang = np.unwrap(np.arctan2(p.y[:, 0], p.y[:, 2]))
    assert abs(ang[-1] - ang[0] - 2 * math.pi) < 1e-12


def test_half_loop_is_open():
    p = real_plane_loop(1.0, 10.0, turns=0.5)
    assert not p.cyclic
    assert np.allclose(p.y[-1], [0, 0, -1], atol=1e-12)


def test_custom_linear_segment():
    p = custom_path([(0.0, 0.0, (1, 0, 0)), (2.0, 1.0, (1, 2, 0))], "linear", n_samples=64)
    assert np.allclose(p.y[:, 0], 1) and np.allclose(p.y[:, 1], p.t)
    assert np.allclose(p.ydot, [0, 1, 0]) and np.allclose(p.E, p.t / 2)


def test_custom_circle_knots_match_analytic():
    T = 10.0
    ref = circle_path(1.0, 1.0, T)
    tk = np.linspace(0, T, 401)
    _, yk, _ = ref.evaluate(tk)
    p = custom_path([(t, 0.0, y) for t, y in zip(tk, yk)], "cubic", cyclic=True)
    t = np.linspace(0, T, 10 ** 4)
    _, y1, yd1 = p.evaluate(t)
    _, y2, yd2 = ref.evaluate(t)
    assert np.max(np.abs(y1 - y2)) < 1e-8
    assert np.max(np.abs(yd1 - yd2)) < 1e-6


def test_custom_rejects_mismatched_cyclic():
    knots = [(t, 0.0, (1 + t, 0.5, 0.0)) for t in range(5)]
    with pytest.raises(InvalidPathError):
        custom_path(knots, "cubic", cyclic=True)


def test_custom_rejects_nonmonotone_and_degenerate():
    with pytest.raises(InvalidParameterError):
        custom_path([(0, 0, (1, 0, 0)), (2, 0, (1, 1, 0)), (1, 0, (1, 2, 0))], "linear")
    with pytest.raises(DegeneratePointError):
        custom_path([(0, 0, (-1, 0, 0)), (2, 0, (1, 0, 0))], "linear", n_samples=65)


def test_energy_shift():
    p = circle_path(1.0, 1.0, 5.0)
    q = p.with_energy_shift(0.3)
    assert np.allclose(q.E - p.E, 0.3)
    assert np.allclose(q.evaluate(np.array([1.234]))[0], 0.3)
    assert np.array_equal(q.y, p.y)


def test_immutable_samples():
    p = circle_path(1.0, 1.0, 5.0)
    with pytest.raises(ValueError):
        p.y[0, 0] = 2.0


@pytest.mark.parametrize("path", [
    circle_path(0.123456789, 1.1, 7.0, revolutions=2, e_shift=0.1, g=1.7),
    real_plane_loop(0.3, 4.0, turns=0.5),
    custom_path([(t, 0.1 * t, (1 + 0.1 * t, math.sin(t), 0.3)) for t in np.linspace(0, 3, 9)],
                "cubic"),
], ids=["circle", "half-loop", "custom"])
def test_file_roundtrip_bit_faithful(path, tmp_path):
    f = tmp_path / "p.json"
    save_path(path, f)
    q = load_path(f)
    assert q.label == path.label and q.cyclic == path.cyclic and q.T == path.T and q.g == path.g
    for name in ("t", "E", "y", "ydot"):
        assert np.array_equal(getattr(q, name), getattr(path, name))
    tt = np.linspace(0, path.T, 33)
    for a, b in zip(q.evaluate(tt), path.evaluate(tt)):
        assert np.array_equal(a, b)
    # and again through text
    assert json.dumps(path_to_dict(q), sort_keys=True) == json.dumps(path_to_dict(path),
                                                                     sort_keys=True)


def test_file_schema_fields():
    d = path_to_dict(circle_path(1.0, 1.0, 5.0))
    for key in ("label", "T", "cyclic", "interpolation", "knots"):
        assert key in d
    k = d["knots"][0]
    assert set(k) == {"t", "E", "y"} and len(k["y"]) == 3


def test_file_unknown_key_rejected():
    d = path_to_dict(circle_path(1.0, 1.0, 5.0))
    d["colour"] = "blue"
    with pytest.raises(InvalidParameterError):
        path_from_dict(d)


def test_plain_knot_file_loads():
    knots = [{"t": t, "E": 0.0, "y": [math.cos(t), math.sin(t), 0.2]}
             for t in np.linspace(0, 2 * math.pi, 65)]
    knots[-1]["y"] = knots[0]["y"]
    text = json.dumps({"label": "ring", "T": 2 * math.pi, "cyclic": True,
                       "interpolation": "cubic", "knots": knots})
    p = load_path(io.StringIO(text))
    assert p.cyclic and p.g == 1.0
    assert abs(solid_angle(p) - 2 * math.pi * (1 - 0.2 / math.hypot(1, 0.2))) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 1e3), st.floats(1e-3, math.pi - 1e-3), st.floats(0.1, 1e3),
       st.integers(1, 4))
def test_circle_invariants_property(r, theta, T, rev):
    p = circle_path(r, theta, T, revolutions=rev, n_samples=256)
    rr, th = p.angles()[:2]
    assert np.max(np.abs(rr - r)) <= 1e-12 * max(1, r)
    assert np.ptp(th) < 1e-12
    assert np.max(np.abs(p.y[0] - p.y[-1])) < 1e-12 * max(1, r)
