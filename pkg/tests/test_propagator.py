import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levelcross.errors import InvalidParameterError, InvalidPathError
from levelcross.paths import circle_path, custom_path
from levelcross.propagator import (IntegratorConfig, c_basis_amplitudes, equivalence_check,
                                   evolve_c_basis, evolve_effective, evolve_original, frames_at,
                                   hamiltonian_coeffs, to_frame_amplitudes)
from levelcross.spectra import rotation_u


def static_path(T, y=(0, 0, 1)):
    """Fixed y; the default gives h = diag(1, -1)."""
    knots = [(0.0, 0.0, y), (T, 0.0, y)]
    return custom_path(knots, "linear", n_samples=64)


def test_static_diagonal(backend):
    res = evolve_original(static_path(math.pi), np.array([1, 0]), IntegratorConfig(256))
    assert np.allclose(res.final_state, [-1, 0], atol=1e-13)
    assert res.norm_drift < 1e-13


def test_rejects_unnormalized():
    with pytest.raises(InvalidParameterError):
        evolve_original(static_path(1.0), np.array([1, 1]), IntegratorConfig(64))


@pytest.mark.parametrize("kw", [dict(n_steps=32), dict(n_steps=100.5), dict(scheme="rk4")])
def test_config_validation(kw):
    with pytest.raises(InvalidParameterError):
        IntegratorConfig(**kw)


def test_adiabatic_circle_returns(backend):
    p = circle_path(1.0, math.pi / 2, 100.0)
    v0 = frames_at(p, np.array([0.0]))[0][:, 1]
    res = evolve_original(p, v0, IntegratorConfig(2 ** 14))
    assert abs(np.vdot(v0, res.final_state)) > 0.999
    assert res.unitarity_error() < 1e-9 and res.norm_drift < 1e-9


def test_euler_drifts_more():
    p = circle_path(1.0, math.pi / 2, 100.0)
    v0 = frames_at(p, np.array([0.0]))[0][:, 1]
    good = evolve_original(p, v0, IntegratorConfig(2 ** 14))
    bad = evolve_original(p, v0, IntegratorConfig(2 ** 14, "naive-euler"))
    assert bad.norm_drift > 1e3 * max(good.norm_drift, 1e-16)


def test_second_order_self_convergence(backend):
    p = circle_path(0.3, 1.0, 20.0, e_shift=0.4)
    psi0 = np.array([0.6, 0.8])
    ref = evolve_original(p, psi0, IntegratorConfig(2 ** 16)).final_state
    steps = [2 ** 8, 2 ** 9, 2 ** 10, 2 ** 11]
    errs = [np.max(np.abs(evolve_original(p, psi0, IntegratorConfig(n)).final_state - ref))
            for n in steps]
    slopes = -np.diff(np.log2(errs)) / np.diff(np.log2(steps))
    assert np.all(np.abs(slopes - 2.0) < 0.1)


def test_adiabatic_picture_is_pure_phase():
    p = circle_path(1.0, math.pi / 2, 100.0, e_shift=0.25)
    res = evolve_effective(p, np.array([0, 1]), IntegratorConfig(2 ** 12), include_offdiagonal=False)
    assert abs(res.final_state[0]) == 0.0
    expected = -(0.25 - 1.0) * 100.0 + math.pi
    got = np.angle(res.final_state[1])
    assert abs(math.remainder(got - expected, 2 * math.pi)) < 1e-9


def test_effective_zero_connection_pure_dynamical():
    # off the polar axis, where the frame gauge is regular
    p = static_path(2.0, (1, 0, 0))
    res = evolve_effective(p, np.array([1, 0]), IntegratorConfig(128))
    assert np.allclose(res.final_state, [np.exp(-2j), 0], atol=1e-13)


def test_equivalence_static_roundoff():
    assert equivalence_check(static_path(3.0, (1, 0, 0)), np.array([0.6, 0.8]), IntegratorConfig(512)) < 1e-13


@pytest.mark.parametrize("r", [1.0, 1e-4])
def test_equivalence_circles(r, backend):
    p = circle_path(r, 1.0, 100.0, e_shift=0.1)
    psi0 = np.array([0.6, 0.8j])
    errs = [equivalence_check(p, psi0, IntegratorConfig(n)) for n in (2 ** 12, 2 ** 14)]
    assert errs[1] < 1e-6
    if errs[1] > 1e-11:
        assert 14 < errs[0] / errs[1] < 18


def test_equivalence_fails_through_pole():
    knots = [(t, 0.0, (math.sin(t), 0.0, math.cos(t))) for t in np.linspace(0, 2 * math.pi, 65)]
    knots[-1] = (knots[-1][0],) + knots[0][1:]
    p = custom_path(knots, "cubic", cyclic=True)
    with pytest.raises(InvalidPathError):
        equivalence_check(p, np.array([1, 0]), IntegratorConfig(256))


def test_energy_shift_is_global_phase(backend):
    p = circle_path(0.5, 1.0, 30.0)
    c = 0.7
    psi0 = np.array([0.6, 0.8])
    a = evolve_original(p, psi0, IntegratorConfig(2 ** 12)).final_state
    b = evolve_original(p.with_energy_shift(c), psi0, IntegratorConfig(2 ** 12)).final_state
    assert np.max(np.abs(b - np.exp(-1j * c * 30.0) * a)) < 1e-12


def test_trajectory_decimated():
    p = circle_path(1.0, 1.0, 10.0)
    res = evolve_original(p, np.array([1, 0]), IntegratorConfig(2 ** 14, store_trajectory=True))
    assert len(res.times) <= 4096 and res.times[0] == 0 and res.times[-1] == 10.0
    assert np.array_equal(res.trajectory[-1], res.final_state)


def test_c_basis_phases_one_revolution():
    p = circle_path(1e-4, math.pi / 2, 100.0)
    res = evolve_c_basis(p, np.array([1, 0]), IntegratorConfig(2 ** 12))
    assert abs(res.geometric_mode_phases[0] - 2 * math.pi) < 1e-12
    assert res.geometric_mode_phases[1] == 0.0
    assert abs(math.remainder(res.geometric_mode_phases[0], 2 * math.pi)) < 1e-10


def test_c_basis_gr_zero_limit():
    # theta = pi/2 makes the g r cos(theta) energy vanish: only -int E and the 2 pi remain
    p = circle_path(1e-4, math.pi / 2, 10.0, e_shift=0.3)
    res = evolve_c_basis(p, np.array([1, 0]), IntegratorConfig(256))
    assert np.allclose(res.dynamical_mode_phases, [-3.0, -3.0], atol=1e-12)
    assert abs(np.angle(res.final_state[0]) - math.remainder(-3.0 + 2 * math.pi, 2 * math.pi)) < 1e-9


def test_c_basis_rejects_varying_theta():
    knots = [(t, 0.0, (math.cos(t), math.sin(t), 0.2 * math.sin(t)))
             for t in np.linspace(0, 2 * math.pi, 65)]
    knots[-1] = (knots[-1][0],) + knots[0][1:]
    p = custom_path(knots, "cubic", cyclic=True)
    with pytest.raises(InvalidPathError):
        evolve_c_basis(p, np.array([1, 0]), IntegratorConfig(256))


@pytest.mark.parametrize("theta", [math.pi / 2, 1.0, 2.5])
def test_c_basis_matches_exact_near_crossing(theta):
    p = circle_path(5e-6, theta, 100.0)
    cfg = IntegratorConfig(2 ** 14)
    psi0 = np.array([0.6, 0.8j])
    exact = evolve_original(p, psi0, cfg)
    c0 = c_basis_amplitudes(p, psi0, 0.0)[0]
    cb = evolve_c_basis(p, c0, cfg)
    c_exact = c_basis_amplitudes(p, exact.final_state, p.T)[0]
    assert np.max(np.abs(c_exact - cb.final_state)) < 1e-4


def test_c_basis_amplitudes_compose():
    p = circle_path(1.0, 1.2, 5.0)
    psi = np.array([0.6, 0.8j])
    b = to_frame_amplitudes(p, psi, 0.0)
    c = c_basis_amplitudes(p, psi, 0.0)[0]
    assert np.allclose(c, rotation_u(1.2).T @ b)


def test_coefficients_pictures():
    p = circle_path(2.0, math.pi / 3, 10.0, e_shift=0.5)
    t = np.array([1.0])
    w = 2 * math.pi / 10
    o = hamiltonian_coeffs(p, t, "original")[0]
    assert abs(o[0] - 0.5) < 1e-15 and abs(np.linalg.norm(o[1:]) - 2.0) < 1e-12
    e = hamiltonian_coeffs(p, t, "effective")[0]
    assert np.allclose(e, [0.5 - w / 2, -math.sin(math.pi / 3) * w / 2, 0.0,
                           2.0 - math.cos(math.pi / 3) * w / 2])
    c = hamiltonian_coeffs(p, t, "c-basis")[0]
    assert np.allclose(c, [0.5 - w / 2, 0, 0, 2.0 * 0.5 - w / 2])
    with pytest.raises(InvalidParameterError):
        hamiltonian_coeffs(p, t, "interaction")


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-3, 10), st.floats(0.05, math.pi - 0.05), st.floats(1, 200),
       st.floats(-2, 2), st.floats(0, 2 * math.pi))
def test_unitarity_property(r, theta, T, e, a):
    p = circle_path(r, theta, T, e_shift=e, n_samples=256)
    psi0 = np.array([math.cos(a), math.sin(a) * 1j])
    res = evolve_original(p, psi0, IntegratorConfig(2 ** 14))
    assert res.unitarity_error() < 1e-9 and res.norm_drift < 1e-9
