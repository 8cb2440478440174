"""Time-ordered evolution of the two-level problem in three pictures.

* ``original``   -- the 2x2 Hamiltonian itself, state in the fixed basis;
* ``effective``  -- eigenframe amplitudes b(t) driven by diag(E +- g r) - A(t);
* ``c-basis``    -- amplitudes c = U(theta)^T b with the near-crossing
  Hamiltonian diag(E + g r cos t - p', E - g r cos t).

Every picture is integrated by the same kernel: piecewise-constant
Hamiltonian sampled at step midpoints, exact 2x2 exponential per step.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import InvalidParameterError, InvalidPathError
from .spectra import frame_matrices, polar_arrays, rotation_u

SCHEMES = ("midpoint-exponential", "naive-euler")
PICTURES = ("original", "effective", "adiabatic", "c-basis")
MAX_TRAJECTORY = 4096
NORM_TOL = 1e-9


@dataclass(frozen=True)
class IntegratorConfig:
    n_steps: int = 2 ** 14
    scheme: str = "midpoint-exponential"
    store_trajectory: bool = False

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 64:
            raise InvalidParameterError(f"n_steps must be an integer >= 64, got {self.n_steps!r}")
        if self.scheme not in SCHEMES:
            raise InvalidParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    initial_state: np.ndarray
    final_state: np.ndarray
    cumulative_unitary: np.ndarray
    norm_drift: float
    picture: str
    n_steps: int
    times: Optional[np.ndarray] = None
    trajectory: Optional[np.ndarray] = None

    def unitarity_error(self) -> float:
        u = self.cumulative_unitary
        return float(np.max(np.abs(u.conj().T @ u - np.eye(2))))


@dataclass(frozen=True, eq=False)
class CBasisResult(EvolutionResult):
    # per mode (c+, c-): -int of the energy part, and the geometric part int p' dt
    dynamical_mode_phases: np.ndarray = field(default_factory=lambda: np.zeros(2))
    geometric_mode_phases: np.ndarray = field(default_factory=lambda: np.zeros(2))


def _unit_state(psi):
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (2,):
        raise InvalidParameterError(f"state must be a complex 2-vector, got shape {psi.shape}")
    n = np.linalg.norm(psi)
    if abs(n - 1) > NORM_TOL:
        raise InvalidParameterError(f"initial state must be normalized, |psi| = {n!r}")
    return psi


def _check_gauge_regular(path):
    """The frame gauge is singular on the polar axis.  Reject paths that touch
    it at a sample or jump across it between samples (azimuth step near pi)."""
    _, _, phi, theta_dot, phi_dot = path.angles()
    if (not (np.all(np.isfinite(theta_dot)) and np.all(np.isfinite(phi_dot)))
            or np.max(np.abs(np.diff(phi))) > np.pi / 2):
        raise InvalidPathError(
            f"path '{path.label}' crosses the polar axis; the frame gauge is singular there")


def hamiltonian_coeffs(path, t, picture="original"):
    """``(e0, bx, by, bz)`` with ``H = e0 + b.sigma`` at times ``t``, shape (N, 4)."""
    t = np.asarray(t, dtype=np.float64)
    E, y, ydot = path.evaluate(t)
    out = np.empty(t.shape + (4,))
    if picture == "original":
        out[..., 0] = E
        out[..., 1:] = path.g * y
        return out
    _check_gauge_regular(path)
    r, theta, _, theta_dot, phi_dot = polar_arrays(y, ydot)
    if not (np.all(np.isfinite(theta_dot)) and np.all(np.isfinite(phi_dot))):
        raise InvalidPathError(
            f"path '{path.label}' crosses the polar axis; the frame gauge is singular there")
    gr = path.g * r
    ct, st = np.cos(theta), np.sin(theta)
    out[..., 0] = E - phi_dot / 2
    if picture == "effective":
        out[..., 1] = -st * phi_dot / 2
        out[..., 2] = theta_dot / 2
        out[..., 3] = gr - ct * phi_dot / 2
    elif picture == "adiabatic":
        out[..., 1] = 0.0
        out[..., 2] = 0.0
        out[..., 3] = gr - ct * phi_dot / 2
    elif picture == "c-basis":
        out[..., 1] = 0.0
        out[..., 2] = 0.0
        out[..., 3] = gr * ct - phi_dot / 2
    else:
        raise InvalidParameterError(f"unknown picture {picture!r}")
    return out


def _keep_indices(n_steps, store):
    if not store:
        return np.array([0, n_steps], dtype=np.int64)
    count = min(n_steps, MAX_TRAJECTORY - 1)
    return np.unique(np.round(np.linspace(0, n_steps, count + 1)).astype(np.int64))


def _evolve(path, psi0, cfg: IntegratorConfig, picture):
    psi0 = _unit_state(psi0)
    n = int(cfg.n_steps)
    dt = path.T / n
    if cfg.scheme == "midpoint-exponential":
        coeffs = hamiltonian_coeffs(path, (np.arange(n) + 0.5) * dt, picture)
        steps = kernels.expm_steps(coeffs, dt)
    else:
        coeffs = hamiltonian_coeffs(path, np.arange(n) * dt, picture)
        steps = kernels.euler_steps(coeffs, dt)
    keep = _keep_indices(n, cfg.store_trajectory)
    unitary, states = kernels.propagate(steps, psi0, keep)
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    result = dict(initial_state=psi0, final_state=states[-1].copy(), cumulative_unitary=unitary,
                  norm_drift=drift, picture=picture, n_steps=n)
    if cfg.store_trajectory:
        result.update(times=keep * dt, trajectory=states)
    return result


def evolve_original(path, psi0, cfg=IntegratorConfig()) -> EvolutionResult:
    """Evolve a state under the 2x2 Hamiltonian E + g sigma.y along ``path``."""
    return EvolutionResult(**_evolve(path, psi0, cfg, "original"))


def evolve_effective(path, b0, cfg=IntegratorConfig(), include_offdiagonal=True) -> EvolutionResult:
    """Evolve eigenframe amplitudes (b+, b-) with the geometric terms explicit.

    With ``include_offdiagonal=False`` only the diagonal geometric terms are
    kept, which is the adiabatic approximation: each level then just
    accumulates the phase  -int(E_n) + int(A_nn).
    """
    picture = "effective" if include_offdiagonal else "adiabatic"
    return EvolutionResult(**_evolve(path, b0, cfg, picture))


def evolve_c_basis(path, c0, cfg=IntegratorConfig()) -> CBasisResult:
    """Near-crossing evolution in the basis that diagonalizes the geometric terms.

    Requires a constant-theta path.  Besides the state, returns per-mode
    phases split into the energy part and the geometric part (the latter is
    int phi' dt for c+ and zero for c-).
    """
    _, theta, _ = path.angles()[:3]
    if np.ptp(theta) > 1e-9:
        raise InvalidPathError(f"c-basis evolution needs constant theta; spread {np.ptp(theta):.3e}")
    res = _evolve(path, c0, cfg, "c-basis")
    n = int(cfg.n_steps)
    dt = path.T / n
    tm = (np.arange(n) + 0.5) * dt
    E, y, ydot = path.evaluate(tm)
    r, th, _, _, phi_dot = polar_arrays(y, ydot)
    gr_cos = path.g * r * np.cos(th)
    dyn = -np.array([np.sum(E + gr_cos), np.sum(E - gr_cos)]) * dt
    geo = np.array([np.sum(phi_dot) * dt, 0.0])
    return CBasisResult(**res, dynamical_mode_phases=dyn, geometric_mode_phases=geo)


def frames_at(path, t):
    """Analytic eigenframes (columns v+, v-) at times ``t``, shape (N, 2, 2)."""
    _, y, _ = path.evaluate(np.asarray(t, dtype=float))
    _, theta, phi = polar_arrays(y)
    return frame_matrices(theta, phi)


def to_frame_amplitudes(path, psi, t=0.0):
    """b = V(t)^dag psi."""
    v = frames_at(path, np.array([t]))[0]
    return v.conj().T @ np.asarray(psi, dtype=np.complex128)


def equivalence_check(path, psi0, cfg=IntegratorConfig()) -> float:
    """Max amplitude difference between the original and effective pictures.

    The effective-picture amplitudes are mapped back through the
    instantaneous frame and compared with the original-picture state at
    every stored trajectory time, including t = T.
    """
    cfg = IntegratorConfig(cfg.n_steps, cfg.scheme, store_trajectory=True)
    psi0 = _unit_state(psi0)
    orig = evolve_original(path, psi0, cfg)
    b0 = to_frame_amplitudes(path, psi0, 0.0)
    eff = evolve_effective(path, b0, cfg, include_offdiagonal=True)
    v = frames_at(path, eff.times)
    mapped = np.einsum("kij,kj->ki", v, eff.trajectory)
    return float(np.max(np.abs(mapped - orig.trajectory)))


def c_basis_amplitudes(path, psi, t):
    """c = U(theta)^T V(t)^dag psi for states ``psi`` (N, 2) at times ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    psi = np.atleast_2d(np.asarray(psi, dtype=np.complex128))
    _, y, _ = path.evaluate(t)
    _, theta, phi = polar_arrays(y)
    v = frame_matrices(theta, phi)
    b = np.einsum("kji,kj->ki", v.conj(), psi)
    u = np.stack([rotation_u(th) for th in theta])
    return np.einsum("kji,kj->ki", u, b)
