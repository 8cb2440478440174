"""Two-level Hamiltonian near a level crossing and its gauge-fixed eigenframe.

Units: hbar = 1.  The Hamiltonian is ``E * 1 + g * (sigma . y)``; with
``y = r (sin t cos p, sin t sin p, cos t)`` the eigenvectors are taken in
the gauge

    v+ = (cos(t/2) e^{-ip},  sin(t/2))
    v- = (sin(t/2) e^{-ip}, -cos(t/2))

which is single valued under p -> p + 2 pi.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegeneratePointError, InvalidParameterError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

#: radius below which a point is treated as the crossing itself
DEGENERACY_RADIUS = 1e-10
#: smallest eigenvalue gap accepted by the numerical diagonalizer
DEGENERACY_GAP = 1e-10

LEVELS = ("plus", "minus")


def level_index(level):
    """Map ``"plus"``/``"+"``/``0`` to 0 and ``"minus"``/``"-"``/``1`` to 1."""
    if level in ("plus", "+", 0):
        return 0
    if level in ("minus", "-", 1):
        return 1
    raise InvalidParameterError(f"unknown level {level!r}; expected 'plus' or 'minus'")


@dataclass(frozen=True)
class Hamiltonian2:
    e_shift: float
    g: float
    y: np.ndarray

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.y))

    @property
    def matrix(self) -> np.ndarray:
        return self.e_shift * np.eye(2, dtype=np.complex128) + self.g * np.tensordot(
            self.y, PAULI, axes=1)

    @property
    def eigenvalues(self) -> np.ndarray:
        """(plus, minus) energies ``e_shift +- g r``."""
        return np.array([self.e_shift + self.g * self.r, self.e_shift - self.g * self.r])

    def __array__(self, dtype=None, copy=None):
        m = self.matrix
        return m if dtype is None else m.astype(dtype)


def hamiltonian_at(e_shift, g, y) -> Hamiltonian2:
    if not g > 0:
        raise InvalidParameterError(f"coupling g must be positive, got {g}")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (3,):
        raise InvalidParameterError(f"y must be a 3-vector, got shape {y.shape}")
    return Hamiltonian2(float(e_shift), float(g), y.copy())


class PolarCoords(NamedTuple):
    r: float
    theta: float
    phi: float

    def cartesian(self) -> np.ndarray:
        st = np.sin(self.theta)
        return self.r * np.array(
            [st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])


def _nearest_branch(phi, prev_phi):
    """Shift ``phi`` by a multiple of 2 pi to lie within pi of ``prev_phi``."""
    return phi + 2 * np.pi * np.round((prev_phi - phi) / (2 * np.pi))


def polar_from_cartesian(y, prev: Optional[PolarCoords] = None) -> PolarCoords:
    """Spherical angles of ``y`` with phi continued from ``prev``.

    On the polar axis phi is undefined; it is taken from ``prev`` (or 0).
    """
    y = np.asarray(y, dtype=np.float64)
    r = float(np.linalg.norm(y))
    if r < DEGENERACY_RADIUS:
        raise DegeneratePointError(f"|y| = {r:.3e}: angles undefined at the crossing point")
    rho = float(np.hypot(y[0], y[1]))
    theta = float(np.arctan2(rho, y[2]))
    if rho == 0.0:
        phi = prev.phi if prev is not None else 0.0
    else:
        phi = float(np.arctan2(y[1], y[0]))
        if prev is not None:
            phi = float(_nearest_branch(phi, prev.phi))
    return PolarCoords(r, theta, phi)


def polar_arrays(y, ydot=None, phi0=0.0):
    """Vectorized polar coordinates (and their time derivatives) along samples.

    ``y`` and ``ydot`` have shape (N, 3).  phi is unwrapped along the sample
    order, starting on the branch nearest ``phi0``; at on-axis samples it is
    held at the previous value.  Returns ``(r, theta, phi)`` or, when
    ``ydot`` is given, ``(r, theta, phi, theta_dot, phi_dot)``.  The angular
    rates are singular on the polar axis and come back as nan there.
    """
    y = np.asarray(y, dtype=np.float64)
    r = np.linalg.norm(y, axis=1)
    if np.any(r < DEGENERACY_RADIUS):
        raise DegeneratePointError("path touches the crossing point r = 0")
    rho = np.hypot(y[:, 0], y[:, 1])
    theta = np.arctan2(rho, y[:, 2])
    raw = np.arctan2(y[:, 1], y[:, 0])
    on_axis = rho == 0.0
    if np.any(on_axis):
        raw = raw.copy()
        last = phi0
        for k in range(len(raw)):
            if on_axis[k]:
                raw[k] = last
            else:
                last = raw[k]
    phi = np.unwrap(raw)
    phi = _nearest_branch(phi[0], phi0) - phi[0] + phi if len(phi) else phi
    if ydot is None:
        return r, theta, phi
    ydot = np.asarray(ydot, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho_dot = (y[:, 0] * ydot[:, 0] + y[:, 1] * ydot[:, 1]) / rho
        theta_dot = (y[:, 2] * rho_dot - rho * ydot[:, 2]) / (r * r)
        phi_dot = (y[:, 0] * ydot[:, 1] - y[:, 1] * ydot[:, 0]) / (rho * rho)
    theta_dot = np.where(on_axis, np.nan, theta_dot)
    phi_dot = np.where(on_axis, np.nan, phi_dot)
    return r, theta, phi, theta_dot, phi_dot


@dataclass(frozen=True)
class SpectralFrame:
    plus_vec: np.ndarray
    minus_vec: np.ndarray
    plus_energy: float
    minus_energy: float

    @property
    def matrix(self) -> np.ndarray:
        """Unitary with columns (v+, v-)."""
        return np.column_stack([self.plus_vec, self.minus_vec])

    def vec(self, level) -> np.ndarray:
        return self.plus_vec if level_index(level) == 0 else self.minus_vec

    def energy(self, level) -> float:
        return self.plus_energy if level_index(level) == 0 else self.minus_energy


def frame_matrices(theta, phi):
    """Analytic frames for arrays of angles, shape (N, 2, 2), columns (v+, v-)."""
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    e = np.exp(-1j * phi)
    out = np.empty(np.broadcast(theta, phi).shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c * e
    out[..., 1, 0] = s
    out[..., 0, 1] = s * e
    out[..., 1, 1] = -c
    return out


def eigenframe(coords: PolarCoords, e_shift, g) -> SpectralFrame:
    if coords.r < DEGENERACY_RADIUS:
        raise DegeneratePointError(f"r = {coords.r:.3e}: eigenframe undefined at the crossing")
    m = frame_matrices(coords.theta, coords.phi)
    return SpectralFrame(m[:, 0].copy(), m[:, 1].copy(),
                         float(e_shift + g * coords.r), float(e_shift - g * coords.r))


def _align(vec, ref):
    """Rephase ``vec`` so that <ref|vec> is real and non-negative."""
    ov = np.vdot(ref, vec)
    if abs(ov) == 0.0:
        return vec
    return vec * (np.conj(ov) / abs(ov))


def eigenframe_numeric(h, reference: SpectralFrame) -> SpectralFrame:
    """Diagonalize ``h`` numerically, phase-aligning each vector to ``reference``."""
    m = np.asarray(h, dtype=np.complex128)
    w, v = np.linalg.eigh(m)
    if w[1] - w[0] < DEGENERACY_GAP:
        raise DegeneratePointError(f"eigenvalue gap {w[1] - w[0]:.3e} below {DEGENERACY_GAP}")
    plus = _align(v[:, 1], reference.plus_vec)
    minus = _align(v[:, 0], reference.minus_vec)
    return SpectralFrame(plus, minus, float(w[1]), float(w[0]))


def rotation_u(theta) -> np.ndarray:
    """Real rotation that diagonalizes the phi-part of the geometric terms."""
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])
