"""Geometric terms <m| i d/dt |n> of the two-level eigenframe.

Closed form (frame gauge of :mod:`levelcross.spectra`)::

    A++ = (1 + cos t) p'/2      A-- = (1 - cos t) p'/2
    A+- = sin(t) p'/2 + i t'/2  A-+ = conj(A+-)

plus a finite-difference estimate from sampled frames, loop integrals of
the diagonal entries and the solid angle subtended by a path.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegeneratePointError, InvalidParameterError, InvalidPathError
from .spectra import SpectralFrame, level_index


class AngularVelocity(NamedTuple):
    theta_dot: float
    phi_dot: float


@dataclass(frozen=True)
class ConnectionSample:
    matrix: np.ndarray
    t: float = 0.0

    def entry(self, m, n) -> complex:
        return complex(self.matrix[level_index(m), level_index(n)])


def connection_matrices(theta, theta_dot, phi_dot):
    """Closed-form connection for arrays of samples, shape (N, 2, 2)."""
    theta = np.asarray(theta, dtype=np.float64)
    ct, st = np.cos(theta), np.sin(theta)
    out = np.empty(np.broadcast(theta, theta_dot, phi_dot).shape + (2, 2), dtype=np.complex128)
    off = st * phi_dot / 2 + 0.5j * np.asarray(theta_dot)
    out[..., 0, 0] = (1 + ct) * phi_dot / 2
    out[..., 1, 1] = (1 - ct) * phi_dot / 2
    out[..., 0, 1] = off
    out[..., 1, 0] = np.conj(off)
    return out


def connection_analytic(theta, vel: AngularVelocity, t=0.0) -> ConnectionSample:
    m = connection_matrices(theta, vel.theta_dot, vel.phi_dot)
    if not np.all(np.isfinite(m)):
        raise InvalidParameterError(f"non-finite angular velocity {vel}")
    return ConnectionSample(m, float(t))


def _frame_matrix(frame):
    if isinstance(frame, SpectralFrame):
        return frame.matrix
    return np.asarray(frame, dtype=np.complex128)


def connection_numeric(frame_before, frame_after, dt, t=0.0) -> ConnectionSample:
    """Central-difference estimate of <m|i d/dt|n> at the midpoint of two frames.

    Both frames must be in the same smooth gauge; use
    :func:`levelcross.spectra.eigenframe_numeric` with the analytic frame as
    reference to put numerically diagonalized frames into it.  Only the
    Hermitian part is kept: the anti-Hermitian remainder is (V^dag V - 1)/dt,
    which is round-off.
    """
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    vb = _frame_matrix(frame_before)
    va = _frame_matrix(frame_after)
    mid = (vb + va) / 2
    m = 1j * mid.conj().T @ (va - vb) / dt
    m = (m + m.conj().T) / 2
    return ConnectionSample(m, float(t))


def _cyclic_angles(path):
    if not path.cyclic:
        raise InvalidPathError(f"path '{path.label}' is not cyclic")
    r, theta, _, theta_dot, phi_dot = path.angles()
    if not (np.all(np.isfinite(phi_dot)) and np.all(np.isfinite(theta_dot))):
        raise DegeneratePointError(
            f"path '{path.label}' crosses the polar axis where the frame gauge is singular")
    return r, theta, theta_dot, phi_dot


def diagonal_holonomy(path, level) -> float:
    """Loop integral of the diagonal geometric term A_nn over a cyclic path.

    Composite trapezoid on the path's own sample grid.
    """
    _, theta, theta_dot, phi_dot = _cyclic_angles(path)
    sign = 1.0 if level_index(level) == 0 else -1.0
    integrand = (1 + sign * np.cos(theta)) * phi_dot / 2
    return float(np.trapezoid(integrand, path.t))


def solid_angle(path, axis=(0.0, 0.0, 1.0)) -> float:
    """Solid angle enclosed by the unit direction y/|y| of a cyclic path.

    Computed as the area integral  sum (1 - n.a) d(azimuth about a)  relative
    to the reference ``axis``, directly from the Cartesian samples (it does
    not go through the connection).  The path must stay off the reference
    axis; for loops through the z poles pass a different axis.
    """
    if not path.cyclic:
        raise InvalidPathError(f"path '{path.label}' is not cyclic")
    a = np.asarray(axis, dtype=np.float64)
    a = a / np.linalg.norm(a)
    # orthonormal triad (e1, e2, a)
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - a * (helper @ a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    y, yd = path.y, path.ydot
    r = np.linalg.norm(y, axis=1)
    u, v, w = y @ e1, y @ e2, y @ a
    ud, vd = yd @ e1, yd @ e2
    rho2 = u * u + v * v
    if np.any(rho2 <= (1e-9 * r) ** 2):
        raise DegeneratePointError("path passes through the reference axis; choose another axis")
    az_dot = (u * vd - v * ud) / rho2
    return float(np.trapezoid((1 - w / r) * az_dot, path.t))
