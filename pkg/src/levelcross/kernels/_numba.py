"""numba-compiled kernels; same signatures as the numpy versions."""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def expm_steps(coeffs, dt):
    n = coeffs.shape[0]
    out = np.empty((n, 2, 2), dtype=np.complex128)
    for k in range(n):
        e0 = coeffs[k, 0]
        bx = coeffs[k, 1]
        by = coeffs[k, 2]
        bz = coeffs[k, 3]
        b = math.sqrt(bx * bx + by * by + bz * bz)
        c = math.cos(b * dt)
        if b * dt > 1e-300:
            s = math.sin(b * dt) / b
        else:
            s = dt
        ph = complex(math.cos(e0 * dt), -math.sin(e0 * dt))
        out[k, 0, 0] = ph * complex(c, -s * bz)
        out[k, 1, 1] = ph * complex(c, s * bz)
        out[k, 0, 1] = ph * complex(-s * by, -s * bx)
        out[k, 1, 0] = ph * complex(s * by, -s * bx)
    return out


@njit(cache=True, nogil=True)
def euler_steps(coeffs, dt):
    n = coeffs.shape[0]
    out = np.empty((n, 2, 2), dtype=np.complex128)
    for k in range(n):
        e0 = coeffs[k, 0]
        bx = coeffs[k, 1]
        by = coeffs[k, 2]
        bz = coeffs[k, 3]
        out[k, 0, 0] = complex(1.0, -dt * (e0 + bz))
        out[k, 1, 1] = complex(1.0, -dt * (e0 - bz))
        out[k, 0, 1] = complex(-dt * by, -dt * bx)
        out[k, 1, 0] = complex(dt * by, -dt * bx)
    return out


@njit(cache=True, nogil=True)
def propagate(steps, psi0, keep):
    n = steps.shape[0]
    states = np.empty((keep.shape[0], 2), dtype=np.complex128)
    u00 = 1.0 + 0.0j
    u01 = 0.0j
    u10 = 0.0j
    u11 = 1.0 + 0.0j
    j = 0
    while j < keep.shape[0] and keep[j] == 0:
        states[j, 0] = psi0[0]
        states[j, 1] = psi0[1]
        j += 1
    for k in range(n):
        s00 = steps[k, 0, 0]
        s01 = steps[k, 0, 1]
        s10 = steps[k, 1, 0]
        s11 = steps[k, 1, 1]
        a00 = s00 * u00 + s01 * u10
        a01 = s00 * u01 + s01 * u11
        a10 = s10 * u00 + s11 * u10
        a11 = s10 * u01 + s11 * u11
        u00, u01, u10, u11 = a00, a01, a10, a11
        while j < keep.shape[0] and keep[j] == k + 1:
            states[j, 0] = u00 * psi0[0] + u01 * psi0[1]
            states[j, 1] = u10 * psi0[0] + u11 * psi0[1]
            j += 1
    unitary = np.empty((2, 2), dtype=np.complex128)
    unitary[0, 0] = u00
    unitary[0, 1] = u01
    unitary[1, 0] = u10
    unitary[1, 1] = u11
    return unitary, states
