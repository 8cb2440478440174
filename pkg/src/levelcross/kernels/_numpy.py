"""Pure-numpy implementations of the propagation kernels."""
import numpy as np


def expm_steps(coeffs, dt):
    """Closed-form ``exp(-i H dt)`` for a batch of ``H = e0 + b.sigma``.

    ``coeffs`` has shape (N, 4) holding ``(e0, bx, by, bz)`` per step.
    """
    e0, bx, by, bz = coeffs[:, 0], coeffs[:, 1], coeffs[:, 2], coeffs[:, 3]
    b = np.sqrt(bx * bx + by * by + bz * bz)
    c = np.cos(b * dt)
    # sin(b dt)/b, continuous at b = 0
    s = dt * np.sinc(b * dt / np.pi)
    ph = np.exp(-1j * e0 * dt)
    out = np.empty((coeffs.shape[0], 2, 2), dtype=np.complex128)
    out[:, 0, 0] = ph * (c - 1j * s * bz)
    out[:, 1, 1] = ph * (c + 1j * s * bz)
    out[:, 0, 1] = ph * (-1j * s) * (bx - 1j * by)
    out[:, 1, 0] = ph * (-1j * s) * (bx + 1j * by)
    return out


def euler_steps(coeffs, dt):
    """First-order ``1 - i H dt`` steps (not unitary)."""
    e0, bx, by, bz = coeffs[:, 0], coeffs[:, 1], coeffs[:, 2], coeffs[:, 3]
    out = np.empty((coeffs.shape[0], 2, 2), dtype=np.complex128)
    out[:, 0, 0] = 1.0 - 1j * dt * (e0 + bz)
    out[:, 1, 1] = 1.0 - 1j * dt * (e0 - bz)
    out[:, 0, 1] = -1j * dt * (bx - 1j * by)
    out[:, 1, 0] = -1j * dt * (bx + 1j * by)
    return out


def propagate(steps, psi0, keep):
    """Apply ``steps`` in order to ``psi0``.

    Returns the cumulative product ``S_{N-1} ... S_0`` and the states after
    ``k`` steps for every ``k`` in ``keep`` (sorted, values in ``0..N``).
    The prefix products are built by recursive doubling, so the work is
    O(N log N) matrix products but only log2(N) numpy passes.
    """
    n = steps.shape[0]
    prefix = steps.copy()
    shift = 1
    while shift < n:
        prefix[shift:] = prefix[shift:] @ prefix[:-shift]
        shift *= 2
    unitary = prefix[-1].copy()
    states = np.empty((len(keep), 2), dtype=np.complex128)
    keep = np.asarray(keep)
    at_zero = keep == 0
    states[at_zero] = psi0
    idx = keep[~at_zero] - 1
    states[~at_zero] = prefix[idx] @ psi0
    return unitary, states
