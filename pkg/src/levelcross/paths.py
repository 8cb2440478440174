"""Parameter paths t -> (E(t), y(t)) with analytic derivatives.

A path keeps its samples (t, E, y, ydot) on a fixed grid for quadrature
and serialization, plus a plain-data ``generator`` record from which it can
be re-evaluated at arbitrary times (the integrators need midpoints that are
not on the sample grid).  No closures are stored, so paths pickle and
round-trip through JSON.
"""
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegeneratePointError, InvalidParameterError, InvalidPathError
from .spectra import DEGENERACY_RADIUS, polar_arrays

DEFAULT_SAMPLES = 4096
MIN_SAMPLES = 64
CLOSURE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ParameterPath:
    T: float
    t: np.ndarray
    E: np.ndarray
    y: np.ndarray
    ydot: np.ndarray
    cyclic: bool
    label: str = ""
    g: float = 1.0
    generator: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        t = self.t
        if len(t) < MIN_SAMPLES:
            raise InvalidParameterError(f"path needs >= {MIN_SAMPLES} samples, got {len(t)}")
        if not np.all(np.diff(t) > 0) or t[0] != 0.0 or not math.isclose(t[-1], self.T):
            raise InvalidParameterError("sample times must increase strictly from 0 to T")
        if not self.g > 0:
            raise InvalidParameterError(f"coupling g must be positive, got {self.g}")
        r = np.linalg.norm(self.y, axis=1)
        if np.any(r < DEGENERACY_RADIUS):
            k = int(np.argmin(r))
            raise DegeneratePointError(f"path hits the crossing point at t = {t[k]!r}")
        if self.cyclic:
            gap = max(np.max(np.abs(self.y[0] - self.y[-1])), abs(self.E[0] - self.E[-1]))
            if gap >= CLOSURE_TOL * max(1.0, float(np.max(r))):
                raise InvalidPathError(f"path marked cyclic but endpoints differ by {gap:.3e}")
        for a in (self.t, self.E, self.y, self.ydot):
            a.flags.writeable = False

    @property
    def n_samples(self) -> int:
        return len(self.t)

    @property
    def r(self) -> np.ndarray:
        return np.linalg.norm(self.y, axis=1)

    def evaluate(self, t):
        """(E, y, ydot) at arbitrary times in [0, T]."""
        return _EVALUATORS[self.generator["kind"]](self.generator, np.asarray(t, dtype=float))

    @cached_property
    def _angles(self):
        return polar_arrays(self.y, self.ydot)

    def angles(self, t=None):
        """(r, theta, phi, theta_dot, phi_dot); on the sample grid by default."""
        if t is None:
            return self._angles
        _, y, ydot = self.evaluate(t)
        return polar_arrays(y, ydot)

    def coupling_radius(self):
        """g * r at every sample."""
        return self.g * self.r

    def grT(self) -> float:
        """Time-averaged g r times T, the dimensionless adiabaticity ratio."""
        return float(np.trapezoid(self.coupling_radius(), self.t))

    def resampled(self, n_samples):
        t = np.linspace(0.0, self.T, n_samples)
        E, y, ydot = self.evaluate(t)
        return _build(self.T, t, E, y, ydot, self.cyclic, self.label, self.g, self.generator)

    def with_energy_shift(self, c):
        """Same geometry with E(t) -> E(t) + c."""
        gen = dict(self.generator, e_offset=self.generator.get("e_offset", 0.0) + float(c))
        return _build(self.T, self.t.copy(), self.E + c, self.y.copy(), self.ydot.copy(),
                      self.cyclic, self.label, self.g, gen)


def _build(T, t, E, y, ydot, cyclic, label, g, generator):
    if cyclic:
        # close exactly; analytic endpoints can differ by a few ulps
        y = y.copy()
        E = E.copy()
        y[-1] = np.where(np.abs(y[-1] - y[0]) < CLOSURE_TOL, y[0], y[-1])
        E[-1] = E[0] if abs(E[-1] - E[0]) < CLOSURE_TOL else E[-1]
    return ParameterPath(float(T), t, E, y, ydot, bool(cyclic), label, float(g), generator)


def _check_positive(**kw):
    for name, v in kw.items():
        if not (isinstance(v, (int, float, np.floating, np.integer)) and v > 0 and math.isfinite(v)):
            raise InvalidParameterError(f"{name} must be positive and finite, got {v!r}")


def _eval_circle(gen, t):
    r, theta, T = gen["r"], gen["theta"], gen["T"]
    w = 2 * np.pi * gen["revolutions"] / T
    phi = w * t
    st, ct = np.sin(theta), np.cos(theta)
    y = np.empty(t.shape + (3,))
    y[..., 0] = r * st * np.cos(phi)
    y[..., 1] = r * st * np.sin(phi)
    y[..., 2] = r * ct
    ydot = np.empty_like(y)
    ydot[..., 0] = -r * st * w * np.sin(phi)
    ydot[..., 1] = r * st * w * np.cos(phi)
    ydot[..., 2] = 0.0
    E = np.full(t.shape, gen["e_shift"] + gen.get("e_offset", 0.0))
    return E, y, ydot


def circle_path(r, theta, T, revolutions=1, e_shift=0.0, n_samples=DEFAULT_SAMPLES,
                g=1.0, label=None) -> ParameterPath:
    """Fixed-theta circle swept ``revolutions`` times in phi over [0, T]."""
    _check_positive(r=r, T=T, g=g)
    if int(revolutions) != revolutions or revolutions < 1:
        raise InvalidParameterError(f"revolutions must be an integer >= 1, got {revolutions!r}")
    if not 0.0 <= theta <= np.pi:
        raise InvalidParameterError(f"theta must lie in [0, pi], got {theta!r}")
    if n_samples < MIN_SAMPLES:
        raise InvalidParameterError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    gen = dict(kind="circle", r=float(r), theta=float(theta), T=float(T),
               revolutions=int(revolutions), e_shift=float(e_shift))
    t = np.linspace(0.0, T, n_samples)
    E, y, ydot = _eval_circle(gen, t)
    label = label or f"circle(r={r:g}, theta={theta:.6g}, rev={int(revolutions)})"
    return _build(T, t, E, y, ydot, True, label, g, gen)


def _eval_real_plane(gen, t):
    r, T = gen["r"], gen["T"]
    w = 2 * np.pi * gen["turns"] / T
    a = w * t
    y = np.zeros(t.shape + (3,))
    y[..., 0] = r * np.sin(a)
    y[..., 2] = r * np.cos(a)
    ydot = np.zeros_like(y)
    ydot[..., 0] = r * w * np.cos(a)
    ydot[..., 2] = -r * w * np.sin(a)
    E = np.full(t.shape, gen["e_shift"] + gen.get("e_offset", 0.0))
    return E, y, ydot


def real_plane_loop(r, T, n_samples=DEFAULT_SAMPLES, e_shift=0.0, g=1.0, turns=1.0,
                    label=None) -> ParameterPath:
    """Loop in the y2 = 0 plane around the crossing; h stays real symmetric.

    ``turns`` < 1 gives an open arc (e.g. 0.5 for the half loop).
    """
    _check_positive(r=r, T=T, g=g, turns=turns)
    if n_samples < MIN_SAMPLES:
        raise InvalidParameterError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    cyclic = float(turns).is_integer()
    gen = dict(kind="real_plane", r=float(r), T=float(T), turns=float(turns),
               e_shift=float(e_shift))
    t = np.linspace(0.0, T, n_samples)
    E, y, ydot = _eval_real_plane(gen, t)
    label = label or f"real-plane loop(r={r:g}, turns={turns:g})"
    return _build(T, t, E, y, ydot, cyclic, label, g, gen)


def _interpolants(gen):
    cache = gen.get("_interp")
    if cache is not None:
        return cache
    t = np.array([k[0] for k in gen["knots"]], dtype=float)
    vals = np.array([[k[1], *k[2]] for k in gen["knots"]], dtype=float)
    if gen["interpolation"] == "cubic":
        bc = "periodic" if gen["cyclic"] else "not-a-knot"
        spline = CubicSpline(t, vals, axis=0, bc_type=bc)
        cache = ("cubic", spline, spline.derivative())
    else:
        cache = ("linear", t, vals)
    # plain-data generator otherwise; the cache is dropped on serialization
    gen["_interp"] = cache
    return cache


def _eval_custom(gen, t):
    interp = _interpolants(gen)
    if interp[0] == "cubic":
        vals, ders = interp[1](t), interp[2](t)
    else:
        kt, kv = interp[1], interp[2]
        vals = np.stack([np.interp(t, kt, kv[:, j]) for j in range(4)], axis=-1)
        seg = np.clip(np.searchsorted(kt, t, side="right") - 1, 0, len(kt) - 2)
        slopes = np.diff(kv, axis=0) / np.diff(kt)[:, None]
        ders = slopes[seg]
    E = vals[..., 0] + gen.get("e_offset", 0.0)
    return E, vals[..., 1:], ders[..., 1:]


def custom_path(knots, interpolation="cubic", cyclic=False, n_samples=DEFAULT_SAMPLES,
                g=1.0, label="custom") -> ParameterPath:
    """Interpolated path through ``knots`` = [(t, E, (y1, y2, y3)), ...].

    Derivatives come from the interpolant.  Knot times must start at 0; the
    last knot time is the duration T.  Cyclic cubic paths use a periodic
    spline, so the knot endpoints must coincide.
    """
    if interpolation not in ("linear", "cubic"):
        raise InvalidParameterError(f"interpolation must be 'linear' or 'cubic', got {interpolation!r}")
    if len(knots) < 2:
        raise InvalidParameterError("custom path needs at least 2 knots")
    clean = []
    for k in knots:
        t, E, y = k
        y = [float(v) for v in y]
        if len(y) != 3:
            raise InvalidParameterError(f"knot y must have 3 components, got {y}")
        clean.append((float(t), float(E), y))
    kt = np.array([k[0] for k in clean])
    if not np.all(np.diff(kt) > 0):
        raise InvalidParameterError("knot times must be strictly increasing")
    if kt[0] != 0.0:
        raise InvalidParameterError(f"first knot must be at t = 0, got {kt[0]!r}")
    if cyclic:
        a, b = clean[0], clean[-1]
        gap = max(abs(a[1] - b[1]), *(abs(p - q) for p, q in zip(a[2], b[2])))
        if gap >= CLOSURE_TOL:
            raise InvalidPathError(f"cyclic path endpoints differ by {gap:.3e}")
        clean[-1] = (clean[-1][0], a[1], list(a[2]))
    if interpolation == "cubic" and len(clean) < 4:
        raise InvalidParameterError("cubic interpolation needs at least 4 knots")
    _check_positive(g=g)
    T = float(kt[-1])
    gen = dict(kind="custom", knots=clean, interpolation=interpolation, cyclic=bool(cyclic))
    t = np.linspace(0.0, T, n_samples)
    E, y, ydot = _eval_custom(gen, t)
    return _build(T, t, E, y, ydot, cyclic, label, g, gen)


_EVALUATORS = {"circle": _eval_circle, "real_plane": _eval_real_plane, "custom": _eval_custom}


def path_to_dict(path: ParameterPath) -> dict:
    """Path-file record.  Analytic paths are written with their sample grid
    as knots and the generator parameters alongside."""
    gen = path.generator
    if gen["kind"] == "custom":
        knots = gen["knots"]
        interpolation = gen["interpolation"]
    else:
        knots = [(float(t), float(E), [float(v) for v in y])
                 for t, E, y in zip(path.t, path.E, path.y)]
        interpolation = "cubic"
    out = {
        "label": path.label,
        "T": path.T,
        "cyclic": path.cyclic,
        "interpolation": interpolation,
        "g": path.g,
        "n_samples": path.n_samples,
        "knots": [{"t": t, "E": E, "y": list(y)} for t, E, y in knots],
    }
    if gen["kind"] != "custom":
        out["generator"] = {k: v for k, v in gen.items() if not k.startswith("_")}
    return out


def path_from_dict(d: dict) -> ParameterPath:
    allowed = {"label", "T", "cyclic", "interpolation", "knots", "g", "n_samples", "generator"}
    unknown = set(d) - allowed
    if unknown:
        raise InvalidParameterError(f"unknown path-file keys: {sorted(unknown)}")
    for key in ("T", "cyclic", "knots"):
        if key not in d:
            raise InvalidParameterError(f"path file is missing '{key}'")
    g = float(d.get("g", 1.0))
    n = int(d.get("n_samples", DEFAULT_SAMPLES))
    label = d.get("label", "")
    gen = d.get("generator")
    if gen is not None:
        gen = dict(gen)
        kind = gen.pop("kind")
        offset = gen.pop("e_offset", 0.0)
        if kind == "circle":
            p = circle_path(n_samples=n, g=g, label=label, **gen)
        elif kind == "real_plane":
            p = real_plane_loop(n_samples=n, g=g, label=label, **gen)
        else:
            raise InvalidParameterError(f"unknown generator kind {kind!r}")
        return p.with_energy_shift(offset) if offset else p
    knots = [(k["t"], k["E"], k["y"]) for k in d["knots"]]
    p = custom_path(knots, d.get("interpolation", "cubic"), bool(d["cyclic"]),
                    n_samples=n, g=g, label=label)
    if not math.isclose(p.T, float(d["T"]), rel_tol=0, abs_tol=1e-12 * max(1.0, p.T)):
        raise InvalidParameterError(f"T = {d['T']} disagrees with last knot time {p.T}")
    return p


def save_path(path: ParameterPath, fp):
    """Write a path file.  Floats use repr, which round-trips exactly."""
    text = json.dumps(path_to_dict(path), indent=1)
    if hasattr(fp, "write"):
        fp.write(text)
    else:
        with open(fp, "w") as fh:
            fh.write(text)


def load_path(fp) -> ParameterPath:
    if hasattr(fp, "read"):
        return path_from_dict(json.load(fp))
    with open(fp) as fh:
        return path_from_dict(json.load(fh))
