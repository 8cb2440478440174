"""Runnable experiments: regime sweep, single phase, picture equivalence,
connection check, c-basis triviality and the real-plane sign rule.

Each ``run_*`` takes an :class:`ExperimentConfig` and returns a list of row
dicts.  Every row repeats the parameters needed to reproduce it, so a CSV
line stands on its own.
"""
import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import __version__
from .connection import AngularVelocity, connection_analytic, connection_numeric
from .errors import ConfigError, InvalidPathError
from .paths import circle_path, custom_path, load_path, real_plane_loop
from .phases import geometric_phase_exact, wrap_phase
from .propagator import (IntegratorConfig, c_basis_amplitudes, equivalence_check,
                         evolve_c_basis, evolve_original, frames_at)
from .connection import connection_matrices
from .spectra import PolarCoords, eigenframe, eigenframe_numeric, hamiltonian_at

EXPERIMENTS = ("sweep", "phase", "equivalence", "sign-rule", "connection-check", "c-basis")
# default radius when the config leaves it open
DEFAULT_R = {"phase": 1.0, "equivalence": 1.0, "c-basis": 1e-4}
# "much larger / much smaller" in the regime labels
REGIME_FACTOR = 10.0
ROUNDOFF_FLOOR = 1e-11


@dataclass
class PathParams:
    r: Optional[float] = None
    theta: float = math.pi / 2
    T: float = 100.0
    revolutions: int = 1
    e_shift: float = 0.0
    g: float = 1.0
    n_samples: int = 4096
    level: str = "minus"


@dataclass
class IntegratorParams:
    n_steps: int = 2 ** 16
    scheme: str = "midpoint-exponential"


@dataclass
class SweepParams:
    quantity: str = "grT"
    log_min: float = -2.0
    log_max: float = 2.0
    points: int = 25


@dataclass
class ChecksParams:
    n_steps_list: list = field(default_factory=lambda: [2 ** 12, 2 ** 14, 2 ** 16])
    bundled: bool = True
    dt_list: list = field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-5])
    samples: int = 64
    seed: int = 20050822
    adiabatic_grT: float = 100.0
    near_crossing_grT: float = 0.01
    turns: float = 1.0


@dataclass
class OutputParams:
    format: str = "csv"
    file: str = "-"
    precision: int = 17
    gnuplot: Optional[str] = None


@dataclass
class ExperimentConfig:
    experiment: str = "sweep"
    path: PathParams = field(default_factory=PathParams)
    integrator: IntegratorParams = field(default_factory=IntegratorParams)
    sweep: SweepParams = field(default_factory=SweepParams)
    checks: ChecksParams = field(default_factory=ChecksParams)
    output: OutputParams = field(default_factory=OutputParams)
    path_file: Optional[str] = None

    def radius(self):
        return self.path.r if self.path.r is not None else DEFAULT_R.get(self.experiment, 1.0)

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {self.experiment!r}")
        p = self.path
        for name in ("T", "g"):
            if not getattr(p, name) > 0:
                raise ConfigError(f"path.{name}: must be positive")
        if p.r is not None and not p.r > 0:
            raise ConfigError("path.r: must be positive")
        if not 0 <= p.theta <= math.pi:
            raise ConfigError("path.theta: must lie in [0, pi]")
        if p.revolutions < 1:
            raise ConfigError("path.revolutions: must be >= 1")
        if p.n_samples < 64:
            raise ConfigError("path.n_samples: must be >= 64")
        if p.level not in ("plus", "minus"):
            raise ConfigError("path.level: must be 'plus' or 'minus'")
        if self.integrator.n_steps < 64:
            raise ConfigError("integrator.n_steps: must be >= 64")
        if self.integrator.scheme not in ("midpoint-exponential", "naive-euler"):
            raise ConfigError("integrator.scheme: unknown scheme")
        if self.sweep.quantity != "grT":
            raise ConfigError("sweep.quantity: only 'grT' is supported")
        if self.sweep.points < 2:
            raise ConfigError("sweep.points: a sweep needs at least 2 grid points")
        if self.sweep.log_max < self.sweep.log_min:
            raise ConfigError("sweep.log_max: must not be below log_min")
        if not self.checks.n_steps_list or min(self.checks.n_steps_list) < 64:
            raise ConfigError("checks.n_steps_list: needs values >= 64")
        if not self.checks.dt_list or min(self.checks.dt_list) <= 0:
            raise ConfigError("checks.dt_list: needs positive values")
        if self.output.format not in ("csv", "json"):
            raise ConfigError("output.format: must be 'csv' or 'json'")
        if not 1 <= self.output.precision <= 17:
            raise ConfigError("output.precision: must be between 1 and 17")
        return self


_SECTIONS = {"path": PathParams, "integrator": IntegratorParams, "sweep": SweepParams,
             "checks": ChecksParams, "output": OutputParams}


def _coerce(value, default, where):
    """Convert a JSON value to the type of the field default."""
    kind = type(default)
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if isinstance(default, float) or default is None:
            if value is None:
                return None
            if isinstance(value, bool):
                raise TypeError
            if isinstance(value, str) and where.endswith(("file", "gnuplot")):
                return value
            return float(value)
        if isinstance(default, list):
            if not isinstance(value, list):
                raise TypeError
            return [_coerce(v, default[0], where) for v in value]
        if isinstance(default, str):
            if not isinstance(value, str):
                raise TypeError
            return value
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected {kind.__name__}, got {value!r}") from None
    return value


def config_from_dict(d: dict) -> ExperimentConfig:
    """Build a config from parsed JSON, rejecting unknown keys by name."""
    if not isinstance(d, dict):
        raise ConfigError("config root must be a JSON object")
    top = {f.name for f in fields(ExperimentConfig)}
    for key in d:
        if key not in top:
            raise ConfigError(f"unknown config key '{key}'")
    cfg = ExperimentConfig()
    for key, value in d.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected an object")
            section = getattr(cfg, key)
            names = {f.name for f in fields(section)}
            for sub, v in value.items():
                if sub not in names:
                    raise ConfigError(f"unknown config key '{key}.{sub}'")
                setattr(section, sub, _coerce(v, getattr(section, sub), f"{key}.{sub}"))
        elif key == "experiment":
            cfg.experiment = _coerce(value, "", "experiment")
        elif key == "path_file":
            if value is not None and not isinstance(value, str):
                raise ConfigError("path_file: expected a string")
            cfg.path_file = value
    return cfg.validate()


def load_config(fp) -> ExperimentConfig:
    try:
        if hasattr(fp, "read"):
            data = json.load(fp)
        else:
            with open(fp) as fh:
                data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(data)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)


def num_threads():
    env = os.environ.get("BERRY_NUM_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"BERRY_NUM_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def _param_columns(cfg: ExperimentConfig, **overrides):
    p = cfg.path
    row = {
        "experiment": cfg.experiment,
        "r": cfg.radius(),
        "theta_rad": p.theta,
        "T": p.T,
        "revolutions": p.revolutions,
        "e_shift": p.e_shift,
        "g": p.g,
        "n_samples": p.n_samples,
        "n_steps": cfg.integrator.n_steps,
        "scheme": cfg.integrator.scheme,
        "level": p.level,
        "version": __version__,
    }
    row.update(overrides)
    return row


def _integrator(cfg, n_steps=None):
    return IntegratorConfig(n_steps or cfg.integrator.n_steps, cfg.integrator.scheme)


def _configured_path(cfg, r=None):
    if cfg.path_file:
        return load_path(cfg.path_file)
    p = cfg.path
    return circle_path(r if r is not None else cfg.radius(), p.theta, p.T, p.revolutions,
                       p.e_shift, p.n_samples, p.g)


def regime_label(x):
    """Label a g r T / hbar value by the adiabatic (>> pi) and near-crossing
    (<< 2 pi) conditions, with 'much' read as a factor REGIME_FACTOR."""
    if x >= REGIME_FACTOR * math.pi:
        return "adiabatic"
    if x <= 2 * math.pi / REGIME_FACTOR:
        return "near-crossing"
    return "crossover"


def _report_columns(rep):
    return {
        "geometric_phase_rad": rep.geometric_phase,
        "geometric_phase_mod_rad": rep.geometric_phase_mod(),
        "total_phase_rad": rep.total_phase,
        "dynamical_phase_rad": rep.dynamical_phase,
        "return_fidelity": rep.return_fidelity,
        "adiabatic_prediction_rad": rep.adiabatic_prediction,
        "discrepancy_rad": rep.discrepancy,
        "reliable": rep.reliable,
        "unwrap_method": rep.unwrap_method,
    }


def _sweep_point(cfg, x):
    p = cfg.path
    r = x / (p.g * p.T)
    path = circle_path(r, p.theta, p.T, p.revolutions, p.e_shift, p.n_samples, p.g)
    rep = geometric_phase_exact(path, p.level, _integrator(cfg))
    row = _param_columns(cfg, r=r)
    row = {"grT_over_hbar": float(x), "regime": regime_label(x), **row, **_report_columns(rep)}
    return row


def run_sweep(cfg: ExperimentConfig):
    """Geometric phase of the chosen level across a log grid of g r T / hbar.

    r varies at fixed T, which moves a fixed-theta loop from the adiabatic
    regime toward the crossing.  Rows come back sorted by the control value
    with an extra column continuing the phase smoothly along the grid.
    """
    s = cfg.sweep
    grid = np.logspace(s.log_min, s.log_max, s.points)
    workers = min(num_threads(), len(grid))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda x: _sweep_point(cfg, x), grid))
    else:
        rows = [_sweep_point(cfg, x) for x in grid]
    rows.sort(key=lambda row: row["grT_over_hbar"])
    cont = np.unwrap([row["geometric_phase_rad"] for row in rows])
    # anchor the continued curve on the branch of the first grid point's
    # principal value
    cont += rows[0]["geometric_phase_mod_rad"] - cont[0]
    for row, c in zip(rows, cont):
        row["geometric_phase_continued_rad"] = float(c)
    return rows


def run_phase(cfg: ExperimentConfig):
    path = _configured_path(cfg)
    rep = geometric_phase_exact(path, cfg.path.level, _integrator(cfg))
    x = path.grT()
    return [{"grT_over_hbar": x, "regime": regime_label(x), "path": path.label,
             **_param_columns(cfg), **_report_columns(rep)}]


def bundled_paths(n_samples=4096):
    """Reference paths for the picture-equivalence check.

    All avoid the polar axis, where the analytic frame gauge (and with it the
    effective Hamiltonian) is singular.
    """
    T = 100.0
    knots = []
    for t in np.linspace(0.0, T, 257):
        u = 2 * np.pi * t / T
        th = np.pi / 2 + 0.4 * np.sin(u)
        r = 0.5 * (1 + 0.3 * np.cos(2 * u))
        knots.append((t, 0.2 * np.sin(u), (r * np.sin(th) * np.cos(u), r * np.sin(th) * np.sin(u),
                                           r * np.cos(th))))
    return [
        circle_path(1.0, np.pi / 2, T, n_samples=n_samples, label="adiabatic-circle"),
        circle_path(1e-4, np.pi / 2, T, n_samples=n_samples, label="near-crossing-circle"),
        circle_path(0.01, 2 * np.pi / 3, T, n_samples=n_samples, e_shift=0.7,
                    label="crossover-circle"),
        circle_path(0.3, np.pi / 6, T, revolutions=2, n_samples=n_samples,
                    label="double-revolution"),
        custom_path(knots, "cubic", cyclic=True, n_samples=n_samples, label="wobble"),
    ]


def observed_order(errors, n_steps):
    """log-log slope of error against step size between consecutive entries."""
    out = [float("nan")]
    for (e0, n0), (e1, n1) in zip(zip(errors, n_steps), zip(errors[1:], n_steps[1:])):
        if e0 < ROUNDOFF_FLOOR or e1 < ROUNDOFF_FLOOR:
            out.append(float("nan"))
        else:
            out.append(math.log(e0 / e1) / math.log(n1 / n0))
    return out


def run_equivalence(cfg: ExperimentConfig):
    """Original vs effective picture discrepancy at each step count."""
    if cfg.path_file or not cfg.checks.bundled:
        paths = [_configured_path(cfg)]
    else:
        paths = bundled_paths(cfg.path.n_samples)
    steps = sorted(cfg.checks.n_steps_list)
    rows = []
    for path in paths:
        psi0 = frames_at(path, np.array([0.0]))[0][:, 1]
        # tilt the start away from the eigenstate so both levels take part
        psi0 = (np.sqrt(0.8) * psi0 + np.sqrt(0.2) * frames_at(path, np.array([0.0]))[0][:, 0])
        errs = [equivalence_check(path, psi0, _integrator(cfg, n)) for n in steps]
        for n, e, order in zip(steps, errs, observed_order(errs, steps)):
            rows.append({"path": path.label, "grT_over_hbar": path.grT(), "T": path.T,
                         "g": path.g, "n_steps": n, "scheme": cfg.integrator.scheme,
                         "discrepancy": e, "observed_order": order,
                         "roundoff_limited": e < ROUNDOFF_FLOOR, "version": __version__})
    return rows


def _wobble_angles(t):
    """Analytic test trajectory in (theta, phi) with nonzero rates in both."""
    theta = 1.1 + 0.6 * np.sin(0.7 * t)
    phi = 0.9 * t + 0.5 * np.cos(1.3 * t)
    theta_dot = 0.42 * np.cos(0.7 * t)
    phi_dot = 0.9 - 0.65 * np.sin(1.3 * t)
    return theta, phi, theta_dot, phi_dot


def connection_residuals(dt, times, e_shift=0.0, g=1.0, r=1.0):
    """Max |analytic - numeric| connection entry over sample times.

    Numeric frames come from diagonalizing h at t -+ dt/2 and phase-aligning
    to the analytic frame there; the connection is then a central difference.
    """
    worst = 0.0
    herm = 0.0
    for t in times:
        th_c, ph_c, thd, phd = _wobble_angles(t)
        frames = []
        for s in (t - dt / 2, t + dt / 2):
            th, ph, _, _ = _wobble_angles(s)
            coords = PolarCoords(r, float(th), float(ph))
            ref = eigenframe(coords, e_shift, g)
            h = hamiltonian_at(e_shift, g, coords.cartesian())
            frames.append(eigenframe_numeric(h.matrix, ref))
        num = connection_numeric(frames[0], frames[1], dt, t).matrix
        ana = connection_analytic(th_c, AngularVelocity(thd, phd), t).matrix
        worst = max(worst, float(np.max(np.abs(num - ana))))
        herm = max(herm, float(abs(num[0, 1] - np.conj(num[1, 0]))))
    return worst, herm


def analytic_hermiticity(samples, seed):
    """Largest |A+- - conj(A-+)| over random analytic samples."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, np.pi, samples)
    td = rng.normal(0, 5, samples)
    pd = rng.normal(0, 5, samples)
    m = connection_matrices(theta, td, pd)
    return float(np.max(np.abs(m[:, 0, 1] - np.conj(m[:, 1, 0]))))


def run_connection_check(cfg: ExperimentConfig):
    rng = np.random.default_rng(cfg.checks.seed)
    times = rng.uniform(0.0, 20.0, cfg.checks.samples)
    rows = []
    prev = None
    for dt in cfg.checks.dt_list:
        res, herm = connection_residuals(dt, times, cfg.path.e_shift, cfg.path.g)
        rows.append({"dt": dt, "max_residual": res,
                     "ratio_to_previous": (prev / res) if prev else float("nan"),
                     "hermiticity_numeric": herm,
                     "hermiticity_analytic": analytic_hermiticity(10 ** 4, cfg.checks.seed),
                     "samples": cfg.checks.samples, "seed": cfg.checks.seed,
                     "version": __version__})
        prev = res
    return rows


def run_c_basis(cfg: ExperimentConfig):
    """Per-mode phases in the basis that diagonalizes the geometric terms,
    plus the final-amplitude mismatch against the exact evolution."""
    path = _configured_path(cfg)
    icfg = _integrator(cfg)
    psi0 = frames_at(path, np.array([0.0]))[0][:, 1 if cfg.path.level == "minus" else 0]
    c0 = c_basis_amplitudes(path, psi0, 0.0)[0]
    res = evolve_c_basis(path, c0, icfg)
    exact = evolve_original(path, psi0, icfg)
    c_exact = c_basis_amplitudes(path, exact.final_state, path.T)[0]
    mismatch = float(np.max(np.abs(c_exact - res.final_state)))
    rows = []
    for k, mode in enumerate(("c+", "c-")):
        geo = float(res.geometric_mode_phases[k])
        rows.append({"mode": mode, "grT_over_hbar": path.grT(),
                     **_param_columns(cfg, r=float(path.r[0])),
                     "dynamical_phase_rad": float(res.dynamical_mode_phases[k]),
                     "geometric_phase_rad": geo,
                     "geometric_phase_mod_rad": float(wrap_phase(geo)),
                     "exact_amplitude_mismatch": mismatch})
    return rows


def frame_transport_sign(path, level="minus"):
    """Carry the real eigenvector of a real-symmetric loop by continuity and
    return the sign it comes back with (+1 or -1)."""
    n = 1 if level == "minus" else 0
    prev = None
    first = None
    for E, y in zip(path.E, path.y):
        h = hamiltonian_at(E, path.g, y).matrix.real
        w, v = np.linalg.eigh(h)
        vec = v[:, 0] if n == 1 else v[:, 1]
        if prev is None:
            first = vec
        elif vec @ prev < 0:
            vec = -vec
        prev = vec
    return 1 if float(first @ prev) > 0 else -1


def run_sign_rule(cfg: ExperimentConfig):
    """Sign of the real eigenvector after a loop around the crossing, in the
    adiabatic regime and in the near-crossing regime."""
    p = cfg.path
    ch = cfg.checks
    rows = []
    for x in (ch.adiabatic_grT, ch.near_crossing_grT):
        r = x / (p.g * p.T)
        path = real_plane_loop(r, p.T, p.n_samples, p.e_shift, p.g, ch.turns)
        if not path.cyclic:
            raise InvalidPathError("sign rule requires a cyclic (closed) loop")
        frame_sign = frame_transport_sign(path, p.level)
        rep = geometric_phase_exact(path, p.level, _integrator(cfg))
        exact_sign = 1 if math.cos(rep.geometric_phase) > 0 else -1
        if x >= 100.0:
            regime, sign = "adiabatic", frame_sign
        elif x <= 1e-2:
            regime, sign = "near-crossing", exact_sign
        else:
            regime, sign = "crossover", exact_sign
        rows.append({"regime": regime, "grT_over_hbar": x, "holonomy_sign": sign,
                     "frame_transport_sign": frame_sign, "exact_sign": exact_sign,
                     "sign_flip": sign == -1, **_param_columns(cfg, r=r, revolutions=ch.turns),
                     **_report_columns(rep)})
    return rows


RUNNERS = {
    "sweep": run_sweep,
    "phase": run_phase,
    "equivalence": run_equivalence,
    "sign-rule": run_sign_rule,
    "connection-check": run_connection_check,
    "c-basis": run_c_basis,
}


def run(cfg: ExperimentConfig):
    cfg.validate()
    return RUNNERS[cfg.experiment](cfg)


def _fmt(v, precision):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        return format(float(v), f".{precision}g")
    return str(v)


def rows_to_csv(rows, precision=17) -> str:
    """Header plus one line per row, RFC 4180 quoting, CRLF line ends."""
    buf = io.StringIO()
    if not rows:
        return ""
    header = list(rows[0])
    for row in rows[1:]:
        for k in row:
            if k not in header:
                header.append(k)
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(k, ""), precision) for k in header])
    return buf.getvalue()


def rows_to_json(rows, precision=17) -> str:
    def conv(v):
        if isinstance(v, (bool, np.bool_)):
            return bool(v)
        if isinstance(v, (float, np.floating)):
            return None if math.isnan(v) else float(format(float(v), f".{precision}g"))
        if isinstance(v, (int, np.integer)):
            return int(v)
        return v
    return json.dumps([{k: conv(v) for k, v in row.items()} for row in rows], indent=1) + "\n"


def render(rows, output: OutputParams) -> str:
    if output.format == "json":
        return rows_to_json(rows, output.precision)
    return rows_to_csv(rows, output.precision)


def gnuplot_script(data_file, experiment="sweep") -> str:
    """Companion gnuplot script for a CSV sweep table."""
    return "\n".join([
        "# levelcross sweep: geometric phase vs g r T / hbar",
        "set datafile separator ','",
        "set logscale x",
        "set xlabel 'g r T / hbar'",
        "set ylabel 'geometric phase (rad)'",
        "set key top left",
        f"plot '{data_file}' using 'grT_over_hbar':'geometric_phase_continued_rad' "
        "skip 0 with linespoints title 'exact (continued)', \\",
        f"     '{data_file}' using 'grT_over_hbar':'adiabatic_prediction_rad' "
        "with lines dashtype 2 title 'adiabatic'",
        "",
    ])
