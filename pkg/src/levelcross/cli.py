"""Command line entry point: ``levelcross <experiment> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical error
(degenerate point, undefined phase), 4 I/O error.
"""
import argparse
import logging
import sys

from . import __version__
from .errors import (ConfigError, DegeneratePointError, InvalidParameterError,
                     InvalidPathError, UndefinedPhaseError)
from .experiments import (EXPERIMENTS, ExperimentConfig, gnuplot_script, load_config,
                          render, run)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("levelcross")

# flag -> (config section, field)
_OVERRIDES = {
    "r": ("path", "r"),
    "theta": ("path", "theta"),
    "T": ("path", "T"),
    "revolutions": ("path", "revolutions"),
    "e_shift": ("path", "e_shift"),
    "g": ("path", "g"),
    "n_samples": ("path", "n_samples"),
    "level": ("path", "level"),
    "n_steps": ("integrator", "n_steps"),
    "scheme": ("integrator", "scheme"),
    "log_min": ("sweep", "log_min"),
    "log_max": ("sweep", "log_max"),
    "points": ("sweep", "points"),
    "turns": ("checks", "turns"),
    "format": ("output", "format"),
    "output": ("output", "file"),
    "precision": ("output", "precision"),
    "gnuplot": ("output", "gnuplot"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--path-file", help="JSON path file (replaces the built-in circle)")
    g = common.add_argument_group("path")
    g.add_argument("--r", type=float, help="loop radius |y|")
    g.add_argument("--theta", type=float, help="polar angle of the loop (rad)")
    g.add_argument("--T", type=float, help="period")
    g.add_argument("--revolutions", type=int)
    g.add_argument("--e-shift", dest="e_shift", type=float, help="constant energy offset")
    g.add_argument("--g", type=float, help="coupling constant")
    g.add_argument("--n-samples", dest="n_samples", type=int)
    g.add_argument("--level", choices=("plus", "minus"))
    g.add_argument("--turns", type=float, help="sign-rule loop turns")
    g = common.add_argument_group("integrator")
    g.add_argument("--n-steps", dest="n_steps", type=int)
    g.add_argument("--scheme", choices=("midpoint-exponential", "naive-euler"))
    g = common.add_argument_group("sweep")
    g.add_argument("--log-min", dest="log_min", type=float)
    g.add_argument("--log-max", dest="log_max", type=float)
    g.add_argument("--points", type=int)
    g = common.add_argument_group("output")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--output", "-o", help="output file, '-' for stdout")
    g.add_argument("--precision", type=int, help="significant digits")
    g.add_argument("--gnuplot", help="also write a gnuplot script here (sweep)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="levelcross", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"levelcross {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    helps = {
        "sweep": "geometric phase across a log grid of g r T",
        "phase": "geometric phase of a single path",
        "equivalence": "original vs effective picture discrepancy",
        "sign-rule": "real eigenvector sign around the crossing",
        "connection-check": "analytic vs finite-difference connection",
        "c-basis": "per-mode phases in the near-crossing basis",
    }
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def make_config(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = ExperimentConfig()
    cfg.experiment = args.experiment
    if args.path_file:
        cfg.path_file = args.path_file
    for flag, (section, name) in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(getattr(cfg, section), name, value)
    return cfg.validate()


def _write(text, dest):
    if dest in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(dest, "w", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = make_config(args)
        log.info("running %s", cfg.experiment)
        rows = run(cfg)
        _write(render(rows, cfg.output), cfg.output.file)
        if cfg.output.gnuplot:
            data = cfg.output.file if cfg.output.file not in (None, "-") else "sweep.csv"
            _write(gnuplot_script(data, cfg.experiment), cfg.output.gnuplot)
    except (ConfigError, InvalidParameterError, InvalidPathError) as exc:
        print(f"levelcross: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegeneratePointError, UndefinedPhaseError) as exc:
        print(f"levelcross: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"levelcross: I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
