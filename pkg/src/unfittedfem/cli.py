"""Command-line entry point: ``unfittedfem <subcommand> [options]``.

Settings come from an optional INI file (a ``[study]`` section shared by all
subcommands plus one section per subcommand) and are overridden by flags.
Exit codes: 0 on success, 2 if any case failed, 1 on configuration or
output errors.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import fields

from . import study
from .errors import ConfigError

log = logging.getLogger("unfittedfem")

SCALING_ALIASES = {"const": "constant", "constant": "constant", "h2": "h_squared", "h_squared": "h_squared"}
COMMANDS = ("solve", "convergence", "rotate-sweep", "param-sweep", "compare")
DEFAULT_LEVELS = {
    "solve": (32,),
    "convergence": (16, 32, 64, 128),
    "rotate-sweep": (16, 32, 64),
    "param-sweep": (32,),
    "compare": (64,),
}
PARAM_SWEEP_DEFAULTS = {"gamma": (0.01, 0.1, 1.0, 10.0), "sigma": (0.001, 0.01, 0.1, 1.0)}


def _floats(text):
    try:
        return tuple(float(v) for v in str(text).replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(v) for v in str(text).replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"expected a list of integers, got {text!r}") from None


def _scalings(text):
    out = []
    for v in str(text).replace(",", " ").split():
        if v not in SCALING_ALIASES:
            raise ConfigError(f"unknown graddiv scaling {v!r}; use const or h2")
        out.append(SCALING_ALIASES[v])
    return tuple(out)


# config/flag key -> (StudyConfig field, parser)
SETTINGS = {
    "scheme": ("scheme", str),
    "problem": ("problem", str),
    "exact": ("exact", str),
    "R": ("R", float),
    "radius": ("radius", float),
    "kappa": ("kappa", float),
    "n": ("levels", _ints),
    "levels": ("levels", _ints),
    "theta0": ("theta0", _floats),
    "gamma": ("gamma", _floats),
    "sigma": ("sigma", _floats),
    "gamma_div": ("gamma_div", _floats),
    "gamma1": ("gamma_1", _floats),
    "gamma_1": ("gamma_1", _floats),
    "graddiv_scaling": ("graddiv_scaling", _scalings),
    "out": ("out", str),
    "threads": ("threads", int),
    "seed": ("seed", int),
    "compare_with": ("compare_with", str),
}


def _read_config(path, command):
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep "R" distinct from "r"
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    values = {}
    for section in ("study", command):
        if parser.has_section(section):
            for key, raw in parser.items(section):
                key = key.replace("-", "_")
                if key not in SETTINGS:
                    raise ConfigError(f"unknown config key {key!r} in [{section}]")
                values[key] = raw
    return values


def build_config(command, args) -> study.StudyConfig:
    raw = _read_config(args.config, command) if args.config else {}
    for key in ("scheme", "n", "theta0", "gamma", "sigma", "gamma_div", "gamma1", "kappa",
                "graddiv_scaling", "out", "threads", "seed", "problem", "R", "radius", "exact", "compare_with"):
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    kwargs = {"levels": DEFAULT_LEVELS[command]}
    if command == "param-sweep":
        kwargs.update(PARAM_SWEEP_DEFAULTS)
    for key, text in raw.items():
        name, parse = SETTINGS[key]
        try:
            kwargs[name] = parse(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {text!r}") from exc
    known = {f.name for f in fields(study.StudyConfig)}
    config = study.StudyConfig(**{k: v for k, v in kwargs.items() if k in known})
    config.validate(min_levels=1)
    return config


def _add_common(p):
    p.add_argument("--config", help="INI file with a [study] section and per-command sections")
    p.add_argument("--scheme", choices=study.SCHEMES)
    p.add_argument("--problem", choices=("flower", "disk"))
    p.add_argument("--exact", choices=("sin_exp", "linear"), help="exact solution")
    p.add_argument("--R", type=float, dest="R", help="flower radius parameter")
    p.add_argument("--radius", type=float, help="disk radius")
    p.add_argument("--n", help="mesh levels, comma separated")
    p.add_argument("--theta0", help="rotation angles, comma separated")
    p.add_argument("--gamma", help="Nitsche penalty value(s)")
    p.add_argument("--sigma", help="ghost penalty value(s)")
    p.add_argument("--gamma-div", dest="gamma_div", help="grad-div value(s)")
    p.add_argument("--gamma1", help="flux matching value(s)")
    p.add_argument("--kappa", type=float, help="Robin coefficient")
    p.add_argument("--graddiv-scaling", dest="graddiv_scaling", help="const, h2, or both (param-sweep)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def make_parser():
    parser = argparse.ArgumentParser(prog="unfittedfem", description="Unfitted P1 finite element studies.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_common(p)
        if name == "compare":
            p.add_argument("--compare-with", dest="compare_with", choices=study.SCHEMES,
                           help="baseline scheme (default cutfem_asym)")
    return parser


def _print_summary(report, out):
    for r in report.rows:
        l2 = r[study.l2_column(r["scheme"])]
        out.write(f"{r['scheme']:>16} n={r['n']:<4d} theta0={r['theta0']:.4f} "
                  f"l2={l2:.3e} h1={r['h1_rel']:.3e} {r['status']}\n")
    for (scheme, theta0), s in sorted(report.slopes.items()):
        out.write(f"slopes {scheme} theta0={theta0:.4f}: H1 {s['h1_rel']:.3f}, "
                  f"L2 {s['l2_rel']:.3f}, mean-free L2 {s['l2_meanfree_rel']:.3f}\n")
    for (scheme, n), entry in sorted(report.ratios.items()):
        out.write(f"max/min {scheme} n={n}: " + ", ".join(
            f"{k} {v:.3f}" if k != "failed" else f"failed {v}" for k, v in entry.items()) + "\n")


RUNNERS = {
    "convergence": study.run_convergence,
    "rotate-sweep": study.run_rotation_sweep,
    "param-sweep": study.run_param_sweep,
    "compare": study.run_compare,
}


def main(argv=None, stdout=None):
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = make_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 is reserved for failed cases here
        return 1 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = build_config(args.command, args)
        if args.command == "solve":
            if len(config.levels) != 1:
                raise ConfigError("solve takes a single --n")
            theta = study._single_angle(config)
            case = study._case(config, config.scheme, config.levels[0], theta, config.first_params())
            report = study.StudyReport("solve", [study.run_case(case)])
        else:
            report = RUNNERS[args.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if config.out:
        try:
            paths = study.emit_outputs(report, config.out)
        except (OSError, ValueError) as exc:
            print(f"error: cannot write outputs: {exc}", file=sys.stderr)
            return 1
        for p in paths:
            log.info("wrote %s", p)
    if args.command == "solve" and not config.out:
        stdout.write(study.rows_to_csv(report.rows))
    else:
        _print_summary(report, stdout)
    for r in report.failures:
        print(f"failed: {r['message']}", file=sys.stderr)
    return 2 if report.failures else 0


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
