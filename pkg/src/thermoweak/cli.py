"""Command-line driver.

    thermoweak sweep --config sweep.cfg --jobs 4
    thermoweak fig1 --output fig1.csv
    thermoweak spot-check
    thermoweak dump-defaults > sweep.cfg

Exit codes: 0 success, 1 golden failure, 2 config error, 3 numerical error.
"""

import argparse
import logging
import sys

from .config import SweepConfig, load_config, parse_config_text
from .errors import ConfigError, ThermoWeakError
from .sweep import fig1_configs, fig2_configs, run_configs, run_sweep, spot_check

EXIT_OK = 0
EXIT_GOLDEN = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

# flag name -> SweepConfig field
_OVERRIDES = {
    "sigma": "sigma",
    "mass": "mass",
    "temperature": "temperature",
    "theta": "theta",
    "phi": "phi",
    "n_trials": "n_trials",
    "pmax": "p_max",
    "npoints": "n_points",
    "output": "output",
}


def _add_common(parser):
    parser.add_argument("--config", help="key = value sweep file")
    parser.add_argument("--sigma", type=float)
    parser.add_argument("--mass", type=float)
    parser.add_argument("--temperature", type=float, help="kelvin")
    parser.add_argument("--theta", type=float, help="coupling strength")
    parser.add_argument("--phi", type=float, help="pre-selection angle, A_w = i tan(phi)")
    parser.add_argument("--n-trials", type=int)
    parser.add_argument("--pmax", type=float, help="momentum window half-width")
    parser.add_argument("--npoints", type=int, help="momentum grid points")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    parser.add_argument("--output", help="CSV path")


def build_parser():
    parser = argparse.ArgumentParser(prog="thermoweak", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="sweep one quantity along one axis")
    _add_common(sweep)
    sweep.add_argument("--quantity")
    sweep.add_argument("--axis")
    sweep.add_argument("--start", type=float)
    sweep.add_argument("--stop", type=float)
    sweep.add_argument("--points", type=int)
    sweep.add_argument("--spacing", choices=("linear", "log"))

    for name, text in (("fig1", "SNR vs temperature"), ("fig2", "effective QFI vs temperature")):
        fig = sub.add_parser(name, help=f"{text}, 3 couplings x 4 selections")
        _add_common(fig)
        fig.add_argument("--t-max", type=float, default=300.0, help="upper end of the temperature axis")
        fig.add_argument("--t-points", type=int, default=31)

    sub.add_parser("spot-check", help="golden-value regression table")
    sub.add_parser("dump-defaults", help="print the default sweep config")
    return parser


def _overrides(args, extra=()):
    out = {}
    for flag, field in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            out[field] = value
    for name in extra:
        value = getattr(args, name, None)
        if value is not None:
            out[name] = value
    return out


def resolve_config(args, extra=(), base_overrides=None) -> SweepConfig:
    """Config file (if any) with flags applied on top."""
    overrides = dict(base_overrides or {})
    overrides.update(_overrides(args, extra))
    if args.config:
        return load_config(args.config, overrides)
    return parse_config_text("", overrides)


def _run_spot_check(out):
    results = spot_check()
    for r in results:
        print(r.line(), file=out)
    failed = [r for r in results if r.hard and not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} entries ok", file=out)
    return EXIT_GOLDEN if failed else EXIT_OK


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "dump-defaults":
            out.write(SweepConfig().to_text())
            return EXIT_OK
        if args.command == "spot-check":
            return _run_spot_check(out)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1", field="jobs")
        if args.command == "sweep":
            config = resolve_config(args, ("quantity", "axis", "start", "stop", "points", "spacing"))
            summary = run_sweep(config, args.jobs)
        else:
            defaults = {"n_trials": 10000, "output": f"{args.command}.csv"}
            base = resolve_config(args, base_overrides=defaults)
            make = fig1_configs if args.command == "fig1" else fig2_configs
            configs = make(base, args.t_max, args.t_points)
            summary = run_configs(configs, base.output, args.jobs)
        print(summary.line(), file=out)
        return EXIT_NUMERIC if summary.errors else EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ThermoWeakError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
