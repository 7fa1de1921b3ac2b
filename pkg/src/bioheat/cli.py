"""``bioheat`` command-line interface.

Exit codes: 0 success, 2 configuration/usage error, 3 solver
non-convergence, 4 unsupported method/source combination.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .config import load_scenario
from .errors import (
    BioheatError,
    ConfigError,
    ConvergenceError,
    OutOfRangeError,
    SingularityError,
    StabilityError,
    UnsupportedCombinationError,
)
from .mnp_power import format_sweep_csv, sweep_diameter
from .model import SourceKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_UNSUPPORTED = 4

SOURCES = tuple(k.value for k in SourceKind)


def _times(text):
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated seconds, got {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("times must be a non-empty list of values >= 0")
    return sorted(values)


def _add_scenario(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--config", type=Path, help="scenario JSON file")
    group.add_argument("--preset", choices=["paper"], help="built-in reference scenario (default)")


def _add_grid(p):
    p.add_argument("--rmax", type=float, help="largest radius in m (default 0.03)")
    p.add_argument("--nr", type=int, help="number of radial points (default 121)")


def _add_output(p):
    p.add_argument("-o", "--output", type=Path, help="write CSV here instead of stdout")
    p.add_argument("--plot-script", type=Path, help="also write a gnuplot script for the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bioheat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("power", help="nanoparticle power density versus diameter")
    _add_scenario(p)
    p.add_argument("--panel", choices=["a", "b"],
                   help="a: f = 100..1000 kHz at 5 mT; b: H0 = 1..10 mT at 500 kHz; "
                        "omitted: one sweep at the scenario field")
    p.add_argument("--d-min-nm", type=float, default=10.0)
    p.add_argument("--d-max-nm", type=float, default=30.0)
    p.add_argument("--n-points", type=int, default=201)
    _add_output(p)

    p = sub.add_parser("simulate", help="temperature profiles from one method")
    _add_scenario(p)
    p.add_argument("--method", choices=harness.METHODS, required=True)
    p.add_argument("--source", choices=SOURCES, required=True)
    p.add_argument("--times", type=_times, required=True, help="comma-separated times in s")
    _add_grid(p)
    _add_output(p)

    p = sub.add_parser("compare", help="difference report between two methods")
    _add_scenario(p)
    p.add_argument("--source", choices=SOURCES, required=True)
    p.add_argument("--method-a", choices=harness.METHODS, required=True, help="reference method")
    p.add_argument("--method-b", choices=harness.METHODS, required=True)
    p.add_argument("--times", type=_times, required=True)
    _add_grid(p)
    p.add_argument("--csv", type=Path, help="write the per-time metrics as CSV")

    p = sub.add_parser("steady", help="steady-state profile with closed-form cross-check")
    _add_scenario(p)
    p.add_argument("--source", choices=SOURCES, required=True)
    _add_grid(p)
    _add_output(p)
    return parser


def _emit(text, path, stdout):
    if path is None:
        stdout.write(text)
    else:
        path.write_text(text)


def _grid(args, scenario, kind):
    settings = scenario.solver
    r_max = args.rmax if args.rmax is not None else settings.r_max
    n_r = args.nr if args.nr is not None else settings.n_r
    return harness.default_grid(kind, r_max, n_r)


def _plot(args, title, xlabel, ylabel, n_series):
    if args.plot_script is None:
        return
    csv_name = str(args.output) if args.output is not None else "data.csv"
    args.plot_script.write_text(harness.plot_script(csv_name, title, xlabel, ylabel, n_series))


def cmd_power(args, scenario, stdout):
    if not args.d_min_nm < args.d_max_nm:
        raise ConfigError("empty diameter range: need --d-min-nm < --d-max-nm", "d_range")
    d_range = (args.d_min_nm * 1e-9, args.d_max_nm * 1e-9)
    if args.panel is None:
        diameters, powers = sweep_diameter(scenario.particle, scenario.field, scenario.medium, d_range, args.n_points)
        text, n_series = format_sweep_csv(diameters, powers), 1
    else:
        diameters, labels, curves = harness.power_panel(args.panel, scenario.particle, scenario.medium,
                                                        d_range, args.n_points)
        text, n_series = harness.power_panel_csv(diameters, labels, curves), len(labels)
    _emit(text, args.output, stdout)
    _plot(args, "Nanoparticle power density", "D (nm)", "P (W/m^3)", n_series)


def cmd_simulate(args, scenario, stdout):
    source = scenario.source(args.source)
    harness.require_supported(args.method, source.kind)
    radii = _grid(args, scenario, source.kind)
    profiles = harness.simulate(args.method, source, scenario.tissue, args.times, radii, scenario.solver)
    labels = [harness.time_label(t) for t in args.times]
    _emit(harness.profiles_csv(profiles, labels), args.output, stdout)
    _plot(args, f"{args.method} {source.kind.value} source", "r (m)", "T (K)", len(profiles))


def cmd_compare(args, scenario, stdout):
    source = scenario.source(args.source)
    radii = _grid(args, scenario, source.kind)
    report = harness.compare(source, scenario.tissue, args.method_a, args.method_b, args.times, radii,
                             scenario.solver)
    stdout.write(report.to_text())
    if args.csv is not None:
        args.csv.write_text(report.to_csv())


def cmd_steady(args, scenario, stdout):
    source = scenario.source(args.source)
    radii = _grid(args, scenario, source.kind)
    header, rows = harness.steady_table(source, scenario.tissue, radii, scenario.solver)
    _emit(harness.format_csv(header, rows), args.output, stdout)
    _plot(args, f"steady {source.kind.value} source", "r (m)", "T (K)", 2 if len(header) > 2 else 1)


COMMANDS = {"power": cmd_power, "simulate": cmd_simulate, "compare": cmd_compare, "steady": cmd_steady}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        scenario = load_scenario(args.config)
        COMMANDS[args.command](args, scenario, stdout)
    except UnsupportedCombinationError as exc:
        stderr.write(f"bioheat: unsupported: {exc}\n")
        return EXIT_UNSUPPORTED
    except (ConfigError, StabilityError, SingularityError) as exc:
        stderr.write(f"bioheat: error: {exc}\n")
        return EXIT_CONFIG
    except (ConvergenceError, OutOfRangeError) as exc:
        stderr.write(f"bioheat: solver failed: {exc}\n")
        return EXIT_CONVERGENCE
    except BioheatError as exc:  # pragma: no cover - every subclass is mapped above
        stderr.write(f"bioheat: {exc}\n")
        return 1
    except OSError as exc:
        stderr.write(f"bioheat: cannot write output: {exc}\n")
        return EXIT_CONFIG
    return EXIT_OK


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
