"""Command line interface: ``dgweno run|converge|sensors|test``."""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    ConfigError,
    RunConfig,
    compare_sensors,
    convergence_study,
    read_config_file,
    run_simulation,
)
from .laws import InvalidStateError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

# command-line flag -> RunConfig field
_OVERRIDES = {
    "scheme": "scheme", "p": "p", "flux": "flux", "q": "q", "b": "b", "sensor": "sensor",
    "theta": "theta", "cfl": "cfl", "out": "out", "dump_sensor": "dump_sensor",
}


def _add_run_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON file with RunConfig fields")
    sp.add_argument("--scheme", choices=["dg", "lo", "weno"])
    sp.add_argument("--p", type=int, choices=[1, 2, 3])
    sp.add_argument("--flux", choices=["llf", "hll"])
    sp.add_argument("--q", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--sensor", choices=["relative", "zhao"])
    sp.add_argument("--theta", type=float)
    sp.add_argument("--cfl", type=float)
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--dump-sensor", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgweno", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("run", help="run one simulation"))
    conv = sub.add_parser("converge", help="grid convergence study for DG, LO and WENO")
    _add_run_flags(conv)
    conv.add_argument("--meshes", default="16,32,64,128", help="comma-separated cell counts")
    conv.add_argument("--schemes", default="dg,lo,weno")
    _add_run_flags(sub.add_parser("sensors", help="compare shock sensors on the Sod tube"))
    test = sub.add_parser("test", help="run the property suite (TAP output)")
    test.add_argument("--filter", default=None, help="substring or glob selecting cases")
    return parser


def load_config(args, **defaults) -> RunConfig:
    data = dict(defaults)
    if args.config:
        data.update(read_config_file(args.config))
    for flag, key in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    return RunConfig.from_dict(data)


def _print_report(report) -> None:
    print(json.dumps(report.metrics(), indent=2))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "test":
        from .properties import run_suite

        return 0 if run_suite(args.filter, stream=sys.stdout).ok else 1
    try:
        if args.command == "run":
            report = run_simulation(load_config(args))
            _print_report(report)
            return EXIT_OK if report.success else EXIT_NUMERICAL
        if args.command == "converge":
            try:
                meshes = [int(m) for m in args.meshes.split(",") if m]
            except ValueError:
                raise ConfigError(f"bad --meshes value {args.meshes!r}") from None
            schemes = tuple(s for s in args.schemes.split(",") if s)
            rows = convergence_study(load_config(args), meshes, schemes)
            print("scheme,E_h,error,eoc")
            for r in rows:
                print(f"{r.scheme},{r.cells},{r.error:.3e},{'' if r.eoc is None else f'{r.eoc:.2f}'}")
            return EXIT_OK
        if args.command == "sensors":
            reports = compare_sensors(load_config(args, problem="sod", p=2))
            for label, rep in reports.items():
                lo, hi = rep.ranges["rho"] if "rho" in rep.ranges else next(iter(rep.ranges.values()))
                print(f"{label}: success={rep.success} range=[{lo:.4f}, {hi:.4f}] "
                      f"dissipation={rep.dissipation:.6e}")
            return EXIT_OK if all(r.success for r in reports.values()) else EXIT_NUMERICAL
    except (ConfigError, KeyError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidStateError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
