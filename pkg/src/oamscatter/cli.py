"""Command-line entry point: ``oamscatter element|sweep|fit|validate``."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, PhysicsDomainError
from .scan import SweepSpec, dumps_record, fit_power_law, read_sweep_csv, rows_to_csv, run_matrix_element, run_sweep
from .validate import PROFILES, format_report, validate_suite

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_PHYSICS = 0, 1, 2, 3


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON ({err.msg} at line {err.lineno})") from None
    if not isinstance(doc, dict):
        raise ConfigError("<root>: config must be a JSON object")
    return doc


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_grid(text: str) -> tuple[float, ...]:
    items = [s for s in text.replace(" ", "").split(",") if s]
    try:
        return tuple(float(s) for s in items)
    except ValueError:
        raise ConfigError(f"grid: cannot parse {text!r}") from None


def cmd_element(args) -> int:
    _, record = run_matrix_element(_read_json(args.config), signed_gouy=args.mutate_gouy)
    _emit(dumps_record(record), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec(args.axis, _parse_grid(args.grid), _read_json(args.config))
    rows = run_sweep(spec, workers=args.workers, signed_gouy=args.mutate_gouy)
    _emit(rows_to_csv(rows), args.output)
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        with open(args.csv, encoding="utf-8") as fh:
            points = read_sweep_csv(fh.read())
    except OSError as err:
        raise ConfigError(f"{args.csv}: {err.strerror}") from None
    try:
        fit = fit_power_law(points)
    except ValueError as err:
        raise ConfigError(f"fit: {err}") from None
    _emit(json.dumps({"slope": fit.slope, "intercept": fit.intercept, "max_residual": fit.max_residual}, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    ok, results = validate_suite(args.profile, args.mutate_gouy)
    _emit(format_report(results, args.profile, args.mutate_gouy), args.output)
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oamscatter", description="Twisted-photon / hydrogen matrix elements.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("element", help="evaluate one scattering channel from a JSON config")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--mutate-gouy", action="store_true", help="use ell instead of |ell| in the Gouy phase")
    p.set_defaults(func=cmd_element)

    p = sub.add_parser("sweep", help="scan one parameter and write CSV")
    p.add_argument("config")
    p.add_argument("--axis", required=True)
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output")
    p.add_argument("--mutate-gouy", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="power-law fit of abs_M against axis_value from a sweep CSV")
    p.add_argument("csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--profile", default="default", choices=sorted(PROFILES))
    p.add_argument("--mutate-gouy", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsDomainError as err:
        print(f"physics error: {err}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
