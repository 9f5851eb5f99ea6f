"""
CLI - `cosim run` and `cosim study {convergence|energy|oscillation}`.
Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from pydantic import ValidationError

from src.balance import CorrectionPolicy
from src.config import configure_logging, settings
from src.errors import CosimError, NumericalFailure
from src.experiments.studies import (
    StudyKind,
    StudyRunner,
    StudySpec,
    format_eoc_table,
)
from src.master import CosimConfig, reference_run, run_cosimulation, write_record_csv
from src.models import MODELS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2

STUDY_KINDS = {
    "convergence": StudyKind.CONVERGENCE,
    "energy": StudyKind.ENERGY_DRIFT,
    "oscillation": StudyKind.OSCILLATION,
}


class UsageError(CosimError, ValueError):
    """Malformed command-line value."""


def _split(text: str) -> list[str]:
    items = [item.strip() for item in text.split(",")]
    if not all(items):
        raise UsageError(f"Empty item in list {text!r}")
    return items


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(item) for item in _split(text)]
    except ValueError as exc:
        raise UsageError(f"{flag} expects a number or a comma list of numbers, got {text!r}") from exc


def _switches(text: str) -> list[bool]:
    values = {"on": True, "off": False}
    items = _split(text)
    bad = [item for item in items if item not in values]
    if bad:
        raise UsageError(f"--smoothing expects on/off, got {', '.join(bad)}")
    return [values[item] for item in items]


def parse_params(text: str | None) -> dict[str, float]:
    """Parse `k=v,k2=v2` model overrides."""
    if not text:
        return {}
    params = {}
    for item in _split(text):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--params expects k=v pairs, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise UsageError(f"--params value for {key.strip()!r} is not a number: {value!r}") from exc
    return params


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="spring-mass", choices=sorted(MODELS), help="Benchmark model")
    common.add_argument("--ext", default=None, help="Extrapolation order 0 or 1 (comma list in studies)")
    common.add_argument("--smoothing", default=None, help="on or off (comma list in studies)")
    common.add_argument("--bc", default=None, help="Correction policy: none, classic1, smooth1, smooth2, smooth4, split-early")
    common.add_argument("--H", dest="H", default=None, help="Macro step (comma list in studies)")
    common.add_argument("--t-end", dest="t_end", type=float, default=None, help="End time")
    common.add_argument("--micro-tol", dest="micro_tol", type=float, default=None, help="Absolute and relative micro tolerance")
    common.add_argument("--dense", type=int, default=None, help="Dense points per macro step")
    common.add_argument("--workers", type=int, default=None, help="Thread pool size for subsystems and sweep points")
    common.add_argument("--out", default=None, help="Output CSV path")
    common.add_argument("--params", default=None, help="Model overrides k=v,...")
    common.add_argument("--seed", type=int, default=None, help="Accepted and ignored; runs are deterministic")
    common.add_argument("--log-level", dest="log_level", default=None, help="Logging level")

    parser = argparse.ArgumentParser(prog="cosim", description="Explicit co-simulation experiments")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("run", parents=[common], help="Run one co-simulation and write its CSV tables")
    study = commands.add_parser("study", parents=[common], help="Run a study sweep")
    study.add_argument("kind", choices=sorted(STUDY_KINDS))
    return parser


def _sweep(args: argparse.Namespace) -> list[tuple[str, list[Any]]]:
    """Comma-listed flags in flag order."""
    sweep = []
    if args.ext is not None:
        try:
            sweep.append(("ext_order", [int(v) for v in _split(args.ext)]))
        except ValueError as exc:
            raise UsageError(f"--ext expects 0 or 1, got {args.ext!r}") from exc
    if args.smoothing is not None:
        sweep.append(("smoothing", _switches(args.smoothing)))
    if args.bc is not None:
        sweep.append(("policy", [CorrectionPolicy.parse(v) for v in _split(args.bc)]))
    if args.H is not None:
        sweep.append(("H", _floats(args.H, "--H")))
    return sweep


def _base_config(args: argparse.Namespace) -> dict[str, Any]:
    fields: dict[str, Any] = {"model": args.model, "params": parse_params(args.params)}
    if args.t_end is not None:
        fields["t_end"] = args.t_end
    if args.micro_tol is not None:
        fields["abs_tol"] = fields["rel_tol"] = args.micro_tol
    if args.dense is not None:
        fields["dense"] = args.dense
    if args.workers is not None:
        fields["workers"] = args.workers
    return fields


def _default_out(name: str) -> Path:
    return Path(settings()["output"]["directory"]) / name


def _command_run(args: argparse.Namespace) -> int:
    sweep = _sweep(args)
    multi = [name for name, values in sweep if len(values) > 1]
    if multi:
        raise UsageError(f"`cosim run` takes single values; use `cosim study` to sweep {', '.join(multi)}")

    config = CosimConfig(**_base_config(args), **{name: values[0] for name, values in sweep})
    record = run_cosimulation(config)
    out = Path(args.out) if args.out else _default_out(f"{config.model}.csv")
    exchange, dense = write_record_csv(record, out)

    print(f"{config.label()}")
    print(f"E(t_end)/E0 = {record.energy_ratio()[-1]:.6g}")
    print(f"max state error vs reference = {record.max_error(reference_run(config)):.6e}")
    for k, report in enumerate(record.closure):
        print(f"channel {k}: scheduled {report.scheduled:.6e} delivered {report.delivered:.6e} residual {report.residual:.3e}")
    print(f"wrote {exchange} and {dense}")
    return EXIT_OK


def _command_study(args: argparse.Namespace) -> int:
    kind = STUDY_KINDS[args.kind]
    sweep = _sweep(args)
    fields = _base_config(args)

    # a convergence study fixes every other flag to a single value
    if kind is StudyKind.CONVERGENCE:
        for name, values in [item for item in sweep if item[0] != "H"]:
            if len(values) > 1:
                raise UsageError(f"A convergence study sweeps --H only, got a list for {name}")
            fields[name] = values[0]
        sweep = [item for item in sweep if item[0] == "H"]
        if not sweep:
            raise UsageError("A convergence study needs a comma list for --H")
        first_h = sweep[0][1][0]
    else:
        first_h = next((values[0] for name, values in sweep if name == "H"), None)

    base_fields = dict(fields)
    if first_h is not None:
        base_fields["H"] = first_h
    spec = StudySpec(
        kind=kind,
        base=CosimConfig(**base_fields),
        sweep=sweep,
        workers=args.workers or 1,
    )
    rows = StudyRunner(spec).run()
    lines = _study_lines(kind, rows)
    print("\n".join(lines))
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("\n".join(_study_csv(kind, rows)) + "\n", encoding="utf-8")
        print(f"wrote {out}")
    return EXIT_OK


def _study_lines(kind: StudyKind, rows: list) -> list[str]:
    if kind is StudyKind.CONVERGENCE:
        return format_eoc_table(rows).splitlines()
    if kind is StudyKind.ENERGY_DRIFT:
        return [f"{trace.label}: E/E0 = {trace.final_ratio:.6g} -> {trace.classification} {trace.note}".rstrip() for trace in rows]
    return [f"{row.label}: metric = {row.metric:.6e} {row.note}".rstrip() for row in rows]


def _study_csv(kind: StudyKind, rows: list) -> list[str]:
    if kind is StudyKind.CONVERGENCE:
        return ["H,err,eoc,floor_limited"] + [f"{r.H:.17g},{r.err:.17g},{r.eoc:.17g},{int(r.floor_limited)}" for r in rows]
    if kind is StudyKind.ENERGY_DRIFT:
        lines = ["point,t,E,E_ratio"]
        for i, trace in enumerate(rows):
            lines += [f"{i},{t:.17g},{e:.17g},{r:.17g}" for t, e, r in trace.table()]
        return lines
    return ["point,metric"] + [f"{i},{row.metric:.17g}" for i, row in enumerate(rows)]


def run_cli(argv: Sequence[str] | None = None) -> int:
    """
    Parse arguments and execute a command.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:].

    Returns:
        Process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level)
    try:
        if args.command == "run":
            return _command_run(args)
        return _command_study(args)
    except NumericalFailure as exc:
        print(f"cosim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        errors = "; ".join(err["msg"] for err in exc.errors())
        print(f"cosim: invalid configuration: {errors}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"cosim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cosim: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
