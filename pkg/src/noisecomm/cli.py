"""Command line interface: ``noisecomm analyze | verify | list-builtins``."""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass
from typing import Callable

from .channels import (
    KrausChannel,
    TrivialStructureWarning,
    build_collective,
    build_phase_damping,
    build_two_qubit_dephasing,
    build_zz_damping,
    load_channel,
)
from .errors import NoiseCommError, NonUnitalChannelError
from .linalg import ToleranceConfig
from .report import build_report, format_text
from .structure import analyze
from .verify import Diagnostic, noiseless_components, verify_noiseless, verify_structure

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NON_UNITAL = 2


@dataclass(frozen=True)
class Builtin:
    name: str
    param: str
    kind: type
    bounds: str
    description: str
    build: Callable


BUILTINS = {
    b.name: b
    for b in [
        Builtin("collective", "n", int, "n >= 1 (n <= 2 has no matrix blocks)", "n-qubit collective rotation channel", build_collective),
        Builtin("phase-damping", "p", float, "0 < p < 1", "single-qubit phase flip {sqrt(1-p) I, sqrt(p) Z}", build_phase_damping),
        Builtin("two-qubit-dephasing", "p", float, "0 < p < 1", "independent phase flips on two qubits (4 Kraus operators)", build_two_qubit_dephasing),
        Builtin("zz-damping", "p", float, "0 < p < 1", "correlated phase flip {sqrt(1-p) I, sqrt(p) Z(x)Z}", build_zz_damping),
    ]
}


class InputError(Exception):
    pass


def _parse_builtin(spec: str, params: list[str], tol: ToleranceConfig) -> KrausChannel:
    name, _, arg = spec.partition(":")
    if name not in BUILTINS:
        raise InputError(f"unknown builtin {name!r}; try 'list-builtins'")
    b = BUILTINS[name]
    values = {}
    for item in params:
        k, sep, v = item.partition("=")
        if not sep:
            raise InputError(f"--param expects key=value, got {item!r}")
        values[k.strip()] = v.strip()
    if arg:
        values.setdefault(b.param, arg)
    unknown = set(values) - {b.param}
    if unknown:
        raise InputError(f"builtin {name!r} takes only parameter {b.param!r}, got {sorted(unknown)}")
    if b.param not in values:
        raise InputError(f"builtin {name!r} needs parameter {b.param} ({b.bounds}), e.g. {name}:{'3' if b.kind is int else '0.25'}")
    try:
        value = b.kind(values[b.param])
    except ValueError as exc:
        raise InputError(f"bad value for {b.param}: {values[b.param]!r}") from exc
    if b.name == "collective":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TrivialStructureWarning)
            return b.build(value, tol)
    return b.build(value)


def _tolerances(args) -> ToleranceConfig:
    try:
        return ToleranceConfig(args.tol_rank, args.tol_cluster, args.tol_zero, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _load(args, tol: ToleranceConfig) -> KrausChannel:
    if bool(args.input) == bool(args.builtin):
        raise InputError("give exactly one of a channel spec path or --builtin")
    if args.builtin:
        return _parse_builtin(args.builtin, args.param, tol)
    try:
        return load_channel(args.input, tol)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror or exc}") from exc


def _emit(report, args) -> None:
    if args.format == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(format_text(report))


def _run(args, with_simulation: bool) -> int:
    tol = _tolerances(args)
    ch = _load(args, tol)
    structure = analyze(ch, tol, strategy=args.strategy, link_method=args.link_method)
    diags = verify_structure(ch, structure, tol)
    if with_simulation:
        for nc in noiseless_components(structure):
            if not nc.usable:
                continue
            rep = verify_noiseless(ch, nc, args.trials, args.repetitions, tol)
            diags.append(Diagnostic(f"noiseless[{nc.component_index}]", rep.passed, rep.max_trace_distance))
    report = build_report(ch, structure, tol, diags, full=args.full)
    _emit(report, args)
    if with_simulation and not report.passed:
        return EXIT_INPUT
    return EXIT_OK


def cmd_list_builtins(args=None) -> int:
    rows = [(b.name, b.param, b.bounds, b.description) for b in sorted(BUILTINS.values(), key=lambda b: b.name)]
    widths = [max(len(r[i]) for r in rows + [("name", "param", "bounds", "")]) for i in range(3)]
    print(f"{'name':<{widths[0]}}  {'param':<{widths[1]}}  {'bounds':<{widths[2]}}  description")
    for r in rows:
        print(f"{r[0]:<{widths[0]}}  {r[1]:<{widths[1]}}  {r[2]:<{widths[2]}}  {r[3]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisecomm", description="Noise commutant and Wedderburn structure of unital quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", help="channel spec JSON file")
    common.add_argument("--builtin", help="builtin channel, e.g. collective:3 or phase-damping")
    common.add_argument("--param", action="append", default=[], metavar="K=V", help="builtin parameter")
    common.add_argument("--tol-rank", type=float, default=1e-9)
    common.add_argument("--tol-cluster", type=float, default=1e-8)
    common.add_argument("--tol-zero", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--full", action="store_true", help="include matrices (JSON output only)")
    common.add_argument("--strategy", choices=["paper", "generic"], default="generic")
    common.add_argument("--link-method", choices=["corner", "subset", "signature"], default="corner")
    common.add_argument("--threads", type=int, default=None, help="parallelism hint (currently unused)")

    sub.add_parser("analyze", parents=[common], help="compute the commutant structure")
    verify = sub.add_parser("verify", parents=[common], help="analyze, then check structure and simulate noiseless components")
    verify.add_argument("--trials", type=int, default=50)
    verify.add_argument("--repetitions", type=int, default=5)
    sub.add_parser("list-builtins", help="list builtin channels")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list-builtins":
        return cmd_list_builtins(args)
    try:
        return _run(args, with_simulation=args.command == "verify")
    except NonUnitalChannelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NON_UNITAL
    except (InputError, NoiseCommError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
