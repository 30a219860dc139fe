"""Command-line interface.

Exit codes: 0 success, 1 operation failure (synthesis, runtime, or data
errors), 2 usage or configuration errors.  Machine-readable output goes to
files or stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    AttemptsExhausted,
    ConfigInvalid,
    InconsistentCases,
    InsufficientData,
    InvalidBudget,
    OutputUnwritable,
    PbeError,
    ProgramSyntaxError,
    RaggedDerives,
    SynthesisFailure,
    UnknownUse,
    VmError,
)
from .generator import generate_random_program, generate_working_program
from .stats import analyze_records
from .study import StudyConfig, read_records, run_study
from .synthesizer import SynthesisLimits, compile_spec, load_registry, load_spec
from .vm import (
    DEFAULT_TABLE,
    ExecBudget,
    evaluate,
    halstead_length,
    is_valid_value,
    parse,
    serialize,
    size_bytes,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _err(message):
    print(f"error: {message}", file=sys.stderr)


def _write_program(program, path):
    Path(path).write_text(serialize(program) + "\n", encoding="utf-8")


def _load_program(path, table=DEFAULT_TABLE):
    return parse(Path(path).read_text(encoding="utf-8").strip(), table)


def cmd_generate(args) -> int:
    if args.budget < 1:
        _err(f"--budget must be >= 1, got {args.budget}")
        return EXIT_USAGE
    try:
        if args.working:
            program, report = generate_working_program(
                args.budget, args.seed, max_attempts=args.max_attempts
            )
            print(f"profile: {report.profile}", file=sys.stderr)
        else:
            program = generate_random_program(args.budget, args.seed)
        _write_program(program, args.output)
    except AttemptsExhausted as exc:
        _err(exc)
        return EXIT_FAILURE
    except InvalidBudget as exc:
        _err(exc)
        return EXIT_USAGE
    except OSError as exc:
        _err(exc)
        return EXIT_USAGE
    return EXIT_OK


def cmd_run(args) -> int:
    path = Path(args.file)
    if not path.is_file():
        _err(f"no such file: {path}")
        return EXIT_USAGE
    try:
        program = _load_program(path)
    except ProgramSyntaxError as exc:
        _err(f"cannot parse {path}: {exc}")
        return EXIT_USAGE
    try:
        input_value = json.loads(args.input)
    except json.JSONDecodeError as exc:
        _err(f"--input is not valid JSON: {exc}")
        return EXIT_USAGE
    if not is_valid_value(input_value):
        _err("--input is not a runtime value")
        return EXIT_USAGE
    try:
        result = evaluate(program, input_value, ExecBudget())
    except VmError as exc:
        _err(f"{exc.kind}: {exc}")
        return EXIT_FAILURE
    print(json.dumps(result, ensure_ascii=False))
    return EXIT_OK


def cmd_compile(args) -> int:
    try:
        spec = load_spec(args.spec)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        _err(f"cannot load spec: {exc}")
        return EXIT_USAGE
    registry = {}
    if args.registry:
        try:
            registry = load_registry(args.registry)
        except (OSError, ProgramSyntaxError) as exc:
            _err(f"cannot load registry: {exc}")
            return EXIT_USAGE
    try:
        program = compile_spec(spec, registry, SynthesisLimits())
    except (SynthesisFailure, InconsistentCases, RaggedDerives, UnknownUse) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE
    try:
        _write_program(program, args.output)
    except OSError as exc:
        _err(exc)
        return EXIT_USAGE
    steps = len(spec.cases[0].derive) + 1
    total_cases = steps * len(spec.cases)
    print(
        f"steps={steps} cases={total_cases} "
        f"halstead={halstead_length(program)} bytes={size_bytes(program)}"
    )
    return EXIT_OK


def cmd_study(args) -> int:
    try:
        config = StudyConfig(
            max_steps=args.max_steps,
            programs_per_step=args.per_step,
            master_seed=args.seed,
            workers=args.workers,
            audit_path=str(Path(args.audit) / "audit.jsonl") if args.audit else None,
        )
    except ConfigInvalid as exc:
        _err(exc)
        return EXIT_USAGE

    def progress(k, done, quota):
        print(f"steps={k}: {done}/{quota}", file=sys.stderr)

    try:
        summary = run_study(config, args.output, progress=progress)
    except (OutputUnwritable, ConfigInvalid) as exc:
        _err(exc)
        return EXIT_USAGE
    print(f"wrote {summary['rows']} rows to {summary['output']}", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        records = read_records(args.results)
    except (OSError, ConfigInvalid) as exc:
        _err(f"cannot read results: {exc}")
        return EXIT_USAGE
    try:
        report = analyze_records(records)
    except InsufficientData as exc:
        _err(f"InsufficientData: {exc}")
        return EXIT_FAILURE
    except PbeError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE
    try:
        Path(args.output).write_text(report.to_json() + "\n", encoding="utf-8")
    except OSError as exc:
        _err(exc)
        return EXIT_USAGE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbekit",
        description="Example-driven program synthesis and the size/steps/cases study",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a random program")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--working", action="store_true",
                   help="loop until the workability filter passes")
    p.add_argument("--max-attempts", type=int, default=10_000)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="evaluate a .zil program on one input")
    p.add_argument("file")
    p.add_argument("--input", required=True, help="input value as JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compile", help="compile a JSON spec into a program")
    p.add_argument("spec")
    p.add_argument("--registry", help="directory of .zil files usable via 'use'")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("study", help="run the generate/decompose/regenerate study")
    p.add_argument("--max-steps", type=int, default=8)
    p.add_argument("--per-step", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--audit", help="directory for the JSONL audit sidecar")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("analyze", help="analyze a results CSV into a JSON report")
    p.add_argument("results")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    return args.func(args)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
