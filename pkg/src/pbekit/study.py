"""Study pipeline: generate -> filter -> chunk -> fuzz -> regenerate -> record.

For each step count k the pipeline produces a fixed quota of records, each
from a program that was split into exactly k chunks.  Attempts that cannot
be split, fuzzed, or regenerated are abandoned and restarted under the next
derived seed.  All per-attempt seeds are pure functions of (master_seed, k,
attempt index), so output is byte-identical regardless of worker count.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

from .decomposer import make_step_cases, split_into_chunks
from .errors import (
    AbandonProgram,
    AttemptsExhausted,
    ConfigInvalid,
    NoInput,
    NotEnoughCuts,
    OutputUnwritable,
    SynthesisFailure,
    VmError,
)
from .generator import generate_working_program
from .rng import Rng, mix64
from .synthesizer import SynthesisLimits, compose_chain, regenerate_steps
from .vm import (
    DEFAULT_TABLE,
    ExecBudget,
    Program,
    evaluate,
    parse,
    serialize,
    size_bytes,
    values_equal,
)

CSV_HEADER = "program_id,steps,total_cases,size_bytes,budget,seed"

_P_BUDGET = 301
_P_GENERATE = 302
_P_SPLIT = 303
_P_CASES = 304


@dataclass(frozen=True)
class StudyConfig:
    max_steps: int = 8
    programs_per_step: int = 25
    master_seed: int = 0
    budget_factor_lo: int = 2
    budget_factor_hi: int = 6
    budget_cap: int = 96
    # per-step search effort is capped by a deterministic candidate count
    # (roughly two seconds of work) rather than the wall clock, so reruns
    # abandon exactly the same attempts; the clock stays as a safety net
    limits: SynthesisLimits = field(
        default_factory=lambda: SynthesisLimits(
            time_budget_ms=120_000, max_checked=150_000
        )
    )
    workers: int = 1
    generation_attempts: int = 400  # per pipeline attempt
    audit_path: Optional[str] = None

    def __post_init__(self):
        if not (1 <= self.max_steps <= 32):
            raise ConfigInvalid(f"max_steps must be in [1, 32], got {self.max_steps}")
        if self.programs_per_step < 0:
            raise ConfigInvalid("programs_per_step must be >= 0")
        if self.workers < 1:
            raise ConfigInvalid("workers must be >= 1")
        if self.budget_factor_lo < 1 or self.budget_factor_hi < self.budget_factor_lo:
            raise ConfigInvalid("budget factor range is invalid")


@dataclass(frozen=True)
class StudyRecord:
    program_id: int
    steps: int
    total_cases: int
    size_bytes: int
    budget: int
    seed: int


@dataclass(frozen=True)
class RecordArtifacts:
    original: str  # serialized programs / chunks, for audit and validation
    chunks: tuple
    step_cases: tuple  # of (chunk_index, ((input, output), ...))
    step_programs: tuple  # serialized per-step solutions
    regenerated: str


def sample_budget(k: int, seed: int, config: StudyConfig) -> int:
    rng = Rng(mix64(seed, _P_BUDGET))
    factor = rng.randint(config.budget_factor_lo, config.budget_factor_hi)
    return min(k * factor, config.budget_cap)


def run_attempt(k: int, seed: int, config: StudyConfig):
    """One pipeline attempt; returns (record fields, artifacts) or None."""
    budget = sample_budget(k, seed, config)
    try:
        program, report = generate_working_program(
            budget,
            mix64(seed, _P_GENERATE),
            max_attempts=config.generation_attempts,
        )
        chunks = split_into_chunks(program, k, mix64(seed, _P_SPLIT))
        step_cases = make_step_cases(chunks, report, mix64(seed, _P_CASES))
        step_programs = regenerate_steps(step_cases, DEFAULT_TABLE, config.limits)
    except (AttemptsExhausted, NotEnoughCuts, NoInput, AbandonProgram, SynthesisFailure):
        return None
    regenerated = compose_chain(step_programs)
    total_cases = sum(len(sc.cases) for sc in step_cases)
    artifacts = RecordArtifacts(
        original=serialize(program),
        chunks=tuple(serialize(c.code) for c in chunks),
        step_cases=tuple((sc.chunk_index, tuple(sc.cases)) for sc in step_cases),
        step_programs=tuple(serialize(p) for p in step_programs),
        regenerated=serialize(regenerated),
    )
    fields_ = {
        "steps": k,
        "total_cases": total_cases,
        "size_bytes": size_bytes(regenerated),
        "budget": budget,
        "seed": seed,
    }
    return fields_, artifacts


def _attempt_task(args):
    k, seed, config = args
    return run_attempt(k, seed, config)


def validate_record(record: StudyRecord, artifacts: RecordArtifacts,
                    table=DEFAULT_TABLE) -> bool:
    """True iff the regenerated program replays every step case exactly and
    the recorded fields match the retained artifacts."""
    try:
        regenerated = parse(artifacts.regenerated, table)
        step_programs = [parse(text, table) for text in artifacts.step_programs]
    except Exception:
        return False
    if record.size_bytes != size_bytes(regenerated):
        return False
    if record.steps != len(step_programs) or record.steps != len(artifacts.step_cases):
        return False
    if record.total_cases != sum(len(cases) for _, cases in artifacts.step_cases):
        return False
    for program, (_, cases) in zip(step_programs, artifacts.step_cases):
        for inp, outp in cases:
            try:
                got = evaluate(program, inp, ExecBudget(), table)
            except VmError:
                return False
            if not values_equal(got, outp):
                return False
    return serialize(compose_chain(step_programs)) == artifacts.regenerated


def _iter_attempts(k: int, config: StudyConfig):
    """Yield attempt results for step count k in attempt order."""
    if config.workers == 1:
        attempt = 0
        while True:
            seed = mix64(config.master_seed, k, attempt)
            yield attempt, seed, run_attempt(k, seed, config)
            attempt += 1
    else:
        batch = max(config.workers * 2, 4)
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            attempt = 0
            while True:
                seeds = [mix64(config.master_seed, k, attempt + i) for i in range(batch)]
                args = [(k, s, config) for s in seeds]
                for i, result in enumerate(pool.map(_attempt_task, args)):
                    yield attempt + i, seeds[i], result
                attempt += batch


def run_study(config: StudyConfig, output_path, progress: Optional[Callable] = None):
    """Run the full pipeline and write the results CSV.

    Returns a summary dict.  When config.audit_path is set, a JSONL sidecar
    with the serialized original, chunks, cases, and regenerated program is
    written alongside the CSV.
    """
    output_path = Path(output_path)
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        fh = open(output_path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {output_path}: {exc}") from exc

    audit_fh = None
    if config.audit_path:
        audit_path = Path(config.audit_path)
        audit_path.parent.mkdir(parents=True, exist_ok=True)
        audit_fh = open(audit_path, "w", encoding="utf-8", newline="")

    records = []
    try:
        fh.write(CSV_HEADER + "\n")
        program_id = 0
        for k in range(1, config.max_steps + 1):
            if config.programs_per_step == 0:
                continue
            successes = 0
            for attempt, seed, result in _iter_attempts(k, config):
                if result is None:
                    continue
                fields_, artifacts = result
                program_id += 1
                record = StudyRecord(program_id=program_id, **fields_)
                if not validate_record(record, artifacts):
                    raise AssertionError(
                        f"record {program_id} failed validation at emission"
                    )
                fh.write(
                    f"{record.program_id},{record.steps},{record.total_cases},"
                    f"{record.size_bytes},{record.budget},{record.seed}\n"
                )
                records.append(record)
                if audit_fh is not None:
                    audit_fh.write(json.dumps({
                        "program_id": record.program_id,
                        "original": artifacts.original,
                        "chunks": list(artifacts.chunks),
                        "cases": [
                            [[inp, outp] for inp, outp in cases]
                            for _, cases in artifacts.step_cases
                        ],
                        "regenerated": artifacts.regenerated,
                    }) + "\n")
                successes += 1
                if progress is not None:
                    progress(k, successes, config.programs_per_step)
                if successes >= config.programs_per_step:
                    break
    finally:
        fh.close()
        if audit_fh is not None:
            audit_fh.close()

    sizes = [r.size_bytes for r in records]
    return {
        "rows": len(records),
        "max_steps": config.max_steps,
        "programs_per_step": config.programs_per_step,
        "max_size": max(sizes) if sizes else None,
        "output": str(output_path),
    }


def read_records(csv_path):
    """Parse a results CSV back into StudyRecord objects."""
    path = Path(csv_path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigInvalid(f"unexpected CSV header in {csv_path}")
    records = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ConfigInvalid(f"malformed CSV row: {line!r}")
        try:
            values = [int(p) for p in parts]
        except ValueError as exc:
            raise ConfigInvalid(f"malformed CSV row: {line!r}") from exc
        records.append(StudyRecord(*values))
    return records
