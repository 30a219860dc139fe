"""Bottom-up enumerative synthesis with observational-equivalence pruning.

Candidates are enumerated in strictly increasing Halstead length, so the
first program whose outputs match the cases is minimal.  Within a length,
enumeration order is: instruction-table order, then argument length splits,
then bank insertion order -- making results fully deterministic.  One
representative is banked per distinct output vector on the case inputs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    EmptyChain,
    InconsistentCases,
    RaggedDerives,
    SynthesisFailure,
    UnknownUse,
    VmError,
)
from .vm import (
    Apply,
    Const,
    DEFAULT_TABLE,
    ExecBudget,
    InputRef,
    Instruction,
    InstructionTable,
    Meter,
    count_input_refs,
    Program,
    eval_node,
    evaluate,
    is_valid_value,
    substitute_input,
    value_key,
    values_equal,
)

CANONICAL_CONSTANTS = (0, 1, 2, -1, True, False, "")


@dataclass(frozen=True)
class SynthesisLimits:
    max_length: int = 9
    max_bank_entries: int = 200_000
    time_budget_ms: int = 5_000
    candidate_fuel: int = 10_000
    candidate_wall_ms: int = 50
    # candidates producing strings/lists bigger than this are discarded
    # (raised automatically when the cases themselves hold bigger values)
    max_value_size: int = 256
    # deterministic cap on total candidate evaluations; unlike the wall
    # clock, exhausting it gives the same outcome on every run
    max_checked: Optional[int] = None

    def __post_init__(self):
        for name in ("max_length", "max_bank_entries", "time_budget_ms",
                     "candidate_fuel", "candidate_wall_ms", "max_value_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_checked is not None and self.max_checked <= 0:
            raise ValueError("max_checked must be positive")


def _is_finite_scalar(v) -> bool:
    if isinstance(v, float):
        return v == v and v not in (float("inf"), float("-inf"))
    return v is None or isinstance(v, (bool, int, str))


def constant_pool(cases):
    """Atoms from case data (including first-level list elements), then the
    canonical constants, deduplicated in extraction order."""
    out = []
    seen = set()

    def add(v):
        if not _is_finite_scalar(v):
            return
        k = value_key(v)
        if k not in seen:
            seen.add(k)
            out.append(v)

    for inp, outp in cases:
        for v in (inp, outp):
            if isinstance(v, list):
                for e in v:
                    if not isinstance(e, list):
                        add(e)
            else:
                add(v)
    for v in CANONICAL_CONSTANTS:
        add(v)
    return out


def _dedupe_cases(cases):
    if not cases:
        raise InconsistentCases("at least one case is required")
    unique = []
    by_input = {}
    for inp, outp in cases:
        k = value_key(inp)
        if k in by_input:
            if not values_equal(by_input[k], outp):
                raise InconsistentCases(
                    f"duplicate input with different outputs: {inp!r}"
                )
            continue
        by_input[k] = outp
        unique.append((inp, outp))
    return unique


def synthesize_step(
    cases,
    table: InstructionTable = DEFAULT_TABLE,
    limits: SynthesisLimits = SynthesisLimits(),
    prune: bool = True,
    require_input: bool = False,
) -> Program:
    """Find the shortest program consistent with the cases, or fail.

    With require_input, only programs that reference the input qualify as
    solutions.  Chain steps need this: a step that ignores its input is not
    a mapping of the previous step's value, and substituting it would erase
    everything before it.  Input-free matches are still banked as search
    building blocks.
    """
    unique = _dedupe_cases(list(cases))
    inputs = [inp for inp, _ in unique]
    targets = [outp for _, outp in unique]
    target_key = tuple(value_key(v) for v in targets)
    n = len(unique)
    size_cap = max(
        limits.max_value_size,
        4 * max(_value_size(v) for inp, outp in unique for v in (inp, outp)),
    )

    deadline = time.monotonic() + limits.time_budget_ms / 1000.0
    seen_keys = set()
    by_length = [[] for _ in range(limits.max_length + 1)]  # (node, outputs)
    bank_size = 0
    checked = 0

    max_checked = limits.max_checked

    def consider(node, outputs):
        nonlocal bank_size, checked
        checked += 1
        if max_checked is not None and checked > max_checked:
            raise SynthesisFailure("synthesis work budget exhausted")
        if checked % 1024 == 0 and time.monotonic() > deadline:
            raise SynthesisFailure("synthesis time budget exhausted")
        key = tuple(value_key(v) for v in outputs)
        if key == target_key and not (require_input and count_input_refs(node) == 0):
            return Program(node)
        if prune:
            if key in seen_keys:
                return None
            seen_keys.add(key)
        bank_size += 1
        if bank_size > limits.max_bank_entries:
            raise SynthesisFailure("synthesis bank limit exhausted")
        return key  # truthy marker meaning "banked"

    def bank(length, node, outputs):
        result = consider(node, outputs)
        if isinstance(result, Program):
            return result
        if result is not None:
            by_length[length].append((node, outputs))
        return None

    # length 1: the input variable, then the constant pool
    found = bank(1, InputRef(), inputs)
    if found:
        return found
    for const in constant_pool(unique):
        found = bank(1, Const(const), [const] * n)
        if found:
            return found

    instructions = list(table)
    for length in range(2, limits.max_length + 1):
        budget = length - 1  # nodes available for children
        for ins in instructions:
            if ins.arity > budget:
                continue
            for split in _length_splits(budget, ins.arity, limits.max_length):
                pools = [by_length[l] for l in split]
                if any(not p for p in pools):
                    continue
                for combo in _product(pools):
                    outputs = _apply_vector(ins, combo, n, limits, size_cap)
                    if outputs is None:
                        continue
                    node = Apply(ins.name, tuple(entry[0] for entry in combo))
                    found = bank(length, node, outputs)
                    if found:
                        return found
    raise SynthesisFailure(
        f"no program of length <= {limits.max_length} matches the {n} case(s)"
    )


def _length_splits(total, parts, cap):
    """All tuples of `parts` positive ints summing to `total`, lexicographic."""
    if parts == 1:
        if 1 <= total <= cap:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _length_splits(total - first, parts - 1, cap):
            yield (first,) + rest


def _product(pools):
    if len(pools) == 1:
        for a in pools[0]:
            yield (a,)
    elif len(pools) == 2:
        for a in pools[0]:
            for b in pools[1]:
                yield (a, b)
    else:
        for a in pools[0]:
            for b in pools[1]:
                for c in pools[2]:
                    yield (a, b, c)


def _value_size(v) -> int:
    if isinstance(v, str):
        return len(v)
    if isinstance(v, list):
        return len(v) + sum(_value_size(e) for e in v)
    return 1


def _within_cap(v, cap) -> bool:
    if isinstance(v, str):
        return len(v) <= cap
    if isinstance(v, list):
        return len(v) <= cap and all(_within_cap(e, cap) for e in v)
    return True


def _apply_vector(ins, combo, n, limits, size_cap):
    """Apply instruction semantics case-wise to child output vectors."""
    fn = ins.fn
    meter = Meter(limits.candidate_fuel)  # one fuel budget per candidate
    outputs = []
    for i in range(n):
        try:
            out = fn([entry[1][i] for entry in combo], meter)
        except VmError:
            return None
        if isinstance(out, (str, list)) and not _within_cap(out, size_cap):
            return None
        outputs.append(out)
    return outputs


# ---------------------------------------------------------------------------
# composition


def compose_chain(solutions) -> Program:
    """Substitute each step's program into the next step's InputRef."""
    if not solutions:
        raise EmptyChain("no step solutions to compose")
    acc = solutions[0].root
    for sol in solutions[1:]:
        acc = substitute_input(sol.root, acc)
    return Program(acc)


def regenerate_steps(
    step_cases,
    table: InstructionTable = DEFAULT_TABLE,
    limits: SynthesisLimits = SynthesisLimits(),
):
    """Synthesize one program per step, post-validating each against its cases."""
    if not step_cases:
        raise EmptyChain("no step cases")
    expected = list(range(1, len(step_cases) + 1))
    if [sc.chunk_index for sc in step_cases] != expected:
        raise ValueError("step cases must be ordered and contiguous from 1")
    solutions = []
    for sc in step_cases:
        try:
            # every chain step must consume its predecessor's value
            sol = synthesize_step(sc.cases, table, limits, require_input=True)
        except SynthesisFailure as exc:
            raise SynthesisFailure(f"step {sc.chunk_index}: {exc}") from exc
        for inp, outp in sc.cases:
            got = evaluate(sol, inp, ExecBudget(), table)
            if not values_equal(got, outp):
                raise SynthesisFailure(
                    f"step {sc.chunk_index}: candidate fails post-validation"
                )
        solutions.append(sol)
    return solutions


def regenerate(
    step_cases,
    table: InstructionTable = DEFAULT_TABLE,
    limits: SynthesisLimits = SynthesisLimits(),
) -> Program:
    """Synthesize every step and compose the chain."""
    return compose_chain(regenerate_steps(step_cases, table, limits))


# ---------------------------------------------------------------------------
# spec files and 'use' composition


@dataclass(frozen=True)
class SpecCase:
    input: object
    derive: tuple
    output: object


@dataclass(frozen=True)
class Spec:
    name: str
    cases: tuple  # of SpecCase
    use: tuple = ()


def load_spec(doc) -> Spec:
    """Build a Spec from a parsed JSON document (or a path to one)."""
    if isinstance(doc, (str, Path)):
        with open(doc, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("spec document must be a JSON object")
    name = doc.get("name", "")
    raw_cases = doc.get("cases", [])
    if not raw_cases:
        raise ValueError("spec must contain at least one case")
    cases = []
    for c in raw_cases:
        case = SpecCase(
            input=c["input"],
            derive=tuple(c.get("derive", [])),
            output=c["output"],
        )
        for v in (case.input, *case.derive, case.output):
            if not is_valid_value(v):
                raise ValueError(f"not a runtime value: {v!r}")
        cases.append(case)
    return Spec(name=name, cases=tuple(cases), use=tuple(doc.get("use", [])))


def load_registry(directory, table: InstructionTable = DEFAULT_TABLE):
    """Read every <name>.zil file in a directory into a name->Program map."""
    from .vm import parse

    registry = {}
    for path in sorted(Path(directory).glob("*.zil")):
        text = path.read_text(encoding="utf-8").strip()
        registry[path.stem] = parse(text, table)
    return registry


def _pseudo_instruction(name: str, program: Program, table_ref) -> Instruction:
    root = program.root

    def fn(args, meter):
        return eval_node(root, args[0], meter, table_ref())

    return Instruction("@" + name, 1, fn)


def augment_table(table: InstructionTable, used_names, registry) -> InstructionTable:
    """Append each used program as an arity-1 pseudo-instruction."""
    pseudos = []
    holder = {}

    def table_ref():
        return holder["table"]

    for name in used_names:
        if name not in registry:
            raise UnknownUse(f"no program named {name!r} in the registry")
        pseudos.append(_pseudo_instruction(name, registry[name], table_ref))
    augmented = table.extend(pseudos)
    holder["table"] = augmented
    return augmented


def compile_spec(
    spec: Spec,
    registry=None,
    limits: SynthesisLimits = SynthesisLimits(),
    table: InstructionTable = DEFAULT_TABLE,
) -> Program:
    """Compile a test-case specification into a concrete program."""
    registry = registry or {}
    derive_counts = {len(c.derive) for c in spec.cases}
    if len(derive_counts) != 1:
        raise RaggedDerives(
            f"cases disagree on derive count: {sorted(derive_counts)}"
        )
    work_table = augment_table(table, spec.use, registry) if spec.use else table
    steps = derive_counts.pop() + 1
    solutions = []
    for j in range(steps):
        step_cases = []
        for c in spec.cases:
            chain = [c.input, *c.derive, c.output]
            step_cases.append((chain[j], chain[j + 1]))
        solutions.append(synthesize_step(step_cases, work_table, limits))
    result = compose_chain(solutions)
    for c in spec.cases:
        got = evaluate(result, c.input, ExecBudget(), work_table)
        if not values_equal(got, c.output):
            raise SynthesisFailure("composed program fails an end-to-end case")
    return Program(result.root, name=spec.name or None)
