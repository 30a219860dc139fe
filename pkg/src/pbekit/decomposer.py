"""Splitting a working program into a chain of chunks and fuzzing test cases.

Cuts are the non-root Apply nodes whose subtree contains every occurrence of
the input variable.  Such nodes are totally ordered by ancestry, so they form
a single root-to-leaf chain: each chunk is itself a single-input program and
sequentially substituting the chunks reconstructs the original tree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import AbandonProgram, EmptyChain, NoInput, NotEnoughCuts, VmError
from .generator import DEFAULT_POOL, RandomPool, WorkabilityReport
from .rng import Rng, mix64
from .vm import (
    Apply,
    DEFAULT_TABLE,
    ExecBudget,
    InputRef,
    Program,
    count_input_refs,
    evaluate,
    replace_by_identity,
    substitute_input,
    values_equal,
)

_P_SPLIT = 201
_P_CASES = 202


@dataclass(frozen=True)
class Chunk:
    """One step of the chain; index 1 consumes the original input."""

    index: int
    code: Program


@dataclass(frozen=True)
class StepCases:
    chunk_index: int
    cases: tuple  # of (input, output) pairs


def eligible_cuts(program: Program):
    """Cut candidates, ordered deepest-first.

    Raises NoInput only when the program contains no InputRef at all but is
    not itself a bare InputRef-free leaf chain without Apply nodes -- i.e.
    whenever there is genuinely no input to thread through the chain.
    """
    total_refs = count_input_refs(program.root)
    if total_refs == 0:
        raise NoInput("program contains no input reference")
    # walk the unique path of nodes dominating every InputRef; at most one
    # child of a dominating node can itself dominate them all
    cuts = []
    node = program.root
    while isinstance(node, Apply):
        node = next(
            (c for c in node.children if count_input_refs(c) == total_refs),
            None,
        )
        if not isinstance(node, Apply):
            break
        cuts.append(node)
    cuts.reverse()  # deepest-first
    return cuts


def split_into_chunks(program: Program, k: int, seed: int):
    """Split into exactly k chunks, choosing k-1 cut nodes uniformly."""
    if k < 1:
        raise NotEnoughCuts(f"chunk count must be >= 1, got {k}")
    if k == 1:
        return [Chunk(1, program)]
    cuts = eligible_cuts(program)
    if k > min(32, 1 + len(cuts)):
        raise NotEnoughCuts(
            f"cannot split into {k} chunks: only {len(cuts)} eligible cuts"
        )
    rng = Rng(mix64(seed, _P_SPLIT))
    chosen_idx = sorted(rng.sample_indices(len(cuts), k - 1))
    chosen = [cuts[i] for i in chosen_idx]  # deepest-first
    chunks = []
    prev = None
    for i, cut in enumerate(chosen):
        code = cut if prev is None else replace_by_identity(cut, prev, InputRef())
        chunks.append(Chunk(i + 1, Program(code)))
        prev = cut
    chunks.append(Chunk(k, Program(replace_by_identity(program.root, prev, InputRef()))))
    return chunks


def recompose(chunks) -> Program:
    """Inverse of split: substitute each chunk into the next one's InputRef."""
    if not chunks:
        raise EmptyChain("no chunks to recompose")
    acc = chunks[0].code.root
    for chunk in chunks[1:]:
        acc = substitute_input(chunk.code.root, acc)
    return Program(acc)


def _value_kind(v) -> Optional[str]:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, str):
        return "string"
    if isinstance(v, list):
        return "list-int"
    return None  # null: no fresh draws possible


def chunk_boundaries(chunks, report: WorkabilityReport, table=DEFAULT_TABLE,
                     budget: ExecBudget = ExecBudget()):
    """Values observed at each chunk's input boundary on the workability probes.

    boundaries[i] feeds chunk i+1 (0-based); boundaries[0] is the probe inputs.
    """
    boundaries = [list(report.probe_inputs)]
    for chunk in chunks[:-1]:
        boundaries.append(
            [evaluate(chunk.code, v, budget, table) for v in boundaries[-1]]
        )
    return boundaries


def _criteria_ok(cases, want: int) -> bool:
    if len(cases) != want:
        return False
    if want > 1:
        first = cases[0][1]
        if all(values_equal(out, first) for _, out in cases[1:]):
            return False  # results always the same
    if all(values_equal(out, inp) for inp, out in cases):
        return False  # no result differs from its input
    return True


def make_step_cases(
    chunks,
    report: WorkabilityReport,
    seed: int,
    max_draws: int = 64,
    table=DEFAULT_TABLE,
    pool: RandomPool = DEFAULT_POOL,
    budget: ExecBudget = ExecBudget(),
):
    """Fuzz each chunk into 1-8 test cases, or abandon the whole program.

    Candidate inputs mix boundary values recorded during the workability
    probes with fresh draws of the same type; a candidate is accepted only
    when the chunk evaluates it without error.
    """
    if not report.works:
        raise AbandonProgram("cannot fuzz a non-working program")
    try:
        boundaries = chunk_boundaries(chunks, report, table, budget)
    except VmError as exc:
        raise AbandonProgram(f"chunk boundary evaluation failed: {exc}") from exc
    all_cases = []
    for chunk, observed in zip(chunks, boundaries):
        rng = Rng(mix64(seed, _P_CASES, chunk.index))
        want = rng.randint(1, 8)
        distinct_observed = []
        for v in observed:
            if not any(values_equal(v, u) for u in distinct_observed):
                distinct_observed.append(v)
        kind = _value_kind(distinct_observed[0]) if distinct_observed else None
        accepted = []
        draws = 0
        while draws < max_draws and not _criteria_ok(accepted, want):
            draws += 1
            if kind is not None and rng.random() < 0.5:
                candidate = pool.draw(kind, rng)
            else:
                candidate = distinct_observed[rng.randint(0, len(distinct_observed) - 1)]
            if any(values_equal(candidate, inp) for inp, _ in accepted):
                continue
            try:
                output = evaluate(chunk.code, candidate, budget, table)
            except VmError:
                continue
            accepted.append((candidate, output))
            if len(accepted) == want and not _criteria_ok(accepted, want):
                accepted.pop()  # make room for a more diverse case
        if not _criteria_ok(accepted, want):
            raise AbandonProgram(
                f"chunk {chunk.index} could not yield {want} valid cases "
                f"within {max_draws} draws"
            )
        all_cases.append(StepCases(chunk.index, tuple(accepted)))
    return all_cases
