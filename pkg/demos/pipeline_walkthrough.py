#!/usr/bin/env python3
"""Walk one program through the full study pipeline, printing every stage.

Generates a random working program, splits it into chunks, fuzzes test
cases for each chunk, regenerates each chunk from its cases alone, and
compares the regenerated composition with the original.
"""

from pbekit import (
    compose_chain,
    eligible_cuts,
    generate_working_program,
    halstead_length,
    make_step_cases,
    serialize,
    size_bytes,
    split_into_chunks,
    synthesize_step,
)

SEED = 2024


def main():
    program, report = generate_working_program(budget=12, seed=SEED)
    print(f"original:     {serialize(program)}")
    print(f"  profile={report.profile}  halstead={halstead_length(program)}"
          f"  bytes={size_bytes(program)}")

    cuts = eligible_cuts(program)
    k = min(3, 1 + len(cuts))
    chunks = split_into_chunks(program, k, seed=SEED)
    print(f"\nsplit into {k} chunks:")
    for chunk in chunks:
        print(f"  step {chunk.index}: {serialize(chunk.code)}")

    step_cases = make_step_cases(chunks, report, seed=SEED)
    print("\nfuzzed cases:")
    for sc in step_cases:
        for inp, outp in sc.cases:
            print(f"  step {sc.chunk_index}: {inp!r} -> {outp!r}")

    solutions = [synthesize_step(list(sc.cases)) for sc in step_cases]
    print("\nregenerated steps:")
    for sc, solution in zip(step_cases, solutions):
        print(f"  step {sc.chunk_index}: {serialize(solution)}")

    regenerated = compose_chain(solutions)
    print(f"\nregenerated:  {serialize(regenerated)}")
    print(f"  halstead={halstead_length(regenerated)}"
          f"  bytes={size_bytes(regenerated)}")
    for inp, outp in zip(report.probe_inputs, report.probe_outputs):
        print(f"  check {inp!r} -> {outp!r}")


if __name__ == "__main__":
    main()
