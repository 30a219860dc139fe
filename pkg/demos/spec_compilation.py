#!/usr/bin/env python3
"""Compile specifications made of test cases into programs.

Shows a single-step spec, a spec with a derived intermediate value, and
'use' composition, where a previously compiled program becomes an extra
instruction available to the synthesizer.
"""

from pbekit import (
    Spec,
    SpecCase,
    augment_table,
    compile_spec,
    evaluate,
    parse,
    serialize,
)
from pbekit.vm import DEFAULT_TABLE


def main():
    # one step: triple the input
    triple = compile_spec(Spec("triple", (
        SpecCase(1, (), 3),
        SpecCase(2, (), 6),
        SpecCase(10, (), 30),
    )))
    print(f"triple:   {serialize(triple)}")

    # two steps: double, then increment, guided by a derived value
    dbl_inc = compile_spec(Spec("dbl_inc", (
        SpecCase(5, (10,), 11),
        SpecCase(1, (2,), 3),
        SpecCase(3, (6,), 7),
    )))
    print(f"dbl_inc:  {serialize(dbl_inc)}")
    print(f"  dbl_inc(5) = {evaluate(dbl_inc, 5)}")

    # use composition: 'triple' becomes the pseudo-instruction @triple
    registry = {"triple": triple}
    spec = Spec("triple_plus_one", (
        SpecCase(2, (), 7),
        SpecCase(4, (), 13),
        SpecCase(5, (), 16),
    ), use=("triple",))
    program = compile_spec(spec, registry)
    print(f"with use: {serialize(program)}")
    table = augment_table(DEFAULT_TABLE, ("triple",), registry)
    print(f"  triple_plus_one(4) = {evaluate(program, 4, table=table)}")


if __name__ == "__main__":
    main()
