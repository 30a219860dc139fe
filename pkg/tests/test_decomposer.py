import pytest

from pbekit.decomposer import (
    chunk_boundaries,
    eligible_cuts,
    make_step_cases,
    recompose,
    split_into_chunks,
)
from pbekit.errors import AbandonProgram, EmptyChain, NoInput, NotEnoughCuts
from pbekit.generator import check_workability, generate_working_program
from pbekit.rng import mix64
from pbekit.vm import (
    Program,
    evaluate,
    node_count,
    parse,
    serialize,
    values_equal,
)


class TestEligibleCuts:
    def test_single_cut(self):
        cuts = eligible_cuts(parse("add(mul(x,2),1)"))
        assert [serialize(Program(c)) for c in cuts] == ["mul(x,2)"]

    def test_no_non_root_apply(self):
        assert eligible_cuts(parse("add(x,1)")) == []

    def test_bare_input(self):
        assert eligible_cuts(parse("x")) == []

    def test_no_input_raises(self):
        with pytest.raises(NoInput):
            eligible_cuts(parse("add(1,2)"))

    def test_cut_must_dominate_all_inputs(self):
        # both branches hold an x, so no single subtree dominates them
        cuts = eligible_cuts(parse("add(mul(x,2),neg(x))"))
        assert cuts == []

    def test_deepest_first(self):
        cuts = eligible_cuts(parse("neg(abs(add(mul(x,2),1)))"))
        texts = [serialize(Program(c)) for c in cuts]
        assert texts == ["mul(x,2)", "add(mul(x,2),1)", "abs(add(mul(x,2),1))"]


class TestSplit:
    def test_two_chunks(self):
        chunks = split_into_chunks(parse("add(mul(x,2),1)"), 2, seed=3)
        assert [serialize(c.code) for c in chunks] == ["mul(x,2)", "add(x,1)"]
        assert [c.index for c in chunks] == [1, 2]

    def test_k1_returns_whole_program(self):
        program = parse("add(mul(x,2),1)")
        chunks = split_into_chunks(program, 1, seed=3)
        assert len(chunks) == 1 and chunks[0].code == program

    def test_not_enough_cuts(self):
        with pytest.raises(NotEnoughCuts):
            split_into_chunks(parse("add(x,1)"), 2, seed=3)

    def test_k_above_32_rejected(self):
        with pytest.raises(NotEnoughCuts):
            split_into_chunks(parse("add(x,1)"), 33, seed=3)


class TestRecompose:
    def test_substitution(self):
        chunks = split_into_chunks(parse("add(mul(x,2),1)"), 2, seed=3)
        assert recompose(chunks) == parse("add(mul(x,2),1)")

    def test_single(self):
        program = parse("neg(x)")
        chunks = split_into_chunks(program, 1, seed=0)
        assert recompose(chunks) == program

    def test_empty(self):
        with pytest.raises(EmptyChain):
            recompose([])

    def test_random_round_trips_all_feasible_k(self):
        checked = 0
        for i in range(60):
            program, _ = generate_working_program(16, mix64(91, i))
            try:
                max_k = 1 + len(eligible_cuts(program))
            except NoInput:
                continue
            for k in range(1, min(32, max_k) + 1):
                chunks = split_into_chunks(program, k, seed=mix64(92, i, k))
                assert recompose(chunks) == program
                assert len(chunks) <= min(32, node_count(program.root))
                checked += 1
        assert checked > 60

    def test_chain_semantics_match_original(self):
        program, report = generate_working_program(12, 17)
        max_k = 1 + len(eligible_cuts(program))
        for k in range(1, max_k + 1):
            chunks = split_into_chunks(program, k, seed=5)
            for probe, expected in zip(report.probe_inputs, report.probe_outputs):
                value = probe
                for chunk in chunks:
                    value = evaluate(chunk.code, value)
                assert values_equal(value, expected)


class TestMakeStepCases:
    def test_doubling_chunk_cases_replay(self):
        program = parse("add(mul(x,2),1)")
        report = check_workability(program, seed=4)
        assert report.works
        chunks = split_into_chunks(program, 2, seed=6)
        step_cases = make_step_cases(chunks, report, seed=8)
        assert [sc.chunk_index for sc in step_cases] == [1, 2]
        for chunk, sc in zip(chunks, step_cases):
            assert 1 <= len(sc.cases) <= 8
            for inp, outp in sc.cases:
                assert values_equal(evaluate(chunk.code, inp), outp)
            # inputs pairwise distinct
            for i, (a, _) in enumerate(sc.cases):
                for b, _ in sc.cases[i + 1:]:
                    assert not values_equal(a, b)

    def test_always_erroring_chunk_abandons(self):
        from pbekit.decomposer import Chunk
        from pbekit.generator import WorkabilityReport

        program = parse("add(mul(x,2),1)")
        report = check_workability(program, seed=4)
        chunks = split_into_chunks(program, 2, seed=6)
        # replace the first chunk with one that errors on every input
        bad = [Chunk(1, parse("div(x,0)")), chunks[1]]
        with pytest.raises(AbandonProgram):
            make_step_cases(bad, report, seed=8)

    def test_case_counts_within_bounds_over_many_programs(self):
        produced = 0
        for i in range(40):
            program, report = generate_working_program(12, mix64(71, i))
            try:
                max_k = 1 + len(eligible_cuts(program))
            except NoInput:
                continue
            k = min(3, max_k)
            chunks = split_into_chunks(program, k, seed=mix64(72, i))
            try:
                step_cases = make_step_cases(chunks, report, seed=mix64(73, i))
            except AbandonProgram:
                continue
            for sc in step_cases:
                assert 1 <= len(sc.cases) <= 8
            produced += 1
        assert produced >= 20

    def test_boundaries_start_at_probe_inputs(self):
        program = parse("add(mul(x,2),1)")
        report = check_workability(program, seed=4)
        chunks = split_into_chunks(program, 2, seed=6)
        boundaries = chunk_boundaries(chunks, report)
        assert boundaries[0] == list(report.probe_inputs)
        assert len(boundaries) == 2
