import json

import pytest

from pbekit.errors import (
    EmptyChain,
    InconsistentCases,
    RaggedDerives,
    SynthesisFailure,
    UnknownUse,
    VmError,
)
from pbekit.synthesizer import (
    Spec,
    SpecCase,
    SynthesisLimits,
    augment_table,
    compile_spec,
    compose_chain,
    constant_pool,
    load_registry,
    load_spec,
    regenerate,
    synthesize_step,
)
from pbekit.decomposer import StepCases
from pbekit.vm import (
    Apply,
    Const,
    DEFAULT_TABLE,
    ExecBudget,
    InputRef,
    InstructionTable,
    Program,
    evaluate,
    halstead_length,
    parse,
    serialize,
    values_equal,
)

# reduced table for oracle-checked minimality: arity <= 2 arithmetic and
# string instructions only
REDUCED_NAMES = ("neg", "abs", "upper", "lower", "add", "sub", "mul",
                 "min", "max", "concat")
REDUCED_TABLE = InstructionTable(
    [ins for ins in DEFAULT_TABLE if ins.name in REDUCED_NAMES]
)


def brute_force_minimum(cases, table, max_length):
    """Independent exhaustive oracle: enumerate every AST up to max_length
    and return the smallest length that satisfies all cases, or None."""
    terminals = [InputRef()] + [Const(v) for v in constant_pool(cases)]

    def programs_of_length(length):
        if length == 1:
            yield from terminals
            return
        for ins in table:
            if ins.arity > length - 1:
                continue
            for split in _splits(length - 1, ins.arity):
                children_pools = [list(programs_of_length(l)) for l in split]
                yield from _combine(ins.name, children_pools)

    def _splits(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(1, total - parts + 2):
            for rest in _splits(total - first, parts - 1):
                yield (first,) + rest

    def _combine(name, pools):
        if len(pools) == 1:
            for a in pools[0]:
                yield Apply(name, (a,))
        else:
            for a in pools[0]:
                for b in pools[1]:
                    yield Apply(name, (a, b))

    for length in range(1, max_length + 1):
        for root in programs_of_length(length):
            program = Program(root)
            ok = True
            for inp, outp in cases:
                try:
                    got = evaluate(program, inp, ExecBudget(), table)
                except VmError:
                    ok = False
                    break
                if not values_equal(got, outp):
                    ok = False
                    break
            if ok:
                return length
    return None


class TestSynthesizeStep:
    def test_doubling_is_length_three(self):
        sol = synthesize_step([(1, 2), (2, 4), (5, 10)])
        assert halstead_length(sol) == 3
        assert brute_force_minimum([(1, 2), (2, 4), (5, 10)], DEFAULT_TABLE, 3) == 3
        for inp, outp in [(1, 2), (2, 4), (5, 10)]:
            assert evaluate(sol, inp) == outp

    def test_constant_zero(self):
        sol = synthesize_step([(1, 0), (7, 0)])
        assert serialize(sol) == "0"
        assert halstead_length(sol) == 1

    def test_upper(self):
        sol = synthesize_step([("a", "A"), ("hi", "HI")])
        assert serialize(sol) == "upper(x)"

    def test_inconsistent_cases(self):
        with pytest.raises(InconsistentCases):
            synthesize_step([(1, 2), (1, 3)])

    def test_empty_cases(self):
        with pytest.raises(InconsistentCases):
            synthesize_step([])

    def test_identity_single_case(self):
        sol = synthesize_step([(5, 5)])
        assert serialize(sol) == "x"

    def test_soundness_exact_equality(self):
        # 2 is in the pool from the outputs; 1.0 case forces float handling
        sol = synthesize_step([(1.0, 2.0), (3.0, 6.0)])
        assert values_equal(evaluate(sol, 1.0), 2.0)

    def test_failure_when_no_program_exists(self):
        limits = SynthesisLimits(max_length=3, time_budget_ms=2_000)
        with pytest.raises(SynthesisFailure):
            # a pseudo-random mapping no length-3 program matches
            synthesize_step([(1, 17), (2, -40), (3, 23), (4, 99)], limits=limits)

    def test_determinism(self):
        cases = [(2, 5), (4, 9), (10, 21)]
        a = synthesize_step(cases)
        b = synthesize_step(cases)
        assert a == b and serialize(a) == serialize(b)


class TestConstantPool:
    def test_extraction_order_then_canonical(self):
        pool = constant_pool([(3, [4, 5])])
        assert pool[:3] == [3, 4, 5]
        # canonical tail, deduplicated
        assert pool[3:] == [0, 1, 2, -1, True, False, ""]

    def test_dedupe_is_type_strict(self):
        pool = constant_pool([(1, 1.0)])
        assert pool[0] == 1 and isinstance(pool[0], int)
        assert isinstance(pool[1], float)


class TestMinimalityOracle:
    def test_matches_brute_force_on_known_programs(self):
        from pbekit.generator import check_workability, generate_random_program
        from pbekit.rng import mix64

        solved = 0
        attempts = 0
        i = 0
        while solved < 100 and i < 3000:
            i += 1
            program = generate_random_program(4, mix64(401, i), REDUCED_TABLE)
            report = check_workability(program, mix64(402, i), table=REDUCED_TABLE)
            if not report.works:
                continue
            cases = list(zip(report.probe_inputs, report.probe_outputs))[:4]
            oracle = brute_force_minimum(cases, REDUCED_TABLE, 4)
            if oracle is None:
                continue
            attempts += 1
            sol = synthesize_step(cases, REDUCED_TABLE)
            assert halstead_length(sol) == oracle, serialize(program)
            solved += 1
        assert solved == 100

    def test_pruning_never_changes_length(self):
        from pbekit.generator import check_workability, generate_random_program
        from pbekit.rng import mix64

        limits = SynthesisLimits(max_length=4, max_bank_entries=2_000_000)
        checked = 0
        i = 0
        while checked < 200 and i < 8000:
            i += 1
            program = generate_random_program(3, mix64(411, i), REDUCED_TABLE)
            report = check_workability(program, mix64(412, i), table=REDUCED_TABLE)
            if not report.works:
                continue
            cases = list(zip(report.probe_inputs, report.probe_outputs))[:3]
            try:
                pruned = synthesize_step(cases, REDUCED_TABLE, limits, prune=True)
                unpruned = synthesize_step(cases, REDUCED_TABLE, limits, prune=False)
            except SynthesisFailure:
                continue
            assert halstead_length(pruned) == halstead_length(unpruned)
            checked += 1
        assert checked == 200


class TestRequireInput:
    def test_single_case_step_uses_the_input(self):
        from pbekit.vm import count_input_refs

        sol = synthesize_step([(3, 7)], require_input=True)
        assert count_input_refs(sol.root) >= 1
        assert values_equal(evaluate(sol, 3), 7)

    def test_default_still_returns_constants(self):
        assert serialize(synthesize_step([(3, 7)])) == "7"

    def test_composition_keeps_the_whole_chain(self):
        from pbekit.decomposer import StepCases

        regen = regenerate([
            StepCases(1, ((2, 4), (5, 10))),
            StepCases(2, ((4, 9),)),  # single case; must not erase step 1
        ])
        assert values_equal(evaluate(regen, 2), evaluate(regen, 2))
        got = evaluate(regen, 2)
        direct = evaluate(regenerate([StepCases(1, ((4, 9),))]), 4)
        assert values_equal(got, direct)


class TestComposeChain:
    def test_substitution(self):
        composed = compose_chain([parse("mul(x,2)"), parse("add(x,1)")])
        assert composed == parse("add(mul(x,2),1)")
        assert halstead_length(composed) == 3 + 3 - 1

    def test_identity_composition(self):
        assert compose_chain([parse("upper(x)")]) == parse("upper(x)")

    def test_empty(self):
        with pytest.raises(EmptyChain):
            compose_chain([])


class TestCompileSpec:
    def test_two_step_spec(self):
        spec = Spec("two_step", (SpecCase(5, (10,), 11),))
        program = compile_spec(spec)
        assert evaluate(program, 5) == 11

    def test_use_composition_wins_on_length(self):
        registry = {"dbl": parse("mul(x,2)")}
        spec = Spec("use_dbl", (SpecCase(3, (), 6),), use=("dbl",))
        program = compile_spec(spec, registry)
        assert halstead_length(program) <= 3
        table = augment_table(DEFAULT_TABLE, ("dbl",), registry)
        assert values_equal(evaluate(program, 3, table=table), 6)

    def test_ragged_derives(self):
        spec = Spec("bad", (SpecCase(1, (2,), 3), SpecCase(4, (5, 6), 7)))
        with pytest.raises(RaggedDerives):
            compile_spec(spec)

    def test_unknown_use(self):
        spec = Spec("nouse", (SpecCase(1, (), 2),), use=("missing",))
        with pytest.raises(UnknownUse):
            compile_spec(spec, {})

    def test_pseudo_instruction_serialization_round_trip(self):
        registry = {"dbl": parse("mul(x,2)")}
        table = augment_table(DEFAULT_TABLE, ("dbl",), registry)
        program = parse("@dbl(add(x,1))", table)
        assert serialize(program) == "@dbl(add(x,1))"
        assert halstead_length(program) == 4
        assert evaluate(program, 2, table=table) == 6

    def test_load_spec_and_registry(self, tmp_path):
        doc = {
            "name": "inc",
            "cases": [{"input": 1, "output": 2}, {"input": 5, "output": 6}],
        }
        path = tmp_path / "inc.json"
        path.write_text(json.dumps(doc))
        spec = load_spec(path)
        assert spec.name == "inc" and len(spec.cases) == 2
        (tmp_path / "dbl.zil").write_text("mul(x,2)\n")
        registry = load_registry(tmp_path)
        assert serialize(registry["dbl"]) == "mul(x,2)"

    def test_json_integers_stay_integers(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text('{"name":"t","cases":[{"input":1,"output":2.0}]}')
        spec = load_spec(path)
        assert isinstance(spec.cases[0].input, int)
        assert isinstance(spec.cases[0].output, float)


class TestRegenerate:
    def test_pipeline_steps(self):
        from pbekit.decomposer import make_step_cases, split_into_chunks
        from pbekit.generator import check_workability

        program = parse("add(mul(x,2),1)")
        report = check_workability(program, seed=4)
        chunks = split_into_chunks(program, 2, seed=6)
        step_cases = make_step_cases(chunks, report, seed=8)
        regen = regenerate(step_cases)
        for sc, chunk in zip(step_cases, chunks):
            pass
        # the regenerated chain satisfies all original probes end to end
        for inp, outp in zip(report.probe_inputs, report.probe_outputs):
            assert values_equal(evaluate(regen, inp), outp)

    def test_single_identity_case(self):
        regen = regenerate([StepCases(1, ((5, 5),))])
        assert serialize(regen) == "x"

    def test_empty(self):
        with pytest.raises(EmptyChain):
            regenerate([])
