"""Random program generation and the six-point workability filter.

Programs are generated against a Halstead-length budget: the result is often
smaller but never larger than the budget.  A generated program "works" when,
for some input profile, eight seeded probe inputs all evaluate cleanly, the
outputs are not all identical, at least one output differs from its input,
and every probe stays within the execution budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import AttemptsExhausted, FuelExhausted, InvalidBudget, VmError, WallClockExceeded
from .rng import Rng, mix64
from .vm import (
    Apply,
    Const,
    DEFAULT_TABLE,
    ExecBudget,
    InputRef,
    Program,
    evaluate,
    values_equal,
)

# fixed trial order for input profiles
PROFILES = ("int", "string", "list-int", "float", "bool")

_PROFILE_CODE = {kind: i + 1 for i, kind in enumerate(PROFILES)}

# internal purpose codes for seed derivation
_P_VALUE = 101
_P_GEN = 102
_P_PROBE = 103
_P_ATTEMPT = 104


@dataclass(frozen=True)
class RandomPool:
    """Seeded value generators for each data type."""

    int_lo: int = -100
    int_hi: int = 100
    float_lo: float = -100.0
    float_hi: float = 100.0
    alphabet: str = "abcdefghijklmnopqrstuvwxyz0123456789"
    str_len_max: int = 8
    list_len_max: int = 8

    def draw(self, kind: str, rng: Rng):
        if kind == "int":
            return rng.randint(self.int_lo, self.int_hi)
        if kind == "float":
            return rng.uniform(self.float_lo, self.float_hi)
        if kind == "string":
            n = rng.randint(0, self.str_len_max)
            return "".join(rng.choice(self.alphabet) for _ in range(n))
        if kind == "list-int":
            n = rng.randint(0, self.list_len_max)
            return [rng.randint(self.int_lo, self.int_hi) for _ in range(n)]
        if kind == "bool":
            return rng.randint(0, 1) == 1
        raise ValueError(f"unknown value kind {kind!r}")

    def value(self, seed: int, kind: str, index: int):
        """Pure function of (seed, kind, index)."""
        return self.draw(kind, Rng(mix64(seed, _P_VALUE, _PROFILE_CODE[kind], index)))


DEFAULT_POOL = RandomPool()


@dataclass(frozen=True)
class WorkabilityReport:
    works: bool
    profile: Optional[str] = None
    probe_inputs: tuple = ()
    probe_outputs: tuple = ()
    failed_criterion: Optional[int] = None


# ---------------------------------------------------------------------------
# generation
#
# Generation is type-directed: an input profile and a root value type are
# drawn first, then instructions are chosen among those whose (fixed, coarse)
# signatures can produce the required type.  Purely type-blind generation
# almost never survives the workability filter at depth, so deep chains --
# the whole point of the study -- would be unreachable without this.

# coarse value types used only to steer generation; 'list' means list-of-int
_GEN_TYPES = ("int", "string", "list-int", "float", "bool")

# (instruction name, argument types, result type); order is fixed
_SIGNATURES = (
    ("neg", ("int",), "int"),
    ("neg", ("float",), "float"),
    ("abs", ("int",), "int"),
    ("abs", ("float",), "float"),
    ("not", ("bool",), "bool"),
    ("upper", ("string",), "string"),
    ("lower", ("string",), "string"),
    ("reverse", ("string",), "string"),
    ("reverse", ("list-int",), "list-int"),
    ("length", ("string",), "int"),
    ("length", ("list-int",), "int"),
    ("head", ("list-int",), "int"),
    ("tail", ("list-int",), "list-int"),
    ("last", ("list-int",), "int"),
    ("sort", ("list-int",), "list-int"),
    ("sum", ("list-int",), "int"),
    ("to_string", ("int",), "string"),
    ("to_string", ("bool",), "string"),
    ("to_int", ("float",), "int"),
    ("range", ("int",), "list-int"),
    ("add", ("int", "int"), "int"),
    ("add", ("float", "float"), "float"),
    ("sub", ("int", "int"), "int"),
    ("sub", ("float", "float"), "float"),
    ("mul", ("int", "int"), "int"),
    ("mul", ("float", "float"), "float"),
    ("div", ("int", "int"), "int"),
    ("div", ("float", "float"), "float"),
    ("mod", ("int", "int"), "int"),
    ("min", ("int", "int"), "int"),
    ("min", ("float", "float"), "float"),
    ("min", ("string", "string"), "string"),
    ("max", ("int", "int"), "int"),
    ("max", ("float", "float"), "float"),
    ("max", ("string", "string"), "string"),
    ("eq", ("int", "int"), "bool"),
    ("eq", ("string", "string"), "bool"),
    ("lt", ("int", "int"), "bool"),
    ("lt", ("float", "float"), "bool"),
    ("lt", ("string", "string"), "bool"),
    ("gt", ("int", "int"), "bool"),
    ("gt", ("string", "string"), "bool"),
    ("concat", ("string", "string"), "string"),
    ("concat", ("list-int", "list-int"), "list-int"),
    ("append", ("list-int", "int"), "list-int"),
    ("nth", ("list-int", "int"), "int"),
    ("if", ("bool", "int", "int"), "int"),
    ("if", ("bool", "string", "string"), "string"),
    ("if", ("bool", "list-int", "list-int"), "list-int"),
    ("if", ("bool", "float", "float"), "float"),
    ("if", ("bool", "bool", "bool"), "bool"),
)


def _producers(table):
    by_type = {t: [] for t in _GEN_TYPES}
    names = {ins.name for ins in table}
    arities = {ins.name: ins.arity for ins in table}
    for name, args, result in _SIGNATURES:
        if name in names and arities[name] == len(args):
            by_type[result].append((name, args))
    return by_type


def _reachable_from(producers, profile):
    """Types whose subtrees can hold a leaf of the profile type."""
    reach = {profile}
    changed = True
    while changed:
        changed = False
        for result, sigs in producers.items():
            if result in reach:
                continue
            for _, args in sigs:
                if any(a in reach for a in args):
                    reach.add(result)
                    changed = True
                    break
    return reach


_DEFAULT_PRODUCERS = _producers(DEFAULT_TABLE)
_DEFAULT_REACHES = {
    p: _reachable_from(_DEFAULT_PRODUCERS, p) for p in _GEN_TYPES
}


def _leaf_probability(budget: int) -> float:
    # rises toward 1 as the budget nears exhaustion
    return 1.0 / (1.0 + 2.0 * (budget - 1))


def _composition(total: int, parts: int, rng: Rng):
    """Uniform random composition of `total` into `parts` positive integers."""
    if parts == 1:
        return [total]
    cuts = sorted(rng.sample_indices(total - 1, parts - 1))
    bounds = [0] + [c + 1 for c in cuts] + [total]
    return [bounds[i + 1] - bounds[i] for i in range(parts)]


def _pick_signature(usable, rng):
    # weight toward unary signatures: deeper chains, fewer dead constants
    weights = [3 if len(args) == 1 else 1 for _, args in usable]
    pick = rng.randint(1, sum(weights))
    acc = 0
    for cand, w in zip(usable, weights):
        acc += w
        if pick <= acc:
            return cand
    return usable[-1]


def _gen_node(budget, need, profile, rng, producers, pool, reach, carry,
              is_root=False):
    """Generate one subtree.

    Exactly one subtree per program carries the InputRef (`carry`); at each
    Apply the carrying role is handed to the largest-budget child whose type
    can still lead back to the profile type.  Keeping the single input deep
    on the heaviest path makes long chunk chains separable later.
    """
    usable = [
        (name, args) for name, args in producers[need] if len(args) + 1 <= budget
    ]
    if carry:
        usable = [
            (name, args) for name, args in usable if any(a in reach for a in args)
        ]
    # the root never takes the leaf shortcut: a bare terminal can only be
    # constant or the identity, so it would always fail workability.  The
    # carrying path never takes it either: the input lands as deep as the
    # budget allows, which is what gives long chains their cut points.
    leaf_p = 0.0 if is_root or carry else _leaf_probability(budget)
    if budget == 1 or not usable or rng.random() < leaf_p:
        if carry and need == profile:
            return InputRef()
        return Const(pool.draw(need, rng))
    name, args = _pick_signature(usable, rng)
    parts = _composition(budget - 1, len(args), rng)
    carrier = -1
    if carry:
        eligible = [i for i, t in enumerate(args) if t in reach]
        carrier = max(eligible, key=lambda i: parts[i])
    children = tuple(
        _gen_node(p, t, profile, rng, producers, pool, reach, carry=(i == carrier))
        for i, (p, t) in enumerate(zip(parts, args))
    )
    return Apply(name, children)


def generate_random_program(
    budget: int,
    seed: int,
    table=DEFAULT_TABLE,
    pool: RandomPool = DEFAULT_POOL,
) -> Program:
    """Generate a random program with halstead_length <= budget."""
    if budget < 1:
        raise InvalidBudget(f"budget must be >= 1, got {budget}")
    rng = Rng(mix64(seed, _P_GEN))
    if table is DEFAULT_TABLE:
        producers, reaches = _DEFAULT_PRODUCERS, _DEFAULT_REACHES
    else:
        producers = _producers(table)
        reaches = {p: _reachable_from(producers, p) for p in _GEN_TYPES}
    profile = rng.choice(PROFILES)
    # rooting the tree at the profile type keeps the input reachable from
    # the root, so small budgets are not dominated by constant programs
    return Program(
        _gen_node(budget, profile, profile, rng, producers, pool,
                  reaches[profile], carry=True, is_root=True)
    )


# ---------------------------------------------------------------------------
# workability


def _has_two_distinct(values) -> bool:
    first = values[0]
    return any(not values_equal(v, first) for v in values[1:])


def check_workability(
    program: Program,
    seed: int,
    probes_per_profile: int = 8,
    table=DEFAULT_TABLE,
    pool: RandomPool = DEFAULT_POOL,
    budget: ExecBudget = ExecBudget(),
) -> WorkabilityReport:
    """Apply the six working criteria, trying profiles in fixed order.

    The first passing profile is recorded.  When no profile passes, the
    report carries the failing criterion of the first profile tried.
    """
    first_failure = None
    for profile in PROFILES:
        probe_seed = mix64(seed, _P_PROBE)
        inputs = [pool.value(probe_seed, profile, i) for i in range(probes_per_profile)]
        outputs = []
        failed = None
        for v in inputs:
            try:
                outputs.append(evaluate(program, v, budget, table))
            except (FuelExhausted, WallClockExceeded):
                failed = 6  # not returned within the time budget
                break
            except VmError:
                failed = 2  # an exception was thrown
                break
        if failed is None:
            if not _has_two_distinct(outputs):
                failed = 4  # results always the same
            elif all(values_equal(o, i) for o, i in zip(outputs, inputs)):
                failed = 5  # no result differed from its input
        if failed is None:
            return WorkabilityReport(
                works=True,
                profile=profile,
                probe_inputs=tuple(inputs),
                probe_outputs=tuple(outputs),
            )
        if first_failure is None:
            first_failure = failed
    return WorkabilityReport(works=False, failed_criterion=first_failure)


def generate_working_program(
    budget: int,
    seed: int,
    table=DEFAULT_TABLE,
    pool: RandomPool = DEFAULT_POOL,
    max_attempts: int = 10_000,
    probes_per_profile: int = 8,
    exec_budget: ExecBudget = ExecBudget(),
):
    """Generate-and-filter loop; returns (program, report) or raises."""
    if max_attempts < 1:
        raise ValueError(f"max_attempts must be >= 1, got {max_attempts}")
    for attempt in range(max_attempts):
        attempt_seed = mix64(seed, _P_ATTEMPT, attempt)
        program = generate_random_program(budget, attempt_seed, table, pool)
        report = check_workability(
            program,
            attempt_seed,
            probes_per_profile=probes_per_profile,
            table=table,
            pool=pool,
            budget=exec_budget,
        )
        if report.works:
            return program, report
    raise AttemptsExhausted(
        f"no working program with budget {budget} in {max_attempts} attempts"
    )
