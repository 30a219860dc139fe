"""Expression VM: values, instruction table, interpreter, metrics, serialization.

Programs are immutable expression trees over a single input variable ``x``.
Runtime values are dynamically typed: null, bool, int, float, str, or a
(possibly nested) list of values.  Evaluation is fuel-bounded so that
expensive list computations fail deterministically, with a wall-clock cap
as a safety net.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import (
    ArityMismatch,
    DivisionByZero,
    FuelExhausted,
    IndexOutOfRange,
    NegativeRange,
    ProgramSyntaxError,
    TypeMismatch,
    UnknownInstruction,
    VmError,
    WallClockExceeded,
)

# ---------------------------------------------------------------------------
# values

Value = Any  # None | bool | int | float | str | list[Value]


def is_number(v) -> bool:
    """True for int/float; bools are not numbers."""
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def values_equal(a, b) -> bool:
    """Deep structural equality with strict types: 1 != 1.0, 1 != True."""
    if type(a) is not type(b):
        return False
    if isinstance(a, list):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    return a == b


def value_key(v):
    """Hashable canonical key distinguishing values that differ structurally.

    Encoding is chosen for speed on the synthesis hot path: bare ints and
    hex strings for the common scalars, tagged tuples for everything else,
    with tags arranged so no two types can collide.
    """
    t = type(v)
    if t is int:
        return v
    if t is str:
        return ("s", v)
    if t is bool:
        return (1, v)
    if t is float:
        return v.hex()
    if v is None:
        return (0,)
    if t is list:
        return ("l",) + tuple(value_key(e) for e in v)
    raise TypeError(f"not a runtime value: {v!r}")


def is_valid_value(v) -> bool:
    if v is None or isinstance(v, (bool, int, float, str)):
        return True
    if isinstance(v, list):
        return all(is_valid_value(e) for e in v)
    return False


# ---------------------------------------------------------------------------
# AST nodes


@dataclass(frozen=True)
class InputRef:
    """The single input variable, spelled ``x``."""

    def __repr__(self):
        return "InputRef()"


@dataclass(frozen=True, eq=False)
class Const:
    value: Value

    def __eq__(self, other):
        return isinstance(other, Const) and values_equal(self.value, other.value)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Apply:
    name: str
    children: tuple

    def __eq__(self, other):
        return (
            isinstance(other, Apply)
            and self.name == other.name
            and len(self.children) == len(other.children)
            and all(a == b for a, b in zip(self.children, other.children))
        )

    __hash__ = None


Node = Any  # InputRef | Const | Apply


@dataclass(frozen=True, eq=False)
class Program:
    root: Node
    name: Optional[str] = None

    def __eq__(self, other):
        # structural equality on the tree; the optional name is metadata
        return isinstance(other, Program) and self.root == other.root

    __hash__ = None


def node_count(node) -> int:
    if isinstance(node, Apply):
        return 1 + sum(node_count(c) for c in node.children)
    return 1


def halstead_length(program: Program) -> int:
    """Operators plus operands, i.e. the total node count of the tree."""
    return node_count(program.root)


def count_input_refs(node) -> int:
    if isinstance(node, InputRef):
        return 1
    if isinstance(node, Apply):
        return sum(count_input_refs(c) for c in node.children)
    return 0


# ---------------------------------------------------------------------------
# execution budget and fuel metering


@dataclass(frozen=True)
class ExecBudget:
    fuel: int = 1_000_000
    wall_clock_ms: int = 200

    def __post_init__(self):
        if self.fuel <= 0 or self.wall_clock_ms <= 0:
            raise ValueError("fuel and wall_clock_ms must be positive")


class Meter:
    """Private per-evaluation fuel counter with a wall-clock safety net."""

    __slots__ = ("fuel", "deadline", "_tick")

    def __init__(self, fuel: int, wall_clock_ms: Optional[int] = None):
        self.fuel = fuel
        self.deadline = (
            None if wall_clock_ms is None else time.monotonic() + wall_clock_ms / 1000.0
        )
        self._tick = 0

    def charge(self, n: int = 1):
        self.fuel -= n
        if self.fuel < 0:
            raise FuelExhausted("evaluation fuel exhausted")
        if self.deadline is not None:
            self._tick += 1
            if self._tick >= 256:
                self._tick = 0
                if time.monotonic() > self.deadline:
                    raise WallClockExceeded("evaluation wall clock exceeded")


# ---------------------------------------------------------------------------
# instruction semantics

Semantics = Callable[[list, Meter], Value]


@dataclass(frozen=True)
class Instruction:
    name: str
    arity: int
    fn: Semantics


def _want_number(v):
    if not is_number(v):
        raise TypeMismatch(f"expected a number, got {type(v).__name__}")
    return v


def _want_list(v):
    if not isinstance(v, list):
        raise TypeMismatch(f"expected a list, got {type(v).__name__}")
    return v


def _want_str(v):
    if not isinstance(v, str):
        raise TypeMismatch(f"expected a string, got {type(v).__name__}")
    return v


def _want_bool(v):
    if not isinstance(v, bool):
        raise TypeMismatch(f"expected a bool, got {type(v).__name__}")
    return v


def _neg(a, m):
    return -_want_number(a[0])


def _abs(a, m):
    return abs(_want_number(a[0]))


def _not(a, m):
    return not _want_bool(a[0])


def _upper(a, m):
    return _want_str(a[0]).upper()


def _lower(a, m):
    return _want_str(a[0]).lower()


def _reverse(a, m):
    v = a[0]
    if isinstance(v, str):
        m.charge(len(v))
        return v[::-1]
    if isinstance(v, list):
        m.charge(len(v))
        return v[::-1]
    raise TypeMismatch("reverse expects a string or list")


def _length(a, m):
    v = a[0]
    if isinstance(v, (str, list)):
        m.charge(len(v))
        return len(v)
    raise TypeMismatch("length expects a string or list")


def _head(a, m):
    v = _want_list(a[0])
    if not v:
        raise IndexOutOfRange("head of empty list")
    return v[0]


def _tail(a, m):
    v = _want_list(a[0])
    if not v:
        raise IndexOutOfRange("tail of empty list")
    return v[1:]


def _last(a, m):
    v = _want_list(a[0])
    if not v:
        raise IndexOutOfRange("last of empty list")
    return v[-1]


def _sort(a, m):
    v = _want_list(a[0])
    m.charge(len(v))
    if all(is_number(e) for e in v) or all(isinstance(e, str) for e in v):
        return sorted(v)
    raise TypeMismatch("sort expects all numbers or all strings")


def _sum(a, m):
    v = _want_list(a[0])
    m.charge(len(v))
    total = 0
    for e in v:
        total = total + _want_number(e)
    return total


def _to_string(a, m):
    v = a[0]
    if isinstance(v, str):
        return v
    if v is None or isinstance(v, (bool, int, float)):
        return _literal_text(v)
    raise TypeMismatch("to_string expects a scalar")


def _to_int(a, m):
    v = a[0]
    if isinstance(v, bool):
        raise TypeMismatch("to_int does not accept bool")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return int(v)  # truncates toward zero
    if isinstance(v, str):
        if re.fullmatch(r"-?\d+", v):
            return int(v)
        raise TypeMismatch(f"to_int cannot parse {v!r}")
    raise TypeMismatch("to_int expects an int, float, or numeric string")


def _range(a, m):
    v = a[0]
    if not isinstance(v, int) or isinstance(v, bool):
        raise TypeMismatch("range expects an int")
    if v < 0:
        raise NegativeRange(f"range of negative int {v}")
    m.charge(v)  # charged before the list is materialized
    return list(range(v))


def _arith(op):
    def fn(a, m):
        x, y = _want_number(a[0]), _want_number(a[1])
        return op(x, y)

    return fn


def _div(a, m):
    x, y = _want_number(a[0]), _want_number(a[1])
    if y == 0:
        raise DivisionByZero("division by zero")
    if isinstance(x, int) and isinstance(y, int):
        q = abs(x) // abs(y)
        return q if (x >= 0) == (y >= 0) else -q
    return x / y


def _mod(a, m):
    x, y = _want_number(a[0]), _want_number(a[1])
    if y == 0:
        raise DivisionByZero("modulo by zero")
    if isinstance(x, int) and isinstance(y, int):
        q = abs(x) // abs(y)
        q = q if (x >= 0) == (y >= 0) else -q
        return x - q * y  # remainder of truncating division
    import math

    return math.fmod(x, y)


def _comparable_pair(x, y):
    if is_number(x) and is_number(y):
        return True
    if isinstance(x, str) and isinstance(y, str):
        return True
    return False


def _min(a, m):
    x, y = a
    if not _comparable_pair(x, y):
        raise TypeMismatch("min expects two numbers or two strings")
    return x if x <= y else y


def _max(a, m):
    x, y = a
    if not _comparable_pair(x, y):
        raise TypeMismatch("max expects two numbers or two strings")
    return x if x >= y else y


def _eq(a, m):
    return values_equal(a[0], a[1])


def _lt(a, m):
    x, y = a
    if not _comparable_pair(x, y):
        raise TypeMismatch("lt expects two numbers or two strings")
    return x < y


def _gt(a, m):
    x, y = a
    if not _comparable_pair(x, y):
        raise TypeMismatch("gt expects two numbers or two strings")
    return x > y


def _concat(a, m):
    x, y = a
    if isinstance(x, str) and isinstance(y, str):
        m.charge(len(x) + len(y))
        return x + y
    if isinstance(x, list) and isinstance(y, list):
        m.charge(len(x) + len(y))
        return x + y
    raise TypeMismatch("concat expects two strings or two lists")


def _append(a, m):
    return _want_list(a[0]) + [a[1]]


def _nth(a, m):
    lst = _want_list(a[0])
    i = a[1]
    if not isinstance(i, int) or isinstance(i, bool):
        raise TypeMismatch("nth index must be an int")
    if i < 0 or i >= len(lst):
        raise IndexOutOfRange(f"nth index {i} out of range for length {len(lst)}")
    return lst[i]


def _if(a, m):
    return a[1] if _want_bool(a[0]) else a[2]


# ---------------------------------------------------------------------------
# instruction table


class InstructionTable:
    """Ordered, immutable instruction set.

    Order is significant: synthesis tie-breaks follow table order, so the
    built-in order below is part of the reproducibility contract.
    """

    def __init__(self, instructions):
        self._list = tuple(instructions)
        self._by_name = {}
        for ins in self._list:
            if ins.name in self._by_name:
                raise ValueError(f"duplicate instruction name {ins.name!r}")
            if ins.arity not in (1, 2, 3):
                raise ValueError(f"unsupported arity {ins.arity} for {ins.name!r}")
            self._by_name[ins.name] = ins

    def __iter__(self):
        return iter(self._list)

    def __len__(self):
        return len(self._list)

    def __contains__(self, name):
        return name in self._by_name

    def get(self, name) -> Instruction:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownInstruction(f"unknown instruction {name!r}") from None

    def extend(self, instructions) -> "InstructionTable":
        return InstructionTable(self._list + tuple(instructions))


def _builtin_instructions():
    import operator

    return [
        Instruction("neg", 1, _neg),
        Instruction("abs", 1, _abs),
        Instruction("not", 1, _not),
        Instruction("upper", 1, _upper),
        Instruction("lower", 1, _lower),
        Instruction("reverse", 1, _reverse),
        Instruction("length", 1, _length),
        Instruction("head", 1, _head),
        Instruction("tail", 1, _tail),
        Instruction("last", 1, _last),
        Instruction("sort", 1, _sort),
        Instruction("sum", 1, _sum),
        Instruction("to_string", 1, _to_string),
        Instruction("to_int", 1, _to_int),
        Instruction("range", 1, _range),
        Instruction("add", 2, _arith(operator.add)),
        Instruction("sub", 2, _arith(operator.sub)),
        Instruction("mul", 2, _arith(operator.mul)),
        Instruction("div", 2, _div),
        Instruction("mod", 2, _mod),
        Instruction("min", 2, _min),
        Instruction("max", 2, _max),
        Instruction("eq", 2, _eq),
        Instruction("lt", 2, _lt),
        Instruction("gt", 2, _gt),
        Instruction("concat", 2, _concat),
        Instruction("append", 2, _append),
        Instruction("nth", 2, _nth),
        Instruction("if", 3, _if),
    ]


DEFAULT_TABLE = InstructionTable(_builtin_instructions())


# ---------------------------------------------------------------------------
# interpreter


def eval_node(node, x, meter: Meter, table: InstructionTable) -> Value:
    meter.charge()
    if isinstance(node, InputRef):
        return x
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Apply):
        ins = table.get(node.name)
        args = [eval_node(c, x, meter, table) for c in node.children]
        return ins.fn(args, meter)
    raise TypeError(f"not an AST node: {node!r}")


def evaluate(
    program: Program,
    input_value: Value,
    budget: ExecBudget = ExecBudget(),
    table: InstructionTable = DEFAULT_TABLE,
) -> Value:
    """Evaluate a program on one input. Raises a VmError subtype on failure."""
    validate_program(program, table)
    meter = Meter(budget.fuel, budget.wall_clock_ms)
    return eval_node(program.root, input_value, meter, table)


def validate_program(program: Program, table: InstructionTable = DEFAULT_TABLE):
    """Check every Apply node against the table name and arity."""

    def walk(node):
        if isinstance(node, Apply):
            ins = table.get(node.name)
            if len(node.children) != ins.arity:
                raise ArityMismatch(
                    f"{node.name} expects {ins.arity} args, got {len(node.children)}"
                )
            for c in node.children:
                walk(c)
        elif not isinstance(node, (InputRef, Const)):
            raise TypeError(f"not an AST node: {node!r}")

    walk(program.root)


# ---------------------------------------------------------------------------
# canonical serialization


def _literal_text(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("non-finite floats have no canonical form")
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, list):
        return "[" + ",".join(_literal_text(e) for e in v) + "]"
    raise TypeError(f"not a runtime value: {v!r}")


def _serialize_node(node) -> str:
    if isinstance(node, InputRef):
        return "x"
    if isinstance(node, Const):
        return _literal_text(node.value)
    if isinstance(node, Apply):
        return node.name + "(" + ",".join(_serialize_node(c) for c in node.children) + ")"
    raise TypeError(f"not an AST node: {node!r}")


def serialize(program: Program) -> str:
    """Canonical compact text form; contains no whitespace."""
    return _serialize_node(program.root)


def size_bytes(program: Program) -> int:
    """UTF-8 byte length of the canonical serialization."""
    return len(serialize(program).encode("utf-8"))


# ---------------------------------------------------------------------------
# parsing

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_STRING_RE = re.compile(r'"(?:[^"\\]|\\.)*"')


class _Parser:
    def __init__(self, text: str, table: InstructionTable):
        self.text = text
        self.pos = 0
        self.table = table

    def fail(self, msg):
        raise ProgramSyntaxError(f"{msg} at position {self.pos}")

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    def parse_expr(self):
        ch = self.peek()
        if ch == "@":
            return self.parse_call(pseudo=True)
        if ch == "[" or ch == '"' or ch == "-" or ch.isdigit():
            return Const(self.parse_literal())
        m = _IDENT_RE.match(self.text, self.pos)
        if not m:
            self.fail("expected an expression")
        name = m.group(0)
        end = m.end()
        if name in ("true", "false", "null"):
            self.pos = end
            return Const({"true": True, "false": False, "null": None}[name])
        if end < len(self.text) and self.text[end] == "(":
            return self.parse_call(pseudo=False)
        if name == "x":
            self.pos = end
            return InputRef()
        self.fail(f"unexpected identifier {name!r}")

    def parse_call(self, pseudo):
        start = self.pos
        if pseudo:
            self.pos += 1
        m = _IDENT_RE.match(self.text, self.pos)
        if not m:
            self.fail("expected an instruction name")
        name = ("@" if pseudo else "") + m.group(0)
        self.pos = m.end()
        if name not in self.table:
            self.pos = start
            raise UnknownInstruction(f"unknown instruction {name!r}")
        ins = self.table.get(name)
        self.expect("(")
        args = [self.parse_expr()]
        while self.peek() == ",":
            self.pos += 1
            args.append(self.parse_expr())
        self.expect(")")
        if len(args) != ins.arity:
            raise ArityMismatch(
                f"{name} expects {ins.arity} args, got {len(args)}"
            )
        return Apply(name, tuple(args))

    def parse_literal(self):
        ch = self.peek()
        if ch == "[":
            self.pos += 1
            if self.peek() == "]":
                self.pos += 1
                return []
            items = [self.parse_literal()]
            while self.peek() == ",":
                self.pos += 1
                items.append(self.parse_literal())
            self.expect("]")
            return items
        if ch == '"':
            m = _STRING_RE.match(self.text, self.pos)
            if not m:
                self.fail("unterminated string literal")
            self.pos = m.end()
            return json.loads(m.group(0))
        if ch == "t" or ch == "f" or ch == "n":
            m = _IDENT_RE.match(self.text, self.pos)
            if m and m.group(0) in ("true", "false", "null"):
                self.pos = m.end()
                return {"true": True, "false": False, "null": None}[m.group(0)]
            self.fail("expected a literal")
        m = _NUMBER_RE.match(self.text, self.pos)
        if not m:
            self.fail("expected a literal")
        tok = m.group(0)
        self.pos = m.end()
        if "." in tok or "e" in tok or "E" in tok:
            return float(tok)
        return int(tok)


def parse(text, table: InstructionTable = DEFAULT_TABLE) -> Program:
    """Parse canonical text back into a Program. Inverse of serialize."""
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8")
    p = _Parser(text, table)
    root = p.parse_expr()
    if p.pos != len(text):
        p.fail("trailing input")
    prog = Program(root)
    validate_program(prog, table)
    return prog


# ---------------------------------------------------------------------------
# tree helpers shared by decomposition and synthesis


def substitute_input(node, replacement) -> Node:
    """Replace every InputRef in `node` with `replacement` (a node)."""
    if isinstance(node, InputRef):
        return replacement
    if isinstance(node, Apply):
        return Apply(node.name, tuple(substitute_input(c, replacement) for c in node.children))
    return node


def replace_by_identity(node, target, replacement) -> Node:
    """Replace the node that *is* `target` (object identity) with `replacement`."""
    if node is target:
        return replacement
    if isinstance(node, Apply):
        return Apply(
            node.name,
            tuple(replace_by_identity(c, target, replacement) for c in node.children),
        )
    return node
