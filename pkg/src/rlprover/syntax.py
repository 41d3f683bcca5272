"""First-order syntax objects: terms, literals, clauses and clause sets."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

_LOWER_WORD = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_INTEGER = re.compile(r"[0-9]+\Z")


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Function:
    """A function application; constants have no args. Atoms reuse this class."""

    symbol: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        head = quote_atom(self.symbol)
        if not self.args:
            return head
        return f"{head}({','.join(str(a) for a in self.args)})"


Term = Union[Variable, Function]


def quote_atom(symbol: str) -> str:
    if _LOWER_WORD.match(symbol):
        return symbol
    escaped = symbol.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def quote_name(name: str) -> str:
    if _INTEGER.match(name):
        return name
    return quote_atom(name)


@dataclass(frozen=True, slots=True)
class Literal:
    positive: bool
    atom: Function

    @property
    def predicate(self) -> str:
        return self.atom.symbol

    @property
    def is_equality(self) -> bool:
        return self.atom.symbol == "=" and len(self.atom.args) == 2

    def negated(self) -> Literal:
        return Literal(not self.positive, self.atom)

    def __str__(self) -> str:
        if self.is_equality:
            left, right = self.atom.args
            return f"{left} {'=' if self.positive else '!='} {right}"
        return str(self.atom) if self.positive else f"~{self.atom}"


class Role(str, enum.Enum):
    AXIOM = "axiom"
    HYPOTHESIS = "hypothesis"
    NEGATED_CONJECTURE = "negated_conjecture"
    CONJECTURE = "conjecture"
    LEMMA = "lemma"
    PLAIN = "plain"
    DERIVED = "derived"


INPUT = "input"
RESOLUTION = "resolution"
FACTORING = "factoring"


@dataclass(frozen=True, slots=True)
class Inference:
    """How a clause came to be: ``input`` or a rule name with parent ids."""

    rule: str = INPUT
    parents: tuple[int, ...] = ()

    @property
    def is_input(self) -> bool:
        return self.rule == INPUT


@dataclass(slots=True)
class Clause:
    literals: tuple[Literal, ...]
    id: int = 0
    label: str = ""
    role: Role = Role.DERIVED
    order_number: int = 0
    inference: Inference = field(default_factory=Inference)
    processed: bool = False

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def size(self) -> int:
        """Total symbol occurrences: predicates, functions, constants, variables."""
        return sum(term_size(lit.atom) for lit in self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __str__(self) -> str:
        if not self.literals:
            return "$false"
        return " | ".join(str(lit) for lit in self.literals)


@dataclass
class ClauseSet:
    clauses: list[Clause]
    signature: dict[tuple[str, int], str] = field(default_factory=dict)
    has_equality: bool = False

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)


def term_size(term: Term) -> int:
    if isinstance(term, Variable):
        return 1
    return 1 + sum(term_size(a) for a in term.args)


def term_variables(term: Term, out: dict[str, None] | None = None) -> dict[str, None]:
    """Variable names of ``term`` in first-occurrence order (dict used as ordered set)."""
    if out is None:
        out = {}
    if isinstance(term, Variable):
        out.setdefault(term.name)
    else:
        for arg in term.args:
            term_variables(arg, out)
    return out


def clause_variables(clause: Clause) -> dict[str, None]:
    out: dict[str, None] = {}
    for lit in clause.literals:
        term_variables(lit.atom, out)
    return out


def is_ground(clause: Clause) -> bool:
    return not clause_variables(clause)
