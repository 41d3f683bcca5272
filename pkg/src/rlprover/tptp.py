"""Reader and writer for the CNF fragment of the TPTP language.

Only ``cnf(...)`` statements and ``include('...')`` directives are accepted.
Anything that would need a clausifier (``fof``, ``tff``, ...) is rejected.
"""

from __future__ import annotations

from typing import Callable, Optional

from .syntax import (
    Clause,
    ClauseSet,
    Function,
    Inference,
    Literal,
    Role,
    Term,
    Variable,
    quote_name,
)

IncludeResolver = Callable[[str], str]

_INPUT_ROLES = {r.value: r for r in Role if r is not Role.DERIVED}
_NON_CNF = {"fof", "tff", "thf", "tcf", "tpi"}
_WORD_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


class TptpError(ValueError):
    """Any problem loading TPTP text. Always carries a source position."""

    def __init__(self, message: str, line: int, column: int, source: str = "<input>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.source = source


class TptpSyntaxError(TptpError):
    pass


class UnsupportedStatementError(TptpError):
    pass


class IncludeError(TptpError):
    pass


class SignatureError(TptpError):
    pass


class _Builder:
    """State shared by a problem file and everything it includes."""

    def __init__(self, resolver: Optional[IncludeResolver]):
        self.resolver = resolver
        self.clauses: list[Clause] = []
        self.signature: dict[tuple[str, int], str] = {}
        self.has_equality = False
        self.include_stack: list[str] = []


class _Parser:
    def __init__(self, text: str, source: str, builder: _Builder):
        self.text = text
        self.pos = 0
        self.source = source
        self.builder = builder

    # -- positions and errors -------------------------------------------------

    def _line_col(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        return line, pos - (self.text.rfind("\n", 0, pos) + 1) + 1

    def error(self, message: str, pos: Optional[int] = None, cls: type = TptpSyntaxError):
        line, col = self._line_col(self.pos if pos is None else pos)
        return cls(message, line, col, self.source)

    # -- lexical helpers ------------------------------------------------------

    def skip_ws(self) -> None:
        text, n = self.text, len(self.text)
        while self.pos < n:
            ch = text[self.pos]
            if ch in " \t\r\n\f":
                self.pos += 1
            elif ch == "%":
                end = text.find("\n", self.pos)
                self.pos = n if end < 0 else end + 1
            elif text.startswith("/*", self.pos):
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    raise self.error("unterminated block comment")
                self.pos = end + 2
            else:
                break

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.peek() == ""

    def expect(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
            raise self.error(f"expected '{token}', found '{found}'")
        self.pos += len(token)

    def accept(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def word(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _WORD_CHARS:
            self.pos += 1
        return self.text[start:self.pos]

    def quoted(self) -> str:
        start = self.pos
        self.pos += 1
        chars = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated quoted atom", start)
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text) or self.text[self.pos + 1] not in "\\'":
                    raise self.error("invalid escape in quoted atom")
                chars.append(self.text[self.pos + 1])
                self.pos += 2
            elif ch == "'":
                self.pos += 1
                break
            elif ch == "\n":
                raise self.error("newline inside quoted atom")
            else:
                chars.append(ch)
                self.pos += 1
        if not chars:
            raise self.error("empty quoted atom", start)
        return "".join(chars)

    def functor(self) -> str:
        """A lower word or single-quoted atom."""
        ch = self.peek()
        if ch == "'":
            return self.quoted()
        if ch.islower() and ch.isascii():
            return self.word()
        if ch == "$":
            start = self.pos
            self.pos += 1
            raise self.error(f"unsupported token '${self.word()}'", start)
        if ch == "":
            raise self.error("unexpected end of input")
        raise self.error(f"expected a symbol, found '{ch}'")

    def name(self) -> str:
        ch = self.peek()
        if ch.isdigit():
            return self.word()
        return self.functor()

    # -- grammar --------------------------------------------------------------

    def problem(self) -> None:
        while not self.at_end():
            start = self.pos
            if not self.peek().isalpha():
                raise self.error(f"expected a statement, found '{self.peek()}'")
            keyword = self.word()
            if keyword == "cnf":
                self.cnf_annotated()
            elif keyword == "include":
                self.include(start)
            elif keyword in _NON_CNF:
                raise self.error(
                    f"'{keyword}' statements need clausification, which is not supported; "
                    "supply problems in CNF",
                    start,
                    UnsupportedStatementError,
                )
            else:
                raise self.error(f"unknown statement '{keyword}'", start)

    def include(self, start: int) -> None:
        self.expect("(")
        if self.peek() != "'":
            raise self.error("include expects a single-quoted file name")
        target = self.quoted()
        self.expect(")")
        self.expect(".")
        b = self.builder
        if target in b.include_stack:
            raise self.error(f"cyclic include of '{target}'", start, IncludeError)
        if b.resolver is None:
            raise self.error(f"cannot resolve include '{target}': no resolver", start, IncludeError)
        try:
            text = b.resolver(target)
        except (OSError, KeyError, LookupError) as exc:
            raise self.error(f"cannot resolve include '{target}': {exc}", start, IncludeError) from exc
        b.include_stack.append(target)
        try:
            _Parser(text, target, b).problem()
        finally:
            b.include_stack.pop()

    def cnf_annotated(self) -> None:
        self.expect("(")
        label = self.name()
        self.expect(",")
        self.skip_ws()
        role_pos = self.pos
        role_word = self.word()
        if role_word not in _INPUT_ROLES:
            raise self.error(f"unsupported role '{role_word}'", role_pos)
        self.expect(",")
        if self.accept("("):
            literals = self.disjunction()
            self.expect(")")
        else:
            literals = self.disjunction()
        if self.accept(","):
            self.skip_annotations()
        self.expect(")")
        self.expect(".")
        n = len(self.builder.clauses)
        self.builder.clauses.append(
            Clause(
                literals=tuple(literals),
                id=n,
                label=label,
                role=_INPUT_ROLES[role_word],
                order_number=n,
                inference=Inference(),
            )
        )

    def skip_annotations(self) -> None:
        depth = 0
        while True:
            ch = self.peek()
            if ch == "":
                raise self.error("unexpected end of input in annotations")
            if ch == "'" or ch == '"':
                self._skip_string(ch)
                continue
            if ch in "([":
                depth += 1
            elif ch in ")]":
                if depth == 0:
                    return
                depth -= 1
            self.pos += 1

    def _skip_string(self, quote: str) -> None:
        start = self.pos
        self.pos += 1
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            self.pos += 1
            if ch == quote:
                return
        raise self.error("unterminated string", start)

    def disjunction(self) -> list[Literal]:
        literals = [self.literal()]
        while self.accept("|"):
            literals.append(self.literal())
        return literals

    def literal(self) -> Literal:
        if self.accept("~"):
            self.skip_ws()
            start = self.pos
            atom = self.atom_term()
            if self.peek() in ("=", "!"):
                raise self.error("negated equality must be written with '!='")
            return Literal(False, self.register_atom(atom, start))
        self.skip_ws()
        start = self.pos
        left = self.term(declare=False)
        for token, positive in (("!=", False), ("=", True)):
            if self.accept(token):
                if isinstance(left, Function):
                    self.declare(left.symbol, len(left.args), "function", start)
                return Literal(positive, self.equality(left, self.term()))
        if isinstance(left, Variable):
            raise self.error(f"variable '{left.name}' used as a literal", start)
        return Literal(True, self.register_atom(left, start))

    def equality(self, left: Term, right: Term) -> Function:
        self.builder.has_equality = True
        return Function("=", (left, right))

    def atom_term(self) -> Function:
        symbol = self.functor()
        return Function(symbol, self.arguments())

    def term(self, declare: bool = True) -> Term:
        ch = self.peek()
        if ch == "_" or (ch.isupper() and ch.isascii()):
            return Variable(self.word())
        start = self.pos
        symbol = self.functor()
        term = Function(symbol, self.arguments())
        if declare:
            self.declare(symbol, len(term.args), "function", start)
        return term

    def arguments(self) -> tuple[Term, ...]:
        self.skip_ws()
        if not self.text.startswith("(", self.pos):
            return ()
        self.pos += 1
        args = [self.term()]
        while self.accept(","):
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def register_atom(self, atom: Function, pos: int) -> Function:
        self.declare(atom.symbol, len(atom.args), "predicate", pos)
        return atom

    def declare(self, symbol: str, arity: int, kind: str, pos: int) -> None:
        sig = self.builder.signature
        key = (symbol, arity)
        known = sig.get(key)
        if known is None:
            sig[key] = kind
        elif known != kind:
            raise self.error(
                f"symbol '{symbol}/{arity}' used as both {known} and {kind}", pos, SignatureError
            )


def parse_problem(
    text: str,
    include_resolver: Optional[IncludeResolver] = None,
    source: str = "<input>",
) -> ClauseSet:
    """Parse CNF problem text into a ClauseSet with ids 0, 1, 2, ... in file order."""
    builder = _Builder(include_resolver)
    parser = _Parser(text, source, builder)
    parser.problem()
    return ClauseSet(builder.clauses, builder.signature, builder.has_equality)


def serialize_clause(clause: Clause) -> str:
    label = clause.label or f"c{clause.id}"
    role = clause.role.value if isinstance(clause.role, Role) else str(clause.role)
    return f"cnf({quote_name(label)}, {role}, {clause})."


def serialize_problem(clauses) -> str:
    return "".join(serialize_clause(c) + "\n" for c in clauses)
