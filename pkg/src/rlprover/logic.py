"""Unification, binary resolution and factoring over first-order clauses."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional, Union

from .syntax import (
    FACTORING,
    RESOLUTION,
    Clause,
    Function,
    Inference,
    Literal,
    Role,
    Term,
    Variable,
    clause_variables,
)

Substitution = dict[str, Term]


def apply(subst: Substitution, obj: Union[Term, Literal, Clause]):
    """Apply ``subst`` simultaneously to a term, literal or clause.

    Applied to a clause, only the literals change; id, order number and
    provenance are kept.
    """
    if not subst:
        return obj
    if isinstance(obj, Variable):
        return subst.get(obj.name, obj)
    if isinstance(obj, Function):
        if not obj.args:
            return obj
        return Function(obj.symbol, tuple(apply(subst, a) for a in obj.args))
    if isinstance(obj, Literal):
        return Literal(obj.positive, apply(subst, obj.atom))
    if isinstance(obj, Clause):
        return replace(obj, literals=tuple(apply(subst, lit) for lit in obj.literals))
    raise TypeError(f"cannot apply a substitution to {type(obj).__name__}")


def _walk(term: Term, bindings: Substitution) -> Term:
    while isinstance(term, Variable) and term.name in bindings:
        term = bindings[term.name]
    return term


def _occurs(name: str, term: Term, bindings: Substitution) -> bool:
    stack = [term]
    while stack:
        t = _walk(stack.pop(), bindings)
        if isinstance(t, Variable):
            if t.name == name:
                return True
        else:
            stack.extend(t.args)
    return False


def _resolve_fully(term: Term, bindings: Substitution) -> Term:
    term = _walk(term, bindings)
    if isinstance(term, Variable) or not term.args:
        return term
    return Function(term.symbol, tuple(_resolve_fully(a, bindings) for a in term.args))


def unify(a: Term, b: Term) -> Optional[Substitution]:
    """Most general unifier of two terms (or two atoms), or None.

    The result is idempotent: no bound variable occurs in any binding.
    """
    bindings: Substitution = {}
    stack = [(a, b)]
    while stack:
        s, t = stack.pop()
        s = _walk(s, bindings)
        t = _walk(t, bindings)
        if s == t:
            continue
        if isinstance(s, Variable):
            if _occurs(s.name, t, bindings):
                return None
            bindings[s.name] = t
        elif isinstance(t, Variable):
            if _occurs(t.name, s, bindings):
                return None
            bindings[t.name] = s
        else:
            if s.symbol != t.symbol or len(s.args) != len(t.args):
                return None
            stack.extend(zip(reversed(s.args), reversed(t.args)))
    return {name: _resolve_fully(term, bindings) for name, term in bindings.items()}


def _fresh_names(count: int, avoid: set[str]) -> list[str]:
    names = []
    k = 0
    while len(names) < count:
        candidate = f"X{k}"
        if candidate not in avoid:
            names.append(candidate)
        k += 1
    return names


def rename_apart(clause: Clause, reserved: Iterable[str]) -> Clause:
    """A variant of ``clause`` sharing no variable with ``reserved``.

    Clauses already disjoint from ``reserved`` come back unchanged; otherwise
    every variable is renamed, in first-occurrence order, to X0, X1, ...
    skipping reserved names.
    """
    reserved = set(reserved)
    variables = list(clause_variables(clause))
    if reserved.isdisjoint(variables):
        return clause
    fresh = _fresh_names(len(variables), reserved)
    return apply({old: Variable(new) for old, new in zip(variables, fresh)}, clause)


def _derived(literals, rule: str, parents: tuple[int, ...]) -> Clause:
    return Clause(literals=tuple(literals), role=Role.DERIVED, inference=Inference(rule, parents))


def resolve(c1: Clause, i: int, c2: Clause, j: int) -> Optional[Clause]:
    """Binary resolvent of ``c1`` on literal i with ``c2`` on literal j.

    The parents must be variable-disjoint. Literal order is the rest of c1
    followed by the rest of c2; duplicate literals are kept.
    """
    l1, l2 = c1.literals[i], c2.literals[j]
    if l1.positive == l2.positive:
        return None
    if l1.atom.symbol != l2.atom.symbol or len(l1.atom.args) != len(l2.atom.args):
        return None
    sigma = unify(l1.atom, l2.atom)
    if sigma is None:
        return None
    rest = c1.literals[:i] + c1.literals[i + 1:] + c2.literals[:j] + c2.literals[j + 1:]
    return _derived((apply(sigma, lit) for lit in rest), RESOLUTION, (c1.id, c2.id))


def factor(c: Clause, i: int, j: int) -> Optional[Clause]:
    if not i < j:
        raise ValueError(f"factor needs i < j, got {i}, {j}")
    li, lj = c.literals[i], c.literals[j]
    if li.positive != lj.positive:
        return None
    sigma = unify(li.atom, lj.atom)
    if sigma is None:
        return None
    rest = c.literals[:j] + c.literals[j + 1:]
    return _derived((apply(sigma, lit) for lit in rest), FACTORING, (c.id,))


def is_tautology(clause: Clause) -> bool:
    positive = {lit.atom for lit in clause.literals if lit.positive}
    return any(not lit.positive and lit.atom in positive for lit in clause.literals)


def merge_duplicates(clause: Clause) -> Clause:
    """Drop repeated identical literals, keeping the first occurrence."""
    unique = tuple(dict.fromkeys(clause.literals))
    if len(unique) == len(clause.literals):
        return clause
    return replace(clause, literals=unique)


def canonical_key(clause: Clause) -> tuple:
    """Literals with variables renamed by first occurrence; equal keys mean variants."""
    variables = clause_variables(clause)
    if not variables:
        return clause.literals
    renaming = {name: Variable(f"_{k}") for k, name in enumerate(variables)}
    return tuple(apply(renaming, lit) for lit in clause.literals)


def generate_inferences(given: Clause, partners: list[Clause]) -> list[Clause]:
    """All resolvents of ``given`` with each partner, then all factors of ``given``.

    A partner that is the given clause itself (same id) is resolved against a
    renamed copy. Repeated identical literals are merged in every output;
    tautologies and variants of partners or of earlier outputs are dropped.
    """
    given_vars = clause_variables(given)
    candidates: list[Clause] = []
    for partner in partners:
        other = rename_apart(partner, given_vars)
        for i, lit in enumerate(given.literals):
            for j, plit in enumerate(other.literals):
                if lit.positive == plit.positive or lit.atom.symbol != plit.atom.symbol:
                    continue
                resolvent = resolve(given, i, other, j)
                if resolvent is not None:
                    candidates.append(resolvent)
    n = len(given.literals)
    for i in range(n):
        for j in range(i + 1, n):
            f = factor(given, i, j)
            if f is not None:
                candidates.append(f)

    seen = {canonical_key(p) for p in partners}
    out = []
    for clause in candidates:
        if is_tautology(clause):
            continue
        clause = merge_duplicates(clause)
        key = canonical_key(clause)
        if key in seen:
            continue
        seen.add(key)
        out.append(clause)
    return out


def saturate(clauses: list[Clause], max_steps: int = 10_000) -> Optional[bool]:
    """Oldest-first given-clause loop.

    Returns True if the empty clause is derived, False if the clause set
    saturates without it, None if ``max_steps`` runs out first.
    """
    pool = [replace(c, id=k, order_number=k, processed=False) for k, c in enumerate(clauses)]
    if any(c.is_empty for c in pool):
        return True
    known = {canonical_key(c) for c in pool}
    processed: list[Clause] = []
    cursor = 0
    for _ in range(max_steps):
        if cursor >= len(pool):
            return False
        given = pool[cursor]
        cursor += 1
        processed.append(given)
        for new in generate_inferences(given, processed):
            key = canonical_key(new)
            if key in known:
                continue
            known.add(key)
            new.id = new.order_number = len(pool)
            pool.append(new)
            if new.is_empty:
                return True
    return None
