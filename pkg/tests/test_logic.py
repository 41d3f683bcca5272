import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_ground_set, random_term, satisfies, textual_substitute, truth_table_unsat, variant_shape
from rlprover.logic import (
    apply,
    canonical_key,
    factor,
    generate_inferences,
    is_tautology,
    rename_apart,
    resolve,
    saturate,
    unify,
)
from rlprover.syntax import Clause, Function, Literal, Variable, clause_variables
from rlprover.tptp import parse_problem

X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")
a, b = Function("a"), Function("b")


def f(*args):
    return Function("f", args)


def g(*args):
    return Function("g", args)


def p(*args):
    return Function("p", args)


def clause(text: str, cid: int = 0) -> Clause:
    c = parse_problem(f"cnf(c, axiom, {text}).").clauses[0]
    c.id = c.order_number = cid
    return c


# -- apply ---------------------------------------------------------------------


def test_apply_basic():
    assert apply({"X": a}, p(X, Y)) == p(a, Y)
    t = g(f(X), Y)
    assert apply({}, t) is t


def test_apply_is_simultaneous():
    subst = {"X": f(Y), "Y": b}
    result = apply(subst, g(X, Y))
    assert result == g(f(Y), b)
    assert str(result) == textual_substitute(str(g(X, Y)), {"X": "f(Y)", "Y": "b"})


def test_apply_to_clause_keeps_metadata():
    c = clause("p(X) | ~q(X, Y)", cid=7)
    out = apply({"X": a}, c)
    assert str(out) == "p(a) | ~q(a,Y)"
    assert (out.id, out.order_number, out.inference, out.label) == (7, 7, c.inference, c.label)


def test_apply_matches_textual_oracle_on_random_terms():
    rng = random.Random(3)
    for _ in range(300):
        t = random_term(rng, 3)
        subst = {v: random_term(rng, 2) for v in "XY" if rng.random() < 0.7}
        expected = textual_substitute(str(t), {k: str(v) for k, v in subst.items()})
        assert str(apply(subst, t)) == expected


# -- unify ---------------------------------------------------------------------


def test_unify_examples():
    assert unify(p(X), p(a)) == {"X": a}
    assert unify(X, f(X)) is None
    assert unify(p(a), p(b)) is None
    assert unify(f(X), g(X)) is None
    assert unify(X, X) == {}


def _ground_unifiers(s, t, universe):
    names = sorted(set(clause_variables(Clause((Literal(True, Function("w", (s, t))),)))))
    for values in itertools.product(universe, repeat=len(names)):
        theta = dict(zip(names, values))
        if apply(theta, s) == apply(theta, t):
            yield theta


def test_unify_nested_is_most_general():
    s, t = p(X, f(Y)), p(g(Z), f(Z))
    sigma = unify(s, t)
    assert sigma is not None
    assert apply(sigma, s) == apply(sigma, t)
    # Every ground unifier from a bounded universe is an instance of sigma.
    universe = [a, b, f(a), g(b)]
    found = list(_ground_unifiers(s, t, universe))
    assert found
    for theta in found:
        for v in "XYZ":
            assert apply(theta, apply(sigma, Variable(v))) == apply(theta, Variable(v))


def test_unify_result_is_idempotent_and_has_no_trivial_bindings():
    sigma = unify(p(X, Y, Z), p(Y, Z, f(a)))
    assert apply(sigma, p(X, Y, Z)) == apply(sigma, p(Y, Z, f(a)))
    for name, term in sigma.items():
        assert term != Variable(name)
        assert apply(sigma, term) == term


def _terms(depth=2):
    leaves = st.sampled_from([X, Y, Z, a, b])
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(lambda x: Function("f", (x,)), inner),
            st.builds(lambda x, y: Function("g", (x, y)), inner, inner),
        ),
        max_leaves=6,
    )


@settings(max_examples=300, deadline=None)
@given(_terms(), _terms())
def test_unify_laws(s, t):
    sigma = unify(s, t)
    tau = unify(t, s)
    assert (sigma is None) == (tau is None)
    if sigma is None:
        return
    assert apply(sigma, s) == apply(sigma, t)
    for term in sigma.values():
        assert apply(sigma, term) == term
    lhs = Clause((Literal(True, Function("w", (apply(sigma, s),))),))
    rhs = Clause((Literal(True, Function("w", (apply(tau, t),))),))
    assert canonical_key(lhs) == canonical_key(rhs)


# -- rename_apart --------------------------------------------------------------


def test_rename_apart_examples():
    out = rename_apart(clause("p(X)"), {"X"})
    assert str(out) == "p(X0)"
    ground = clause("p(a) | ~q(b)")
    assert rename_apart(ground, {"X", "Y"}) is ground
    out = rename_apart(clause("p(X) | q(Y)"), {"X", "Y", "X0"})
    assert set(clause_variables(out)).isdisjoint({"X", "Y", "X0"})
    assert variant_shape(out) == variant_shape(clause("p(X) | q(Y)"))
    assert len(clause_variables(out)) == 2


def test_rename_apart_is_deterministic():
    c = clause("p(X, Y) | ~q(Y, Z)")
    assert rename_apart(c, {"Y"}) == rename_apart(c, {"Y"})


# -- resolve / factor ----------------------------------------------------------


def test_resolve_examples():
    empty = resolve(clause("p(X)", 0), 0, clause("~p(a)", 1), 0)
    assert empty is not None and empty.is_empty
    assert empty.inference.rule == "resolution" and empty.inference.parents == (0, 1)
    out = resolve(clause("p(X) | q(X)", 0), 0, clause("~p(a) | r(b)", 1), 0)
    assert str(out) == "q(a) | r(b)"
    assert resolve(clause("p(a)"), 0, clause("p(a)"), 0) is None
    assert resolve(clause("p(a)"), 0, clause("~q(a)"), 0) is None
    assert resolve(clause("p(a)"), 0, clause("~p(b)"), 0) is None


def test_resolve_keeps_duplicates_and_order():
    out = resolve(clause("q | p", 0), 1, clause("~p | q", 1), 0)
    assert str(out) == "q | q"


def test_factor_examples():
    out = factor(clause("p(X) | p(a)", 3), 0, 1)
    assert str(out) == "p(a)"
    assert out.inference.rule == "factoring" and out.inference.parents == (3,)
    assert factor(clause("p(a) | ~p(a)"), 0, 1) is None
    out = factor(clause("p(X, Y) | p(Y, X)"), 0, 1)
    assert variant_shape(out) == variant_shape(clause("p(Y, Y)"))
    with pytest.raises(ValueError):
        factor(clause("p(X) | p(Y)"), 1, 0)


def test_resolution_soundness_on_random_ground_clauses():
    rng = random.Random(11)
    checked = 0
    for _ in range(400):
        c1 = random_ground_set(rng, max_clauses=1)[0]
        c2 = random_ground_set(rng, max_clauses=1)[0]
        for i, j in itertools.product(range(len(c1)), range(len(c2))):
            res = resolve(c1, i, c2, j)
            if res is None:
                continue
            atoms = sorted({lit.atom for c in (c1, c2) for lit in c.literals}, key=str)
            for values in itertools.product((False, True), repeat=len(atoms)):
                model = dict(zip(atoms, values))
                if satisfies(model, c1) and satisfies(model, c2):
                    assert satisfies(model, res)
            checked += 1
    assert checked > 50


# -- tautology -----------------------------------------------------------------


def test_is_tautology_examples():
    assert is_tautology(clause("p(X) | ~p(X)"))
    assert not is_tautology(clause("p(X) | ~p(Y)"))
    assert not is_tautology(Clause(()))


# -- generate_inferences -------------------------------------------------------


def test_generate_examples():
    out = generate_inferences(clause("p(a)", 0), [clause("~p(a)", 1)])
    assert len(out) == 1 and out[0].is_empty
    assert generate_inferences(clause("p(X)", 0), [clause("q(a)", 1)]) == []


def _brute_force_generate(given, partners):
    """Every rule application by plain enumeration, then filtering."""
    raw = []
    for partner in partners:
        other = rename_apart(partner, clause_variables(given))
        for i in range(len(given)):
            for j in range(len(other)):
                r = resolve(given, i, other, j)
                if r is not None:
                    raw.append(r)
    for i, j in itertools.combinations(range(len(given)), 2):
        r = factor(given, i, j)
        if r is not None:
            raw.append(r)
    seen = {variant_shape(c) for c in partners}
    out = []
    for r in raw:
        if is_tautology(r):
            continue
        r = Clause(tuple(dict.fromkeys(r.literals)), inference=r.inference)
        if variant_shape(r) not in seen:
            seen.add(variant_shape(r))
            out.append(variant_shape(r))
    return out


def test_generate_self_factoring_example():
    given = clause("p(X) | p(Y)", 0)
    out = generate_inferences(given, [given])
    assert [variant_shape(c) for c in out] == [variant_shape(clause("p(Y)"))]
    assert out[0].inference.rule == "factoring"
    assert [variant_shape(c) for c in out] == _brute_force_generate(given, [given])


def test_generate_matches_brute_force_on_random_clauses():
    rng = random.Random(5)
    preds = [("p", 1), ("q", 2), ("r", 0)]
    for _ in range(200):
        def rand_clause(cid):
            lits = []
            for _ in range(rng.randint(1, 3)):
                name, arity = rng.choice(preds)
                args = tuple(random_term(rng, 1) for _ in range(arity))
                lits.append(Literal(rng.random() < 0.5, Function(name, args)))
            return Clause(tuple(lits), id=cid, order_number=cid)

        given = rand_clause(0)
        partners = [rand_clause(k) for k in range(1, rng.randint(1, 4))] + [given]
        out = generate_inferences(given, partners)
        assert [variant_shape(c) for c in out] == _brute_force_generate(given, partners)
        assert out == generate_inferences(given, partners)


def test_generate_drops_variants_of_partners():
    given = clause("~p(X) | q(X)", 0)
    partners = [clause("p(Y)", 1), clause("q(Z)", 2), given]
    assert generate_inferences(given, partners) == []


# -- saturation agrees with truth tables -----------------------------------------


def test_saturation_agrees_with_truth_table():
    rng = random.Random(2024)
    outcomes = set()
    for _ in range(500):
        clauses = random_ground_set(rng)
        result = saturate(clauses, max_steps=10_000)
        assert result is not None
        assert result == truth_table_unsat(clauses)
        outcomes.add(result)
    assert outcomes == {True, False}
