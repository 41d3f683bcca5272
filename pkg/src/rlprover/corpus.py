"""Synthetic CNF problems with a known refutation."""

from __future__ import annotations

import random
from pathlib import Path


def gen_chain(n: int, d: int = 0, seed: int = 0) -> str:
    """Implication chain p1, p1 -> p2, ..., p(n-1) -> pn, ~pn plus ``d`` distractors.

    Distractors are ground unit clauses over fresh predicates, so they never
    take part in a refutation. The seed fixes their shapes and where they are
    interleaved; the chain clauses keep their relative order.
    """
    if n < 1:
        raise ValueError("chain length must be at least 1")
    if d < 0:
        raise ValueError("distractor count must be non-negative")
    rng = random.Random(seed)
    chain = [f"cnf(chain_1, axiom, p1)."]
    chain += [f"cnf(chain_{i + 1}, axiom, ~p{i} | p{i + 1})." for i in range(1, n)]
    chain.append(f"cnf(goal, negated_conjecture, ~p{n}).")

    distractors = []
    for k in range(1, d + 1):
        arity = rng.randint(0, 2)
        args = ",".join(f"c{rng.randint(1, 3)}" for _ in range(arity))
        atom = f"q{k}({args})" if arity else f"q{k}"
        distractors.append(f"cnf(distractor_{k}, axiom, {atom}).")

    lines = list(chain)
    for clause in distractors:
        lines.insert(rng.randint(0, len(lines)), clause)
    header = f"% chain n={n} distractors={d} seed={seed}\n"
    return header + "\n".join(lines) + "\n"


def chain_filename(n: int, d: int, seed: int) -> str:
    return f"chain_n{n}_d{d}_s{seed}.p"


def write_chain(directory, n: int, d: int, seed: int) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / chain_filename(n, d, seed)
    path.write_text(gen_chain(n, d, seed), encoding="utf-8")
    return path


def chain_corpus(count: int, n_range=(5, 10), d_range=(4, 8), seed: int = 0) -> dict[str, str]:
    """``count`` chain problems with n and d drawn uniformly from inclusive ranges."""
    rng = random.Random(seed)
    problems = {}
    for k in range(count):
        n = rng.randint(*n_range)
        d = rng.randint(*d_range)
        problems[f"chain{k:03d}_n{n}_d{d}"] = gen_chain(n, d, rng.randrange(2**32))
    return problems
