"""Seeded random AST generation shared by property and acceptance tests.

Names are constrained so that every generated formula both survives the
coding validators and round-trips through the printer: variables start
lowercase, predicates start uppercase, and the identifiers the concrete
syntax claims for itself (S, Prov, Con) are avoided.  Box nodes are built
by generating a template first and then attaching one range term per free
template variable, which is exactly the well-formedness the constructor
enforces.
"""

from __future__ import annotations

import random

from yablo.syntax import (
    And,
    Box,
    Eq,
    Exists,
    Falsum,
    ForAll,
    Formula,
    Imp,
    Lt,
    Not,
    Or,
    Plus,
    PredApp,
    Succ,
    Term,
    Times,
    Var,
    Zero,
    free_vars,
    numeral,
)

VARS = ["x", "y", "z", "k", "u", "w0"]
PREDS = [("P", 0), ("Q", 1), ("R", 2), ("YJ", 1)]


def rand_term(rng: random.Random, depth: int, scope: list[str]) -> Term:
    pool = scope or VARS
    if depth <= 0:
        return rng.choice([Zero(), numeral(rng.randrange(0, 9)), Var(rng.choice(pool))])
    pick = rng.randrange(6)
    if pick == 0:
        return Zero()
    if pick == 1:
        return numeral(rng.randrange(0, 33))
    if pick == 2:
        return Var(rng.choice(pool))
    if pick == 3:
        return Succ(rand_term(rng, depth - 1, scope))
    if pick == 4:
        return Plus(rand_term(rng, depth - 1, scope), rand_term(rng, depth - 1, scope))
    return Times(rand_term(rng, depth - 1, scope), rand_term(rng, depth - 1, scope))


def rand_formula(rng: random.Random, depth: int, scope: list[str] | None = None) -> Formula:
    scope = scope if scope is not None else []
    if depth <= 0:
        pick = rng.randrange(4)
        if pick == 0:
            return Falsum()
        if pick == 1:
            return Eq(rand_term(rng, 1, scope), rand_term(rng, 1, scope))
        if pick == 2:
            return Lt(rand_term(rng, 1, scope), rand_term(rng, 1, scope))
        name, arity = rng.choice(PREDS)
        return PredApp(name, tuple(rand_term(rng, 1, scope) for _ in range(arity)))
    pick = rng.randrange(8)
    if pick == 0:
        return Not(rand_formula(rng, depth - 1, scope))
    if pick == 1:
        return Imp(rand_formula(rng, depth - 1, scope), rand_formula(rng, depth - 1, scope))
    if pick == 2:
        return And(rand_formula(rng, depth - 1, scope), rand_formula(rng, depth - 1, scope))
    if pick == 3:
        return Or(rand_formula(rng, depth - 1, scope), rand_formula(rng, depth - 1, scope))
    if pick in (4, 5):
        v = rng.choice(VARS)
        body = rand_formula(rng, depth - 1, scope + [v])
        return ForAll(v, body) if pick == 4 else Exists(v, body)
    if pick == 6:
        template = rand_formula(rng, depth - 2 if depth > 1 else 0, VARS[:3])
        subst = tuple(
            (v, rand_term(rng, 1, scope)) for v in sorted(free_vars(template))
        )
        return Box(template, subst)
    return rand_formula(rng, 0, scope)


def sample_formulas(count: int, seed: int, depth: int = 4) -> list[Formula]:
    rng = random.Random(seed)
    return [rand_formula(rng, rng.randrange(1, depth + 1)) for _ in range(count)]
