"""Brute-force oracles, independent of the AIG/BDD pipeline.

Everything here evaluates formulas by direct recursion and decides
validity/realizability by enumerating assignments, so it can be trusted
against the production path.
"""

from __future__ import annotations

import itertools
import random
from typing import Mapping, Optional

from pbrepair.lang import Binary, BoolLit, Expr, Lit, Sort, Unary, Var, eval_expr
from pbrepair.paths import PAssign, PAssume, base_name
from pbrepair.transform import (And, Atom, Exists, FFalse, FTrue, Formula,
                                Iff, Implies, Not, Or, free_vars)

SortMap = Mapping[str, Sort]


def sort_of(name: str, sorts: Optional[SortMap]) -> Sort:
    if sorts is None:
        return Sort.WORD
    return sorts.get(base_name(name), Sort.WORD)


def domain(name: str, width: int, sorts: Optional[SortMap]) -> range:
    return range(2) if sort_of(name, sorts) is Sort.BOOL else range(1 << width)


def eval_formula(f: Formula, env: dict[str, int], width: int,
                 sorts: Optional[SortMap] = None) -> bool:
    if isinstance(f, FTrue):
        return True
    if isinstance(f, FFalse):
        return False
    if isinstance(f, Atom):
        return bool(eval_expr(f.expr, env, width))
    if isinstance(f, Not):
        return not eval_formula(f.operand, env, width, sorts)
    if isinstance(f, And):
        return eval_formula(f.left, env, width, sorts) and \
            eval_formula(f.right, env, width, sorts)
    if isinstance(f, Or):
        return eval_formula(f.left, env, width, sorts) or \
            eval_formula(f.right, env, width, sorts)
    if isinstance(f, Implies):
        return (not eval_formula(f.left, env, width, sorts)) or \
            eval_formula(f.right, env, width, sorts)
    if isinstance(f, Iff):
        return eval_formula(f.left, env, width, sorts) == \
            eval_formula(f.right, env, width, sorts)
    if isinstance(f, Exists):
        saved = env.get(f.var)
        try:
            for value in domain(f.var, width, sorts):
                env[f.var] = value
                if eval_formula(f.body, env, width, sorts):
                    return True
            return False
        finally:
            if saved is None:
                env.pop(f.var, None)
            else:
                env[f.var] = saved
    raise TypeError(f"not a formula: {f!r}")


def assignments(names, width: int, sorts: Optional[SortMap] = None):
    names = list(names)
    for values in itertools.product(*(domain(n, width, sorts) for n in names)):
        yield dict(zip(names, values))


def brute_valid(f: Formula, width: int, sorts: Optional[SortMap] = None) -> bool:
    names = sorted(free_vars(f))
    return all(eval_formula(f, env, width, sorts)
               for env in assignments(names, width, sorts))


def brute_sat(f: Formula, width: int, sorts: Optional[SortMap] = None) -> bool:
    names = sorted(free_vars(f))
    return any(eval_formula(f, env, width, sorts)
               for env in assignments(names, width, sorts))


def brute_realizable(phi: Formula, x_vars, y_vars, width: int,
                     sorts: Optional[SortMap] = None) -> bool:
    """For every x assignment there is some y assignment satisfying phi."""
    for xenv in assignments(x_vars, width, sorts):
        for yenv in assignments(y_vars, width, sorts):
            env = dict(xenv)
            env.update(yenv)
            if eval_formula(phi, env, width, sorts):
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# Random generators (seeded by the caller)
# ---------------------------------------------------------------------------

_CMPS = ["<", "<=", ">", ">=", "==", "!="]
_WORD_OPS = ["+", "-", "&", "|", "^", "<<", ">>"]


def random_word_expr(rng: random.Random, names, width: int, depth: int) -> Expr:
    if depth == 0 or rng.random() < 0.35:
        if names and rng.random() < 0.7:
            return Var(rng.choice(names))
        return Lit(rng.randrange(1 << width))
    if rng.random() < 0.15:
        return Unary(rng.choice(["~", "-"]), random_word_expr(rng, names, width, depth - 1))
    op = rng.choice(_WORD_OPS)
    return Binary(op, random_word_expr(rng, names, width, depth - 1),
                  random_word_expr(rng, names, width, depth - 1))


def random_bool_expr(rng: random.Random, names, width: int, depth: int) -> Expr:
    if depth == 0 or rng.random() < 0.5:
        return Binary(rng.choice(_CMPS),
                      random_word_expr(rng, names, width, depth),
                      random_word_expr(rng, names, width, depth))
    roll = rng.random()
    if roll < 0.2:
        return Unary("!", random_bool_expr(rng, names, width, depth - 1))
    if roll < 0.3:
        return BoolLit(rng.random() < 0.5)
    op = rng.choice(["&&", "||"])
    return Binary(op, random_bool_expr(rng, names, width, depth - 1),
                  random_bool_expr(rng, names, width, depth - 1))


def random_formula(rng: random.Random, names, width: int, depth: int,
                   _binders: int = 0) -> Formula:
    """Random formula over `names`.

    Binders draw from a dedicated namespace (q0, q1, ...) so substitution
    never captures; this mirrors the production discipline where binders
    are always freshly generated.
    """
    if depth == 0 or rng.random() < 0.4:
        return Atom(random_bool_expr(rng, names, width, 1))
    roll = rng.random()
    if roll < 0.15:
        return Not(random_formula(rng, names, width, depth - 1, _binders))
    if roll < 0.7:
        ctor = rng.choice([And, Or, Implies, Iff])
        return ctor(random_formula(rng, names, width, depth - 1, _binders),
                    random_formula(rng, names, width, depth - 1, _binders))
    bound = f"q{_binders}"
    body = random_formula(rng, list(names) + [bound], width, depth - 1,
                          _binders + 1)
    return Exists(bound, body)


def random_path_stmts(rng: random.Random, names, width: int, length: int):
    """Raw (not necessarily single-assignment) statement sequence."""
    out = []
    for _ in range(length):
        if rng.random() < 0.4:
            out.append(PAssume(random_bool_expr(rng, names, width, 1)))
        else:
            out.append(PAssign(rng.choice(names),
                               random_word_expr(rng, names, width, 2)))
    return out
