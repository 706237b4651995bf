"""First-order formulas over bit-vector atoms, and the wp/sp transformers.

Formulas are boolean combinations of `Atom` nodes (boolean-sorted source
expressions) plus existential binders.  The transformers follow the usual
mechanic rules:

    wp(phi, assume(c)) = c -> phi          sp(phi, assume(c)) = c and phi
    wp(phi, v := e)    = phi[v/e]          sp(phi, v := e)    = exists v'.
                                               v = e[v/v'] and phi[v/v']

Sequences fold wp right-to-left and sp left-to-right.  Validity and
semantic equivalence are decided by the BDD engine at a fixed bit width.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from .lang import (BoolLit, Expr, Sort, Var, expr_vars, format_expr,
                   subst_expr)
from .paths import PAssign, PAssume, Path, PathStmt, base_name


# ---------------------------------------------------------------------------
# Formula representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FTrue:
    pass


@dataclass(frozen=True)
class FFalse:
    pass


@dataclass(frozen=True)
class Atom:
    expr: Expr  # boolean-sorted


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[FTrue, FFalse, Atom, Not, And, Or, Implies, Iff, Exists]

TRUE = FTrue()
FALSE = FFalse()

_BINARY = (And, Or, Implies, Iff)


def conj(parts: Iterable[Formula]) -> Formula:
    out: Optional[Formula] = None
    for f in parts:
        out = f if out is None else And(out, f)
    return TRUE if out is None else out


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return expr_vars(f.expr)
    if isinstance(f, Not):
        return free_vars(f.operand)
    if isinstance(f, _BINARY):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Exists):
        return free_vars(f.body) - {f.var}
    return set()


def all_names(f: Formula) -> set[str]:
    """Free and bound variable names (used to pick fresh binders)."""
    if isinstance(f, Atom):
        return expr_vars(f.expr)
    if isinstance(f, Not):
        return all_names(f.operand)
    if isinstance(f, _BINARY):
        return all_names(f.left) | all_names(f.right)
    if isinstance(f, Exists):
        return all_names(f.body) | {f.var}
    return set()


def subst(f: Formula, var: str, repl: Expr) -> Formula:
    """Replace free occurrences of `var` by the expression `repl`."""
    if isinstance(f, Atom):
        return Atom(subst_expr(f.expr, {var: repl}))
    if isinstance(f, Not):
        return Not(subst(f.operand, var, repl))
    if isinstance(f, _BINARY):
        return type(f)(subst(f.left, var, repl), subst(f.right, var, repl))
    if isinstance(f, Exists):
        if f.var == var:
            return f
        if f.var in expr_vars(repl) and var in free_vars(f.body):
            raise ValueError(
                f"substitution would capture binder {f.var!r}; binders are "
                "expected to be fresh")
        return Exists(f.var, subst(f.body, var, repl))
    return f


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Simultaneously rename free variables."""
    mapping = {o: n for o, n in mapping.items() if o != n}
    if not mapping:
        return f
    if isinstance(f, Atom):
        return Atom(subst_expr(f.expr, {o: Var(n) for o, n in mapping.items()}))
    if isinstance(f, Not):
        return Not(rename(f.operand, mapping))
    if isinstance(f, _BINARY):
        return type(f)(rename(f.left, mapping), rename(f.right, mapping))
    if isinstance(f, Exists):
        inner = {o: n for o, n in mapping.items() if o != f.var}
        if f.var in inner.values() and (free_vars(f.body) & set(inner)):
            raise ValueError(
                f"renaming would capture binder {f.var!r}; binders are "
                "expected to be fresh")
        return Exists(f.var, rename(f.body, inner))
    return f


def format_formula(f: Formula) -> str:
    def fmt(f: Formula, level: int) -> str:
        if isinstance(f, FTrue):
            return "true"
        if isinstance(f, FFalse):
            return "false"
        if isinstance(f, Atom):
            return format_expr(f.expr)
        if isinstance(f, Not):
            return f"!({fmt(f.operand, 0)})"
        if isinstance(f, Exists):
            s = f"exists {f.var}. {fmt(f.body, 0)}"
            return f"({s})" if level > 0 else s
        op, lvl = {And: ("&&", 3), Or: ("||", 2),
                   Implies: ("->", 1), Iff: ("<->", 1)}[type(f)]
        s = f"{fmt(f.left, lvl)} {op} {fmt(f.right, lvl + 1)}"
        return f"({s})" if lvl < level else s

    return fmt(f, 0)


# ---------------------------------------------------------------------------
# Predicate transformers
# ---------------------------------------------------------------------------

SortMap = Mapping[str, Sort]


def _sort_of(name: str, sorts: Optional[SortMap]) -> Sort:
    if sorts is None:
        return Sort.WORD
    return sorts.get(base_name(name), Sort.WORD)


def _equality(var: str, e: Expr, sorts: Optional[SortMap]) -> Formula:
    if _sort_of(var, sorts) is Sort.BOOL:
        return Iff(Atom(Var(var)), Atom(e))
    from .lang import Binary
    return Atom(Binary("==", Var(var), e))


def _fresh(var: str, avoid: set[str]) -> str:
    k = 0
    while f"{var}~{k}" in avoid:
        k += 1
    return f"{var}~{k}"


def wp(phi: Formula, s: PathStmt) -> Formula:
    if isinstance(s, PAssume):
        return Implies(Atom(s.cond), phi)
    return subst(phi, s.var, s.rhs)


def sp(phi: Formula, s: PathStmt, sorts: Optional[SortMap] = None) -> Formula:
    if isinstance(s, PAssume):
        return And(Atom(s.cond), phi)
    v = s.var
    vp = _fresh(v, all_names(phi) | expr_vars(s.rhs) | {v})
    rhs = subst_expr(s.rhs, {v: Var(vp)})
    return Exists(vp, And(_equality(v, rhs, sorts), subst(phi, v, Var(vp))))


def _stmts(pi: Union[Path, Sequence[PathStmt]]) -> Sequence[PathStmt]:
    return pi.statements if isinstance(pi, Path) else pi


def wp_seq(phi: Formula, pi: Union[Path, Sequence[PathStmt]]) -> Formula:
    for s in reversed(_stmts(pi)):
        phi = wp(phi, s)
    return phi


def sp_seq(phi: Formula, pi: Union[Path, Sequence[PathStmt]],
           sorts: Optional[SortMap] = None) -> Formula:
    for s in _stmts(pi):
        phi = sp(phi, s, sorts)
    return phi


# ---------------------------------------------------------------------------
# Validity / Hoare checking (delegates to the BDD engine)
# ---------------------------------------------------------------------------

def is_valid_formula(f: Formula, width: int, sorts: Optional[SortMap] = None) -> bool:
    from .boolean import bitblast, to_bdd
    return to_bdd(bitblast(f, width, sorts)).is_true()


def is_sat_formula(f: Formula, width: int, sorts: Optional[SortMap] = None) -> bool:
    from .boolean import bitblast, to_bdd
    return not to_bdd(bitblast(f, width, sorts)).is_false()


def equivalent(f: Formula, g: Formula, width: int,
               sorts: Optional[SortMap] = None) -> bool:
    """Semantic equivalence at the given width (shared BDD arena)."""
    from .boolean import BddManager, bitblast, interleaved_order, to_bdd
    fa = bitblast(f, width, sorts)
    ga = bitblast(g, width, sorts)
    mgr = BddManager(interleaved_order([fa, ga]))
    return to_bdd(fa, mgr).edge == to_bdd(ga, mgr).edge


def holds(phi: Formula, pi: Path, psi: Formula, width: int,
          sorts: Optional[SortMap] = None) -> bool:
    """Does the Hoare triple {phi} pi {psi} hold at this width?

    `phi` and `psi` range over program variables; they are renamed to the
    path's entry (`v#0`) and final SSA versions respectively.  The decided
    condition is validity of sp(phi, pi) -> psi (equivalently of
    phi -> wp(psi, pi)); since the path is in single-assignment form, it
    is checked on an equivalent direct encoding that symbolically
    simulates the assignments instead of folding the transformers, which
    keeps the circuit linear in the path length.
    """
    from .boolean import blast_path_check, to_bdd
    variables = sorted(free_vars(phi) | free_vars(psi) | set(pi.ssa_map))
    entry = {v: f"{v}#0" for v in variables}
    final = {v: pi.ssa_map.get(v, f"{v}#0") for v in variables}
    pre = rename(phi, entry)
    post = rename(psi, final)
    aig = blast_path_check(pre, pi.statements, post, width, sorts)
    return to_bdd(aig).is_true()
