"""Bit-blasting word-level formulas into and-inverter graphs.

Each word variable becomes `width` input bits (LSB first), each boolean
variable a single bit.  Arithmetic uses ripple-carry networks, comparisons
unsigned comparators; shift amounts are decoded, so a (possibly
non-constant) amount >= width yields 0.  Existential subformulas become
quantifier scopes on the graph (see `aig.Aig`).
"""

from __future__ import annotations

from typing import Mapping, Optional

from ..lang import (Binary, BoolLit, Expr, Lit, Sort, Unary, Var)
from ..paths import base_name
from .aig import Aig, BitVar, FALSE_LIT, TRUE_LIT

SortMap = Mapping[str, Sort]


def sort_of(name: str, sorts: Optional[SortMap]) -> Sort:
    if sorts is None:
        return Sort.WORD
    return sorts.get(base_name(name), Sort.WORD)


def bits_of(name: str, width: int, sorts: Optional[SortMap]) -> list[BitVar]:
    n = 1 if sort_of(name, sorts) is Sort.BOOL else width
    return [(name, i) for i in range(n)]


class _Blaster:
    def __init__(self, width: int, sorts: Optional[SortMap]):
        self.aig = Aig()
        self.width = width
        self.sorts = sorts
        # Bound-variable instances shadow outer variables of the same name.
        self.env: dict[str, list[int]] = {}
        self.scope_count = 0

    # -- variable access ------------------------------------------------------

    def var_bits(self, name: str) -> list[int]:
        if name in self.env:
            return self.env[name]
        n = 1 if sort_of(name, self.sorts) is Sort.BOOL else self.width
        return [self.aig.input_lit(name, i) for i in range(n)]

    # -- word-level networks -----------------------------------------------------

    def const_word(self, value: int) -> list[int]:
        return [TRUE_LIT if (value >> i) & 1 else FALSE_LIT
                for i in range(self.width)]

    def adder(self, a: list[int], b: list[int], carry: int) -> list[int]:
        g = self.aig
        out = []
        for i in range(self.width):
            s = g.xor_(g.xor_(a[i], b[i]), carry)
            carry = g.or_(g.and_(a[i], b[i]),
                          g.and_(carry, g.xor_(a[i], b[i])))
            out.append(s)
        return out

    def negate_word(self, a: list[int]) -> list[int]:
        return self.adder([x ^ 1 for x in a], self.const_word(0), TRUE_LIT)

    def less_than(self, a: list[int], b: list[int]) -> int:
        g = self.aig
        lt = FALSE_LIT
        for i in range(self.width):  # LSB to MSB; MSB dominates
            bit_lt = g.and_(a[i] ^ 1, b[i])
            bit_eq = g.iff_(a[i], b[i])
            lt = g.or_(bit_lt, g.and_(bit_eq, lt))
        return lt

    def equals(self, a: list[int], b: list[int]) -> int:
        g = self.aig
        out = TRUE_LIT
        for i in range(self.width):
            out = g.and_(out, g.iff_(a[i], b[i]))
        return out

    def shift(self, a: list[int], amount: Expr, left: bool) -> list[int]:
        g = self.aig
        if isinstance(amount, Lit):
            k = amount.value
            if k >= self.width:
                return self.const_word(0)
            if left:
                return self.const_word(0)[:k] + a[:self.width - k]
            return a[k:] + self.const_word(0)[:k]
        # Decode the amount: result = OR over k < width of (amount == k) & (a shifted by k).
        amt = self.word(amount)
        out = self.const_word(0)
        for k in range(self.width):
            is_k = self.equals(amt, self.const_word(k))
            shifted = (self.const_word(0)[:k] + a[:self.width - k]) if left \
                else (a[k:] + self.const_word(0)[:k])
            out = [g.or_(out[i], g.and_(is_k, shifted[i]))
                   for i in range(self.width)]
        return out

    # -- expressions ------------------------------------------------------------

    def word(self, e: Expr) -> list[int]:
        if isinstance(e, Lit):
            return self.const_word(e.value)
        if isinstance(e, Var):
            bits = self.var_bits(e.name)
            if len(bits) != self.width:
                raise ValueError(f"boolean variable {e.name!r} used as a word")
            return bits
        if isinstance(e, Unary):
            a = self.word(e.operand)
            if e.op == "~":
                return [x ^ 1 for x in a]
            if e.op == "-":
                return self.negate_word(a)
        if isinstance(e, Binary):
            g = self.aig
            if e.op == "+":
                return self.adder(self.word(e.left), self.word(e.right), FALSE_LIT)
            if e.op == "-":
                return self.adder(self.word(e.left),
                                  [x ^ 1 for x in self.word(e.right)], TRUE_LIT)
            if e.op in ("&", "|", "^"):
                a, b = self.word(e.left), self.word(e.right)
                op = {"&": g.and_, "|": g.or_, "^": g.xor_}[e.op]
                return [op(a[i], b[i]) for i in range(self.width)]
            if e.op in ("<<", ">>"):
                return self.shift(self.word(e.left), e.right, e.op == "<<")
        raise ValueError(f"not a word expression: {e!r}")

    def boolean(self, e: Expr) -> int:
        if isinstance(e, BoolLit):
            return TRUE_LIT if e.value else FALSE_LIT
        if isinstance(e, Var):
            bits = self.var_bits(e.name)
            if len(bits) != 1:
                raise ValueError(f"word variable {e.name!r} used as a boolean")
            return bits[0]
        if isinstance(e, Unary) and e.op == "!":
            return self.boolean(e.operand) ^ 1
        if isinstance(e, Binary):
            g = self.aig
            if e.op == "&&":
                return g.and_(self.boolean(e.left), self.boolean(e.right))
            if e.op == "||":
                return g.or_(self.boolean(e.left), self.boolean(e.right))
            if e.op in ("<", "<=", ">", ">=", "==", "!="):
                a, b = self.word(e.left), self.word(e.right)
                if e.op == "<":
                    return self.less_than(a, b)
                if e.op == ">":
                    return self.less_than(b, a)
                if e.op == "<=":
                    return self.less_than(b, a) ^ 1
                if e.op == ">=":
                    return self.less_than(a, b) ^ 1
                if e.op == "==":
                    return self.equals(a, b)
                return self.equals(a, b) ^ 1
        raise ValueError(f"not a boolean expression: {e!r}")

    # -- formulas ------------------------------------------------------------

    def formula(self, f) -> int:
        from ..transform import (And, Atom, Exists, FFalse, FTrue, Iff,
                                 Implies, Not, Or)
        g = self.aig
        if isinstance(f, FTrue):
            return TRUE_LIT
        if isinstance(f, FFalse):
            return FALSE_LIT
        if isinstance(f, Atom):
            return self.boolean(f.expr)
        if isinstance(f, Not):
            return self.formula(f.operand) ^ 1
        if isinstance(f, And):
            return g.and_(self.formula(f.left), self.formula(f.right))
        if isinstance(f, Or):
            return g.or_(self.formula(f.left), self.formula(f.right))
        if isinstance(f, Implies):
            return g.implies_(self.formula(f.left), self.formula(f.right))
        if isinstance(f, Iff):
            return g.iff_(self.formula(f.left), self.formula(f.right))
        if isinstance(f, Exists):
            instance = f"{f.var}?{self.scope_count}"
            self.scope_count += 1
            n = 1 if sort_of(f.var, self.sorts) is Sort.BOOL else self.width
            bound_bits = [(instance, i) for i in range(n)]
            lits = [g.input_lit(instance, i) for i in range(n)]
            shadowed = self.env.get(f.var)
            self.env[f.var] = lits
            body = self.formula(f.body)
            if shadowed is None:
                del self.env[f.var]
            else:
                self.env[f.var] = shadowed
            return g.add_quant_scope(f.var, bound_bits, body)
        raise ValueError(f"not a formula: {f!r}")


def bitblast(f, width: int, sorts: Optional[SortMap] = None) -> Aig:
    """Blast a formula into an AIG computing its truth value."""
    blaster = _Blaster(width, sorts)
    blaster.aig.output = blaster.formula(f)
    return blaster.aig


def blast_path_check(pre, stmts, post, width: int,
                     sorts: Optional[SortMap] = None) -> Aig:
    """Circuit for `(pre and path constraints) -> post` over entry bits.

    The single-assignment path is simulated symbolically: each assignment
    binds its SSA variable to the bit network of its right-hand side, so no
    circuit inputs are created for intermediate versions and the check
    ranges over entry values only.
    """
    from ..paths import PAssume

    blaster = _Blaster(width, sorts)
    g = blaster.aig
    acc = blaster.formula(pre)
    for s in stmts:
        if isinstance(s, PAssume):
            acc = g.and_(acc, blaster.boolean(s.cond))
        else:
            if s.var in blaster.env:
                raise ValueError(f"{s.var!r} assigned twice; path is not in "
                                 "single-assignment form")
            if sort_of(s.var, sorts) is Sort.BOOL:
                blaster.env[s.var] = [blaster.boolean(s.rhs)]
            else:
                blaster.env[s.var] = blaster.word(s.rhs)
    g.output = g.implies_(acc, blaster.formula(post))
    return g


def blast_expr(e: Expr, width: int, sorts: Optional[SortMap] = None) -> Aig:
    """Blast a boolean-sorted expression (convenience for tests)."""
    blaster = _Blaster(width, sorts)
    blaster.aig.output = blaster.boolean(e)
    return blaster.aig


def interleaved_order(aigs, sorts: Optional[SortMap] = None,
                      width: Optional[int] = None) -> list[BitVar]:
    """Bit order over the real inputs of one or more AIGs: variables in
    first-seen order, interleaved LSB first."""
    if isinstance(aigs, Aig):
        aigs = [aigs]
    vars_seen: list[str] = []
    max_bit: dict[str, int] = {}
    for a in aigs:
        for (name, bit) in a.inputs:
            if name not in max_bit:
                vars_seen.append(name)
                max_bit[name] = bit
            else:
                max_bit[name] = max(max_bit[name], bit)
    order: list[BitVar] = []
    highest = max(max_bit.values(), default=-1)
    for bit in range(highest + 1):
        for name in vars_seen:
            if bit <= max_bit[name]:
                order.append((name, bit))
    return order
