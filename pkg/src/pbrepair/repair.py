"""Lowering a repair netlist into source statements and splicing it in.

The emitted block reads each used input bit into a fresh word variable
(`b = (v >> i) & 1;`), computes one fresh variable per AND gate
(`g = a & b;`, complemented operands as `1 - a`), and recomposes each
output word (`v = b0 | (b1 << 1) | ...;`).  Boolean outputs (hoisted guard
temporaries) are assigned directly from their single bit.  A small folding
pass keeps the common patterns readable: `(v >> 0) & 1` becomes `v & 1`,
zero bits are dropped, and all-constant outputs collapse to literals.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional, Sequence

from .lang import (Assign, Binary, BoolLit, Expr, FaultRegion, If, Lit,
                   Program, RegionError, Sort, Stmt, Var, While, renumber,
                   fresh_names)
from .synth import RepairNetlist


def _bit_extract(var: str, bit: int) -> Expr:
    word: Expr = Var(var)
    if bit > 0:
        word = Binary(">>", word, Lit(bit))
    return Binary("&", word, Lit(1))


def netlist_to_stmts(netlist: RepairNetlist, avoid: Iterable[str],
                     sorts: dict[str, Sort], width: int) -> list[Assign]:
    """Emit assignments computing the netlist, with placeholder line numbers.

    `avoid` lists names the fresh bit/gate variables must not collide with;
    `sorts` gives the sorts of the netlist's input and output variables.
    """
    aig = netlist.aig
    out_lits = netlist.output_lits()

    # Which nodes are actually needed.
    needed: set[int] = set()
    stack = [lit >> 1 for lit in out_lits]
    while stack:
        node = stack.pop()
        if node in needed:
            continue
        needed.add(node)
        kind = aig.node(node)
        if kind[0] == "and":
            stack.append(kind[1] >> 1)
            stack.append(kind[2] >> 1)

    avoid_order = list(avoid)
    used_inputs = [(name, bit) for (name, bit), node in aig.inputs.items()
                   if node in needed]
    used_inputs.sort(key=lambda nb: (avoid_order.index(nb[0])
                                     if nb[0] in avoid_order else len(avoid_order),
                                     nb[1]))
    gates = [i for i in sorted(needed) if aig.node(i)[0] == "and"]

    taken = set(avoid_order)
    bit_names = fresh_names(taken, "b", len(used_inputs))
    taken.update(bit_names)
    gate_names = fresh_names(taken, "g", len(gates))

    node_name: dict[int, str] = {}
    stmts: list[Assign] = []
    for (name, bit), fresh in zip(used_inputs, bit_names):
        if sorts.get(name, Sort.WORD) is Sort.BOOL:
            raise AssertionError(
                f"netlist reads a bit of boolean variable {name!r}; boolean "
                "entry values never occur in the specification")
        node_name[aig.inputs[(name, bit)]] = fresh
        stmts.append(Assign(0, fresh, _bit_extract(name, bit)))

    def operand(lit: int) -> Expr:
        node = lit >> 1
        if node == 0:  # constant
            return Lit(0 if lit & 1 == 0 else 1)
        e: Expr = Var(node_name[node])
        if lit & 1:
            e = Binary("-", Lit(1), e)
        return e

    for node, fresh in zip(gates, gate_names):
        _, a, b = aig.node(node)
        node_name[node] = fresh
        stmts.append(Assign(0, fresh, Binary("&", operand(a), operand(b))))

    for name, lits in netlist.outputs:
        if sorts.get(name, Sort.WORD) is Sort.BOOL:
            bit = operand(lits[0])
            if isinstance(bit, Lit):
                rhs: Expr = BoolLit(bit.value == 1)
            elif isinstance(bit, Var):
                rhs = Binary("==", bit, Lit(1))
            else:  # complemented: 1 - b == 1  iff  b == 0
                assert isinstance(bit, Binary)
                rhs = Binary("==", bit.right, Lit(0))
            stmts.append(Assign(0, name, rhs))
            continue
        terms: list[Expr] = []
        const = 0
        for i, lit in enumerate(lits):
            e = operand(lit)
            if isinstance(e, Lit):
                const |= e.value << i
                continue
            terms.append(e if i == 0 else Binary("<<", e, Lit(i)))
        if const:
            terms.append(Lit(const))
        rhs = Lit(0) if not terms else terms[0]
        for t in terms[1:]:
            rhs = Binary("|", rhs, t)
        stmts.append(Assign(0, name, rhs))
    return stmts


def _locate_block(body: tuple[Stmt, ...], lines: range) -> Optional[tuple[tuple[Stmt, ...], int, int]]:
    """Find the block holding the region lines as consecutive siblings."""
    idx = [i for i, s in enumerate(body) if s.line in lines]
    if idx:
        if idx != list(range(idx[0], idx[-1] + 1)):
            raise RegionError("fault region statements are not consecutive siblings")
        covered = {body[i].line for i in idx}
        if covered != set(lines):
            raise RegionError("fault region spans a block boundary")
        return body, idx[0], idx[-1] + 1
    for s in body:
        for sub in (s.then_body, s.else_body) if isinstance(s, If) else \
                   ((s.body,) if isinstance(s, While) else ()):
            found = _locate_block(sub, lines)
            if found is not None:
                return found
    return None


def apply_repair(p: Program, region: FaultRegion,
                 stmts: Sequence[Assign]) -> tuple[Program, FaultRegion]:
    """Replace the region's statements, renumber, and retarget the region.

    The region outputs are preserved so later iterations re-synthesize the
    same interface.  Fresh variables introduced by the replacement are
    declared as word variables.
    """
    if not stmts:
        raise ValueError("replacement must contain at least one statement")
    located = _locate_block(p.body, region.lines)
    if located is None:
        raise RegionError(f"region {region.start}..{region.end} not found")
    block, lo, hi = located
    # Line 0 marks the replacement statements through renumbering.
    replacement = tuple(replace(s, line=0) for s in stmts)

    def splice(body: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        if body is block:
            return body[:lo] + replacement + body[hi:]
        out: list[Stmt] = []
        for s in body:
            if isinstance(s, If):
                out.append(If(s.line, s.cond, splice(s.then_body),
                              splice(s.else_body)))
            elif isinstance(s, While):
                out.append(While(s.line, s.cond, splice(s.body)))
            else:
                out.append(s)
        return tuple(out)

    spliced = splice(p.body)
    new_lines = [i for i, s in enumerate(_preorder(spliced), start=1)
                 if s.line == 0]
    assert len(new_lines) == len(replacement)
    new_body, _ = renumber(spliced)

    new_sorts = dict(p.sorts)
    new_vars = list(p.variables)
    for s in stmts:
        if s.var not in new_sorts:
            new_sorts[s.var] = Sort.WORD
            new_vars.append(s.var)

    new_p = Program(p.name, p.width, tuple(new_vars), new_sorts, p.pre,
                    p.post, new_body)
    return new_p, FaultRegion(min(new_lines), max(new_lines), region.outputs)


def _preorder(body: tuple[Stmt, ...]):
    for s in body:
        yield s
        if isinstance(s, If):
            yield from _preorder(s.then_body)
            yield from _preorder(s.else_body)
        elif isinstance(s, While):
            yield from _preorder(s.body)
