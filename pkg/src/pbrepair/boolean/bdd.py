"""Reduced ordered BDDs with complement edges.

One `BddManager` owns one node arena and one fixed variable order; all
operations on its `Bdd` handles must stay on the creating thread.  Edges
are signed integers: node ids are positive, a negative sign complements,
`+1`/`-1` are the true/false terminals.  Canonical form keeps the high
(then) edge regular, so semantically equal functions always share one
edge value, and `f == not g` is a sign test.

`ite` is the single kernel operation; everything else reduces to it plus
the quantification/restriction walkers.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence

from .aig import Aig, BitVar

TRUE_EDGE = 1
FALSE_EDGE = -1

_TERMINAL_LEVEL = 1 << 60


class BddLimitError(Exception):
    """Node arena exceeded its configured capacity."""


class BddManager:
    def __init__(self, order: Sequence[BitVar] = (), max_nodes: int = 1_000_000):
        self.max_nodes = max_nodes
        self._level_of: dict[BitVar, int] = {}
        self._var_at: list[BitVar] = []
        # node id -> (level, low_edge, high_edge); ids start at 2
        # (id 1 is the terminal).  High edges are always regular.
        self._nodes: dict[int, tuple[int, int, int]] = {}
        self._unique: dict[tuple[int, int, int], int] = {}
        self._next_id = 2
        self._ite_cache: dict[tuple[int, int, int], int] = {}
        for v in order:
            self.add_var(v)

    # -- variables ------------------------------------------------------------

    def add_var(self, v: BitVar) -> int:
        if v in self._level_of:
            return self._level_of[v]
        level = len(self._var_at)
        self._level_of[v] = level
        self._var_at.append(v)
        return level

    def level(self, v: BitVar) -> int:
        return self._level_of[v]

    def var_at(self, level: int) -> BitVar:
        return self._var_at[level]

    @property
    def order(self) -> tuple[BitVar, ...]:
        return tuple(self._var_at)

    def num_nodes(self) -> int:
        return len(self._nodes)

    def node(self, node_id: int) -> tuple[int, int, int]:
        """(level, low edge, high edge) of a non-terminal node id."""
        return self._nodes[node_id]

    # -- node construction ------------------------------------------------------

    def _node_level(self, edge: int) -> int:
        node = abs(edge)
        return _TERMINAL_LEVEL if node == 1 else self._nodes[node][0]

    def _cofactors(self, edge: int, level: int) -> tuple[int, int]:
        node = abs(edge)
        if node == 1 or self._nodes[node][0] != level:
            return edge, edge
        _, lo, hi = self._nodes[node]
        if edge < 0:
            return -lo, -hi
        return lo, hi

    def _mk(self, level: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        if hi < 0:  # keep the high edge regular
            return -self._mk(level, -lo, -hi)
        key = (level, lo, hi)
        node = self._unique.get(key)
        if node is None:
            if len(self._nodes) >= self.max_nodes:
                raise BddLimitError(
                    f"BDD arena exceeded {self.max_nodes} nodes")
            node = self._next_id
            self._next_id += 1
            self._nodes[node] = key
            self._unique[key] = node
        return node

    def var(self, v: BitVar) -> "Bdd":
        level = self._level_of.get(v)
        if level is None:
            raise KeyError(f"bit variable {v!r} not in the order")
        return Bdd(self, self._mk(level, FALSE_EDGE, TRUE_EDGE))

    @property
    def true(self) -> "Bdd":
        return Bdd(self, TRUE_EDGE)

    @property
    def false(self) -> "Bdd":
        return Bdd(self, FALSE_EDGE)

    # -- ite kernel ----------------------------------------------------------

    def _ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE_EDGE:
            return g
        if f == FALSE_EDGE:
            return h
        if g == h:
            return g
        if g == TRUE_EDGE and h == FALSE_EDGE:
            return f
        if g == FALSE_EDGE and h == TRUE_EDGE:
            return -f
        if f == g:
            g = TRUE_EDGE
        elif f == -g:
            g = FALSE_EDGE
        if f == h:
            h = FALSE_EDGE
        elif f == -h:
            h = TRUE_EDGE
        if g == h:
            return g
        if g == TRUE_EDGE and h == FALSE_EDGE:
            return f
        if g == FALSE_EDGE and h == TRUE_EDGE:
            return -f
        # Normalize for cache hits: regular f, then regular g.
        if f < 0:
            f, g, h = -f, h, g
        negate = False
        if g < 0:
            g, h = -g, -h
            negate = True
        key = (f, g, h)
        cached = self._ite_cache.get(key)
        if cached is not None:
            return -cached if negate else cached
        level = min(self._node_level(f), self._node_level(g), self._node_level(h))
        f0, f1 = self._cofactors(f, level)
        g0, g1 = self._cofactors(g, level)
        h0, h1 = self._cofactors(h, level)
        lo = self._ite(f0, g0, h0)
        hi = self._ite(f1, g1, h1)
        result = self._mk(level, lo, hi)
        self._ite_cache[key] = result
        return -result if negate else result

    # -- derived operations -----------------------------------------------------

    def apply_and(self, a: int, b: int) -> int:
        return self._ite(a, b, FALSE_EDGE)

    def apply_or(self, a: int, b: int) -> int:
        return self._ite(a, TRUE_EDGE, b)

    def apply_xor(self, a: int, b: int) -> int:
        return self._ite(a, -b, b)

    def _exists(self, edge: int, levels: frozenset[int],
                memo: dict[int, int]) -> int:
        if abs(edge) == 1:
            return edge
        cached = memo.get(edge)
        if cached is not None:
            return cached
        level, lo, hi = self._nodes[abs(edge)]
        if edge < 0:
            lo, hi = -lo, -hi
        if level in levels:
            result = self.apply_or(self._exists(lo, levels, memo),
                                   self._exists(hi, levels, memo))
        else:
            result = self._mk(level, self._exists(lo, levels, memo),
                              self._exists(hi, levels, memo))
        memo[edge] = result
        return result

    def exists_edge(self, edge: int, bits: Iterable[BitVar]) -> int:
        levels = frozenset(self._level_of[b] for b in bits)
        if not levels:
            return edge
        return self._exists(edge, levels, {})

    def forall_edge(self, edge: int, bits: Iterable[BitVar]) -> int:
        return -self.exists_edge(-edge, bits)

    def _restrict(self, edge: int, level: int, value: int,
                  memo: dict[int, int]) -> int:
        if abs(edge) == 1:
            return edge
        node_level, lo, hi = self._nodes[abs(edge)]
        if node_level > level:
            return edge
        cached = memo.get(edge)
        if cached is not None:
            return cached
        if edge < 0:
            lo, hi = -lo, -hi
        if node_level == level:
            result = hi if value else lo
        else:
            result = self._mk(node_level,
                              self._restrict(lo, level, value, memo),
                              self._restrict(hi, level, value, memo))
        memo[edge] = result
        return result

    def cofactor_edge(self, edge: int, bit: BitVar, value: int) -> int:
        return self._restrict(edge, self._level_of[bit], 1 if value else 0, {})

    def compose_edge(self, edge: int, bit: BitVar, g: int) -> int:
        """Substitute function `g` for variable `bit` in `edge`."""
        level = self._level_of[bit]
        hi = self._restrict(edge, level, 1, {})
        lo = self._restrict(edge, level, 0, {})
        return self._ite(g, hi, lo)

    def support_edge(self, edge: int) -> set[BitVar]:
        seen: set[int] = set()
        levels: set[int] = set()
        stack = [abs(edge)]
        while stack:
            node = stack.pop()
            if node == 1 or node in seen:
                continue
            seen.add(node)
            level, lo, hi = self._nodes[node]
            levels.add(level)
            stack.append(abs(lo))
            stack.append(abs(hi))
        return {self._var_at[lv] for lv in levels}

    def any_sat_edge(self, edge: int) -> dict[BitVar, int]:
        """Lexicographically smallest satisfying assignment over the full
        variable order (unconstrained variables take 0)."""
        if edge == FALSE_EDGE:
            raise ValueError("any_sat on an unsatisfiable BDD")
        assignment: dict[BitVar, int] = {}
        for level, bitvar in enumerate(self._var_at):
            if abs(edge) == 1:
                assignment[bitvar] = 0
                continue
            node_level, lo, hi = self._nodes[abs(edge)]
            if node_level != level:
                assignment[bitvar] = 0
                continue
            if edge < 0:
                lo, hi = -lo, -hi
            if lo != FALSE_EDGE:
                assignment[bitvar] = 0
                edge = lo
            else:
                assignment[bitvar] = 1
                edge = hi
        assert edge == TRUE_EDGE
        return assignment

    def size_edge(self, edge: int) -> int:
        seen: set[int] = set()
        stack = [abs(edge)]
        count = 0
        while stack:
            node = stack.pop()
            if node == 1 or node in seen:
                continue
            seen.add(node)
            count += 1
            _, lo, hi = self._nodes[node]
            stack.append(abs(lo))
            stack.append(abs(hi))
        return count

    def to_dot(self, edge: int) -> str:
        lines = ["digraph bdd {", '  t [label="1", shape=box];']
        seen: set[int] = set()

        def walk(node: int) -> None:
            if node == 1 or node in seen:
                return
            seen.add(node)
            level, lo, hi = self._nodes[node]
            var = self._var_at[level]
            lines.append(f'  n{node} [label="{var[0]}.{var[1]}"];')
            for child, style in ((lo, "dashed"), (hi, "solid")):
                target = "t" if abs(child) == 1 else f"n{abs(child)}"
                extra = ' color="red"' if child < 0 else ""
                lines.append(f"  n{node} -> {target} [style={style}{extra}];")
                walk(abs(child))

        root = "t" if abs(edge) == 1 else f"n{abs(edge)}"
        lines.append(f'  root [shape=none,label=""]; root -> {root}'
                     f'{" [color=red]" if edge < 0 else ""};')
        walk(abs(edge))
        lines.append("}")
        return "\n".join(lines)


class Bdd:
    """Handle to one function inside a manager's arena."""

    __slots__ = ("mgr", "edge")

    def __init__(self, mgr: BddManager, edge: int):
        self.mgr = mgr
        self.edge = edge

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Bdd) and other.mgr is self.mgr
                and other.edge == self.edge)

    def __hash__(self) -> int:
        return hash((id(self.mgr), self.edge))

    def __repr__(self) -> str:
        return f"Bdd(edge={self.edge}, nodes={self.mgr.size_edge(self.edge)})"

    def __and__(self, other: "Bdd") -> "Bdd":
        return Bdd(self.mgr, self.mgr.apply_and(self.edge, other.edge))

    def __or__(self, other: "Bdd") -> "Bdd":
        return Bdd(self.mgr, self.mgr.apply_or(self.edge, other.edge))

    def __xor__(self, other: "Bdd") -> "Bdd":
        return Bdd(self.mgr, self.mgr.apply_xor(self.edge, other.edge))

    def __invert__(self) -> "Bdd":
        return Bdd(self.mgr, -self.edge)

    def is_true(self) -> bool:
        return self.edge == TRUE_EDGE

    def is_false(self) -> bool:
        return self.edge == FALSE_EDGE

    def size(self) -> int:
        return self.mgr.size_edge(self.edge)

    def support(self) -> set[BitVar]:
        return self.mgr.support_edge(self.edge)


# Module-level helpers mirroring the manager operations on handles.

def is_valid(b: Bdd) -> bool:
    return b.is_true()


def is_sat(b: Bdd) -> bool:
    return not b.is_false()


def exists(b: Bdd, bits: Iterable[BitVar]) -> Bdd:
    return Bdd(b.mgr, b.mgr.exists_edge(b.edge, bits))


def forall(b: Bdd, bits: Iterable[BitVar]) -> Bdd:
    return Bdd(b.mgr, b.mgr.forall_edge(b.edge, bits))


def cofactor(b: Bdd, bit: BitVar, value: int) -> Bdd:
    return Bdd(b.mgr, b.mgr.cofactor_edge(b.edge, bit, value))


def compose(b: Bdd, bit: BitVar, g: Bdd) -> Bdd:
    assert b.mgr is g.mgr
    return Bdd(b.mgr, b.mgr.compose_edge(b.edge, bit, g.edge))


def any_sat(b: Bdd) -> dict[BitVar, int]:
    return b.mgr.any_sat_edge(b.edge)


def aig_to_bdd(aig: Aig, mgr: BddManager,
               lits: Optional[Sequence[int]] = None) -> list[Bdd]:
    """Convert AIG literals (default: the output) to BDDs.

    Quantifier scopes are eliminated innermost-first: each scope's body is
    quantified over its bound bits and the result composed into every later
    use of the scope's pseudo-input.
    """
    for (var, bit) in aig.inputs:
        mgr.add_var((var, bit))
    pseudo_bits: dict[int, BitVar] = {}
    for scope in aig.quant_scopes:
        for b in scope.bound_bits:
            mgr.add_var(b)
        pv: BitVar = (f"?{len(pseudo_bits)}", 0)
        mgr.add_var(pv)
        pseudo_bits[scope.pseudo] = pv

    if lits is None:
        lits = [aig.output]

    node_edge: dict[int, int] = {0: FALSE_EDGE}
    for i in range(1, len(aig)):
        kind = aig.node(i)
        if kind[0] == "input":
            label = pseudo_bits.get(i, (kind[1], kind[2]))
            node_edge[i] = mgr.var(label).edge
        else:
            a, b = kind[1], kind[2]
            ea = node_edge[a >> 1] * (-1 if a & 1 else 1)
            eb = node_edge[b >> 1] * (-1 if b & 1 else 1)
            node_edge[i] = mgr.apply_and(ea, eb)

    def lit_edge(lit: int) -> int:
        return node_edge[lit >> 1] * (-1 if lit & 1 else 1)

    resolved: dict[int, int] = {}  # pseudo node -> eliminated edge

    def close(edge: int) -> int:
        # Substitute already-resolved pseudo-inputs occurring in `edge`.
        for pseudo, value in resolved.items():
            pv = pseudo_bits[pseudo]
            if pv in mgr.support_edge(edge):
                edge = mgr.compose_edge(edge, pv, value)
        return edge

    for scope in aig.quant_scopes:
        body = close(lit_edge(scope.body_lit))
        resolved[scope.pseudo] = mgr.exists_edge(body, scope.bound_bits)

    return [Bdd(mgr, close(lit_edge(lit))) for lit in lits]
