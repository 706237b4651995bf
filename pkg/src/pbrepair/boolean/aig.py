"""And-inverter graphs with structural hashing.

Nodes are numbered from 0 (the constant-false node); a literal is
`2*node + 1` when complemented.  AND nodes always reference operands with
smaller ids, and no two AND nodes share the same ordered operand pair.

Quantified subformulas ride along as *pseudo-inputs*: an existential
subformula is blasted into the graph over a private instance of its bound
variable and represented by a fresh pseudo-input standing for its truth
value.  The scopes are recorded innermost-first so the BDD layer can
eliminate them by quantification and composition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

FALSE_LIT = 0
TRUE_LIT = 1

BitVar = tuple[str, int]


@dataclass(frozen=True)
class QuantScope:
    """One existential subformula: quantify `bound_bits` out of `body_lit`,
    then substitute the result for pseudo-input node `pseudo`."""
    pseudo: int
    var: str
    bound_bits: tuple[BitVar, ...]
    body_lit: int


class Aig:
    def __init__(self) -> None:
        # kind tuples: ("const",) | ("input", var, bit) | ("and", a, b)
        self._nodes: list[tuple] = [("const",)]
        self._strash: dict[tuple[int, int], int] = {}
        self._inputs: dict[BitVar, int] = {}
        self.quant_scopes: list[QuantScope] = []
        self.output: int = FALSE_LIT

    # -- construction -------------------------------------------------------

    def input_lit(self, var: str, bit: int) -> int:
        key = (var, bit)
        node = self._inputs.get(key)
        if node is None:
            node = len(self._nodes)
            self._nodes.append(("input", var, bit))
            self._inputs[key] = node
        return node << 1

    def and_(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == FALSE_LIT or a == (b ^ 1):
            return FALSE_LIT
        if a == TRUE_LIT:
            return b
        if a == b:
            return a
        key = (a, b)
        node = self._strash.get(key)
        if node is None:
            node = len(self._nodes)
            self._nodes.append(("and", a, b))
            self._strash[key] = node
        return node << 1

    @staticmethod
    def not_(a: int) -> int:
        return a ^ 1

    def or_(self, a: int, b: int) -> int:
        return self.and_(a ^ 1, b ^ 1) ^ 1

    def xor_(self, a: int, b: int) -> int:
        return self.or_(self.and_(a, b ^ 1), self.and_(a ^ 1, b))

    def iff_(self, a: int, b: int) -> int:
        return self.xor_(a, b) ^ 1

    def implies_(self, a: int, b: int) -> int:
        return self.and_(a, b ^ 1) ^ 1

    def mux_(self, sel: int, hi: int, lo: int) -> int:
        return self.or_(self.and_(sel, hi), self.and_(sel ^ 1, lo))

    def add_quant_scope(self, var: str, bound_bits: Sequence[BitVar],
                        body_lit: int) -> int:
        pseudo = len(self._nodes)
        self._nodes.append(("input", f"?{len(self.quant_scopes)}", 0))
        self.quant_scopes.append(
            QuantScope(pseudo, var, tuple(bound_bits), body_lit))
        return pseudo << 1

    # -- inspection -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, i: int) -> tuple:
        return self._nodes[i]

    @property
    def inputs(self) -> dict[BitVar, int]:
        return dict(self._inputs)

    def pseudo_nodes(self) -> set[int]:
        return {s.pseudo for s in self.quant_scopes}

    def num_ands(self) -> int:
        return sum(1 for n in self._nodes if n[0] == "and")

    def reachable_ands(self, lits: Iterable[int]) -> int:
        """Distinct AND nodes reachable from the given literals."""
        seen: set[int] = set()
        stack = [lit >> 1 for lit in lits]
        count = 0
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            kind = self._nodes[node]
            if kind[0] == "and":
                count += 1
                stack.append(kind[1] >> 1)
                stack.append(kind[2] >> 1)
        return count

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, assignment: Mapping[BitVar, int],
                 lits: Optional[Sequence[int]] = None) -> list[int]:
        """Evaluate literals (default: the output) under a bit assignment.

        Only valid for quantifier-free graphs.
        """
        if self.quant_scopes:
            raise ValueError("cannot evaluate a graph with quantifier scopes")
        if lits is None:
            lits = [self.output]
        values = [0] * len(self._nodes)
        for i, kind in enumerate(self._nodes):
            if kind[0] == "input":
                values[i] = assignment.get((kind[1], kind[2]), 0) & 1
            elif kind[0] == "and":
                values[i] = (values[kind[1] >> 1] ^ (kind[1] & 1)) & \
                            (values[kind[2] >> 1] ^ (kind[2] & 1))
        return [values[lit >> 1] ^ (lit & 1) for lit in lits]

    # -- dump -----------------------------------------------------------------

    def to_aag(self, outputs: Optional[Sequence[int]] = None) -> str:
        """ASCII netlist dump, one AND per line (aag-style)."""
        if outputs is None:
            outputs = [self.output]
        n_in = sum(1 for n in self._nodes if n[0] == "input")
        n_and = self.num_ands()
        lines = [f"aag {len(self._nodes) - 1} {n_in} 0 {len(outputs)} {n_and}"]
        symbols = []
        for i, kind in enumerate(self._nodes):
            if kind[0] == "input":
                lines.append(str(i << 1))
                symbols.append(f"i{len(symbols)} {kind[1]}.{kind[2]}")
        for lit in outputs:
            lines.append(str(lit))
        for i, kind in enumerate(self._nodes):
            if kind[0] == "and":
                lines.append(f"{i << 1} {kind[1]} {kind[2]}")
        return "\n".join(lines + symbols) + "\n"
