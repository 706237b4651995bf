"""Synthesis of replacement functions from a relational specification.

A `SynthesisProblem` is a formula over uncontrollable inputs (the region's
entry values, named like program variables) and controllable outputs (one
primed name per region output).  Realizability is the validity of
"for all inputs there is an output"; when it holds, one function per
output bit is extracted from BDD cofactors and lowered to a gate netlist.

Extraction rule, fixed for determinism: walk the output bits in order;
for bit y with the later bits quantified away, take f_y as the positive
cofactor of the relation at y (inputs with no consistent choice get 0),
substitute f_y back, continue.  Substituting choices back keeps the
relation realizable for the remaining bits, and the final candidate is
checked against the full relation before it is returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .boolean import (Aig, Bdd, BddManager, BitVar, FALSE_LIT, TRUE_LIT,
                      aig_to_bdd, bitblast, bits_of)
from .lang import Sort
from .paths import base_name
from .transform import Formula, SortMap


class UnrealizableError(Exception):
    """No choice of output functions can satisfy the specification.

    `witness` is one concrete assignment of the inputs for which no output
    values exist (the lexicographically smallest one).
    """

    def __init__(self, witness: dict[str, int]):
        pretty = ", ".join(f"{v}={x}" for v, x in witness.items()) or "<empty>"
        super().__init__(f"specification unrealizable; no outputs exist for {pretty}")
        self.witness = witness


@dataclass(frozen=True)
class SynthesisProblem:
    phi: Formula
    x_vars: tuple[str, ...]
    y_vars: tuple[str, ...]  # primed canonical output names
    width: int
    sorts: Optional[SortMap] = None

    def x_bits(self) -> list[BitVar]:
        return _interleave([bits_of(v, self.width, self.sorts) for v in self.x_vars])

    def y_bits(self) -> list[BitVar]:
        return _interleave([bits_of(v, self.width, self.sorts) for v in self.y_vars])

    def manager(self, max_nodes: int = 1_000_000) -> BddManager:
        """Arena with the canonical order: input bits first, output bits last."""
        return BddManager(self.x_bits() + self.y_bits(), max_nodes=max_nodes)


def _interleave(groups: Sequence[Sequence[BitVar]]) -> list[BitVar]:
    out: list[BitVar] = []
    for layer in itertools.zip_longest(*groups):
        out.extend(b for b in layer if b is not None)
    return out


@dataclass(frozen=True)
class RepairNetlist:
    """Combinational gate network computing each output bit from input bits."""
    aig: Aig
    outputs: tuple[tuple[str, tuple[int, ...]], ...]  # (output var, bit literals)

    def output_lits(self) -> list[int]:
        return [lit for _, lits in self.outputs for lit in lits]

    def to_aag(self) -> str:
        return self.aig.to_aag(self.output_lits())

    def evaluate(self, inputs: Mapping[str, int]) -> dict[str, int]:
        """Concrete output words for concrete input words."""
        assignment = {}
        for (name, bit) in self.aig.inputs:
            assignment[(name, bit)] = (inputs[name] >> bit) & 1
        result = {}
        for name, lits in self.outputs:
            bits = self.aig.evaluate(assignment, lits)
            result[name] = sum(b << i for i, b in enumerate(bits))
        return result


def _relation(problem: SynthesisProblem, mgr: BddManager) -> Bdd:
    aig = bitblast(problem.phi, problem.width, problem.sorts)
    for bit in problem.x_bits() + problem.y_bits():
        mgr.add_var(bit)  # ensure unused declared bits are still in the order
    return aig_to_bdd(aig, mgr)[0]


def is_realizable(problem: SynthesisProblem) -> bool:
    mgr = problem.manager()
    r = _relation(problem, mgr)
    projected = mgr.exists_edge(r.edge, problem.y_bits())
    return mgr.forall_edge(projected, problem.x_bits()) == mgr.true.edge


def extract(problem: SynthesisProblem, max_nodes: int = 1_000_000) -> RepairNetlist:
    """Extract a netlist satisfying the specification for every input.

    Raises UnrealizableError (with an input witness) when none exists.
    """
    mgr = problem.manager(max_nodes)
    relation = _relation(problem, mgr)
    x_bits = problem.x_bits()
    y_bits = problem.y_bits()

    projected = mgr.exists_edge(relation.edge, y_bits)
    if mgr.forall_edge(projected, x_bits) != mgr.true.edge:
        bad = mgr.any_sat_edge(-projected)
        witness = {v: _word_value(bad, v, problem.width, problem.sorts)
                   for v in problem.x_vars}
        raise UnrealizableError(witness)

    # Per-bit extraction, later bits quantified, chosen bits substituted back.
    functions: dict[BitVar, int] = {}
    current = relation.edge
    for i, y in enumerate(y_bits):
        rel_i = mgr.exists_edge(current, y_bits[i + 1:])
        f_i = mgr.cofactor_edge(rel_i, y, 1)
        functions[y] = f_i
        current = mgr.compose_edge(current, y, f_i)

    # Candidate soundness: substituting the functions must make the
    # specification valid for every input.
    check = relation.edge
    for y in y_bits:
        check = mgr.compose_edge(check, y, functions[y])
    if mgr.forall_edge(check, x_bits) != mgr.true.edge:
        raise AssertionError("extracted functions fail the specification "
                             "(internal synthesis bug)")

    return _lower(mgr, functions, problem)


def _word_value(bits: Mapping[BitVar, int], var: str, width: int,
                sorts: Optional[SortMap]) -> int:
    n = len(bits_of(var, width, sorts))
    return sum(bits.get((var, i), 0) << i for i in range(n))


def _lower(mgr: BddManager, functions: Mapping[BitVar, int],
           problem: SynthesisProblem) -> RepairNetlist:
    """Lower function BDDs to one shared AIG by Shannon expansion."""
    aig = Aig()
    memo: dict[int, int] = {}

    def lit_of(edge: int) -> int:
        if edge < 0:
            return lit_of(-edge) ^ 1
        if edge == mgr.true.edge:
            return TRUE_LIT
        cached = memo.get(edge)
        if cached is not None:
            return cached
        level, lo, hi = mgr.node(edge)
        name, bit = mgr.var_at(level)
        sel = aig.input_lit(name, bit)
        lit = aig.mux_(sel, lit_of(hi), lit_of(lo))
        memo[edge] = lit
        return lit

    outputs = []
    for y in problem.y_vars:
        lits = tuple(lit_of(functions[b]) for b in bits_of(y, problem.width,
                                                           problem.sorts))
        outputs.append((base_name(y), lits))
    return RepairNetlist(aig, tuple(outputs))


def count_gates(netlist: RepairNetlist) -> int:
    """AND gates reachable from the outputs after structural hashing."""
    return netlist.aig.reachable_ands(netlist.output_lits())
