"""Bit-blasting and BDD reasoning over word-level formulas."""

from __future__ import annotations

from typing import Optional

from .aig import Aig, BitVar, FALSE_LIT, TRUE_LIT, QuantScope
from .bdd import (Bdd, BddLimitError, BddManager, aig_to_bdd, any_sat,
                  cofactor, compose, exists, forall, is_sat, is_valid)
from .bitblast import (bitblast, bits_of, blast_expr, blast_path_check,
                       interleaved_order, sort_of)

__all__ = [
    "Aig", "BitVar", "FALSE_LIT", "TRUE_LIT", "QuantScope",
    "Bdd", "BddLimitError", "BddManager",
    "aig_to_bdd", "any_sat", "cofactor", "compose", "exists", "forall",
    "is_sat", "is_valid",
    "bitblast", "bits_of", "blast_expr", "blast_path_check",
    "interleaved_order", "sort_of",
    "to_bdd",
]


def to_bdd(aig: Aig, mgr: Optional[BddManager] = None,
           max_nodes: int = 1_000_000) -> Bdd:
    """BDD of the graph's output under the manager's variable order.

    Without an explicit manager, a fresh arena is created with the graph's
    inputs in first-seen order, bits interleaved LSB first.  Quantifier
    scopes recorded on the graph are eliminated innermost-first.
    """
    if mgr is None:
        mgr = BddManager(interleaved_order(aig), max_nodes=max_nodes)
    return aig_to_bdd(aig, mgr)[0]
