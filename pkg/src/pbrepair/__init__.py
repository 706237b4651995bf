"""Path-based repair of small imperative bit-vector programs.

Given a program, a pre/postcondition pair, and a fault region, the repair
loop collects symbolic counterexample paths, derives local verification
conditions by forward/backward predicate propagation, synthesizes
replacement code with BDD-based quantifier elimination (detecting
unrealizability exactly), and splices a provably correct repair back into
the source.
"""

from .lang import (FaultRegion, LangError, ParseError, Program, RegionError,
                   Sort, SortError, emit, parse, preprocess_guards)
from .paths import Path, RegionNotOnPathError, enumerate_paths, split_at_region, to_ssa
from .transform import (Atom, Formula, holds, sp, sp_seq, wp, wp_seq)
from .synth import (RepairNetlist, SynthesisProblem, UnrealizableError,
                    count_gates, extract, is_realizable)
from .repair import apply_repair, netlist_to_stmts
from .driver import (BoundExceededError, MonotonicityError, RunReport,
                     bench, build_phi, interpret, model_check, pbrepair,
                     seed_faults, verify_exhaustive)

__version__ = "0.1.0"

__all__ = [
    "FaultRegion", "LangError", "ParseError", "Program", "RegionError",
    "Sort", "SortError", "emit", "parse", "preprocess_guards",
    "Path", "RegionNotOnPathError", "enumerate_paths", "split_at_region",
    "to_ssa",
    "Atom", "Formula", "holds", "sp", "sp_seq", "wp", "wp_seq",
    "RepairNetlist", "SynthesisProblem", "UnrealizableError", "count_gates",
    "extract", "is_realizable",
    "apply_repair", "netlist_to_stmts",
    "BoundExceededError", "MonotonicityError", "RunReport", "bench",
    "build_phi", "interpret", "model_check", "pbrepair", "seed_faults",
    "verify_exhaustive",
    "__version__",
]
