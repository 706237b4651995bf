"""The iterative repair loop and its supporting machinery.

One run: preprocess the fault region, then repeatedly model-check the
candidate program.  Each failing path is decomposed around the region into
prefix and suffix; the precondition is pushed forward through the prefix
and the postcondition pulled backward through the suffix, both normalized
into a canonical namespace (bare program names for region-entry values,
primed names for region outputs).  The conjunction of all such conditions
is the synthesis specification; the extracted netlist replaces the region
and the loop continues until verification succeeds or a repair is proven
impossible.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from . import lang
from .lang import (Assign, Assume, Assert, Expr, FaultRegion, If, Program,
                   Sort, While, eval_expr, emit, preprocess_guards)
from .paths import (PAssign, Path, RegionNotOnPathError, base_name,
                    enumerate_paths, split_at_region, ssa_name)
from .repair import apply_repair, netlist_to_stmts
from .synth import (RepairNetlist, SynthesisProblem, UnrealizableError,
                    count_gates, extract)
from .transform import (Atom, Exists, Formula, Implies, conj, free_vars,
                        holds, rename, sp_seq, wp_seq)
from .boolean import BddLimitError


class LoopBoundExceededError(Exception):
    """Concrete execution hit the unroll bound (verification inconclusive)."""


class BoundExceededError(Exception):
    """A path was truncated at the unroll bound and no complete path fails."""


class InputSpaceTooLargeError(Exception):
    """Exhaustive verification refused (too many input bits)."""


class MonotonicityError(Exception):
    """A previously repaired counterexample failed again (internal bug)."""


# ---------------------------------------------------------------------------
# Concrete interpreter (the independent oracle)
# ---------------------------------------------------------------------------

ConcreteState = dict[str, int]


def interpret(p: Program, state: Mapping[str, int], unroll_bound: int = 8,
              strict_bound: bool = False) -> Optional[ConcreteState]:
    """Big-step execution from a total initial state.

    Returns None when an assume fails (the execution is filtered) or, with
    `strict_bound` unset, when a loop exceeds the unroll bound; with
    `strict_bound` set the latter raises LoopBoundExceededError instead.
    The precondition is *not* checked here: it filters at verification
    time, not at interpretation time.
    """
    env: ConcreteState = {v: state[v] for v in p.variables}

    class _AssumeFailed(Exception):
        pass

    def run(body: Sequence) -> None:
        for s in body:
            if isinstance(s, Assign):
                env[s.var] = eval_expr(s.rhs, env, p.width)
            elif isinstance(s, (Assume, Assert)):
                if not eval_expr(s.cond, env, p.width):
                    raise _AssumeFailed
            elif isinstance(s, If):
                run(s.then_body if eval_expr(s.cond, env, p.width) else s.else_body)
            elif isinstance(s, While):
                for _ in range(unroll_bound):
                    if not eval_expr(s.cond, env, p.width):
                        break
                    run(s.body)
                else:
                    if eval_expr(s.cond, env, p.width):
                        raise LoopBoundExceededError(
                            f"line {s.line}: loop still live after "
                            f"{unroll_bound} iterations")

    try:
        run(p.body)
    except _AssumeFailed:
        return None
    except LoopBoundExceededError:
        if strict_bound:
            raise
        return None
    return env


def observable_inputs(p: Program) -> tuple[str, ...]:
    """Variables whose initial value some execution can observe.

    A variable's initial value matters only if the precondition mentions
    it, some statement may read it before it is definitely assigned, or
    the postcondition mentions it and some path reaches the exit without
    assigning it.  Computed by a standard definite-assignment walk
    (branches intersect, loop bodies may not run), over-approximating
    reads inside loops by using the loop-entry assignment set.
    """
    relevant = set(lang.expr_vars(p.pre))

    def note_reads(e: Expr, assigned: frozenset[str]) -> None:
        relevant.update(v for v in lang.expr_vars(e) if v not in assigned)

    def walk(body: Sequence, assigned: frozenset[str]) -> frozenset[str]:
        for s in body:
            if isinstance(s, Assign):
                note_reads(s.rhs, assigned)
                assigned |= {s.var}
            elif isinstance(s, (Assume, Assert)):
                note_reads(s.cond, assigned)
            elif isinstance(s, If):
                note_reads(s.cond, assigned)
                assigned = walk(s.then_body, assigned) & walk(s.else_body, assigned)
            elif isinstance(s, While):
                note_reads(s.cond, assigned)
                walk(s.body, assigned)  # body may not run: keep entry set
        return assigned

    at_exit = walk(p.body, frozenset())
    relevant.update(v for v in lang.expr_vars(p.post) if v not in at_exit)
    return tuple(v for v in p.variables if v in relevant)


def input_states(p: Program) -> Iterable[ConcreteState]:
    """Every initial state that can influence an execution.

    Observable inputs range over their full domains; variables that are
    provably written before any read stay 0 (their value is never seen).
    """
    inputs = observable_inputs(p)
    domains = []
    for v in inputs:
        domains.append((0, 1) if p.sorts[v] is Sort.BOOL
                       else tuple(range(1 << p.width)))
    base = {v: 0 for v in p.variables}
    for values in itertools.product(*domains):
        state = dict(base)
        state.update(zip(inputs, values))
        yield state


def _input_bits(p: Program) -> int:
    return sum(1 if p.sorts[v] is Sort.BOOL else p.width
               for v in observable_inputs(p))


def find_violation(p: Program, unroll_bound: int = 8) -> Optional[ConcreteState]:
    """The first initial state (in enumeration order) that satisfies the
    precondition but ends in a state violating the postcondition, or runs
    past the unroll bound."""
    if _input_bits(p) > 24:
        raise InputSpaceTooLargeError(
            f"{_input_bits(p)} observable input bits is too many for "
            "exhaustive search")
    for state in input_states(p):
        if not eval_expr(p.pre, state, p.width):
            continue
        try:
            final = interpret(p, state, unroll_bound, strict_bound=True)
        except LoopBoundExceededError:
            return state
        if final is None:
            continue
        if not eval_expr(p.post, final, p.width):
            return state
    return None


def verify_exhaustive(p: Program, unroll_bound: int = 8) -> bool:
    """Ground-truth correctness by enumerating every input."""
    return find_violation(p, unroll_bound) is None


# ---------------------------------------------------------------------------
# Model checking
# ---------------------------------------------------------------------------

def model_check(p: Program, unroll_bound: int,
                region: Optional[FaultRegion] = None) -> Optional[Path]:
    """First path (in enumeration order) whose Hoare triple fails.

    Returns None when every complete path holds and no path was truncated;
    raises BoundExceededError when all complete paths hold but a truncated
    one exists (verification is then inconclusive).
    """
    pre, post = Atom(p.pre), Atom(p.post)
    truncated = False
    for pi in enumerate_paths(p, unroll_bound, region):
        if pi.bound_exceeded:
            truncated = True
            continue
        if not holds(pre, pi, post, p.width, p.sorts):
            return pi
    if truncated:
        raise BoundExceededError(
            f"no complete path fails, but the unroll bound {unroll_bound} "
            "was reached; verification is inconclusive")
    return None


# ---------------------------------------------------------------------------
# Specification accumulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Counterexample:
    guard_bits: str
    prefix: Path
    region_stmts: tuple[PAssign, ...]
    suffix: Path


class CounterexampleSet:
    """Ordered, guard-bits-deduplicated set of decomposed counterexamples."""

    def __init__(self) -> None:
        self.items: list[Counterexample] = []
        self._seen: set[str] = set()

    def add(self, ce: Counterexample) -> None:
        if ce.guard_bits in self._seen:
            raise MonotonicityError(
                f"path {ce.guard_bits!r} produced a second counterexample; "
                "a previously repaired path regressed")
        self._seen.add(ce.guard_bits)
        self.items.append(ce)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


def y_name(var: str) -> str:
    """Canonical controllable name for a region output."""
    return var + "'"


def build_phi(ces: Iterable[Counterexample], pre: Expr, post: Expr,
              x_vars: Sequence[str], outputs: Sequence[str], width: int,
              sorts: Mapping[str, Sort]) -> SynthesisProblem:
    """Conjoin the local verification conditions of all counterexamples.

    Per counterexample: push the precondition forward through the prefix
    and rename each variable's version at region entry to its bare name;
    pull the postcondition backward through the suffix and rename each
    variable's version at region exit to its bare name, except region
    outputs, which become primed controllable names.  Versions internal to
    the prefix stay existentially bound inside the antecedent, so each
    conjunct constrains only entry values and outputs.
    """
    x_set = set(x_vars)
    conjuncts = []
    for ce in ces:
        entry = ce.prefix.ssa_map
        entry = {v: entry.get(v, ssa_name(v, 0)) for v in x_vars}

        fwd = sp_seq(rename(Atom(pre), {v: ssa_name(v, 0) for v in x_vars}),
                     ce.prefix, sorts)
        fwd = rename(fwd, {entry[v]: v for v in x_vars})
        leftovers = sorted(free_vars(fwd) - x_set)
        for v in reversed(leftovers):
            fwd = Exists(v, fwd)

        exit_versions = dict(entry)
        for s in ce.region_stmts:
            exit_versions[base_name(s.var)] = s.var
        final = {v: ce.suffix.ssa_map.get(v, exit_versions[v]) for v in x_vars}
        bwd = wp_seq(rename(Atom(post), final), ce.suffix)
        out_set = set(outputs)
        bwd = rename(bwd, {exit_versions[v]: (y_name(v) if v in out_set else v)
                           for v in x_vars})

        conjuncts.append(Implies(fwd, bwd))

    phi = conj(conjuncts)
    y_vars = tuple(y_name(v) for v in outputs)
    spec_sorts = dict(sorts)
    for v in outputs:
        spec_sorts[y_name(v)] = sorts.get(v, Sort.WORD)
    problem = SynthesisProblem(phi, tuple(x_vars), y_vars, width, spec_sorts)
    unexpected = free_vars(phi) - set(x_vars) - set(y_vars)
    assert not unexpected, f"specification leaks variables {sorted(unexpected)}"
    return problem


# ---------------------------------------------------------------------------
# The repair loop
# ---------------------------------------------------------------------------

OUTCOME_REPAIRED = "Repaired"
OUTCOME_UNREALIZABLE = "Unrealizable"
OUTCOME_REGION_NOT_ON_PATH = "RegionNotOnPath"
OUTCOME_BOUND_EXCEEDED = "BoundExceeded"
OUTCOME_RESOURCE_LIMIT = "ResourceLimit"

EXIT_CODES = {
    OUTCOME_REPAIRED: 0,
    OUTCOME_UNREALIZABLE: 2,
    OUTCOME_REGION_NOT_ON_PATH: 3,
    OUTCOME_BOUND_EXCEEDED: 4,
    OUTCOME_RESOURCE_LIMIT: 5,
}


@dataclass
class IterationRecord:
    path: str
    gates: Optional[int]
    realizable: bool
    millis: float


@dataclass
class RunReport:
    outcome: str
    iterations: list[IterationRecord]
    total_millis: float
    program: str
    detail: str = ""
    witness: Optional[dict[str, int]] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.outcome]

    def paths_summary(self) -> str:
        return " ".join(f"{it.path or '-'}[{it.gates if it.gates is not None else '-'}]"
                        for it in self.iterations)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "outcome": self.outcome,
            "iterations": [
                {"path": it.path, "gates": it.gates, "realizable": it.realizable,
                 **({"millis": round(it.millis, 3)} if include_timing else {})}
                for it in self.iterations
            ],
            "program": self.program,
        }
        if include_timing:
            d["total_millis"] = round(self.total_millis, 3)
        if self.detail:
            d["detail"] = self.detail
        if self.witness is not None:
            d["witness"] = self.witness
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2) + "\n"


TraceFn = Callable[[str], None]


def pbrepair(p: Program, region_start: int, region_end: Optional[int] = None,
             unroll_bound: int = 8, max_iters: int = 64,
             trace: Optional[TraceFn] = None) -> RunReport:
    """Repair `p` within the given region, or prove that impossible.

    The program is preprocessed (guards in the region are hoisted into
    boolean temporaries), then the model-check / synthesize / splice loop
    runs until no counterexample remains.  `max_iters` is a safety net
    only: finite paths plus specification accumulation guarantee progress,
    so hitting it indicates an internal bug rather than a hard input.
    """
    t_start = time.perf_counter()
    candidate, region = preprocess_guards(p, region_start, region_end)
    x_vars = tuple(candidate.variables)
    sorts = dict(candidate.sorts)

    ces = CounterexampleSet()
    records: list[IterationRecord] = []

    def report(outcome: str, detail: str = "",
               witness: Optional[dict[str, int]] = None) -> RunReport:
        total = (time.perf_counter() - t_start) * 1000.0
        return RunReport(outcome, records, total, emit(candidate), detail, witness)

    for iteration in range(max_iters + 1):
        t_iter = time.perf_counter()
        try:
            pi = model_check(candidate, unroll_bound, region)
        except BoundExceededError as exc:
            return report(OUTCOME_BOUND_EXCEEDED, str(exc))
        if pi is None:
            return report(OUTCOME_REPAIRED)
        if iteration == max_iters:
            raise MonotonicityError(
                f"no convergence after {max_iters} iterations; paths are "
                "finite, so this indicates an internal monotonicity bug")
        if trace:
            trace(trace_listing(candidate, pi, region))
        try:
            prefix, region_stmts, suffix = split_at_region(pi)
        except RegionNotOnPathError as exc:
            return report(OUTCOME_REGION_NOT_ON_PATH,
                          f"counterexample {pi.guard_bits!r}: {exc}")
        ces.add(Counterexample(pi.guard_bits, prefix, region_stmts, suffix))

        problem = build_phi(ces, candidate.pre, candidate.post, x_vars,
                            region.outputs, candidate.width, sorts)
        try:
            netlist = extract(problem)
        except UnrealizableError as exc:
            records.append(IterationRecord(
                pi.guard_bits, None, False,
                (time.perf_counter() - t_iter) * 1000.0))
            return report(OUTCOME_UNREALIZABLE, str(exc), exc.witness)
        except BddLimitError as exc:
            return report(OUTCOME_RESOURCE_LIMIT, str(exc))

        stmts = netlist_to_stmts(netlist, candidate.variables, sorts,
                                 candidate.width)
        candidate, region = apply_repair(candidate, region, stmts)
        _assert_monotone(candidate, region, ces, unroll_bound)
        records.append(IterationRecord(
            pi.guard_bits, count_gates(netlist), True,
            (time.perf_counter() - t_iter) * 1000.0))

    raise AssertionError("unreachable")


def _assert_monotone(candidate: Program, region: FaultRegion,
                     ces: CounterexampleSet, unroll_bound: int) -> None:
    """Every recorded counterexample path must hold under the new candidate."""
    wanted = {ce.guard_bits for ce in ces}
    pre, post = Atom(candidate.pre), Atom(candidate.post)
    for pi in enumerate_paths(candidate, unroll_bound, region):
        if pi.guard_bits in wanted and not pi.bound_exceeded:
            wanted.discard(pi.guard_bits)
            if not holds(pre, pi, post, candidate.width, candidate.sorts):
                raise MonotonicityError(
                    f"path {pi.guard_bits!r} regressed after splicing the repair")
            if not wanted:
                return


def trace_listing(p: Program, pi: Path, region: FaultRegion) -> str:
    """Annotated listing of a counterexample: the forward-propagated
    condition before/after every statement, in source syntax."""
    from .transform import format_formula, sp
    from .paths import PAssume
    from .lang import format_expr

    lines = [f"counterexample path {pi.guard_bits or '<straight-line>'}"]
    phi: Formula = rename(Atom(p.pre), {v: ssa_name(v, 0) for v in p.variables})
    lines.append(f"  // {format_formula(phi)}")
    for s in pi.statements:
        if isinstance(s, PAssume):
            text = f"assume({format_expr(s.cond)});"
        else:
            text = f"{s.var} = {format_expr(s.rhs)};"
        marker = " <- fault region" if _in_region(s.line, region) else ""
        phi = sp(phi, s, p.sorts)
        lines.append(f"  {text}{marker}")
        lines.append(f"  // {format_formula(phi)}")
    return "\n".join(lines) + "\n"


def _in_region(line: Optional[int], region: FaultRegion) -> bool:
    return line is not None and region.start <= line <= region.end


# ---------------------------------------------------------------------------
# Fault seeding and the benchmark harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeededFault:
    line: int
    kind: str  # "Assignment" | "Condition"
    description: str
    program: Program


_FLIPS = {"<": ("<=", ">"), "<=": ("<", ">="), ">": (">=", "<"),
          ">=": (">", "<="), "==": ("!=",), "!=": ("==",)}


def _mutate_expr_vars(e: Expr, variables: Sequence[str]):
    """Yield (description, mutated expr) for every single variable swap."""
    from .lang import Binary, Unary, Var

    if isinstance(e, Var):
        for other in variables:
            if other != e.name:
                yield f"{e.name} -> {other}", Var(other)
    elif isinstance(e, Unary):
        for desc, sub in _mutate_expr_vars(e.operand, variables):
            yield desc, Unary(e.op, sub)
    elif isinstance(e, Binary):
        for desc, sub in _mutate_expr_vars(e.left, variables):
            yield desc, Binary(e.op, sub, e.right)
        for desc, sub in _mutate_expr_vars(e.right, variables):
            yield desc, Binary(e.op, e.left, sub)


def _mutate_expr_ops(e: Expr):
    """Yield (description, mutated expr) for every comparison flip."""
    from .lang import Binary, Unary

    if isinstance(e, Unary):
        for desc, sub in _mutate_expr_ops(e.operand):
            yield desc, Unary(e.op, sub)
    elif isinstance(e, Binary):
        if e.op in _FLIPS:
            for new_op in _FLIPS[e.op]:
                yield f"{e.op} -> {new_op}", Binary(new_op, e.left, e.right)
        for desc, sub in _mutate_expr_ops(e.left):
            yield desc, Binary(e.op, sub, e.right)
        for desc, sub in _mutate_expr_ops(e.right):
            yield desc, Binary(e.op, e.left, sub)


def seed_faults(p: Program, unroll_bound: int = 8) -> list[SeededFault]:
    """Deterministic mutation battery; only genuinely faulty mutants kept.

    Assignments get their right-hand variables swapped with every other
    declared variable (declaration order); guards get their comparison
    operators flipped.  Mutants that still verify are dropped.
    """
    faults: list[SeededFault] = []
    for s in p.statements():
        if isinstance(s, Assign):
            candidates = [(d, _replace_stmt(p, s.line, rhs=m), "Assignment")
                          for d, m in _mutate_expr_vars(s.rhs, p.variables)]
        elif isinstance(s, (If, While)):
            candidates = [(d, _replace_stmt(p, s.line, cond=m), "Condition")
                          for d, m in _mutate_expr_ops(s.cond)]
        else:
            continue
        for description, mutant, kind in candidates:
            if not verify_exhaustive(mutant, unroll_bound):
                faults.append(SeededFault(s.line, kind,
                                          f"line {s.line}: {description}", mutant))
    return faults


def _replace_stmt(p: Program, line: int, rhs: Optional[Expr] = None,
                  cond: Optional[Expr] = None) -> Program:
    def walk(body: tuple) -> tuple:
        out = []
        for s in body:
            if s.line == line:
                if rhs is not None:
                    assert isinstance(s, Assign)
                    s = Assign(s.line, s.var, rhs)
                else:
                    assert cond is not None
                    if isinstance(s, If):
                        s = If(s.line, cond, s.then_body, s.else_body)
                    else:
                        assert isinstance(s, While)
                        s = While(s.line, cond, s.body)
                out.append(s)
                continue
            if isinstance(s, If):
                out.append(If(s.line, s.cond, walk(s.then_body), walk(s.else_body)))
            elif isinstance(s, While):
                out.append(While(s.line, s.cond, walk(s.body)))
            else:
                out.append(s)
        return tuple(out)

    return Program(p.name, p.width, p.variables, dict(p.sorts), p.pre,
                   p.post, walk(p.body))


@dataclass
class BenchRow:
    line: int
    kind: str
    description: str
    report: RunReport

    def to_dict(self, include_timing: bool = True) -> dict:
        return {"line": self.line, "type": self.kind,
                "fault": self.description,
                "iteration_count": len(self.report.iterations),
                "report": self.report.to_dict(include_timing)}


def bench(p: Program, unroll_bound: int = 8, max_iters: int = 64,
          trace: Optional[TraceFn] = None) -> list[BenchRow]:
    """Seed one fault per mutable line and repair each with the region
    pinned at the mutated line (first faulty mutant per line wins)."""
    by_line: dict[int, SeededFault] = {}
    for fault in seed_faults(p, unroll_bound):
        by_line.setdefault(fault.line, fault)

    rows = []
    guard_count = sum(1 for s in p.statements() if isinstance(s, (If, While)))
    for line in sorted(by_line):
        fault = by_line[line]
        report = pbrepair(fault.program, line, line, unroll_bound, max_iters,
                          trace)
        if report.outcome == OUTCOME_REPAIRED:
            assert len(report.iterations) <= (1 << guard_count), \
                "iteration count exceeded the number of paths"
            repaired = lang.parse(report.program, p.width)
            assert verify_exhaustive(repaired, unroll_bound), \
                f"line {line}: repaired program fails exhaustive verification"
        rows.append(BenchRow(line, fault.kind, fault.description, report))
    return rows


def bench_table(rows: Sequence[BenchRow]) -> str:
    header = f"{'Line':>4}  {'Type':<10}  {'Iterations':>10}  {'Paths[gates]':<42}  {'Time[s]':>8}"
    lines = [header, "-" * len(header)]
    for row in rows:
        summary = row.report.paths_summary() or "-"
        lines.append(
            f"{row.line:>4}  {row.kind:<10}  {len(row.report.iterations):>10}  "
            f"{summary:<42}  {row.report.total_millis / 1000.0:>8.2f}")
    return "\n".join(lines) + "\n"
