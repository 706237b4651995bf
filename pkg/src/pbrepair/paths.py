"""Control-flow path enumeration, SSA renaming, and region decomposition.

A path is the straight-line residue of one run through the program: every
branch decision becomes an `assume`, loops are unrolled up to a bound, and
assignments are renamed into single-assignment form (`v#0` is the entry
value of `v`, `v#k` the value after its k-th assignment).  Paths are
enumerated in lexicographic order of their guard-decision bitstrings with
0 (guard false) before 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from .lang import (Assert, Assign, Assume, Expr, FaultRegion, If, Program,
                   Unary, Var, While, rename_expr)


class PathError(Exception):
    """Base class for path-level errors."""


class RegionNotOnPathError(PathError):
    """The fault region is absent from (or only partially on) a path."""


class UnsupportedStatementError(PathError):
    """Statement form not supported by path extraction (e.g. assert)."""


# ---------------------------------------------------------------------------
# Path statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PAssume:
    cond: Expr
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class PAssign:
    var: str
    rhs: Expr
    line: Optional[int] = field(default=None, compare=False)


PathStmt = Union[PAssume, PAssign]


def base_name(name: str) -> str:
    """Program variable underlying an SSA / canonical name.

    Strips the `#k` version suffix, the `~k` suffix of quantifier-bound
    helpers, and the trailing prime of canonical synthesis outputs.
    """
    for sep in ("#", "~"):
        if sep in name:
            name = name.split(sep, 1)[0]
    return name[:-1] if name.endswith("'") else name


def ssa_name(var: str, version: int) -> str:
    return f"{var}#{version}"


@dataclass(frozen=True)
class Path:
    statements: tuple[PathStmt, ...]
    guard_bits: str
    # Indices of the statements that consumed a guard bit, one per bit.
    decision_indices: tuple[int, ...] = ()
    # (start, end) half-open statement range of the fault region, present
    # only when the region lies on this path completely and contiguously.
    region_span: Optional[tuple[int, int]] = None
    region_hits: int = 0
    # Final SSA version of every variable occurring on the path.
    ssa_map: Mapping[str, str] = field(default_factory=dict)
    bound_exceeded: bool = False

    def versions_after(self, index: int, variables: Sequence[str]) -> dict[str, str]:
        """Latest SSA name of each variable after `index` statements."""
        current = {v: ssa_name(v, 0) for v in variables}
        for s in self.statements[:index]:
            if isinstance(s, PAssign):
                current[base_name(s.var)] = s.var
        return current


# ---------------------------------------------------------------------------
# SSA renaming
# ---------------------------------------------------------------------------

def _ssa_rename(raw: Sequence[PathStmt]) -> tuple[tuple[PathStmt, ...], dict[str, str]]:
    versions: dict[str, int] = {}
    out: list[PathStmt] = []

    def current(name: str) -> str:
        return ssa_name(name, versions.get(name, 0))

    for s in raw:
        if isinstance(s, PAssume):
            mapping = {v: current(v) for v in _expr_var_names(s.cond)}
            out.append(PAssume(rename_expr(s.cond, mapping), s.line))
        else:
            mapping = {v: current(v) for v in _expr_var_names(s.rhs)}
            rhs = rename_expr(s.rhs, mapping)
            versions[s.var] = versions.get(s.var, 0) + 1
            out.append(PAssign(current(s.var), rhs, s.line))
    final = {v: ssa_name(v, k) for v, k in versions.items()}
    # Variables only read keep their entry version.
    for s in raw:
        names = _expr_var_names(s.cond if isinstance(s, PAssume) else s.rhs)
        for v in names:
            final.setdefault(v, ssa_name(v, 0))
    return tuple(out), final


def _expr_var_names(e: Expr) -> list[str]:
    from .lang import expr_vars
    return sorted(expr_vars(e))


def to_ssa(raw: Sequence[PathStmt]) -> Path:
    """Rename a raw statement sequence into SSA form."""
    stmts, final = _ssa_rename(raw)
    return Path(statements=stmts, guard_bits="", ssa_map=final)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def enumerate_paths(p: Program, unroll_bound: int,
                    region: Optional[FaultRegion] = None) -> Iterator[Path]:
    """Yield every entry-to-exit path, false branches first.

    Each `while` may be entered at most `unroll_bound` times per path; a
    path that would enter again is yielded truncated with `bound_exceeded`
    set.  Infeasible paths are not filtered.
    """
    if unroll_bound < 0:
        raise ValueError("unroll_bound must be >= 0")
    region_lines = set(region.lines) if region is not None else set()
    region_count = len(region_lines)

    prefix: list[PathStmt] = []
    bits: list[str] = []
    decisions: list[int] = []

    def finish(truncated: bool) -> Path:
        stmts, final = _ssa_rename(prefix)
        span: Optional[tuple[int, int]] = None
        hits = 0
        if region_lines:
            idx = [i for i, s in enumerate(stmts)
                   if s.line is not None and s.line in region_lines]
            hits = len(idx)
            if idx and len(idx) == region_count and idx == list(range(idx[0], idx[-1] + 1)):
                span = (idx[0], idx[-1] + 1)
        return Path(statements=stmts, guard_bits="".join(bits),
                    decision_indices=tuple(decisions), region_span=span,
                    region_hits=hits, ssa_map=final, bound_exceeded=truncated)

    def negate(cond: Expr) -> Expr:
        return Unary("!", cond)

    # `work` is a stack of (statement sequence, index) frames; the top frame
    # is the block currently executing, frames below are its continuations.
    Frame = tuple[Sequence, int]

    def walk(work: tuple[Frame, ...], budgets: dict[int, int]) -> Iterator[Path]:
        if not work:
            yield finish(truncated=False)
            return
        stmts, k = work[-1]
        if k == len(stmts):
            yield from walk(work[:-1], budgets)
            return
        s = stmts[k]
        rest = work[:-1] + ((stmts, k + 1),)
        if isinstance(s, Assign):
            prefix.append(PAssign(s.var, s.rhs, s.line))
            yield from walk(rest, budgets)
            prefix.pop()
        elif isinstance(s, Assume):
            prefix.append(PAssume(s.cond, s.line))
            yield from walk(rest, budgets)
            prefix.pop()
        elif isinstance(s, Assert):
            raise UnsupportedStatementError(
                f"line {s.line}: assert statements are not supported; "
                "express requirements in the postcondition")
        elif isinstance(s, If):
            for bit, cond, body in (("0", negate(s.cond), s.else_body),
                                    ("1", s.cond, s.then_body)):
                bits.append(bit)
                decisions.append(len(prefix))
                prefix.append(PAssume(cond, s.line))
                yield from walk(rest + ((body, 0),), budgets)
                prefix.pop()
                decisions.pop()
                bits.pop()
        elif isinstance(s, While):
            # Exit branch first (bit 0): skip past the loop.
            bits.append("0")
            decisions.append(len(prefix))
            prefix.append(PAssume(negate(s.cond), s.line))
            yield from walk(rest, budgets)
            prefix.pop()
            decisions.pop()
            bits.pop()
            # Taken branch (bit 1): run the body, then retest this loop.
            bits.append("1")
            decisions.append(len(prefix))
            prefix.append(PAssume(s.cond, s.line))
            budget = budgets.get(id(s), unroll_bound)
            if budget == 0:
                yield finish(truncated=True)
            else:
                new_budgets = dict(budgets)
                new_budgets[id(s)] = budget - 1
                yield from walk(work[:-1] + ((stmts, k), (s.body, 0)), new_budgets)
            prefix.pop()
            decisions.pop()
            bits.pop()
        else:  # pragma: no cover - exhaustive over Stmt
            raise UnsupportedStatementError(f"unsupported statement {s!r}")

    yield from walk(((p.body, 0),), {})


# ---------------------------------------------------------------------------
# Region decomposition
# ---------------------------------------------------------------------------

def split_at_region(pi: Path) -> tuple[Path, tuple[PAssign, ...], Path]:
    """Split a path into prefix, fault-region assignments, and suffix.

    Raises RegionNotOnPathError when the region is absent or does not form
    one contiguous, complete run on this path.
    """
    if pi.region_span is None:
        if pi.region_hits == 0:
            raise RegionNotOnPathError(
                f"fault region not on path {pi.guard_bits or '<straight-line>'}")
        raise RegionNotOnPathError(
            f"fault region only partially traversed on path "
            f"{pi.guard_bits or '<straight-line>'} "
            f"({pi.region_hits} of its statements executed, non-contiguously "
            "or repeatedly)")
    lo, hi = pi.region_span
    region = pi.statements[lo:hi]
    assert all(isinstance(s, PAssign) for s in region)

    def sub_path(stmts: tuple[PathStmt, ...], indices: range,
                 ssa_map: Mapping[str, str]) -> Path:
        decision_pairs = [(i, pos) for i, pos in enumerate(pi.decision_indices)
                          if pos in indices]
        return Path(
            statements=stmts,
            guard_bits="".join(pi.guard_bits[i] for i, _ in decision_pairs),
            decision_indices=tuple(pos - indices.start for _, pos in decision_pairs),
            ssa_map=ssa_map,
        )

    variables = sorted({base_name(n) for n in pi.ssa_map})
    prefix = sub_path(pi.statements[:lo], range(0, lo),
                      pi.versions_after(lo, variables))
    suffix = sub_path(pi.statements[hi:], range(hi, len(pi.statements)), pi.ssa_map)
    return prefix, tuple(region), suffix  # type: ignore[return-value]
