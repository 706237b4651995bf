"""Frontend for the mini imperative bit-vector language.

Programs are written one statement per line::

    prog minmax(input1, input2, input3, most, least)
    pre: true
    most = input1;
    ...
    post: most >= input1 && ...

All declared variables share one global bit width; arithmetic is unsigned
modulo 2**width and comparisons are unsigned.  Statements are addressed by
*logical* line numbers: statements are numbered 1, 2, 3, ... in source
order (headers, braces, comments and blank lines do not consume numbers).
Parse errors report physical line/column instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union


class LangError(Exception):
    """Base class for frontend errors."""


class ParseError(LangError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


class SortError(LangError):
    """Ill-sorted expression or statement (line refers to logical numbering)."""


class RegionError(LangError):
    """Invalid fault-region selection."""


class Sort(Enum):
    WORD = "word"
    BOOL = "bool"


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # '!', '~', '-'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Lit, BoolLit, Var, Unary, Binary]

WORD_BINOPS = {"+", "-", "&", "|", "^", "<<", ">>"}
CMP_OPS = {"<", "<=", ">", ">=", "==", "!="}
LOGIC_OPS = {"&&", "||"}

# Binding strength, loosest first.  `&`/`|`/`^` bind tighter than
# comparisons (unlike C) so masks read without parentheses.
_PRECEDENCE = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "|": 5, "^": 6, "&": 7,
    "<<": 8, ">>": 8,
    "+": 9, "-": 9,
}
_UNARY_LEVEL = 10
_ATOM_LEVEL = 11


def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return expr_vars(e.operand)
    if isinstance(e, Binary):
        return expr_vars(e.left) | expr_vars(e.right)
    return set()


def subst_expr(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Simultaneously replace variables by expressions."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Unary):
        return Unary(e.op, subst_expr(e.operand, mapping))
    if isinstance(e, Binary):
        return Binary(e.op, subst_expr(e.left, mapping), subst_expr(e.right, mapping))
    return e


def rename_expr(e: Expr, mapping: Mapping[str, str]) -> Expr:
    return subst_expr(e, {old: Var(new) for old, new in mapping.items()})


def expr_sort(e: Expr, sorts: Mapping[str, Sort], width: int) -> Sort:
    """Sort of `e`, raising SortError on any violation (incl. literal range)."""
    if isinstance(e, Lit):
        if not 0 <= e.value < (1 << width):
            raise SortError(f"literal {e.value} out of range for width {width}")
        return Sort.WORD
    if isinstance(e, BoolLit):
        return Sort.BOOL
    if isinstance(e, Var):
        if e.name not in sorts:
            raise SortError(f"undeclared variable '{e.name}'")
        return sorts[e.name]
    if isinstance(e, Unary):
        s = expr_sort(e.operand, sorts, width)
        if e.op == "!":
            if s is not Sort.BOOL:
                raise SortError("'!' expects a boolean operand")
            return Sort.BOOL
        if s is not Sort.WORD:
            raise SortError(f"'{e.op}' expects a word operand")
        return Sort.WORD
    if isinstance(e, Binary):
        ls = expr_sort(e.left, sorts, width)
        rs = expr_sort(e.right, sorts, width)
        if e.op in WORD_BINOPS:
            if ls is not Sort.WORD or rs is not Sort.WORD:
                raise SortError(f"'{e.op}' expects word operands")
            return Sort.WORD
        if e.op in CMP_OPS:
            if ls is not Sort.WORD or rs is not Sort.WORD:
                raise SortError(f"'{e.op}' compares words, not booleans")
            return Sort.BOOL
        if e.op in LOGIC_OPS:
            if ls is not Sort.BOOL or rs is not Sort.BOOL:
                raise SortError(f"'{e.op}' expects boolean operands")
            return Sort.BOOL
    raise SortError(f"malformed expression {e!r}")


def eval_expr(e: Expr, env: Mapping[str, int], width: int) -> int:
    """Concrete evaluation.  Booleans are 0/1; words wrap modulo 2**width."""
    mask = (1 << width) - 1
    if isinstance(e, Lit):
        return e.value & mask
    if isinstance(e, BoolLit):
        return 1 if e.value else 0
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Unary):
        v = eval_expr(e.operand, env, width)
        if e.op == "!":
            return 0 if v else 1
        if e.op == "~":
            return (~v) & mask
        if e.op == "-":
            return (-v) & mask
    if isinstance(e, Binary):
        a = eval_expr(e.left, env, width)
        b = eval_expr(e.right, env, width)
        op = e.op
        if op == "+":
            return (a + b) & mask
        if op == "-":
            return (a - b) & mask
        if op == "&":
            return a & b
        if op == "|":
            return a | b
        if op == "^":
            return a ^ b
        if op == "<<":
            return (a << b) & mask if b < width else 0
        if op == ">>":
            return (a >> b) if b < width else 0
        if op == "<":
            return 1 if a < b else 0
        if op == "<=":
            return 1 if a <= b else 0
        if op == ">":
            return 1 if a > b else 0
        if op == ">=":
            return 1 if a >= b else 0
        if op == "==":
            return 1 if a == b else 0
        if op == "!=":
            return 1 if a != b else 0
        if op == "&&":
            return 1 if a and b else 0
        if op == "||":
            return 1 if a or b else 0
    raise ValueError(f"cannot evaluate {e!r}")


def format_expr(e: Expr) -> str:
    def fmt(e: Expr, level: int) -> str:
        if isinstance(e, Lit):
            return str(e.value)
        if isinstance(e, BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, Var):
            return e.name
        if isinstance(e, Unary):
            inner = fmt(e.operand, _ATOM_LEVEL)
            if not isinstance(e.operand, (Lit, BoolLit, Var)):
                inner = f"({inner})"
            return f"{e.op}{inner}"
        assert isinstance(e, Binary)
        lvl = _PRECEDENCE[e.op]
        left = fmt(e.left, lvl)
        right = fmt(e.right, lvl + 1)  # left-associative
        s = f"{left} {e.op} {right}"
        return f"({s})" if lvl < level else s

    return fmt(e, 0)


# ---------------------------------------------------------------------------
# Statements and programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    line: int
    var: str
    rhs: Expr


@dataclass(frozen=True)
class Assume:
    line: int
    cond: Expr


@dataclass(frozen=True)
class Assert:
    line: int
    cond: Expr


@dataclass(frozen=True)
class If:
    line: int
    cond: Expr
    then_body: tuple["Stmt", ...]
    else_body: tuple["Stmt", ...]


@dataclass(frozen=True)
class While:
    line: int
    cond: Expr
    body: tuple["Stmt", ...]


Stmt = Union[Assign, Assume, Assert, If, While]


@dataclass
class Program:
    name: str
    width: int
    variables: tuple[str, ...]
    sorts: dict[str, Sort]
    pre: Expr
    post: Expr
    body: tuple[Stmt, ...]

    def statements(self) -> Iterator[Stmt]:
        """All statements in source (line-number) order."""
        yield from _walk(self.body)

    def stmt_at(self, line: int) -> Stmt:
        for s in self.statements():
            if s.line == line:
                return s
        raise RegionError(f"no statement at line {line}")

    def max_line(self) -> int:
        return max((s.line for s in self.statements()), default=0)


def _walk(body: Iterable[Stmt]) -> Iterator[Stmt]:
    for s in body:
        yield s
        if isinstance(s, If):
            yield from _walk(s.then_body)
            yield from _walk(s.else_body)
        elif isinstance(s, While):
            yield from _walk(s.body)


@dataclass(frozen=True)
class FaultRegion:
    """Contiguous run of assignment statements designated for re-synthesis.

    `outputs` is the ordered, duplicate-free list of variables the region
    assigns.  It is fixed when the region is first selected and preserved
    verbatim by repair splicing, so the synthesis interface stays stable
    across iterations.
    """
    start: int
    end: int
    outputs: tuple[str, ...]

    @property
    def lines(self) -> range:
        return range(self.start, self.end + 1)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><<|>>|<=|>=|==|!=|&&|\|\||[-+&|^~!<>=(){},;:])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"prog", "pre", "post", "if", "else", "while", "assume", "assert",
             "true", "false"}


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'ident' | 'kw' | 'op' | 'eof'
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        text = m.group(0)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            if kind == "ident" and text in _KEYWORDS:
                kind = "kw"
            tokens.append(_Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent, precedence climbing for expressions)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.next_line = 1  # logical statement numbering

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return self.advance()

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    # -- program ------------------------------------------------------------

    def program(self) -> tuple[str, tuple[str, ...], Expr, tuple[Stmt, ...], Expr]:
        self.expect("kw", "prog")
        name = self.expect("ident").text
        self.expect("op", "(")
        params: list[str] = []
        if not self.at("op", ")"):
            params.append(self.expect("ident").text)
            while self.at("op", ","):
                self.advance()
                params.append(self.expect("ident").text)
        self.expect("op", ")")
        self.expect("kw", "pre")
        self.expect("op", ":")
        pre = self.expr()
        body = self.stmt_list(("post",))
        self.expect("kw", "post")
        self.expect("op", ":")
        post = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
        return name, tuple(params), pre, body, post

    def stmt_list(self, stop_kws: tuple[str, ...]) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        while True:
            tok = self.peek()
            if tok.kind == "eof" or (tok.kind == "kw" and tok.text in stop_kws):
                return tuple(out)
            if tok.kind == "op" and tok.text == "}":
                return tuple(out)
            out.append(self.stmt())

    def stmt(self) -> Stmt:
        tok = self.peek()
        line = self.next_line
        self.next_line += 1
        if tok.kind == "ident":
            name = self.advance().text
            self.expect("op", "=")
            rhs = self.expr()
            self.expect("op", ";")
            return Assign(line, name, rhs)
        if tok.kind == "kw" and tok.text in ("assume", "assert"):
            self.advance()
            self.expect("op", "(")
            cond = self.expr()
            self.expect("op", ")")
            self.expect("op", ";")
            return Assume(line, cond) if tok.text == "assume" else Assert(line, cond)
        if tok.kind == "kw" and tok.text == "if":
            self.advance()
            self.expect("op", "(")
            cond = self.expr()
            self.expect("op", ")")
            self.expect("op", "{")
            then_body = self.stmt_list(())
            self.expect("op", "}")
            else_body: tuple[Stmt, ...] = ()
            if self.at("kw", "else"):
                self.advance()
                self.expect("op", "{")
                else_body = self.stmt_list(())
                self.expect("op", "}")
            return If(line, cond, then_body, else_body)
        if tok.kind == "kw" and tok.text == "while":
            self.advance()
            self.expect("op", "(")
            cond = self.expr()
            self.expect("op", ")")
            self.expect("op", "{")
            body = self.stmt_list(())
            self.expect("op", "}")
            return While(line, cond, body)
        raise ParseError(f"expected a statement, found {tok.text!r}", tok.line, tok.col)

    # -- expressions ----------------------------------------------------------

    def expr(self, min_level: int = 1) -> Expr:
        left = self.unary()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in _PRECEDENCE:
                return left
            level = _PRECEDENCE[tok.text]
            if level < min_level:
                return left
            self.advance()
            right = self.expr(level + 1)
            left = Binary(tok.text, left, right)

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("!", "~", "-"):
            self.advance()
            return Unary(tok.text, self.unary())
        return self.atom()

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Lit(int(tok.text))
        if tok.kind == "kw" and tok.text in ("true", "false"):
            self.advance()
            return BoolLit(tok.text == "true")
        if tok.kind == "ident":
            self.advance()
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            e = self.expr()
            self.expect("op", ")")
            return e
        raise ParseError(f"expected an expression, found {tok.text!r}", tok.line, tok.col)


# ---------------------------------------------------------------------------
# Sort inference and checking
# ---------------------------------------------------------------------------

def _soft_sort(e: Expr, sorts: Mapping[str, Sort]) -> Optional[Sort]:
    """Best-effort sort used during inference; None when undeterminable."""
    if isinstance(e, Lit):
        return Sort.WORD
    if isinstance(e, BoolLit):
        return Sort.BOOL
    if isinstance(e, Var):
        return sorts.get(e.name)
    if isinstance(e, Unary):
        return Sort.BOOL if e.op == "!" else Sort.WORD
    if isinstance(e, Binary):
        if e.op in WORD_BINOPS:
            return Sort.WORD
        return Sort.BOOL
    return None


def infer_sorts(variables: Sequence[str], body: Iterable[Stmt]) -> dict[str, Sort]:
    """Assignment-based sort inference.

    Every variable defaults to the word sort; a variable becomes boolean
    when some assignment gives it a boolean right-hand side.  Iterated to a
    fixpoint so booleanness propagates through plain copies (`t1 = t0;`).
    """
    sorts = {v: Sort.WORD for v in variables}
    assigns = [s for s in _walk(tuple(body)) if isinstance(s, Assign)]
    changed = True
    while changed:
        changed = False
        for a in assigns:
            if a.var in sorts and sorts[a.var] is Sort.WORD:
                if _soft_sort(a.rhs, sorts) is Sort.BOOL:
                    sorts[a.var] = Sort.BOOL
                    changed = True
    return sorts


def check_program(p: Program) -> None:
    """Full static check: declarations, sorts, literal ranges."""
    seen: set[str] = set()
    for v in p.variables:
        if v in seen:
            raise SortError(f"duplicate declaration of '{v}'")
        seen.add(v)

    def check_bool(e: Expr, where: str) -> None:
        if expr_sort(e, p.sorts, p.width) is not Sort.BOOL:
            raise SortError(f"{where} must be boolean")

    check_bool(p.pre, "precondition")
    check_bool(p.post, "postcondition")
    for s in p.statements():
        try:
            if isinstance(s, Assign):
                rs = expr_sort(s.rhs, p.sorts, p.width)
                if rs is not p.sorts[s.var]:
                    raise SortError(
                        f"assignment to '{s.var}' mixes sorts ({rs.value} rhs)")
            elif isinstance(s, (Assume, Assert)):
                check_bool(s.cond, "assume/assert condition")
            elif isinstance(s, If):
                check_bool(s.cond, "if condition")
            elif isinstance(s, While):
                check_bool(s.cond, "while condition")
        except SortError as exc:
            raise SortError(f"line {s.line}: {exc}") from None


def parse(source: str, width: int) -> Program:
    """Parse and statically check a program at the given global bit width."""
    if width < 1:
        raise ValueError("width must be >= 1")
    name, params, pre, body, post = _Parser(_tokenize(source)).program()
    sorts = infer_sorts(params, body)
    p = Program(name, width, params, sorts, pre, post, body)
    check_program(p)
    return p


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

def emit(p: Program) -> str:
    """Render source that parses back to a structurally identical program."""
    out = [f"prog {p.name}({', '.join(p.variables)})",
           f"pre: {format_expr(p.pre)}"]

    def stmt_lines(body: Iterable[Stmt], indent: int) -> None:
        pad = "  " * indent
        for s in body:
            if isinstance(s, Assign):
                out.append(f"{pad}{s.var} = {format_expr(s.rhs)};")
            elif isinstance(s, Assume):
                out.append(f"{pad}assume({format_expr(s.cond)});")
            elif isinstance(s, Assert):
                out.append(f"{pad}assert({format_expr(s.cond)});")
            elif isinstance(s, If):
                out.append(f"{pad}if ({format_expr(s.cond)}) {{")
                stmt_lines(s.then_body, indent + 1)
                if s.else_body:
                    out.append(f"{pad}}} else {{")
                    stmt_lines(s.else_body, indent + 1)
                out.append(f"{pad}}}")
            elif isinstance(s, While):
                out.append(f"{pad}while ({format_expr(s.cond)}) {{")
                stmt_lines(s.body, indent + 1)
                out.append(f"{pad}}}")

    stmt_lines(p.body, 0)
    out.append(f"post: {format_expr(p.post)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Renumbering and fault-region preprocessing
# ---------------------------------------------------------------------------

def renumber(body: tuple[Stmt, ...], start: int = 1) -> tuple[tuple[Stmt, ...], int]:
    """Assign fresh sequential line numbers; returns (body, next_free_line)."""
    counter = start

    def walk(stmts: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        nonlocal counter
        out = []
        for s in stmts:
            line = counter
            counter += 1
            if isinstance(s, If):
                out.append(If(line, s.cond, walk(s.then_body), walk(s.else_body)))
            elif isinstance(s, While):
                out.append(While(line, s.cond, walk(s.body)))
            else:
                out.append(replace(s, line=line))
        return tuple(out)

    new_body = walk(body)
    return new_body, counter


def fresh_names(avoid: Iterable[str], prefix: str, count: int = 1) -> list[str]:
    """Deterministic fresh identifiers: prefix0, prefix1, ... skipping clashes."""
    taken = set(avoid)
    out: list[str] = []
    i = 0
    while len(out) < count:
        cand = f"{prefix}{i}"
        i += 1
        if cand not in taken:
            taken.add(cand)
            out.append(cand)
    return out


def preprocess_guards(p: Program, start: int, end: Optional[int] = None) -> tuple[Program, FaultRegion]:
    """Prepare the fault region for synthesis.

    Any `if` guard inside the region is hoisted into a fresh boolean
    temporary (`t = c; if (t) ...`) so the guard becomes an assignable
    statement.  Returns the (possibly rewritten, renumbered) program and the
    retargeted region.  The region must end up covering a consecutive run of
    assignment statements.
    """
    if end is None:
        end = start
    if start > end:
        raise RegionError(f"empty region {start}..{end}")
    max_line = p.max_line()
    if start < 1 or end > max_line:
        raise RegionError(f"region {start}..{end} outside program lines 1..{max_line}")

    region_lines = set(range(start, end + 1))
    guard_lines = []
    for s in p.statements():
        if s.line in region_lines:
            if isinstance(s, While):
                raise RegionError(
                    f"line {s.line}: loop guards cannot be selected for repair "
                    "(the guard would need a second assignment site inside the loop)")
            if isinstance(s, (Assume, Assert)):
                raise RegionError(f"line {s.line}: region covers a non-assignable statement")
            if isinstance(s, If):
                guard_lines.append(s.line)

    temps = fresh_names(p.variables, "t", len(guard_lines))
    temp_of = dict(zip(guard_lines, temps))

    # Rewrite, tracking where each original region line lands.
    line_map: dict[int, int] = {}
    counter = 1

    def walk(stmts: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        nonlocal counter
        out: list[Stmt] = []
        for s in stmts:
            if isinstance(s, If) and s.line in temp_of:
                t = temp_of[s.line]
                line_map[s.line] = counter
                out.append(Assign(counter, t, s.cond))
                counter += 1
                out.append(If(counter, Var(t), walk(s.then_body), walk(s.else_body)))
                counter += 1
                continue
            line = counter
            if s.line in region_lines:
                line_map[s.line] = line
            counter += 1
            if isinstance(s, If):
                out.append(If(line, s.cond, walk(s.then_body), walk(s.else_body)))
            elif isinstance(s, While):
                out.append(While(line, s.cond, walk(s.body)))
            else:
                out.append(replace(s, line=line))
        return tuple(out)

    new_body = walk(p.body)
    new_vars = p.variables + tuple(temps)
    new_sorts = dict(p.sorts)
    for t in temps:
        new_sorts[t] = Sort.BOOL
    new_p = Program(p.name, p.width, new_vars, new_sorts, p.pre, p.post, new_body)
    if not guard_lines:
        new_p = p  # untouched program, returned as-is

    new_start = min(line_map[ln] for ln in region_lines)
    new_end = max(line_map[ln] for ln in region_lines)

    outputs: list[str] = []
    for s in new_p.statements():
        if new_start <= s.line <= new_end:
            if not isinstance(s, Assign):
                raise RegionError(
                    f"region {start}..{end} partially overlaps a block "
                    f"(line {s.line} is not an assignment after preprocessing)")
            if s.var not in outputs:
                outputs.append(s.var)
    if not outputs:
        raise RegionError(f"region {start}..{end} contains no assignment")

    return new_p, FaultRegion(new_start, new_end, tuple(outputs))
