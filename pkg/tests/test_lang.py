import random

import pytest

from pbrepair import emit, parse, preprocess_guards
from pbrepair.lang import (Assign, Binary, BoolLit, If, Lit, ParseError,
                           RegionError, Sort, SortError, Unary, Var,
                           eval_expr, format_expr)

from conftest import MINMAX_SRC


def test_minmax_parses_to_ten_statements_and_five_variables(minmax):
    assert sum(1 for _ in minmax.statements()) == 10
    assert len(minmax.variables) == 5
    assert [s.line for s in minmax.statements()] == list(range(1, 11))
    line4 = minmax.stmt_at(4)
    assert isinstance(line4, Assign) and line4.var == "most"
    assert line4.rhs == Var("input2")


def test_empty_body_program():
    p = parse("prog nothing(x)\npre: true\npost: true\n", 2)
    assert p.body == ()
    assert p.pre == BoolLit(True)


def test_literal_out_of_range_for_width():
    src = "prog p(x)\npre: true\nx = 5;\npost: true\n"
    with pytest.raises(SortError):
        parse(src, 2)
    parse(src, 3)  # 5 < 2**3 is fine


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse("prog p(x)\npre: true\nx = ;\npost: true\n", 2)
    assert err.value.line == 3


def test_undeclared_variable_rejected():
    with pytest.raises(SortError, match="undeclared"):
        parse("prog p(x)\npre: true\nx = y + 1;\npost: true\n", 2)


def test_sort_mixing_rejected():
    with pytest.raises(SortError):
        parse("prog p(x, y)\npre: true\nx = y < 1;\ny = x + 1;\npost: true\n", 2)
    with pytest.raises(SortError):
        parse("prog p(x)\npre: x\npost: true\n", 2)  # word used as condition


def test_boolean_temp_sort_inference():
    src = ("prog p(x, t)\npre: true\nt = x < 2;\nif (t) {\n  x = 1;\n}\n"
           "post: true\n")
    p = parse(src, 2)
    assert p.sorts["t"] is Sort.BOOL
    assert p.sorts["x"] is Sort.WORD


def test_bool_inference_through_copies():
    src = ("prog p(x, a, b)\npre: true\na = x < 1;\nb = a;\nif (b) {\n"
           "  x = 0;\n}\npost: true\n")
    p = parse(src, 2)
    assert p.sorts["a"] is Sort.BOOL and p.sorts["b"] is Sort.BOOL


# -- emit / round-trip -------------------------------------------------------

def test_emit_round_trips_minmax(minmax):
    assert parse(emit(minmax), 2) == minmax


def test_emit_empty_program_is_header_lines_only():
    p = parse("prog only(x)\npre: x == 0\npost: x == 0\n", 2)
    assert emit(p) == "prog only(x)\npre: x == 0\npost: x == 0\n"


def test_round_trip_random_programs():
    rng = random.Random(7)
    names = ["a", "b", "c"]

    def rand_expr(depth):
        if depth == 0 or rng.random() < 0.4:
            return rng.choice([Var(rng.choice(names)), Lit(rng.randrange(4))])
        if rng.random() < 0.2:
            return Unary(rng.choice(["~", "-"]), rand_expr(depth - 1))
        op = rng.choice(["+", "-", "&", "|", "^", "<<", ">>"])
        return Binary(op, rand_expr(depth - 1), rand_expr(depth - 1))

    def rand_cond(depth):
        if depth == 0 or rng.random() < 0.5:
            return Binary(rng.choice(["<", "<=", "==", "!=", ">", ">="]),
                          rand_expr(1), rand_expr(1))
        if rng.random() < 0.25:
            return Unary("!", rand_cond(depth - 1))
        return Binary(rng.choice(["&&", "||"]), rand_cond(depth - 1),
                      rand_cond(depth - 1))

    def rand_body(depth, budget):
        lines = []
        for _ in range(rng.randrange(1, 4)):
            roll = rng.random()
            if depth == 0 or roll < 0.55:
                lines.append(f"{rng.choice(names)} = {format_expr(rand_expr(2))};")
            elif roll < 0.7:
                lines.append(f"assume({format_expr(rand_cond(1))});")
            elif roll < 0.9:
                lines.append(f"if ({format_expr(rand_cond(1))}) {{")
                lines.extend("  " + ln for ln in rand_body(depth - 1, budget))
                if rng.random() < 0.5:
                    lines.append("} else {")
                    lines.extend("  " + ln for ln in rand_body(depth - 1, budget))
                lines.append("}")
            else:
                lines.append(f"while ({format_expr(rand_cond(1))}) {{")
                lines.extend("  " + ln for ln in rand_body(depth - 1, budget))
                lines.append("}")
        return lines

    for _ in range(40):
        body = "\n".join(rand_body(2, 3))
        src = (f"prog rnd({', '.join(names)})\npre: {format_expr(rand_cond(1))}\n"
               f"{body}\npost: {format_expr(rand_cond(1))}\n")
        p = parse(src, 2)
        assert parse(emit(p), 2) == p


def test_expression_precedence_round_trip():
    # mask binds tighter than comparison; shift tighter than mask
    e = parse("prog p(x, y)\npre: x & 1 << 1 == y\npost: true\n", 2).pre
    assert e == Binary("==", Binary("&", Var("x"), Binary("<<", Lit(1), Lit(1))),
                       Var("y"))


# -- eval_expr ----------------------------------------------------------------

def test_eval_expr_wraps_modulo_width():
    env = {"x": 3}
    assert eval_expr(Binary("+", Var("x"), Lit(1)), env, 2) == 0
    assert eval_expr(Unary("-", Var("x")), env, 2) == 1
    assert eval_expr(Unary("~", Var("x")), env, 2) == 0


def test_eval_expr_shift_beyond_width_is_zero():
    env = {"x": 3, "k": 2}
    assert eval_expr(Binary("<<", Var("x"), Var("k")), env, 2) == 0
    assert eval_expr(Binary(">>", Var("x"), Var("k")), env, 2) == 0
    assert eval_expr(Binary("<<", Var("x"), Lit(1)), env, 2) == 2


# -- preprocess_guards --------------------------------------------------------

def test_preprocess_guard_line_hoists_temp(minmax):
    p2, region = preprocess_guards(minmax, 3)
    assert region.outputs == ("t0",)
    assert (region.start, region.end) == (3, 3)
    t_assign = p2.stmt_at(3)
    assert isinstance(t_assign, Assign) and t_assign.var == "t0"
    assert t_assign.rhs == Binary("<", Var("most"), Var("input2"))
    guard = p2.stmt_at(4)
    assert isinstance(guard, If) and guard.cond == Var("t0")
    assert p2.sorts["t0"] is Sort.BOOL
    assert sum(1 for _ in p2.statements()) == 11


def test_preprocess_assignment_region_is_identity(minmax):
    p2, region = preprocess_guards(minmax, 4)
    assert p2 is minmax
    assert region.outputs == ("most",)
    assert (region.start, region.end) == (4, 4)


def test_preprocess_region_spanning_assignment_and_guard(minmax):
    p2, region = preprocess_guards(minmax, 4, 5)
    assert region.outputs == ("most", "t0")
    assert (region.start, region.end) == (4, 5)
    assert isinstance(p2.stmt_at(5), Assign)
    assert p2.stmt_at(5).rhs == Binary("<", Var("most"), Var("input3"))


def test_preprocess_rejects_partial_block_overlap(minmax):
    # line 3 is a guard, line 4 its body: after hoisting, the retargeted
    # lines are separated by the if statement itself.
    with pytest.raises(RegionError):
        preprocess_guards(minmax, 3, 4)


def test_preprocess_rejects_missing_lines(minmax):
    with pytest.raises(RegionError):
        preprocess_guards(minmax, 11)


def test_preprocess_rejects_while_guard(count_loop):
    with pytest.raises(RegionError):
        preprocess_guards(count_loop, 1)


def test_preprocess_is_idempotent(minmax):
    p1, region1 = preprocess_guards(minmax, 3)
    p2, region2 = preprocess_guards(p1, region1.start, region1.end)
    assert p2 is p1
    assert region2 == region1


def test_preprocess_preserves_semantics_exhaustively(minmax):
    from pbrepair.driver import input_states, interpret

    for width in (1, 2, 3):
        p = parse(MINMAX_SRC, width)
        p2, _ = preprocess_guards(p, 3)
        for state in input_states(p):
            before = interpret(p, state, 8)
            extended = dict(state)
            extended.setdefault("t0", 0)
            after = interpret(p2, extended, 8)
            assert after is not None and before is not None
            assert all(after[v] == before[v] for v in p.variables)
