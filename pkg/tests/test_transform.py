import random

import pytest

from pbrepair import parse
from pbrepair.boolean import BddManager, aig_to_bdd, bitblast, exists, interleaved_order
from pbrepair.lang import Binary, Lit, Unary, Var
from pbrepair.paths import PAssign, PAssume, enumerate_paths, to_ssa
from pbrepair.transform import (And, Atom, Exists, FALSE, Formula, Iff,
                                Implies, Not, TRUE, equivalent, format_formula,
                                free_vars, holds, is_valid_formula, rename,
                                sp, sp_seq, subst, wp, wp_seq)

import oracle


def atom_eq(name, value):
    return Atom(Binary("==", Var(name), Lit(value)))


def lt2(name):
    return Binary("<", Var(name), Lit(2))


def fig1_path(count_loop):
    return next(pi for pi in enumerate_paths(count_loop, 2)
                if pi.guard_bits == "110")


# -- single-step transformer examples -------------------------------------------

def test_wp_of_final_assume_is_x_at_most_2(count_loop):
    # wp({x=2}, assume(!(x<2))) is equivalent to x <= 2
    phi = atom_eq("x#2", 2)
    stmt = PAssume(Unary("!", lt2("x#2")))
    got = wp(phi, stmt)
    assert got == Implies(Atom(Unary("!", lt2("x#2"))), phi)
    want = Atom(Binary("<=", Var("x#2"), Lit(2)))
    assert equivalent(got, want, 2)
    assert equivalent(got, want, 4)


def test_wp_of_assignment_is_pure_substitution():
    # wp({x<=2}, x := x+1) = x+1 <= 2, no quantifier introduced
    phi = Atom(Binary("<=", Var("x"), Lit(2)))
    got = wp(phi, PAssign("x", Binary("+", Var("x"), Lit(1))))
    assert got == Atom(Binary("<=", Binary("+", Var("x"), Lit(1)), Lit(2)))


def test_wp_of_true_is_true():
    assert wp(TRUE, PAssign("x", Lit(1))) == TRUE
    got = wp(TRUE, PAssume(lt2("x")))
    assert equivalent(got, TRUE, 2)


def test_sp_of_assume_conjoins():
    phi = atom_eq("x", 0)
    got = sp(phi, PAssume(lt2("x")))
    assert got == And(Atom(lt2("x")), phi)
    assert equivalent(got, phi, 2)  # x=0 already implies x<2


def test_sp_of_assignment_introduces_one_existential():
    phi = atom_eq("x", 1)
    got = sp(phi, PAssign("x", Binary("+", Var("x"), Lit(1))))
    assert isinstance(got, Exists)
    assert equivalent(got, atom_eq("x", 2), 2)


def test_sp_of_false_is_false():
    got = sp(FALSE, PAssign("x", Lit(1)))
    assert equivalent(got, FALSE, 2)
    got = sp(FALSE, PAssume(lt2("x")))
    assert equivalent(got, FALSE, 2)


def test_wp_assign_never_quantifies_sp_always_does():
    stmts = [PAssign("x", Binary("+", Var("x"), Var("y"))),
             PAssign("y", Lit(1))]

    def has_exists(f: Formula) -> bool:
        if isinstance(f, Exists):
            return True
        if isinstance(f, (And, Implies)):
            return has_exists(f.left) or has_exists(f.right)
        if isinstance(f, Not):
            return has_exists(f.operand)
        return False

    phi = Atom(Binary("<", Var("x"), Var("y")))
    for s in stmts:
        assert not has_exists(wp(phi, s))
        out = sp(phi, s)
        assert isinstance(out, Exists) and not has_exists(out.body.right)


# -- sequence golden test (the annotated two-increment path) --------------------

def _project_to(f: Formula, keep: set[str], width: int):
    """BDD of f with every variable outside `keep` existentially removed."""
    aig = bitblast(f, width)
    mgr = BddManager(interleaved_order(aig))
    bdd = aig_to_bdd(aig, mgr)[0]
    away = [bv for bv in mgr.order
            if bv[0] not in keep and not bv[0].startswith("?")]
    return exists(bdd, away), mgr


def _bdd_of(f: Formula, mgr: BddManager, width: int):
    return aig_to_bdd(bitblast(f, width), mgr)[0]


FORWARD_ANNOTATIONS = [
    # (statements consumed, annotation over the current version, version)
    (1, lambda v: And(Atom(lt2(v)), atom_eq(v, 0)), 0),   # {x=0 and x<2}
    (1, lambda v: atom_eq(v, 0), 0),                      # ... = {x=0}
    (2, lambda v: atom_eq(v, 1), 1),                      # {x=1}
    (3, lambda v: And(Atom(lt2(v)), atom_eq(v, 1)), 1),   # {x=1 and x<2}
    (3, lambda v: atom_eq(v, 1), 1),                      # ... = {x=1}
    (4, lambda v: atom_eq(v, 2), 2),                      # {x=2}
    (5, lambda v: And(Atom(Unary("!", lt2(v))), atom_eq(v, 2)), 2),
    (5, lambda v: atom_eq(v, 2), 2),                      # ... = {x=2}
]


@pytest.mark.parametrize("width", [2, 4])
def test_forward_propagation_matches_annotations(count_loop, width):
    pi = fig1_path(count_loop)
    start = rename(atom_eq("x", 0), {"x": "x#0"})
    for consumed, annotate, version in FORWARD_ANNOTATIONS:
        got = sp_seq(start, pi.statements[:consumed])
        name = f"x#{version}"
        want = annotate(name)
        got_bdd, mgr = _project_to(got, {name}, width)
        assert got_bdd.edge == _bdd_of(want, mgr, width).edge, \
            f"forward annotation after {consumed} statements"


BACKWARD_ANNOTATIONS = [
    # (statements remaining, annotation over the version at that point)
    (5, lambda v: TRUE,),                                  # {true} before s1
    (4, lambda v: TRUE,),                                  # {true} before s2
    (3, lambda v: Implies(Atom(lt2(v)),
                          Atom(Binary("<=", Var(v), Lit(1))))),  # = {true}
    (3, lambda v: TRUE,),
    (2, lambda v: Atom(Binary("<=", Binary("+", Var(v), Lit(1)), Lit(2)))),
    (1, lambda v: Implies(Atom(Unary("!", lt2(v))), atom_eq(v, 2))),
    (1, lambda v: Atom(Binary("<=", Var(v), Lit(2)))),     # = {x<=2}
    (0, lambda v: atom_eq(v, 2)),                          # psi itself
]


@pytest.mark.parametrize("width", [2, 4])
def test_backward_propagation_matches_annotations(count_loop, width):
    pi = fig1_path(count_loop)
    post = rename(atom_eq("x", 2), {"x": "x#2"})
    versions = ["x#0", "x#0", "x#1", "x#1", "x#1", "x#2", "x#2", "x#2"]
    for (remaining, annotate), version in zip(BACKWARD_ANNOTATIONS, versions):
        got = wp_seq(post, pi.statements[len(pi.statements) - remaining:])
        want = annotate(version)
        assert equivalent(got, want, width), \
            f"backward annotation with {remaining} statements remaining"


def test_seq_transformers_are_identity_on_empty_path():
    phi = atom_eq("x", 1)
    assert wp_seq(phi, []) == phi
    assert sp_seq(phi, []) == phi


# -- holds -----------------------------------------------------------------------

def test_holds_on_the_annotated_path(count_loop):
    pi = fig1_path(count_loop)
    pre = atom_eq("x", 0)
    assert holds(pre, pi, atom_eq("x", 2), 2)
    assert not holds(pre, pi, atom_eq("x", 3), 2)


def test_holds_vacuous_for_false_precondition(count_loop):
    for pi in enumerate_paths(count_loop, 2):
        if not pi.bound_exceeded:
            assert holds(FALSE, pi, atom_eq("x", 3), 2)


def test_holds_agrees_with_sp_formula_route():
    rng = random.Random(11)
    names = ["a", "b"]
    for _ in range(60):
        raw = oracle.random_path_stmts(rng, names, 2, rng.randrange(0, 5))
        pi = to_ssa(raw)
        phi = oracle.random_formula(rng, names, 2, 1)
        psi = oracle.random_formula(rng, names, 2, 1)
        entry = {v: f"{v}#0" for v in names}
        final = {v: pi.ssa_map.get(v, f"{v}#0") for v in names}
        via_sp = is_valid_formula(
            Implies(sp_seq(rename(phi, entry), pi), rename(psi, final)), 2)
        assert holds(phi, pi, psi, 2) == via_sp


# -- structural properties --------------------------------------------------------

def test_duality_of_wp_and_sp():
    rng = random.Random(23)
    names = ["a", "b", "c"]
    for trial in range(150):
        width = rng.choice([1, 2, 3])
        stmts = oracle.random_path_stmts(rng, names, width,
                                         rng.randrange(0, 7))
        phi = oracle.random_formula(rng, names, width, 2)
        psi = oracle.random_formula(rng, names, width, 2)
        fwd = is_valid_formula(Implies(sp_seq(phi, stmts), psi), width)
        bwd = is_valid_formula(Implies(phi, wp_seq(psi, stmts)), width)
        assert fwd == bwd, f"trial {trial}"


def test_sp_seq_is_monotone_in_the_precondition():
    rng = random.Random(31)
    names = ["a", "b"]
    checked = 0
    for _ in range(200):
        width = 2
        phi1 = oracle.random_formula(rng, names, width, 1)
        phi2 = oracle.random_formula(rng, names, width, 1)
        if not is_valid_formula(Implies(phi1, phi2), width):
            continue
        stmts = oracle.random_path_stmts(rng, names, width, rng.randrange(0, 4))
        assert is_valid_formula(
            Implies(sp_seq(phi1, stmts), sp_seq(phi2, stmts)), width)
        checked += 1
    assert checked >= 20


# -- substitution / renaming ------------------------------------------------------

def test_subst_respects_binders():
    inner = Exists("v", Atom(Binary("==", Var("v"), Var("x"))))
    replaced = subst(inner, "x", Lit(1))
    assert replaced == Exists("v", Atom(Binary("==", Var("v"), Lit(1))))
    assert subst(inner, "v", Lit(1)) == inner  # bound occurrence untouched


def test_subst_detects_capture():
    f = Exists("v", Atom(Binary("==", Var("v"), Var("x"))))
    with pytest.raises(ValueError, match="capture"):
        subst(f, "x", Var("v"))


def test_free_vars_excludes_binders():
    f = Exists("v", And(Atom(Binary("==", Var("v"), Var("x"))),
                        Atom(lt2("y"))))
    assert free_vars(f) == {"x", "y"}


def test_format_formula_uses_source_syntax():
    f = Exists("v", Implies(Atom(lt2("v")), atom_eq("x", 2)))
    assert format_formula(f) == "exists v. v < 2 -> x == 2"


# -- formula semantics vs brute force ----------------------------------------------

def test_validity_agrees_with_brute_force_on_random_formulas():
    rng = random.Random(5)
    names = ["a", "b"]
    for _ in range(120):
        width = rng.choice([1, 2])
        f = oracle.random_formula(rng, names, width, 2)
        assert is_valid_formula(f, width) == oracle.brute_valid(f, width)
