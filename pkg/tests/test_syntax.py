import itertools

import pytest
from hypothesis import given, settings, strategies as st

from modalkit.syntax import (
    BOT,
    TOP,
    AtomF,
    Bottom,
    Box,
    Const,
    Implies,
    ParseError,
    Var,
    atom_of_rank,
    atom_rank,
    atoms_of,
    big_and,
    big_or,
    conj,
    const,
    diamond,
    disj,
    height,
    in_language,
    match_substitution,
    neg,
    order,
    parse,
    render,
    sub_formulas,
    substitute,
    var,
)

P0, P1, C0 = var(0), var(1), const(0)
K_AXIOM = Implies(Box(Implies(P0, P1)), Implies(Box(P0), Box(P1)))


# -- strategies -------------------------------------------------------------

atoms = st.one_of(
    st.builds(var, st.integers(0, 3)),
    st.builds(const, st.integers(0, 3)),
    st.just(BOT),
)


def formulas(max_leaves=8):
    return st.recursive(
        atoms,
        lambda sub: st.one_of(
            st.builds(Implies, sub, sub),
            st.builds(Box, sub),
            st.builds(neg, sub),
            st.builds(conj, sub, sub),
            st.builds(disj, sub, sub),
            st.builds(diamond, sub),
        ),
        max_leaves=max_leaves,
    )


# -- atoms and enumeration ---------------------------------------------------


def test_rank_interleaves_vars_and_consts():
    assert atom_rank(Var(0)) == 0
    assert atom_rank(Const(0)) == 1
    assert atom_rank(Var(1)) == 2
    assert atom_rank(Const(1)) == 3


def test_rank_round_trip():
    for k in range(40):
        assert atom_rank(atom_of_rank(k)) == k


def test_bot_has_no_rank():
    with pytest.raises(ValueError):
        atom_rank(Bottom())


# -- parsing -----------------------------------------------------------------


def test_parse_k_axiom():
    assert parse("[](p0 -> p1) -> ([]p0 -> []p1)") == K_AXIOM


def test_parse_bot():
    assert parse("bot") == BOT


def test_parse_diamond_expands():
    assert parse("<>p0") == neg(Box(neg(P0)))


def test_parse_precedence_and_associativity():
    # -> is right-associative and binds loosest
    assert parse("p0 -> p1 -> p0") == Implies(P0, Implies(P1, P0))
    # & binds tighter than |, | tighter than ->
    assert parse("p0 & p1 | c0") == disj(conj(P0, P1), C0)
    assert parse("p0 | p1 -> c0") == Implies(disj(P0, P1), C0)
    # unary binds tightest and stacks
    assert parse("![]p0") == neg(Box(P0))
    assert parse("<>!p0 & p1") == conj(diamond(neg(P0)), P1)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as exc:
        parse("p0 -> ")
    assert exc.value.position == 6
    with pytest.raises(ParseError):
        parse("p")
    with pytest.raises(ParseError):
        parse("q0")
    with pytest.raises(ParseError):
        parse("(p0")


# -- rendering ---------------------------------------------------------------


def test_render_box_atom():
    assert render(Box(P0)) == "[]p0"


def test_render_bot_implies_bot_uses_negation_sugar():
    # Fixed rule: any implication into bot prints with "!".
    assert render(Implies(BOT, BOT)) == "!bot"


def test_render_examples():
    assert render(K_AXIOM) == "[](p0 -> p1) -> []p0 -> []p1"
    assert render(conj(P0, neg(C0))) == "p0 & !c0"
    assert render(disj(P0, P1)) == "p0 | p1"
    assert render(diamond(P0)) == "<>p0"


@settings(max_examples=300)
@given(formulas())
def test_parse_render_round_trip(phi):
    assert parse(render(phi)) == phi


# -- substitution ------------------------------------------------------------


def test_substitute_clauses():
    sigma = {0: Box(P1)}
    assert substitute(sigma, Implies(Box(P0), C0)) == Implies(Box(Box(P1)), C0)


def test_substitute_empty_is_identity():
    phi = parse("[](p0 -> c1) & <>p2")
    assert substitute({}, phi) is phi


def test_substitute_fixes_constants():
    sigma = {0: disj(P1, neg(P1))}
    assert substitute(sigma, C0) == C0


def test_match_substitution_examples():
    pattern = Implies(Box(P0), P0)
    target = Implies(Box(Implies(P1, P1)), Implies(P1, P1))
    assert match_substitution(pattern, target) == {0: Implies(P1, P1)}
    assert match_substitution(Implies(P0, P0), Implies(P0, P1)) is None
    assert match_substitution(C0, P0) is None


@settings(max_examples=200)
@given(formulas(max_leaves=5), st.dictionaries(st.integers(0, 3), formulas(max_leaves=4), max_size=3))
def test_match_recovers_substitution(pattern, sigma):
    target = substitute(sigma, pattern)
    found = match_substitution(pattern, target)
    assert found is not None
    assert substitute(found, pattern) == target


# -- metrics -----------------------------------------------------------------


def test_height_examples():
    assert height(P0) == 0
    assert height(Box(P0)) == 1
    assert height(Box(Implies(P0, Box(P1)))) == 2


def test_order_examples():
    assert order(P0) == 0
    assert order(C0) == 1
    assert order(Implies(Box(P1), P0)) == 2
    assert order(BOT) == 0


def test_in_language_examples():
    assert in_language(Box(P0), 1, 0)
    assert not in_language(Box(P0), 0, 0)
    assert not in_language(P1, 2, 0)


def count_nodes(phi):
    if isinstance(phi, AtomF):
        return 1
    if isinstance(phi, Implies):
        return 1 + count_nodes(phi.lhs) + count_nodes(phi.rhs)
    return 1 + count_nodes(phi.body)


def enumerate_subtrees(phi):
    # Independent oracle: collect subtrees by explicit recursion.
    yield phi
    if isinstance(phi, Implies):
        yield from enumerate_subtrees(phi.lhs)
        yield from enumerate_subtrees(phi.rhs)
    elif isinstance(phi, Box):
        yield from enumerate_subtrees(phi.body)


def test_sub_formulas_examples():
    assert sub_formulas(Box(P0)) == frozenset({Box(P0), P0})
    assert sub_formulas(Implies(P0, BOT)) == frozenset({Implies(P0, BOT), P0, BOT})
    # |sub(K axiom)| computed by direct enumeration of distinct subtrees:
    # the axiom, [](p0->p1), p0->p1, p0, p1, []p0->[]p1, []p0, []p1.
    assert len(set(enumerate_subtrees(K_AXIOM))) == 8
    assert len(sub_formulas(K_AXIOM)) == 8


@settings(max_examples=200)
@given(formulas())
def test_sub_formulas_closed_and_bounded(phi):
    subs = sub_formulas(phi)
    assert set(enumerate_subtrees(phi)) == set(subs)
    assert len(subs) <= count_nodes(phi)
    for psi in subs:
        assert sub_formulas(psi) <= subs


@settings(max_examples=200)
@given(formulas(max_leaves=5), st.dictionaries(st.integers(0, 3), atoms, max_size=3))
def test_atom_to_atom_substitution_preserves_height(phi, sigma):
    assert height(substitute(sigma, phi)) == height(phi)


# -- folds -------------------------------------------------------------------


def test_big_and_fold():
    assert big_and([]) == TOP
    assert big_and([P0]) == P0
    assert big_and([P0, P1, C0]) == conj(conj(P0, P1), C0)


def test_big_or_fold():
    assert big_or([]) == BOT
    assert big_or([P0]) == P0
    assert big_or([P0, P1]) == disj(P0, P1)


def test_atoms_of():
    assert atoms_of(parse("[](p0 -> c1) | bot")) == frozenset({Var(0), Const(1)})
