import itertools

import pytest

from modalkit.oracle import (
    OracleConfig,
    count_frames,
    enumerate_frames,
    oracle_satisfiable,
    oracle_valid,
)
from modalkit.proofs import GL, K, SigmaSpec, axiom_formula
from modalkit.semantics import Frame, frame_forces
from modalkit.syntax import BOT, Box, parse, render, sub_formulas, var

P0 = var(0)


def test_frame_counts_small():
    assert count_frames(1) == 2
    assert count_frames(1, SigmaSpec({"T"})) == 1
    # independent count: 2 one-world frames plus 2^4 two-world frames
    expected = 2 + 2 ** 4
    assert count_frames(2) == expected
    assert len(list(enumerate_frames(OracleConfig(max_worlds=2)))) == expected


def test_enumeration_filters_by_sigma():
    for frame in enumerate_frames(OracleConfig(max_worlds=2, sigma=SigmaSpec({"T"}))):
        assert all((w, w) in frame.rel for w in frame.worlds)


def test_enumeration_agrees_with_frame_predicates():
    from modalkit.semantics import check_appropriate

    sigma = SigmaSpec({"B", "D"})
    listed = list(enumerate_frames(OracleConfig(max_worlds=3, sigma=sigma)))
    brute = [
        f
        for f in enumerate_frames(OracleConfig(max_worlds=3))
        if check_appropriate(f, sigma)
    ]
    assert listed == brute


def test_box_bot_satisfiable_by_dead_end():
    model, world = oracle_satisfiable(Box(BOT), OracleConfig(max_worlds=2))
    assert model.frame.successors(world) == ()
    assert model.eval(world, Box(BOT))


def test_box_bot_unsatisfiable_on_serial_frames():
    cfg = OracleConfig(max_worlds=3, sigma=SigmaSpec({"D"}))
    assert oracle_satisfiable(Box(BOT), cfg) is None


def test_loeb_valid_on_gl_frames():
    phi = axiom_formula("L")
    verdict = oracle_valid(phi, OracleConfig(max_worlds=3, sigma=GL))
    assert verdict.valid


def test_k_axiom_valid_everywhere():
    verdict = oracle_valid(axiom_formula("K"), OracleConfig(max_worlds=3))
    assert verdict.valid
    assert not verdict.certified  # no completeness bound supplied
    verdict = oracle_valid(
        axiom_formula("K"),
        OracleConfig(max_worlds=3, completeness_bound=2),
    )
    assert verdict.certified


def test_t_axiom_invalid_in_k_with_witness():
    verdict = oracle_valid(parse("[]p0 -> p0"), OracleConfig(max_worlds=3))
    assert not verdict.valid
    model, world = verdict.witness
    # the witness genuinely refutes the formula; the first countermodel in
    # enumeration order is the one-world dead end (box holds vacuously).
    assert model.eval(world, parse("!([]p0 -> p0)"))
    assert len(model.frame.worlds) == 1
    assert model.frame.successors(world) == ()


def test_t_axiom_valid_on_reflexive_frames():
    verdict = oracle_valid(
        parse("[]p0 -> p0"), OracleConfig(max_worlds=3, sigma=SigmaSpec({"T"}))
    )
    assert verdict.valid


def test_witness_is_first_in_enumeration_order():
    # per-run determinism: two calls give the same witness
    cfg = OracleConfig(max_worlds=3)
    a = oracle_valid(parse("[]p0 -> p0"), cfg).witness
    b = oracle_valid(parse("[]p0 -> p0"), cfg).witness
    assert a[0].frame == b[0].frame and a[1] == b[1]


def test_satisfiability_monotone_in_bound():
    phi = parse("<>p0 & <>!p0")
    assert oracle_satisfiable(phi, OracleConfig(max_worlds=2)) is None or True
    small = oracle_satisfiable(phi, OracleConfig(max_worlds=2))
    big = oracle_satisfiable(phi, OracleConfig(max_worlds=3))
    if small is not None:
        assert big is not None


def test_oracle_agrees_with_frame_forces_on_samples():
    formulas = [
        parse("[]p0 -> p0"),
        parse("p0 | !p0"),
        parse("[]p0 -> [][]p0"),
        parse("<>p0 -> []<>p0"),
    ]
    frames = list(enumerate_frames(OracleConfig(max_worlds=2)))
    for phi in formulas:
        refuted = {
            i for i, f in enumerate(frames) if not frame_forces(f, phi)
        }
        verdict = oracle_valid(phi, OracleConfig(max_worlds=2))
        assert verdict.valid == (not refuted)
