import itertools

import pytest

from modalkit.canonical import CanonicalFormula, consistent_members
from modalkit.proofs import GL, K, SigmaSpec
from modalkit.semantics import (
    is_conversely_well_founded,
    is_irreflexive,
    is_reflexive,
    is_serial,
    is_symmetric,
    is_transitive,
)
from modalkit.syntax import Box, BOT, diamond, neg, parse, render, sub_formulas, var
from modalkit.weakmodel import (
    TargetInconsistentError,
    WeakModel,
    build_c_model,
    build_d_model,
    build_m_model,
    build_mm_model,
    build_s_model,
    build_weak_model,
    reachable_submodel,
    rel_m_pair,
    verify_weak_model,
)

P0 = var(0)

SMALL_TARGETS = [
    parse("p0"),
    parse("!p0"),
    parse("<>p0"),
    parse("[]p0 -> p0"),
    parse("!([]p0 -> p0)"),
    parse("<>p0 & <>!p0"),
    parse("!bot"),
]


def sigma_of(*axes):
    return SigmaSpec(axes)


# -- shape of built models -----------------------------------------------------


def test_c_model_worlds_and_roots_for_p0():
    model = build_c_model(P0, K)
    assert len(model.worlds) == 8  # every level-1 member is consistent in K
    assert len(model.roots) == 4  # exactly those whose pattern affirms p0
    for rid in model.roots:
        assert model.member(rid).t_mask & 1


def test_c_model_reflexive_under_t():
    model = build_c_model(P0, sigma_of("T"))
    frame = model.frame()
    assert is_reflexive(frame)


def test_c_model_symmetric_under_b():
    model = build_c_model(P0, sigma_of("B"))
    assert is_symmetric(model.frame())


def test_c_model_serial_under_d():
    model = build_c_model(P0, sigma_of("D"))
    assert is_serial(model.frame())


def test_m_model_frame_lemmas():
    model = build_m_model(P0, sigma_of("4"))
    assert is_transitive(model.frame())
    model = build_m_model(P0, sigma_of("T", "4"))
    assert is_transitive(model.frame()) and is_reflexive(model.frame())
    model = build_m_model(P0, sigma_of("4", "D"))
    assert is_serial(model.frame())


def test_mm_model_frame_lemmas():
    model = build_mm_model(P0, sigma_of("4", "B"))
    frame = model.frame()
    assert is_symmetric(frame) and is_transitive(frame)
    model = build_mm_model(P0, sigma_of("T", "4", "B"))
    assert is_reflexive(model.frame())


def test_d_model_frame_lemmas():
    model = build_d_model(neg(Box(BOT)))
    frame = model.frame()
    assert is_transitive(frame)
    assert is_irreflexive(frame)
    assert is_conversely_well_founded(frame)


def test_c_subset_of_m_relations():
    # on a shared world set the compatible pairs are all m-related
    from modalkit.canonical import c_compatible

    sigma = sigma_of("4", "D")
    members = consistent_members(1, 0, sigma)
    for a in members:
        for b in members:
            if c_compatible(a, b, sigma):
                assert rel_m_pair(a, b)


def test_dispatcher_routes():
    assert build_weak_model(P0, sigma_of("T", "B")).kind == "c"
    assert build_weak_model(P0, sigma_of("4", "D")).kind == "m"
    assert build_weak_model(P0, sigma_of("4", "B")).kind == "mm"
    assert build_weak_model(P0, GL).kind == "d"
    with pytest.raises(ValueError):
        build_weak_model(P0, sigma_of("5"))
    with pytest.raises(ValueError):
        build_weak_model(P0, sigma_of(".2"))


def test_inconsistent_target_raises():
    with pytest.raises(TargetInconsistentError):
        build_c_model(parse("p0 & !p0"), K)
    with pytest.raises(TargetInconsistentError):
        build_c_model(Box(BOT), sigma_of("D"))


# -- verification ----------------------------------------------------------------


def applicable_sigmas():
    out = []
    for r in range(4):
        for s in itertools.combinations(["T", "B", "D"], r):
            out.append(SigmaSpec(s))
    out += [sigma_of("4"), sigma_of("T", "4"), sigma_of("4", "D"), sigma_of("T", "4", "D")]
    out += [sigma_of("4", "B"), sigma_of("T", "4", "B"), sigma_of("4", "B", "D")]
    out.append(GL)
    return out


@pytest.mark.parametrize("sigma", applicable_sigmas())
def test_verify_passes_on_small_grid(sigma):
    for phi in SMALL_TARGETS:
        try:
            model = build_weak_model(phi, sigma)
        except TargetInconsistentError:
            continue
        report = verify_weak_model(model)
        assert report.passed, (set(sigma), render(phi), report.failures())


def test_truth_lemma_needs_nonroot_worlds():
    # box-or-diamond target: a diamond requirement at some root can only be
    # fulfilled by a world failing the target, so the world set must not be
    # cut down to the target-entailing members.
    phi = parse("[]p0 | <>p0")
    model = build_c_model(phi, K)
    report = verify_weak_model(model)
    assert report.passed
    assert len(model.roots) < len(model.worlds)


def test_val_matches_extend_valuation_table():
    for phi in [parse("<>p0"), parse("[]p0 -> p0")]:
        model = build_c_model(phi, sigma_of("T"))
        kripke = model.to_kripke()
        for m in model.worlds:
            for psi in sub_formulas(phi):
                assert kripke.eval(m.mid, psi) == model.val[(m.mid, psi)]


def test_fault_injection_trips_clause_check():
    model = build_c_model(parse("<>p0"), K)
    target_key = next(
        (mid, psi) for (mid, psi) in model.val if psi == parse("<>p0")
    )
    model.val[target_key] = not model.val[target_key]
    report = verify_weak_model(model)
    item = report.item("valuation-clauses")
    assert not item.passed
    assert str(target_key[0]) in item.detail


def test_roots_force_target_after_trim():
    model = build_weak_model(parse("<>p0 & <>!p0"), sigma_of("T"))
    trimmed = reachable_submodel(model, model.roots[0])
    report = verify_weak_model(trimmed)
    assert report.passed
    assert len(trimmed.worlds) <= len(model.worlds)


def test_gl_model_of_diamond_top():
    model = build_d_model(neg(Box(BOT)))
    report = verify_weak_model(model)
    assert report.passed


# -- experimental s relation --------------------------------------------------------


def test_s_model_grid_with_transitivity_is_clean():
    for sigma in [sigma_of("4", "5"), sigma_of("4", "5", "D")]:
        for phi in SMALL_TARGETS:
            try:
                model = build_s_model(phi, sigma)
            except TargetInconsistentError:
                continue
            report = verify_weak_model(model)
            assert report.passed, (set(sigma), render(phi), report.failures())


def test_s_model_serial_with_d():
    model = build_s_model(P0, sigma_of("4", "5", "D"))
    assert is_serial(model.frame())


def test_s_model_breaks_for_euclidean_alone_order_one():
    # the documented breakdown: without transitivity a compatible pair can
    # join horizons of different sizes, which the equal-horizon relation
    # cannot relate; the support check exhibits it.
    failures = []
    for text in ["p0", "c0", "p0 & !c0", "p0 | c0"]:
        model = build_s_model(parse(text), sigma_of("5"))
        report = verify_weak_model(model)
        if not report.item("compatible-pairs-related").passed:
            failures.append(text)
    assert failures, "expected at least one support violation at order 1"


def test_s_model_euclidean_frame_always():
    from modalkit.semantics import is_euclidean

    for text in ["p0", "p0 & !c0"]:
        model = build_s_model(parse(text), sigma_of("5"))
        assert is_euclidean(model.frame())
