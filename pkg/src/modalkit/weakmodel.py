"""Finite countermodel construction over canonical-formula worlds.

A weak model for a target formula phi at level h+1 uses the consistent
members of the level-(h+1) canonical universe as worlds. The valuation reads
truth of each subformula of phi off the entailment decision, the relation is
one of five variants, and the members entailing phi are marked as roots (a
consistent phi guarantees at least one). The variants:

* ``c``  (classes without transitivity): alpha sees beta iff the conjunction
  of alpha with diamond-beta is satisfiable over the class;
* ``m``  (transitive, not symmetric): alpha entails diamond of beta's
  projection and beta's diamond horizon is contained in alpha's;
* ``mm`` (transitive and symmetric): the symmetrization of ``m``;
* ``d``  (Loeb class): ``m`` with a strictly shrinking horizon, which makes
  the relation irreflexive and conversely well-founded;
* ``s``  (experimental, Euclidean classes): ``m`` with equal horizons.

All entailment questions between canonical material go through the
structural decision procedure; the horizon of a member is its decided
diamond profile. Worlds deliberately include every consistent member, not
just those entailing the target: restricting to target-entailing worlds
breaks the valuation clauses (a diamond requirement may only be fulfillable
by a world that fails the target), and the theorem only needs the roots to
force the target.

Verification recomputes the valuation recursively over the built frame with
an evaluator independent of the decision procedure, checks that roots exist
and force the target, that the frame has the class's properties, and (for
every variant whose truth-lemma argument runs through edge support, i.e. all
but ``d``) that each compatible pair is actually related. The experimental
``s`` relation fails that last support check for Euclidean classes without
transitivity, which is exactly the documented breakdown.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .canonical import (
    CanonicalFormula,
    c_compatible,
    canonical_decides,
    consistent_members,
    diamond_profile,
    enumerate_canonical,
    project,
    render_canonical,
)
from .proofs import GL, SigmaSpec
from .semantics import Frame, KripkeModel, check_appropriate, extend_valuation
from .syntax import (
    AtomF,
    Bottom,
    Box,
    Formula,
    Implies,
    atom_of_rank,
    diamond,
    render,
    sub_formulas,
)


class TargetInconsistentError(ValueError):
    def __init__(self, phi: Formula, sigma: SigmaSpec):
        super().__init__(
            f"{render(phi)} is inconsistent over {sigma!r}; no model exists"
        )


@dataclass
class WeakModel:
    kind: str
    sigma: SigmaSpec
    target: Formula
    level: int
    n: int
    worlds: Tuple[CanonicalFormula, ...]
    rel: FrozenSet[Tuple[int, int]]
    roots: Tuple[int, ...]
    val: Dict[Tuple[int, Formula], bool]

    def member(self, world_id: int) -> CanonicalFormula:
        return self._by_id[world_id]

    def __post_init__(self):
        self._by_id = {m.mid: m for m in self.worlds}

    def frame(self) -> Frame:
        return Frame([m.mid for m in self.worlds], self.rel)

    def to_kripke(self, closure: Optional[Iterable[Formula]] = None) -> KripkeModel:
        closure = frozenset(closure) if closure else sub_formulas(self.target)
        atom_val = {}
        for m in self.worlds:
            for rank in range(self.n + 1):
                atom_val[(m.mid, atom_of_rank(rank))] = bool(m.t_mask >> rank & 1)
        return extend_valuation(self.frame(), atom_val, closure)


# ---------------------------------------------------------------------------
# Relations
# ---------------------------------------------------------------------------


def _entails_diamond_projection(a: CanonicalFormula, b: CanonicalFormula) -> bool:
    return canonical_decides(a, diamond(render_canonical(project(b))))


def rel_m_pair(a: CanonicalFormula, b: CanonicalFormula) -> bool:
    da, db = diamond_profile(a), diamond_profile(b)
    return _entails_diamond_projection(a, b) and db & ~da == 0


def rel_mm_pair(a: CanonicalFormula, b: CanonicalFormula) -> bool:
    return rel_m_pair(a, b) and rel_m_pair(b, a)


def rel_d_pair(a: CanonicalFormula, b: CanonicalFormula) -> bool:
    # some horizon member is reachable from a but banned from b
    return rel_m_pair(a, b) and diamond_profile(a) & ~diamond_profile(b) != 0


def rel_s_pair(a: CanonicalFormula, b: CanonicalFormula) -> bool:
    return rel_m_pair(a, b) and diamond_profile(a) & ~diamond_profile(b) == 0


_REL_PAIRS = {
    "m": rel_m_pair,
    "mm": rel_mm_pair,
    "d": rel_d_pair,
    "s": rel_s_pair,
}


def _relation(kind: str, members: Sequence[CanonicalFormula], sigma: SigmaSpec):
    if kind == "c":
        pair = lambda a, b: c_compatible(a, b, sigma)
    else:
        pair = _REL_PAIRS[kind]
    return frozenset(
        (a.mid, b.mid) for a in members for b in members if pair(a, b)
    )


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _build(kind: str, phi: Formula, sigma: SigmaSpec) -> WeakModel:
    level = phi.height + 1
    n = phi.order
    members = consistent_members(level, n, sigma)
    roots = tuple(m.mid for m in members if canonical_decides(m, phi))
    if not roots:
        raise TargetInconsistentError(phi, sigma)
    rel = _relation(kind, members, sigma)
    closure = sub_formulas(phi)
    val = {
        (m.mid, psi): canonical_decides(m, psi) for m in members for psi in closure
    }
    return WeakModel(kind, sigma, phi, level, n, members, rel, roots, val)


def build_c_model(phi: Formula, sigma: SigmaSpec) -> WeakModel:
    if not sigma <= {"T", "B", "D"}:
        raise ValueError("the c variant serves classes without transitivity")
    return _build("c", phi, sigma)


def build_m_model(phi: Formula, sigma: SigmaSpec) -> WeakModel:
    if "4" not in sigma or "B" in sigma:
        raise ValueError("the m variant needs transitivity and no symmetry")
    return _build("m", phi, sigma)


def build_mm_model(phi: Formula, sigma: SigmaSpec) -> WeakModel:
    if not {"4", "B"} <= sigma:
        raise ValueError("the mm variant needs transitivity and symmetry")
    return _build("mm", phi, sigma)


def build_d_model(phi: Formula, sigma: SigmaSpec = GL) -> WeakModel:
    if sigma != GL:
        raise ValueError("the d variant serves the Loeb logic")
    return _build("d", phi, sigma)


def build_s_model(phi: Formula, sigma: SigmaSpec) -> WeakModel:
    """Experimental relation for Euclidean classes; no truth-lemma guarantee
    without transitivity."""
    if "5" not in sigma:
        raise ValueError("the s variant serves Euclidean classes")
    return _build("s", phi, sigma)


def build_weak_model(phi: Formula, sigma: SigmaSpec) -> WeakModel:
    """Route to the variant whose truth lemma covers the class."""
    if sigma == GL:
        return build_d_model(phi, sigma)
    if "5" in sigma or ".2" in sigma or "L" in sigma:
        raise ValueError(
            f"no complete construction for {sigma!r}; use the bounded oracle "
            "or the experimental s variant"
        )
    if "4" not in sigma:
        return build_c_model(phi, sigma)
    if "B" not in sigma:
        return build_m_model(phi, sigma)
    return build_mm_model(phi, sigma)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckItem:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class WeakModelReport:
    items: Tuple[CheckItem, ...]

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def failures(self) -> List[CheckItem]:
        return [item for item in self.items if not item.passed]

    def item(self, name: str) -> CheckItem:
        for entry in self.items:
            if entry.name == name:
                return entry
        raise KeyError(name)


def _recompute_masks(model: WeakModel):
    """Recursive evaluation of the closure over the built frame, bit-parallel
    across worlds; independent of the entailment decision."""
    members = model.worlds
    index = {m.mid: i for i, m in enumerate(members)}
    succ = [0] * len(members)
    for a, b in model.rel:
        succ[index[a]] |= 1 << index[b]
    masks: Dict[Formula, int] = {}
    for psi in sorted(sub_formulas(model.target), key=lambda f: f.size):
        if isinstance(psi, AtomF):
            if isinstance(psi.atom, Bottom):
                masks[psi] = 0
            else:
                from .syntax import atom_rank

                rank = atom_rank(psi.atom)
                mask = 0
                for i, m in enumerate(members):
                    if m.t_mask >> rank & 1:
                        mask |= 1 << i
                masks[psi] = mask
        elif isinstance(psi, Implies):
            full = (1 << len(members)) - 1
            masks[psi] = (~masks[psi.lhs] | masks[psi.rhs]) & full
        else:
            body = masks[psi.body]
            mask = 0
            for i in range(len(members)):
                if succ[i] & body == succ[i]:
                    mask |= 1 << i
            masks[psi] = mask
    return masks, index


def verify_weak_model(
    model: WeakModel,
    phi: Optional[Formula] = None,
    sigma: Optional[SigmaSpec] = None,
) -> WeakModelReport:
    """Itemized checks: valuation clauses by independent recomputation, roots
    forcing the target, frame appropriateness, and edge support for the
    variants whose truth lemma depends on it."""
    phi = phi if phi is not None else model.target
    sigma = sigma if sigma is not None else model.sigma
    items = []

    masks, index = _recompute_masks(model)
    bad = None
    for psi in sorted(sub_formulas(phi), key=lambda f: f.size):
        for m in model.worlds:
            recomputed = bool(masks[psi] >> index[m.mid] & 1)
            if model.val.get((m.mid, psi)) != recomputed:
                bad = (m.mid, psi, recomputed)
                break
        if bad:
            break
    items.append(
        CheckItem(
            "valuation-clauses",
            bad is None,
            ""
            if bad is None
            else f"world {bad[0]}, {render(bad[1])}: recomputed {bad[2]}",
        )
    )

    roots_ok = bool(model.roots) and all(
        model.val.get((r, phi)) and masks[phi] >> index[r] & 1 for r in model.roots
    )
    items.append(
        CheckItem(
            "roots-force-target",
            roots_ok,
            f"{len(model.roots)} root(s)",
        )
    )

    frame_sigma = SigmaSpec({"L"}) if sigma == GL else sigma
    items.append(
        CheckItem("frame-appropriate", check_appropriate(model.frame(), frame_sigma))
    )

    if model.kind != "d":
        # truth-lemma support: the compatible pairs must all be related,
        # otherwise an unfulfilled diamond hides behind a missing edge. The
        # Loeb variant is exempt: its argument supplies witnesses through
        # horizon descent rather than through every compatible edge.
        missing = None
        for a in model.worlds:
            for b in model.worlds:
                if c_compatible(a, b, sigma) and (a.mid, b.mid) not in model.rel:
                    missing = (a.mid, b.mid)
                    break
            if missing:
                break
        items.append(
            CheckItem(
                "compatible-pairs-related",
                missing is None,
                "" if missing is None else f"pair {missing} unrelated",
            )
        )

    return WeakModelReport(tuple(items))


# ---------------------------------------------------------------------------
# Trimming for emission
# ---------------------------------------------------------------------------


def reachable_submodel(model: WeakModel, root: int) -> WeakModel:
    """Restrict to the worlds reachable from the given root; all five
    relation variants are preserved under generated submodels."""
    keep = {root}
    frontier = [root]
    succ: Dict[int, List[int]] = {}
    for a, b in model.rel:
        succ.setdefault(a, []).append(b)
    while frontier:
        here = frontier.pop()
        for nxt in succ.get(here, ()):
            if nxt not in keep:
                keep.add(nxt)
                frontier.append(nxt)
    worlds = tuple(m for m in model.worlds if m.mid in keep)
    return WeakModel(
        model.kind,
        model.sigma,
        model.target,
        model.level,
        model.n,
        worlds,
        frozenset(p for p in model.rel if p[0] in keep and p[1] in keep),
        tuple(r for r in model.roots if r in keep) or (root,),
        {kv: v for kv, v in model.val.items() if kv[0] in keep},
    )
