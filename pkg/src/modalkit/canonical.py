"""Canonical formulas and the finitary decision machinery built on them.

A canonical formula of level 0 over atom ranks 0..n is a complete conjunction
of literals (each rank affirmed or denied). A canonical formula of level h+1
is determined by such a literal pattern T together with a set S of level-h
canonical formulas; it renders as

    (AND over b in S of <>b)  AND  [](OR over S)  AND  T-hat

and pins down a pointed model to depth h+1: the atoms at the point and the
exact set of level-h descriptions realized among its successors. The members
of a fixed level partition all pointed models (every world satisfies exactly
one member), which is what makes the following machinery work:

* entailment of any formula inside the matching height/order fragment from a
  member is decided by a structural recursion (``canonical_decides``);
* every member entails exactly one member one level down (``project``);
* consistency of a member over a frame class is decided by a greatest-
  fixpoint elimination over the member universe (``consistent_members``): a
  member survives iff it can sit inside a self-supporting relational
  structure on the universe whose edges respect the class's frame
  properties and whose diamond requirements are all fulfilled. Survivors
  are genuinely satisfiable because the surviving structure *is* a model
  (worlds are members, atoms read off T, every member holds at itself), and
  the converse holds because the types realized in any actual model of the
  class form such a structure.

The per-class edge conditions and member filters are recorded next to the
code; the level-1 verdicts are cross-checked exhaustively against the
brute-force oracle in the test suite, and every surviving universe is
re-verified as an explicit model.

Identifiers: member ids order the universe by (T bitmask, S bitmask)
lexicographically; ids double as world labels in emitted models.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .proofs import GL, SigmaSpec
from .syntax import (
    AtomF,
    Bottom,
    Box,
    Const,
    Formula,
    Implies,
    Var,
    atom_of_rank,
    big_and,
    big_or,
    diamond,
    in_language,
    neg,
)

DEFAULT_CAP = 4096


class EnumerationCapError(ValueError):
    def __init__(self, h: int, n: int, size: int, cap: int, factored: str):
        super().__init__(
            f"C_({h},{n}) has {factored} = {size} members, over the cap of {cap}"
        )
        self.h = h
        self.n = n
        self.size = size
        self.cap = cap


class ConsistencyUndecidedError(RuntimeError):
    """Raised when no certified decision route exists for the configuration."""


@lru_cache(maxsize=None)
def canonical_count(h: int, n: int) -> int:
    if h < 0 or n < 0:
        raise ValueError("level and order must be natural numbers")
    if h == 0:
        return 2 ** (n + 1)
    return 2 ** canonical_count(h - 1, n) * 2 ** (n + 1)


class CanonicalFormula:
    """Structural (S, T) member of a canonical universe.

    Equality and hashing go through (level, n, T bitmask, S bitmask), which
    identifies a member uniquely and costs O(1).
    """

    __slots__ = ("level", "n", "t_mask", "s", "s_mask", "mid", "_hash")

    def __init__(self, level: int, n: int, t_mask: int, s: Tuple["CanonicalFormula", ...]):
        if not 0 <= t_mask < 2 ** (n + 1):
            raise ValueError("T bitmask out of range for the order bound")
        if level == 0 and s:
            raise ValueError("level-0 members have no S component")
        self.level = level
        self.n = n
        self.t_mask = t_mask
        self.s = tuple(sorted(s, key=lambda m: m.mid))
        for member in self.s:
            if member.level != level - 1 or member.n != n:
                raise ValueError("S members must live one level down, same order")
        self.s_mask = 0
        for member in self.s:
            self.s_mask |= 1 << member.mid
        lower = canonical_count(level - 1, n) if level else 0
        self.mid = t_mask * 2 ** lower + self.s_mask if level else t_mask
        self._hash = hash((level, n, t_mask, self.s_mask))

    def __eq__(self, other):
        return (
            isinstance(other, CanonicalFormula)
            and other.level == self.level
            and other.n == self.n
            and other.t_mask == self.t_mask
            and other.s_mask == self.s_mask
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"C({self.level},{self.n})#{self.mid}"


def _factored_count(h: int, n: int) -> str:
    if h == 0:
        return f"2^{n + 1}"
    return f"2^{canonical_count(h - 1, n)} * 2^{n + 1}"


@lru_cache(maxsize=None)
def enumerate_canonical(h: int, n: int, cap: int = DEFAULT_CAP) -> Tuple[CanonicalFormula, ...]:
    """All members of the level-h universe in id order.

    Refuses, before building anything, when the universe size exceeds the
    cap; the size is computed from the recurrence so the refusal is instant
    even for astronomically large universes.
    """
    size = canonical_count(h, n)
    if size > cap:
        raise EnumerationCapError(h, n, size, cap, _factored_count(h, n))
    if h == 0:
        return tuple(CanonicalFormula(0, n, t, ()) for t in range(2 ** (n + 1)))
    lower = enumerate_canonical(h - 1, n, cap)
    members = []
    for t_mask in range(2 ** (n + 1)):
        for s_mask in range(2 ** len(lower)):
            s = tuple(lower[i] for i in range(len(lower)) if s_mask >> i & 1)
            members.append(CanonicalFormula(h, n, t_mask, s))
    return tuple(members)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def hat(t_mask: int, n: int) -> Formula:
    """Complete literal conjunction over ranks 0..n, folded in rank order."""
    literals = []
    for rank in range(n + 1):
        atom = AtomF(atom_of_rank(rank))
        literals.append(atom if t_mask >> rank & 1 else neg(atom))
    return big_and(literals)


def oplus(formulas: Sequence[Formula]) -> Formula:
    """Exclusive disjunction: exactly one of the given formulas holds.

    Each disjunct pairs a member with the folded conjunction of the others'
    negations, so a singleton input yields ``a & !bot`` rather than ``a``.
    """
    formulas = list(formulas)
    from .syntax import conj

    disjuncts = [
        conj(alpha, big_and([neg(beta) for k, beta in enumerate(formulas) if k != i]))
        for i, alpha in enumerate(formulas)
    ]
    return big_or(disjuncts)


@lru_cache(maxsize=None)
def render_canonical(alpha: CanonicalFormula) -> Formula:
    """The formula a member denotes; level 0 is the literal pattern alone."""
    pattern = hat(alpha.t_mask, alpha.n)
    if alpha.level == 0:
        return pattern
    from .syntax import conj

    diamonds = big_and([diamond(render_canonical(b)) for b in alpha.s])
    box_part = Box(big_or([render_canonical(b) for b in alpha.s]))
    return conj(conj(diamonds, box_part), pattern)


# ---------------------------------------------------------------------------
# Entailment decision and projection
# ---------------------------------------------------------------------------

_decides_memo: Dict[Tuple[CanonicalFormula, Formula], bool] = {}


def canonical_decides(alpha: CanonicalFormula, phi: Formula) -> bool:
    """Whether alpha entails phi (in the base system K).

    Defined for phi inside the fragment of height <= level and order <= n;
    by the dichotomy property, a verdict of False means alpha entails the
    negation. For members consistent over a frame class the same verdict
    answers entailment in the extended system.
    """
    if not in_language(phi, alpha.level, alpha.n):
        raise ValueError(
            f"formula of height {phi.height}, order {phi.order} is outside "
            f"the level-{alpha.level}, order-{alpha.n} fragment"
        )
    return _decides(alpha, phi)


def _decides(alpha: CanonicalFormula, phi: Formula) -> bool:
    key = (alpha, phi)
    hit = _decides_memo.get(key)
    if hit is not None:
        return hit
    if isinstance(phi, AtomF):
        if isinstance(phi.atom, Bottom):
            value = False
        else:
            from .syntax import atom_rank

            value = bool(alpha.t_mask >> atom_rank(phi.atom) & 1)
    elif isinstance(phi, Implies):
        value = (not _decides(alpha, phi.lhs)) or _decides(alpha, phi.rhs)
    else:
        value = all(_decides(beta, phi.body) for beta in alpha.s)
    _decides_memo[key] = value
    return value


@lru_cache(maxsize=None)
def project(alpha: CanonicalFormula) -> CanonicalFormula:
    """The unique member one level down entailed by alpha.

    Found by searching the lower universe; zero or multiple hits would
    contradict the partition property and signal an implementation bug.
    """
    if alpha.level == 0:
        raise ValueError("level-0 members have no projection")
    hits = [
        lower
        for lower in enumerate_canonical(alpha.level - 1, alpha.n)
        if _decides(alpha, render_canonical(lower))
    ]
    if len(hits) != 1:
        raise RuntimeError(
            f"projection of {alpha!r} is not unique: {len(hits)} candidates"
        )
    return hits[0]


@lru_cache(maxsize=None)
def diamond_profile(alpha: CanonicalFormula) -> int:
    """Bitmask over the lower universe: which <>b the member entails.

    Computed through canonical_decides; structurally this coincides with the
    member's own S bitmask, which the test suite asserts.
    """
    if alpha.level == 0:
        raise ValueError("level-0 members have no diamond profile")
    mask = 0
    for lower in enumerate_canonical(alpha.level - 1, alpha.n):
        if _decides(alpha, diamond(render_canonical(lower))):
            mask |= 1 << lower.mid
    return mask


# ---------------------------------------------------------------------------
# Consistency by type elimination
# ---------------------------------------------------------------------------
#
# Supporting-edge conditions between same-level members a, b (p = project):
#   base:              p(b) in S_a           (the box part tolerates b)
#   plain / T / D:     base
#   B without 4:       base and p(a) in S_b  (edges must be reversible)
#   4 without B:       base and S_b <= S_a   (diamonds shrink along edges)
#   4 and B:           base and p(a) in S_b and S_a == S_b
#   GL:                base and S_b < S_a    (strict descent gives cwf)
#   5 (with/without 4) base and S_a == S_b   (clusters share their horizon)
#                      and, with B, p(a) in S_b
# Member filters: T forces p(a) in S_a (reflexive edges must exist);
# D forces S_a nonempty (a dead end cannot be serial).
#
# A member survives iff every diamond requirement g in S_a is fulfilled by a
# surviving b with p(b) = g along a supporting edge. The survivors with the
# supporting edges form a frame with the class's properties in which every
# member satisfies its own rendering, so survival certifies satisfiability;
# conversely the set of types realized in any model of the class survives.


def _certified_configuration(level: int, sigma: SigmaSpec) -> bool:
    if ".2" in sigma:
        return False
    if "L" in sigma:
        return sigma == GL
    if "5" not in sigma:
        return True  # any sigma inside {T,B,4,D}
    # Euclidean cases ride on the cluster analysis:
    if level <= 1:
        return sigma <= {"T", "4", "5", "D"}
    return "4" in sigma and sigma <= {"4", "5", "D"}


def _edge_ok(alpha: CanonicalFormula, beta: CanonicalFormula, sigma: SigmaSpec) -> bool:
    if not alpha.s_mask >> project(beta).mid & 1:
        return False
    if "L" in sigma:
        return beta.s_mask != alpha.s_mask and beta.s_mask & ~alpha.s_mask == 0
    if "5" in sigma:
        if beta.s_mask != alpha.s_mask:
            return False
        return "B" not in sigma or bool(beta.s_mask >> project(alpha).mid & 1)
    if "4" in sigma:
        if beta.s_mask & ~alpha.s_mask:
            return False
        if "B" in sigma:
            return alpha.s_mask == beta.s_mask and bool(
                beta.s_mask >> project(alpha).mid & 1
            )
        return True
    if "B" in sigma:
        return bool(beta.s_mask >> project(alpha).mid & 1)
    return True


def _member_ok(alpha: CanonicalFormula, sigma: SigmaSpec) -> bool:
    if "T" in sigma and not alpha.s_mask >> project(alpha).mid & 1:
        return False
    if "D" in sigma and not alpha.s_mask:
        return False
    return True


@lru_cache(maxsize=None)
def consistent_members(
    level: int, n: int, sigma: SigmaSpec, cap: int = DEFAULT_CAP
) -> Tuple[CanonicalFormula, ...]:
    """Members of the level universe consistent over the sigma frame class."""
    universe = enumerate_canonical(level, n, cap)
    if level == 0:
        # every literal pattern has a one-point model with or without a loop
        return universe
    if not _certified_configuration(level, sigma):
        raise ConsistencyUndecidedError(
            f"no certified consistency decision for sigma={set(sigma) or 'K'} "
            f"at level {level}"
        )
    alive = [m for m in universe if _member_ok(m, sigma)]
    lower_consistent = {m.mid for m in consistent_members(level - 1, n, sigma, cap)}
    alive = [
        m
        for m in alive
        if all(g.mid in lower_consistent for g in m.s)
    ]
    while True:
        alive_set = set(alive)
        by_proj: Dict[int, List[CanonicalFormula]] = {}
        for m in alive:
            by_proj.setdefault(project(m).mid, []).append(m)
        survivors = []
        for m in alive:
            ok = True
            for g in m.s:
                if not any(
                    _edge_ok(m, b, sigma) for b in by_proj.get(g.mid, ())
                ):
                    ok = False
                    break
            if ok:
                survivors.append(m)
        if len(survivors) == len(alive):
            return tuple(survivors)
        alive = survivors


def supporting_edges(
    members: Sequence[CanonicalFormula], sigma: SigmaSpec
) -> FrozenSet[Tuple[int, int]]:
    """All supporting edges among the given members, as id pairs."""
    return frozenset(
        (a.mid, b.mid)
        for a in members
        for b in members
        if _edge_ok(a, b, sigma)
    )


def sigma_consistent(
    alpha: CanonicalFormula, sigma: SigmaSpec, max_worlds: int = 3
) -> bool:
    """Whether the member is satisfiable over the sigma frame class.

    The base system needs no search (every member has a structural model).
    Certified sigma configurations go through the elimination; anything else
    falls back to a bounded oracle search, where an exhausted search raises
    rather than guessing.
    """
    if not sigma:
        return True
    try:
        members = consistent_members(alpha.level, alpha.n, sigma)
    except ConsistencyUndecidedError:
        from .oracle import OracleConfig, oracle_satisfiable

        cfg = OracleConfig(max_worlds=max_worlds, sigma=sigma)
        if oracle_satisfiable(render_canonical(alpha), cfg) is not None:
            return True
        raise ConsistencyUndecidedError(
            f"satisfiability of {alpha!r} over {set(sigma)} unknown at "
            f"bound {max_worlds}"
        ) from None
    return alpha in set(members)


def c_compatible(
    alpha: CanonicalFormula, beta: CanonicalFormula, sigma: SigmaSpec
) -> bool:
    """Whether alpha can see beta in some model of the class, i.e. whether
    the conjunction of alpha with diamond-beta is satisfiable.

    Defined for members already known consistent. For the Euclidean classes
    the growth direction flips: a successor's horizon contains the
    predecessor's instead of being contained in it.
    """
    if not alpha.s_mask >> project(beta).mid & 1:
        return False
    if "5" in sigma and "4" not in sigma:
        # successor sits in a cluster it belongs to
        return (
            alpha.s_mask & ~beta.s_mask == 0
            and bool(beta.s_mask >> project(beta).mid & 1)
        )
    if "5" in sigma:
        return alpha.s_mask == beta.s_mask
    if "L" in sigma or "4" in sigma:
        if beta.s_mask & ~alpha.s_mask:
            return False
        if "B" in sigma:
            return alpha.s_mask == beta.s_mask and bool(
                beta.s_mask >> project(alpha).mid & 1
            )
        return True
    if "B" in sigma:
        return bool(beta.s_mask >> project(alpha).mid & 1)
    return True


def clear_caches():
    _decides_memo.clear()
    project.cache_clear()
    diamond_profile.cache_clear()
    render_canonical.cache_clear()
    consistent_members.cache_clear()
    enumerate_canonical.cache_clear()
    canonical_count.cache_clear()
