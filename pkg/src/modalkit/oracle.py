"""Brute-force semantic ground truth.

Exhaustively enumerates frames up to a world bound, filters them by the frame
properties matching the active logic, and sweeps all valuations of the atoms
of the query formula. Satisfiability witnesses are returned as full models so
callers can re-verify them; validity verdicts carry a certification flag that
is set only when a documented completeness bound fits inside the searched
bound.

The evaluator is bit-parallel across the whole sweep: for a frame with k
worlds and a formula with m atoms, the truth of a subformula at every
(valuation, world) cell is one big integer with 2^(k*m) * k bits, laid out
valuation-major. One pass of the compiled formula then answers the sweep for
the frame, which keeps exhaustive searches at three or four worlds cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

from .proofs import SigmaSpec
from .semantics import Frame, KripkeModel, extend_valuation
from .syntax import (
    AtomF,
    Bottom,
    Box,
    Formula,
    Implies,
    atoms_of,
    neg,
    sub_formulas,
)


@dataclass(frozen=True)
class OracleConfig:
    max_worlds: int = 4
    sigma: SigmaSpec = SigmaSpec()
    completeness_bound: Optional[int] = None

    def __post_init__(self):
        if self.max_worlds < 1:
            raise ValueError("max_worlds must be at least 1")


# ---------------------------------------------------------------------------
# Raw frame pool with precomputed properties
# ---------------------------------------------------------------------------


def _succ_properties(succ: Tuple[int, ...]) -> frozenset:
    n = len(succ)
    full = (1 << n) - 1
    props = set()
    if all(succ[i] >> i & 1 for i in range(n)):
        props.add("T")
    if all(
        not (succ[i] >> j & 1) or (succ[j] >> i & 1)
        for i in range(n)
        for j in range(n)
    ):
        props.add("B")
    transitive = True
    for i in range(n):
        reach = 0
        for j in range(n):
            if succ[i] >> j & 1:
                reach |= succ[j]
        if reach & ~succ[i] & full:
            transitive = False
            break
    if transitive:
        props.add("4")
    euclidean = True
    for i in range(n):
        for j in range(n):
            if succ[i] >> j & 1 and succ[i] & ~succ[j] & full:
                euclidean = False
                break
        if not euclidean:
            break
    if euclidean:
        props.add("5")
    if all(succ[i] for i in range(n)):
        props.add("D")
    directed = True
    for i in range(n):
        outs = [j for j in range(n) if succ[i] >> j & 1]
        for a in outs:
            for b in outs:
                if not succ[a] & succ[b]:
                    directed = False
                    break
            if not directed:
                break
        if not directed:
            break
    if directed:
        props.add(".2")
    if transitive and not any(succ[i] >> i & 1 for i in range(n)):
        # finite + transitive: irreflexive is exactly converse well-foundedness
        props.add("L")
    return frozenset(props)


@lru_cache(maxsize=8)
def _frame_pool(max_worlds: int) -> List[Tuple[int, Tuple[int, ...], frozenset]]:
    """All frames with 1..max_worlds worlds as (size, succ masks, properties),
    in the fixed enumeration order: size ascending, then relation bits
    ascending with bit i*size+j standing for the pair (i, j)."""
    pool = []
    for k in range(1, max_worlds + 1):
        for bits in range(1 << (k * k)):
            succ = tuple((bits >> (i * k)) & ((1 << k) - 1) for i in range(k))
            pool.append((k, succ, _succ_properties(succ)))
    return pool


def _appropriate(props: frozenset, sigma: SigmaSpec) -> bool:
    return all(ax in props for ax in sigma)


def _to_frame(size: int, succ: Tuple[int, ...]) -> Frame:
    rel = [(i, j) for i in range(size) for j in range(size) if succ[i] >> j & 1]
    return Frame(range(size), rel)


def enumerate_frames(cfg: OracleConfig) -> Iterator[Frame]:
    """All appropriate frames up to the bound, worlds labelled 0..k-1."""
    for size, succ, props in _frame_pool(cfg.max_worlds):
        if _appropriate(props, cfg.sigma):
            yield _to_frame(size, succ)


# ---------------------------------------------------------------------------
# Bit-parallel evaluation
# ---------------------------------------------------------------------------


def _compile(phi: Formula):
    """Postorder op list over shared subterms; returns (ops, atom order)."""
    atoms = sorted(atoms_of(phi), key=repr)
    slot_of_atom = {a: i for i, a in enumerate(atoms)}
    ops = []
    slot_of: Dict[Formula, int] = {}

    def walk(node: Formula) -> int:
        if node in slot_of:
            return slot_of[node]
        if isinstance(node, AtomF):
            if isinstance(node.atom, Bottom):
                ops.append(("bot", 0, 0))
            else:
                ops.append(("atom", slot_of_atom[node.atom], 0))
        elif isinstance(node, Implies):
            ops.append(("imp", walk(node.lhs), walk(node.rhs)))
        else:
            ops.append(("box", walk(node.body), 0))
        slot_of[node] = len(ops) - 1
        return slot_of[node]

    walk(phi)
    return ops, atoms


@lru_cache(maxsize=256)
def _lane_constants(k: int, m: int):
    """Per-(worlds, atoms) bit-layout constants for the parallel sweep.

    Bit index a*k + w holds the value at world w under the valuation indexed
    a, where valuation a assigns atom i the world mask (a >> i*k) & (2^k-1).
    """
    lanes = 1 << (k * m)  # number of valuations
    total = lanes * k
    full = (1 << total) - 1
    # column masks: all bits of one world across valuations
    col = []
    base = 0
    for a in range(lanes):
        base |= 1 << (a * k)
    for w in range(k):
        col.append(base << w)
    # atom masks: truth of atom i at (a, w) follows from the valuation index
    atom_masks = []
    for i in range(m):
        mask = 0
        for a in range(lanes):
            mask |= ((a >> (i * k)) & ((1 << k) - 1)) << (a * k)
        atom_masks.append(mask)
    return lanes, full, tuple(col), tuple(atom_masks)


def _sweep(ops, k: int, succ: Tuple[int, ...], lanes_full_col_atoms) -> int:
    """Evaluate the compiled formula at every (valuation, world) cell."""
    lanes, full, col, atom_masks = lanes_full_col_atoms
    vals: List[int] = []
    for op, x, y in ops:
        if op == "atom":
            vals.append(atom_masks[x])
        elif op == "bot":
            vals.append(0)
        elif op == "imp":
            vals.append((~vals[x] | vals[y]) & full)
        else:
            body = vals[x]
            out = 0
            for w in range(k):
                cell = col[w]
                for v in range(k):
                    if succ[w] >> v & 1:
                        hit = body & col[v]
                        cell &= (hit << (w - v)) if w >= v else (hit >> (v - w))
                        if not cell:
                            break
                out |= cell
            vals.append(out)
    return vals[-1]


def _first_site(result: int, k: int) -> Tuple[int, int]:
    """Decode the lowest set bit into (valuation index, world)."""
    bit = (result & -result).bit_length() - 1
    return bit // k, bit % k


def _witness_model(
    phi: Formula, size: int, succ: Tuple[int, ...], atoms, lane: int
) -> Tuple[KripkeModel, int]:
    frame = _to_frame(size, succ)
    atom_val = {
        (w, atom): bool((lane >> (i * size)) & (1 << w))
        for i, atom in enumerate(atoms)
        for w in range(size)
    }
    model = extend_valuation(frame, atom_val, sub_formulas(phi))
    world = next(w for w in range(size) if model.eval(w, phi))
    return model, world


def oracle_satisfiable(
    phi: Formula, cfg: OracleConfig
) -> Optional[Tuple[KripkeModel, int]]:
    """First satisfying (model, world) in enumeration order, if any exists
    within the bound. Order: frames as enumerated, then valuations by index,
    then worlds."""
    ops, atoms = _compile(phi)
    m = len(atoms)
    by_size = {}
    for size, succ, props in _frame_pool(cfg.max_worlds):
        if not _appropriate(props, cfg.sigma):
            continue
        consts = by_size.get(size)
        if consts is None:
            consts = by_size[size] = _lane_constants(size, m)
        result = _sweep(ops, size, succ, consts)
        if result:
            lane, _ = _first_site(result, size)
            return _witness_model(phi, size, succ, atoms, lane)
    return None


@lru_cache(maxsize=100_000)
def _refutation_sites(phi: Formula, max_worlds: int):
    """For each frame index in the pool, the first valuation refuting phi.

    A frame refutes phi when some valuation makes it false at some world, so
    this is a satisfiability sweep for the negation, cached per formula and
    reused across logics.
    """
    negated = neg(phi)
    ops, atoms = _compile(negated)
    m = len(atoms)
    sites = {}
    consts_by_size = {}
    for idx, (size, succ, props) in enumerate(_frame_pool(max_worlds)):
        consts = consts_by_size.get(size)
        if consts is None:
            consts = consts_by_size[size] = _lane_constants(size, m)
        result = _sweep(ops, size, succ, consts)
        if result:
            sites[idx] = _first_site(result, size)[0]
    return sites, atoms


@dataclass(frozen=True)
class OracleVerdict:
    valid: bool
    certified: bool
    witness: Optional[Tuple[KripkeModel, int]]
    max_worlds: int

    def label(self) -> str:
        if not self.valid:
            return "invalid"
        return "valid (certified)" if self.certified else "valid up to bound"


def oracle_valid(phi: Formula, cfg: OracleConfig) -> OracleVerdict:
    """Validity over the appropriate frames within the bound.

    A countermodel is definitive. An exhausted search certifies validity only
    when the caller supplied a completeness bound inside the searched bound;
    otherwise the verdict is labelled as holding up to the bound.
    """
    sites, atoms = _refutation_sites(phi, cfg.max_worlds)
    pool = _frame_pool(cfg.max_worlds)
    for idx in sorted(sites):
        size, succ, props = pool[idx]
        if not _appropriate(props, cfg.sigma):
            continue
        model, world = _witness_model(neg(phi), size, succ, atoms, sites[idx])
        return OracleVerdict(False, True, (model, world), cfg.max_worlds)
    certified = (
        cfg.completeness_bound is not None
        and cfg.completeness_bound <= cfg.max_worlds
    )
    return OracleVerdict(True, certified, None, cfg.max_worlds)


def count_frames(max_worlds: int, sigma: SigmaSpec = SigmaSpec()) -> int:
    return sum(
        1 for _, _, props in _frame_pool(max_worlds) if _appropriate(props, sigma)
    )
