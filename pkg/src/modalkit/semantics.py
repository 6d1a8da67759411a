"""Finite Kripke frames and models.

Frames carry integer-labelled worlds and an explicit relation. Models add an
atom valuation and a table over a subformula-closed set of formulas; the table
is computed bottom-up from the three valuation clauses (falsum is false,
implication is material, box quantifies over successors), so it is unique
given the frame, the atom valuation and the closure.

Frame property checks are implemented over successor bitmasks so that they
stay cheap on the multi-hundred-world models the canonical pipeline emits.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Optional, Tuple

from .proofs import SigmaSpec
from .syntax import (
    Atom,
    AtomF,
    Bottom,
    Box,
    Formula,
    Implies,
    atoms_of,
    parse,
    render,
    sub_formulas,
)


class Frame:
    __slots__ = ("worlds", "rel", "_index", "_succ")

    def __init__(self, worlds: Iterable[int], rel: Iterable[Tuple[int, int]]):
        self.worlds = tuple(sorted(set(worlds)))
        if not self.worlds:
            raise ValueError("a frame needs at least one world")
        self.rel = frozenset((int(a), int(b)) for a, b in rel)
        world_set = set(self.worlds)
        for a, b in self.rel:
            if a not in world_set or b not in world_set:
                raise ValueError(f"relation pair ({a},{b}) leaves the world set")
        self._index = {w: i for i, w in enumerate(self.worlds)}
        succ = [0] * len(self.worlds)
        for a, b in self.rel:
            succ[self._index[a]] |= 1 << self._index[b]
        self._succ = succ

    def successors(self, w: int) -> Tuple[int, ...]:
        mask = self._succ[self._index[w]]
        return tuple(v for v in self.worlds if mask >> self._index[v] & 1)

    def __eq__(self, other):
        return (
            isinstance(other, Frame)
            and other.worlds == self.worlds
            and other.rel == self.rel
        )

    def __hash__(self):
        return hash((self.worlds, self.rel))

    def __repr__(self):
        return f"Frame(worlds={list(self.worlds)}, rel={sorted(self.rel)})"


# ---------------------------------------------------------------------------
# Frame properties
# ---------------------------------------------------------------------------


def is_reflexive(frame: Frame) -> bool:
    return all(frame._succ[i] >> i & 1 for i in range(len(frame.worlds)))


def is_symmetric(frame: Frame) -> bool:
    succ = frame._succ
    n = len(frame.worlds)
    for i in range(n):
        mask = succ[i]
        j = 0
        while mask:
            if mask & 1 and not succ[j] >> i & 1:
                return False
            mask >>= 1
            j += 1
    return True


def is_transitive(frame: Frame) -> bool:
    succ = frame._succ
    n = len(frame.worlds)
    for i in range(n):
        reach = 0
        mask = succ[i]
        j = 0
        while mask:
            if mask & 1:
                reach |= succ[j]
            mask >>= 1
            j += 1
        if reach & ~succ[i]:
            return False
    return True


def is_euclidean(frame: Frame) -> bool:
    # wRu and wRv imply uRv: every successor must see all successors.
    succ = frame._succ
    n = len(frame.worlds)
    for i in range(n):
        mask = succ[i]
        j = 0
        while mask:
            if mask & 1 and succ[i] & ~succ[j]:
                return False
            mask >>= 1
            j += 1
    return True


def is_serial(frame: Frame) -> bool:
    return all(mask for mask in frame._succ)


def is_directed(frame: Frame) -> bool:
    succ = frame._succ
    n = len(frame.worlds)
    for i in range(n):
        outs = [j for j in range(n) if succ[i] >> j & 1]
        for a in outs:
            for b in outs:
                if not succ[a] & succ[b]:
                    return False
    return True


def is_irreflexive(frame: Frame) -> bool:
    return not any(frame._succ[i] >> i & 1 for i in range(len(frame.worlds)))


def is_conversely_well_founded(frame: Frame) -> bool:
    """No infinite ascending chains; on a finite frame, no cycles (self-loops
    included)."""
    n = len(frame.worlds)
    color = [0] * n  # 0 unseen, 1 on stack, 2 done
    succ = frame._succ
    for start in range(n):
        if color[start]:
            continue
        stack = [(start, 0)]
        color[start] = 1
        while stack:
            node, seen = stack[-1]
            advanced = False
            mask = succ[node] >> seen
            j = seen
            while mask:
                if mask & 1:
                    if color[j] == 1:
                        return False
                    if color[j] == 0:
                        stack[-1] = (node, j + 1)
                        stack.append((j, 0))
                        color[j] = 1
                        advanced = True
                        break
                mask >>= 1
                j += 1
            if not advanced:
                color[node] = 2
                stack.pop()
    return True


_PROPERTY_FOR_AXIOM = {
    "T": is_reflexive,
    "B": is_symmetric,
    "4": is_transitive,
    "5": is_euclidean,
    "D": is_serial,
    ".2": is_directed,
}


def check_appropriate(frame: Frame, sigma_spec: SigmaSpec) -> bool:
    """Whether the frame satisfies the property matching each axiom in sigma.

    For L the finite-frame reading is transitivity plus converse
    well-foundedness, which on finite frames coincides with transitivity plus
    irreflexivity.
    """
    for ax in sigma_spec:
        if ax == "L":
            if not (is_transitive(frame) and is_conversely_well_founded(frame)):
                return False
        elif not _PROPERTY_FOR_AXIOM[ax](frame):
            return False
    return True


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


class ClosureError(ValueError):
    pass


class KripkeModel:
    """A frame with an atom valuation and the induced table on a closure."""

    __slots__ = ("frame", "atom_val", "closure", "table")

    def __init__(self, frame, atom_val, closure, table):
        self.frame = frame
        self.atom_val = dict(atom_val)
        self.closure = frozenset(closure)
        self.table = dict(table)

    def eval(self, w: int, phi: Formula) -> bool:
        try:
            return self.table[(w, phi)]
        except KeyError:
            raise ClosureError(
                f"{render(phi)} is outside the model closure"
            ) from None

    def forces_everywhere(self, phi: Formula) -> bool:
        return all(self.eval(w, phi) for w in self.frame.worlds)


def extend_valuation(
    frame: Frame,
    atom_val: Mapping[Tuple[int, Atom], bool],
    closure: Iterable[Formula],
) -> KripkeModel:
    """Compute the unique table satisfying the valuation clauses on a
    subformula-closed set."""
    closure = frozenset(closure)
    for phi in closure:
        if isinstance(phi, Implies):
            if phi.lhs not in closure or phi.rhs not in closure:
                raise ClosureError(f"closure misses a part of {render(phi)}")
        elif isinstance(phi, Box):
            if phi.body not in closure:
                raise ClosureError(f"closure misses the body of {render(phi)}")

    table: Dict[Tuple[int, Formula], bool] = {}
    for phi in sorted(closure, key=lambda f: f.size):
        for w in frame.worlds:
            if isinstance(phi, AtomF):
                if isinstance(phi.atom, Bottom):
                    value = False
                else:
                    try:
                        value = bool(atom_val[(w, phi.atom)])
                    except KeyError:
                        raise ClosureError(
                            f"atom valuation misses {phi.atom!r} at world {w}"
                        ) from None
            elif isinstance(phi, Implies):
                value = (not table[(w, phi.lhs)]) or table[(w, phi.rhs)]
            else:
                value = all(
                    table[(v, phi.body)] for v in frame.successors(w)
                )
            table[(w, phi)] = value
    return KripkeModel(frame, atom_val, closure, table)


def eval_formula(model: KripkeModel, w: int, phi: Formula) -> bool:
    return model.eval(w, phi)


def _assignments(worlds, atoms):
    """All atom valuations over the given worlds and atoms, in a fixed order."""
    cells = [(w, a) for a in atoms for w in worlds]
    for bits in range(1 << len(cells)):
        yield {cell: bool(bits >> k & 1) for k, cell in enumerate(cells)}


def frame_forces(frame: Frame, phi: Formula) -> bool:
    """Truth of phi at every world under every valuation of its atoms.

    The value of phi depends only on the atoms occurring in it, so the
    quantification over valuations is finite.
    """
    atoms = sorted(atoms_of(phi), key=repr)
    closure = sub_formulas(phi)
    for atom_val in _assignments(frame.worlds, atoms):
        model = extend_valuation(frame, atom_val, closure)
        if not model.forces_everywhere(phi):
            return False
    return True


def gamma_forces(frame: Frame, gamma: Iterable[Formula]) -> bool:
    return all(frame_forces(frame, psi) for psi in gamma)


def consequence_holds(
    gamma: Iterable[Formula],
    phi: Formula,
    sigma_spec: SigmaSpec,
    max_worlds: int,
) -> bool:
    """Frame consequence over all appropriate frames up to the world bound:
    every appropriate frame validating all of gamma validates phi."""
    from .oracle import OracleConfig, enumerate_frames

    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    gamma = tuple(gamma)
    cfg = OracleConfig(max_worlds=max_worlds, sigma=sigma_spec)
    for frame in enumerate_frames(cfg):
        if gamma_forces(frame, gamma) and not frame_forces(frame, phi):
            return False
    return True


# ---------------------------------------------------------------------------
# Wire formats
# ---------------------------------------------------------------------------


def _atom_from_token(token: str) -> Atom:
    phi = parse(token)
    if not isinstance(phi, AtomF) or isinstance(phi.atom, Bottom):
        raise ValueError(f"{token!r} is not a rankable atom")
    return phi.atom


def model_to_json(model: KripkeModel) -> dict:
    atoms = sorted({a for (_, a) in model.atom_val}, key=repr)
    val = {
        str(w): {repr(a): bool(model.atom_val.get((w, a), False)) for a in atoms}
        for w in model.frame.worlds
    }
    return {
        "worlds": list(model.frame.worlds),
        "rel": sorted([a, b] for a, b in model.frame.rel),
        "val": val,
    }


def model_from_json(data: dict, closure: Iterable[Formula]) -> KripkeModel:
    frame = Frame(data["worlds"], [tuple(pair) for pair in data["rel"]])
    atom_val = {}
    for w_str, row in data.get("val", {}).items():
        for token, value in row.items():
            atom_val[(int(w_str), _atom_from_token(token))] = bool(value)
    return extend_valuation(frame, atom_val, closure)


def model_to_dot(model: KripkeModel, labels: Optional[Mapping[int, str]] = None) -> str:
    lines = ["digraph kripke {"]
    atoms = sorted({a for (_, a) in model.atom_val}, key=repr)
    for w in model.frame.worlds:
        true_atoms = [repr(a) for a in atoms if model.atom_val.get((w, a), False)]
        label = labels[w] if labels and w in labels else ",".join(true_atoms)
        lines.append(f'  w{w} [label="{w}: {label}"];')
    for a, b in sorted(model.frame.rel):
        lines.append(f"  w{a} -> w{b};")
    lines.append("}")
    return "\n".join(lines)
