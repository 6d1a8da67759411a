"""Hilbert-style proofs for normal modal logics.

A proof is a sequence of formula lines, each carrying its justification:
membership in the premise set, one of the four base axioms (three
propositional schemes plus the distribution axiom), one of the extension
axioms named by the active logic, modus ponens from two earlier lines,
necessitation of an earlier line, or uniform substitution into an earlier
line with an explicitly supplied substitution.

Checking is linear and certificate-driven: the substitution rule never
searches, it verifies the sigma attached to the line. Provability of phi from
a finite premise set is witnessed by a premise-free proof containing a line
``g1 & ... & gk -> phi`` with every ``gi`` drawn from the premises (the
zero-premise case accepts a bare ``phi`` line).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .syntax import (
    BOT,
    Box,
    Formula,
    Implies,
    big_and,
    diamond,
    neg,
    parse,
    render,
    substitute,
    var,
)

# Axiom identifiers. Base axioms belong to every system; sigma axioms are
# switched on by membership in the active SigmaSpec.
BASE_AXIOMS = ("PL1", "PL2", "PL3", "K")
SIGMA_AXIOMS = ("T", "B", "4", "5", "D", ".2", "L")

_P, _Q, _R = var(0), var(1), var(2)

_AXIOM_TABLE = {
    "PL1": Implies(_P, Implies(_Q, _P)),
    "PL2": Implies(
        Implies(_P, Implies(_Q, _R)),
        Implies(Implies(_P, _Q), Implies(_P, _R)),
    ),
    "PL3": Implies(Implies(neg(_P), neg(_Q)), Implies(_Q, _P)),
    "K": Implies(Box(Implies(_P, _Q)), Implies(Box(_P), Box(_Q))),
    "T": Implies(Box(_P), _P),
    "B": Implies(_P, Box(diamond(_P))),
    "4": Implies(Box(_P), Box(Box(_P))),
    "5": Implies(diamond(_P), Box(diamond(_P))),
    "D": Implies(Box(_P), diamond(_P)),
    ".2": Implies(diamond(Box(_P)), Box(diamond(_P))),
    "L": Implies(Box(Implies(Box(_P), _P)), Box(_P)),
}


def axiom_formula(which: str) -> Formula:
    """The schematic formula of an axiom, over the fixed variables p0,p1,p2."""
    try:
        return _AXIOM_TABLE[which]
    except KeyError:
        raise ValueError(f"unknown axiom id {which!r}") from None


class SigmaSpec(frozenset):
    """A set of extension-axiom names (subset of T,B,4,5,D,.2,L).

    The empty spec is plain K; {"L"} is the provability logic GL.
    """

    def __new__(cls, axioms: Iterable[str] = ()):
        axioms = frozenset(axioms)
        bad = axioms - frozenset(SIGMA_AXIOMS)
        if bad:
            raise ValueError(f"unknown sigma axioms: {sorted(bad)}")
        return super().__new__(cls, axioms)

    def __repr__(self):
        if not self:
            return "K"
        if self == {"L"}:
            return "GL"
        return "K" + "".join(sorted(self, key=SIGMA_AXIOMS.index))


K = SigmaSpec()
GL = SigmaSpec({"L"})


# ---------------------------------------------------------------------------
# Justifications and proofs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Premise:
    kind = "Premise"


@dataclass(frozen=True)
class BaseAxiom:
    ax: str
    kind = "BaseAxiom"


@dataclass(frozen=True)
class SigmaAxiom:
    ax: str
    kind = "SigmaAxiom"


@dataclass(frozen=True)
class ModusPonens:
    """i names the implication line, j its antecedent line."""

    i: int
    j: int
    kind = "MP"


@dataclass(frozen=True)
class Necessitation:
    i: int
    kind = "Nec"


class UniformSub:
    """Substitution certificate: the line equals sigma applied to line i."""

    kind = "Subst"
    __slots__ = ("i", "sigma")

    def __init__(self, i: int, sigma: Mapping[int, Formula]):
        self.i = i
        self.sigma = dict(sigma)

    def __eq__(self, other):
        return (
            isinstance(other, UniformSub)
            and other.i == self.i
            and other.sigma == self.sigma
        )

    def __repr__(self):
        return f"UniformSub({self.i}, {self.sigma})"


Justification = object


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    justification: Justification


class HilbertProof:
    def __init__(self, lines: Sequence[ProofLine]):
        self.lines = tuple(lines)
        if not self.lines:
            raise ValueError("a proof must contain at least one line")

    def conclusion(self) -> Formula:
        return self.lines[-1].formula

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    failed_line: Optional[int] = None
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok


def _check_line(
    sigma_spec: SigmaSpec,
    premises: frozenset,
    lines: Sequence[ProofLine],
    k: int,
) -> Optional[str]:
    """Return a failure reason for line k, or None if it checks."""
    phi, just = lines[k].formula, lines[k].justification

    if isinstance(just, Premise):
        if phi not in premises:
            return "formula is not a premise"
        return None

    if isinstance(just, BaseAxiom):
        if just.ax not in BASE_AXIOMS:
            return f"{just.ax!r} is not a base axiom"
        if phi != axiom_formula(just.ax):
            return f"line is not the {just.ax} axiom formula"
        return None

    if isinstance(just, SigmaAxiom):
        if just.ax not in SIGMA_AXIOMS:
            return f"{just.ax!r} is not a sigma axiom"
        if just.ax not in sigma_spec:
            return f"axiom {just.ax} is not in the active logic"
        if phi != axiom_formula(just.ax):
            return f"line is not the {just.ax} axiom formula"
        return None

    if isinstance(just, ModusPonens):
        if not (0 <= just.i < k and 0 <= just.j < k):
            return "modus ponens must cite earlier lines"
        impl = lines[just.i].formula
        ant = lines[just.j].formula
        if impl != Implies(ant, phi):
            return "cited lines do not fit the modus ponens shape"
        return None

    if isinstance(just, Necessitation):
        if not 0 <= just.i < k:
            return "necessitation must cite an earlier line"
        if phi != Box(lines[just.i].formula):
            return "line is not the box of the cited line"
        return None

    if isinstance(just, UniformSub):
        if not 0 <= just.i < k:
            return "substitution must cite an earlier line"
        if phi != substitute(just.sigma, lines[just.i].formula):
            return "line does not match the certified substitution"
        return None

    return f"unknown justification {just!r}"


def check_proof(
    sigma_spec: SigmaSpec, premises: Iterable[Formula], proof: HilbertProof
) -> CheckResult:
    """Check every line of the proof against the derivation rules.

    Necessitation may cite premise lines: with a nonempty premise set this is
    the global consequence relation. Provability certificates always run this
    with an empty premise set.
    """
    premises = frozenset(premises)
    for k in range(len(proof.lines)):
        reason = _check_line(sigma_spec, premises, proof.lines, k)
        if reason is not None:
            return CheckResult(False, failed_line=k, reason=reason)
    return CheckResult(True)


def _conjunction_prefixes(phi: Formula):
    """Yield the premise lists readable off the left spine of a conjunction.

    The fixed fold is left-associative, so ``g1 & g2 & g3 -> phi`` unfolds as
    [g1&g2&g3], [g1&g2, g3], [g1, g2, g3]; each unfolding is a candidate
    premise tuple.
    """
    parts = [phi]
    while True:
        yield list(parts)
        head = parts[0]
        # core shape of conj(a, b): (a -> (b -> bot)) -> bot
        if (
            isinstance(head, Implies)
            and head.rhs == BOT
            and isinstance(head.lhs, Implies)
            and isinstance(head.lhs.rhs, Implies)
            and head.lhs.rhs.rhs == BOT
        ):
            parts[0:1] = [head.lhs.lhs, head.lhs.rhs.lhs]
        else:
            return


def check_provability_certificate(
    sigma_spec: SigmaSpec,
    premises: Iterable[Formula],
    phi: Formula,
    proof: HilbertProof,
) -> CheckResult:
    """Check a certificate that phi is provable from the premises.

    Accepts iff the proof checks with no premises and some line is either phi
    itself (zero premises used) or an implication whose antecedent unfolds,
    along the fixed left conjunction fold, into formulas all drawn from the
    premise set.
    """
    premises = frozenset(premises)
    inner = check_proof(sigma_spec, frozenset(), proof)
    if not inner:
        return CheckResult(False, inner.failed_line, f"inner proof: {inner.reason}")
    for line in proof.lines:
        if line.formula == phi:
            return CheckResult(True)
        f = line.formula
        if isinstance(f, Implies) and f.rhs == phi:
            for parts in _conjunction_prefixes(f.lhs):
                if all(p in premises for p in parts):
                    return CheckResult(True)
    return CheckResult(False, reason="no line discharges the premises into phi")


# ---------------------------------------------------------------------------
# Certified-proof builders
# ---------------------------------------------------------------------------


def _reindex(just: Justification, offset: int) -> Justification:
    if isinstance(just, ModusPonens):
        return ModusPonens(just.i + offset, just.j + offset)
    if isinstance(just, Necessitation):
        return Necessitation(just.i + offset)
    if isinstance(just, UniformSub):
        return UniformSub(just.i + offset, just.sigma)
    return just


def instantiate(which: str, sigma: Mapping[int, Formula]) -> HilbertProof:
    """Two-line proof: the named axiom, then its instance under sigma."""
    kind = BaseAxiom(which) if which in BASE_AXIOMS else SigmaAxiom(which)
    schema = axiom_formula(which)
    return HilbertProof(
        [
            ProofLine(schema, kind),
            ProofLine(substitute(sigma, schema), UniformSub(0, sigma)),
        ]
    )


def nec(proof: HilbertProof) -> HilbertProof:
    lines = list(proof.lines)
    lines.append(ProofLine(Box(proof.conclusion()), Necessitation(len(lines) - 1)))
    return HilbertProof(lines)


def mp(proof_a: HilbertProof, proof_ab: HilbertProof) -> HilbertProof:
    """Combine a proof of A with a proof of A -> B into a proof of B."""
    a = proof_a.conclusion()
    impl = proof_ab.conclusion()
    if not (isinstance(impl, Implies) and impl.lhs == a):
        raise ValueError(
            f"modus ponens shape mismatch: {render(impl)} does not start from {render(a)}"
        )
    lines = list(proof_a.lines)
    offset = len(lines)
    lines.extend(
        ProofLine(line.formula, _reindex(line.justification, offset))
        for line in proof_ab.lines
    )
    lines.append(
        ProofLine(impl.rhs, ModusPonens(len(lines) - 1, offset - 1))
    )
    return HilbertProof(lines)


def premise_line(phi: Formula) -> HilbertProof:
    return HilbertProof([ProofLine(phi, Premise())])


def identity_proof(phi: Formula) -> HilbertProof:
    """A premise-free proof of phi -> phi from PL1 and PL2."""
    pp = Implies(phi, phi)
    s2 = {0: phi, 1: pp, 2: phi}
    step_pl2 = instantiate("PL2", s2)  # (p->((p->p)->p)) -> ((p->(p->p)) -> (p->p))
    step_pl1 = instantiate("PL1", {0: phi, 1: pp})  # p -> ((p->p)->p)
    first = mp(step_pl1, step_pl2)
    step_pl1b = instantiate("PL1", {0: phi, 1: phi})  # p -> (p->p)
    return mp(step_pl1b, first)


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------


def justification_to_json(just: Justification) -> dict:
    if isinstance(just, Premise):
        return {"kind": "Premise"}
    if isinstance(just, BaseAxiom):
        return {"kind": "BaseAxiom", "ax": just.ax}
    if isinstance(just, SigmaAxiom):
        return {"kind": "SigmaAxiom", "ax": just.ax}
    if isinstance(just, ModusPonens):
        return {"kind": "MP", "i": just.i, "j": just.j}
    if isinstance(just, Necessitation):
        return {"kind": "Nec", "i": just.i}
    if isinstance(just, UniformSub):
        return {
            "kind": "Subst",
            "i": just.i,
            "sigma": {f"p{k}": render(v) for k, v in just.sigma.items()},
        }
    raise ValueError(f"cannot serialize {just!r}")


def justification_from_json(data: dict) -> Justification:
    kind = data.get("kind")
    if kind == "Premise":
        return Premise()
    if kind == "BaseAxiom":
        return BaseAxiom(data["ax"])
    if kind == "SigmaAxiom":
        return SigmaAxiom(data["ax"])
    if kind == "MP":
        return ModusPonens(int(data["i"]), int(data["j"]))
    if kind == "Nec":
        return Necessitation(int(data["i"]))
    if kind == "Subst":
        sigma = {
            int(key.lstrip("p")): parse(text) for key, text in data["sigma"].items()
        }
        return UniformSub(int(data["i"]), sigma)
    raise ValueError(f"unknown justification kind {kind!r}")


def proof_to_json(
    sigma_spec: SigmaSpec, premises: Iterable[Formula], proof: HilbertProof
) -> dict:
    return {
        "sigma": sorted(sigma_spec, key=SIGMA_AXIOMS.index),
        "gamma": sorted(render(g) for g in premises),
        "lines": [
            {"f": render(line.formula), "j": justification_to_json(line.justification)}
            for line in proof.lines
        ],
    }


def proof_from_json(data: dict):
    sigma_spec = SigmaSpec(data.get("sigma", ()))
    premises = frozenset(parse(text) for text in data.get("gamma", ()))
    lines = [
        ProofLine(parse(entry["f"]), justification_from_json(entry["j"]))
        for entry in data["lines"]
    ]
    return sigma_spec, premises, HilbertProof(lines)


def premises_conjunction(premises: Sequence[Formula], phi: Formula) -> Formula:
    """The discharge line shape for a nonempty ordered premise list."""
    if not premises:
        return phi
    return Implies(big_and(premises), phi)
