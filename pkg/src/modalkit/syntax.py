"""Modal formula syntax: core connectives, parsing, printing, substitution.

The core language has exactly three constructors: the falsum atom, implication,
and box. Everything else (negation, conjunction, disjunction, diamond, top,
biconditional) is defined sugar that expands deterministically to core form, so
structural equality of trees is logical-syntax identity.

Atoms are propositional variables ``p0, p1, ...``, propositional constants
``c0, c1, ...`` and ``bot``. Variables admit uniform substitution; constants do
not. The two families are interleaved into a single rank order
(``p0, c0, p1, c1, ...``) which the canonical-formula machinery relies on;
``bot`` carries no rank.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Optional


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------


class Atom:
    __slots__ = ("_hash",)

    def __hash__(self):
        return self._hash


class Var(Atom):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError("variable index must be a natural number")
        self.index = index
        self._hash = hash(("Var", index))

    __hash__ = Atom.__hash__

    def __eq__(self, other):
        return isinstance(other, Var) and other.index == self.index

    def __repr__(self):
        return f"p{self.index}"


class Const(Atom):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError("constant index must be a natural number")
        self.index = index
        self._hash = hash(("Const", index))

    __hash__ = Atom.__hash__

    def __eq__(self, other):
        return isinstance(other, Const) and other.index == self.index

    def __repr__(self):
        return f"c{self.index}"


class Bottom(Atom):
    __slots__ = ()

    def __init__(self):
        self._hash = hash("Bottom")

    __hash__ = Atom.__hash__

    def __eq__(self, other):
        return isinstance(other, Bottom)

    def __repr__(self):
        return "bot"


BOTTOM = Bottom()


def atom_rank(atom: Atom) -> int:
    """Rank of a non-bot atom in the fixed enumeration p0,c0,p1,c1,...

    Variables sit at even ranks (2i) and constants at odd ranks (2i+1); bot is
    deliberately excluded from the enumeration.
    """
    if isinstance(atom, Var):
        return 2 * atom.index
    if isinstance(atom, Const):
        return 2 * atom.index + 1
    raise ValueError("bot has no rank in the atom enumeration")


def atom_of_rank(rank: int) -> Atom:
    """Inverse of :func:`atom_rank`."""
    if rank < 0:
        raise ValueError("rank must be a natural number")
    return Var(rank // 2) if rank % 2 == 0 else Const(rank // 2)


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


class Formula:
    """Core modal formula. Height, order and node count are precomputed so
    the canonical machinery can interrogate them cheaply."""

    __slots__ = ("height", "order", "size", "_hash")

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return render(self)


class AtomF(Formula):
    __slots__ = ("atom",)

    def __init__(self, atom: Atom):
        self.atom = atom
        self.height = 0
        self.order = 0 if isinstance(atom, Bottom) else atom_rank(atom)
        self.size = 1
        self._hash = hash(("AtomF", atom))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, AtomF) and other.atom == self.atom


class Implies(Formula):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs: Formula, rhs: Formula):
        self.lhs = lhs
        self.rhs = rhs
        self.height = max(lhs.height, rhs.height)
        self.order = max(lhs.order, rhs.order)
        self.size = 1 + lhs.size + rhs.size
        self._hash = hash(("Implies", lhs._hash, rhs._hash))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Implies)
            and other._hash == self._hash
            and other.lhs == self.lhs
            and other.rhs == self.rhs
        )


class Box(Formula):
    __slots__ = ("body",)

    def __init__(self, body: Formula):
        self.body = body
        self.height = 1 + body.height
        self.order = body.order
        self.size = 1 + body.size
        self._hash = hash(("Box", body._hash))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Box) and other._hash == self._hash and other.body == self.body


BOT = AtomF(BOTTOM)
TOP = Implies(BOT, BOT)


def var(i: int) -> Formula:
    return AtomF(Var(i))


def const(i: int) -> Formula:
    return AtomF(Const(i))


def neg(phi: Formula) -> Formula:
    return Implies(phi, BOT)


def conj(lhs: Formula, rhs: Formula) -> Formula:
    return neg(Implies(lhs, neg(rhs)))


def disj(lhs: Formula, rhs: Formula) -> Formula:
    return Implies(neg(lhs), rhs)


def diamond(phi: Formula) -> Formula:
    return neg(Box(neg(phi)))


def iff(lhs: Formula, rhs: Formula) -> Formula:
    return conj(Implies(lhs, rhs), Implies(rhs, lhs))


def big_and(items: Iterable[Formula]) -> Formula:
    """Left fold of binary conjunction; the empty conjunction is top."""
    items = list(items)
    if not items:
        return TOP
    acc = items[0]
    for item in items[1:]:
        acc = conj(acc, item)
    return acc


def big_or(items: Iterable[Formula]) -> Formula:
    """Left fold of binary disjunction; the empty disjunction is bot."""
    items = list(items)
    if not items:
        return BOT
    acc = items[0]
    for item in items[1:]:
        acc = disj(acc, item)
    return acc


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def height(phi: Formula) -> int:
    """Modal nesting depth: box adds one, implication takes the max."""
    return phi.height


def order(phi: Formula) -> int:
    """Maximum atom rank occurring in the formula (bot counts as 0)."""
    return phi.order


def in_language(phi: Formula, h: int, n: int) -> bool:
    """Membership in the fragment of height at most h and order at most n."""
    return phi.height <= h and phi.order <= n


def sub_formulas(phi: Formula) -> frozenset:
    """The set of all subtrees of the core form, including phi itself."""
    out = set()
    stack = [phi]
    while stack:
        node = stack.pop()
        if node in out:
            continue
        out.add(node)
        if isinstance(node, Implies):
            stack.append(node.lhs)
            stack.append(node.rhs)
        elif isinstance(node, Box):
            stack.append(node.body)
    return frozenset(out)


def atoms_of(phi: Formula) -> frozenset:
    """All non-bot atoms occurring in phi."""
    out = set()
    for sub in sub_formulas(phi):
        if isinstance(sub, AtomF) and not isinstance(sub.atom, Bottom):
            out.add(sub.atom)
    return frozenset(out)


def variables_of(phi: Formula) -> frozenset:
    return frozenset(a for a in atoms_of(phi) if isinstance(a, Var))


# ---------------------------------------------------------------------------
# Uniform substitution
# ---------------------------------------------------------------------------

Substitution = Mapping[int, Formula]


def substitute(sigma: Substitution, phi: Formula) -> Formula:
    """Uniform substitution of formulas for variables.

    Constants and bot are fixed points, as are variables outside the domain.
    """
    if isinstance(phi, AtomF):
        atom = phi.atom
        if isinstance(atom, Var) and atom.index in sigma:
            return sigma[atom.index]
        return phi
    if isinstance(phi, Implies):
        lhs = substitute(sigma, phi.lhs)
        rhs = substitute(sigma, phi.rhs)
        if lhs is phi.lhs and rhs is phi.rhs:
            return phi
        return Implies(lhs, rhs)
    body = substitute(sigma, phi.body)
    return phi if body is phi.body else Box(body)


def match_substitution(pattern: Formula, target: Formula) -> Optional[dict]:
    """Find sigma with substitute(sigma, pattern) == target, if one exists.

    The binding is unique on the variables of the pattern; constants and bot
    must match literally. Returns None when no match exists.
    """
    bindings: dict = {}

    def walk(pat: Formula, tgt: Formula) -> bool:
        if isinstance(pat, AtomF):
            atom = pat.atom
            if isinstance(atom, Var):
                seen = bindings.get(atom.index)
                if seen is None:
                    bindings[atom.index] = tgt
                    return True
                return seen == tgt
            return pat == tgt
        if isinstance(pat, Implies):
            return (
                isinstance(tgt, Implies)
                and walk(pat.lhs, tgt.lhs)
                and walk(pat.rhs, tgt.rhs)
            )
        return isinstance(tgt, Box) and walk(pat.body, tgt.body)

    return bindings if walk(pattern, target) else None


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_UNARY = ("!", "[]", "<>")


def _tokenize(text: str) -> Iterator[tuple]:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("->", i):
            yield ("->", i)
            i += 2
        elif text.startswith("[]", i):
            yield ("[]", i)
            i += 2
        elif text.startswith("<>", i):
            yield ("<>", i)
            i += 2
        elif ch in "|&!()":
            yield (ch, i)
            i += 1
        elif text.startswith("bot", i):
            yield ("bot", i)
            i += 3
        elif ch in "pc":
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise ParseError(f"expected digits after '{ch}'", i)
            yield (text[i:j], i)
            i = j
        else:
            raise ParseError(f"unknown token {ch!r}", i)
    yield ("<end>", n)


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_tokenize(text))
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0]

    def here(self):
        return self.tokens[self.pos][1]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok[0]

    def expect(self, tok: str):
        if self.peek() != tok:
            raise ParseError(f"expected {tok!r}, found {self.peek()!r}", self.here())
        return self.advance()

    # formula := impl ; impl := disj ["->" impl]  (right-associative)
    def impl(self) -> Formula:
        lhs = self.disj()
        if self.peek() == "->":
            self.advance()
            return Implies(lhs, self.impl())
        return lhs

    def disj(self) -> Formula:
        acc = self.conj()
        while self.peek() == "|":
            self.advance()
            acc = disj(acc, self.conj())
        return acc

    def conj(self) -> Formula:
        acc = self.unary()
        while self.peek() == "&":
            self.advance()
            acc = conj(acc, self.unary())
        return acc

    def unary(self) -> Formula:
        prefixes = []
        while self.peek() in _UNARY:
            prefixes.append(self.advance())
        phi = self.atomexpr()
        for op in reversed(prefixes):
            if op == "!":
                phi = neg(phi)
            elif op == "[]":
                phi = Box(phi)
            else:
                phi = diamond(phi)
        return phi

    def atomexpr(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.advance()
            phi = self.impl()
            self.expect(")")
            return phi
        if tok == "bot":
            self.advance()
            return BOT
        if tok and tok[0] == "p" and tok[1:].isdigit():
            self.advance()
            return var(int(tok[1:]))
        if tok and tok[0] == "c" and tok[1:].isdigit():
            self.advance()
            return const(int(tok[1:]))
        raise ParseError(f"expected a formula, found {tok!r}", self.here())


def parse(text: str) -> Formula:
    """Parse ASCII syntax into core form.

    Grammar: ``->`` is right-associative and binds loosest, then ``|``, then
    ``&``; the unary prefixes ``!``, ``[]``, ``<>`` bind tightest and stack.
    Derived connectives expand to the core language during parsing.
    """
    parser = _Parser(text)
    phi = parser.impl()
    if parser.peek() != "<end>":
        raise ParseError(f"trailing input {parser.peek()!r}", parser.here())
    return phi


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# Precedence levels used when rendering: implication 0, | 1, & 2, unary/atom 3.
_LVL_IMPL, _LVL_DISJ, _LVL_CONJ, _LVL_UNARY = 0, 1, 2, 3


def _match_neg(phi: Formula):
    if isinstance(phi, Implies) and phi.rhs == BOT:
        return phi.lhs
    return None


def _match_diamond(phi: Formula):
    inner = _match_neg(phi)
    if inner is not None and isinstance(inner, Box):
        body = _match_neg(inner.body)
        if body is not None:
            return body
    return None


def _match_conj(phi: Formula):
    inner = _match_neg(phi)
    if inner is not None and isinstance(inner, Implies):
        rhs = _match_neg(inner.rhs)
        if rhs is not None:
            return inner.lhs, rhs
    return None


def _match_disj(phi: Formula):
    if isinstance(phi, Implies) and phi.rhs != BOT:
        lhs = _match_neg(phi.lhs)
        if lhs is not None:
            return lhs, phi.rhs
    return None


def _render(phi: Formula) -> tuple:
    """Return (text, level) where level is the grammar stratum of text."""
    if isinstance(phi, AtomF):
        return repr(phi.atom), _LVL_UNARY

    body = _match_diamond(phi)
    if body is not None:
        return "<>" + _wrap(body, _LVL_UNARY), _LVL_UNARY

    parts = _match_conj(phi)
    if parts is not None:
        return f"{_wrap(parts[0], _LVL_CONJ)} & {_wrap(parts[1], _LVL_UNARY)}", _LVL_CONJ

    body = _match_neg(phi)
    if body is not None:
        return "!" + _wrap(body, _LVL_UNARY), _LVL_UNARY

    parts = _match_disj(phi)
    if parts is not None:
        return f"{_wrap(parts[0], _LVL_DISJ)} | {_wrap(parts[1], _LVL_CONJ)}", _LVL_DISJ

    if isinstance(phi, Implies):
        return f"{_wrap(phi.lhs, _LVL_DISJ)} -> {_wrap(phi.rhs, _LVL_IMPL)}", _LVL_IMPL

    return "[]" + _wrap(phi.body, _LVL_UNARY), _LVL_UNARY


def _wrap(phi: Formula, minimum: int) -> str:
    text, level = _render(phi)
    return text if level >= minimum else f"({text})"


def render(phi: Formula) -> str:
    """Deterministic re-parseable printing.

    Sugar is detected on the core tree in the fixed order diamond, then
    conjunction, then negation, then disjunction; in particular any
    implication into bot prints with ``!`` (so ``bot -> bot`` prints as
    ``!bot``), and only then is ``(!a) -> b`` considered a disjunction.
    """
    return _render(phi)[0]
