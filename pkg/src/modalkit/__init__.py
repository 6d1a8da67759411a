"""Modal propositional logic toolkit: proof checking, Kripke semantics,
canonical-formula model construction, a brute-force semantic oracle, and the
standard translation into first-order logic."""

__version__ = "0.1.0"
