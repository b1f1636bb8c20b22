"""Small reference networks and formulas used by tests, docs and the CLI."""

from __future__ import annotations

from .network import Link, Network, and_node, or_node, root


def chain_and() -> Network:
    """A -p-> B -q-> C and B -r-> D; E = AND(C, D) with joint label s.

    P(E) is the product pqrs of every label involved."""
    return Network(
        [
            root("A"),
            or_node("B", Link("A", "p")),
            or_node("C", Link("B", "q")),
            or_node("D", Link("B", "r")),
            and_node("E", ["C", "D"], "s"),
        ]
    )


def two_paths() -> Network:
    """Two unit roots feed B (label p) and C (label q); D = AND(B, C) with
    joint label r; E = OR(C: t); F = OR(D: s, E: u)."""
    return Network(
        [
            root("B0"),
            root("C0"),
            or_node("B", Link("B0", "p")),
            or_node("C", Link("C0", "q")),
            and_node("D", ["B", "C"], "r"),
            or_node("E", Link("C", "t")),
            or_node("F", Link("D", "s"), Link("E", "u")),
        ]
    )


# Variables p, q, r, s, t, u are numbered 1..6.
SAT_EXAMPLE_VARS = ("p", "q", "r", "s", "t", "u")
SAT_EXAMPLE_CLAUSES = (
    (("p", False), ("q", True), ("r", True)),
    (("p", True),),
    (("q", False), ("s", False), ("t", True)),
    (("t", False),),
    (("r", False), ("t", True), ("u", False)),
    (("r", False), ("u", True)),
)
