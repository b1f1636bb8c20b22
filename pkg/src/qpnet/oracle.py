"""Brute-force ground truth.

Every label of a network is an independent event that succeeds with the
probability given by the valuation. Given the outcome of every label event
the network is deterministic:

* a root is true;
* an ordinary link fires when its source is true and its label succeeded,
  an inhibitory link when its source is false and its label succeeded;
* an AND node is true when its joint label succeeded and all its links fire;
* an OR node is true when at least one link fires;
* a NOT node is true when its (inhibitory) link fires and its joint label
  succeeded.

The probability of an event is the total weight of the outcomes in which it
holds. Outcomes are tabulated with numpy over the labels that can influence
the event; the weighted sum is contracted one label at a time with integer
numerators over a common denominator. Rational valuations give a
Fraction; float valuations are summed exactly and rounded once; anything
else (e.g. numpy float32 or Decimal) falls back to float64 contraction.

This module deliberately shares no code with the QP machinery.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from numbers import Rational, Real
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CptError, MissingAtomError, TooManyAtomsError, UnknownNodeError
from .network import CptNetwork, Network, NodeKind

DEFAULT_ATOM_CAP = 20

_INT64_SAFE = 1 << 62


def _as_pairs(lits) -> list[tuple[str, bool]]:
    out = []
    for lit in lits:
        if isinstance(lit, tuple):
            out.append((lit[0], bool(lit[1])))
        else:
            out.append((lit.node, bool(lit.positive)))
    return out


def relevant_atoms(net: Network, nodes: Iterable[str]) -> list[str]:
    anc = net.ancestors(nodes)
    return sorted({a for n in anc for a in net[n].labels()})


def outcome_table(net: Network, nodes: Sequence[str], atoms: Sequence[str]) -> dict[str, np.ndarray]:
    """Truth value of each node in the ancestral closure of ``nodes``, for
    every outcome of ``atoms``. Outcome index bit ``m-1-i`` is atom ``i``."""
    m = len(atoms)
    idx = np.arange(1 << m, dtype=np.int64)
    succeeded = {a: ((idx >> (m - 1 - i)) & 1).astype(bool) for i, a in enumerate(atoms)}
    true_all = np.ones(1 << m, dtype=bool)

    def event(label):
        return true_all if label == 1 else succeeded[label]

    anc = net.ancestors(nodes)
    value: dict[str, np.ndarray] = {}
    for nid in net.topological_order():
        if nid not in anc:
            continue
        n = net[nid]
        fires = [event(l.label) & (~value[l.source] if l.inhibitory else value[l.source]) for l in n.links]
        if n.kind is NodeKind.ROOT:
            v = true_all
        elif n.kind is NodeKind.OR:
            v = np.logical_or.reduce(fires)
        else:
            v = np.logical_and.reduce(fires) & event(n.joint_label)
        value[nid] = v
    return value


def _weighted_sum(mask: np.ndarray, values: Sequence[Real]):
    """sum over outcomes in ``mask`` of prod v^b (1-v)^(1-b).

    Floats are binary fractions, so the sum is computed exactly either way;
    it is returned as a Fraction for rational input and rounded once to a
    float otherwise."""
    m = len(values)
    rational = all(isinstance(x, Rational) for x in values)
    if rational or all(isinstance(x, (Rational, float)) for x in values):
        fracs = [Fraction(x) for x in values]
        arr = mask.astype(np.int64).reshape((2,) * m) if m else mask.astype(np.int64).reshape(())
        bound = 1
        denom = 1
        for f in fracs:
            n, d = f.numerator, f.denominator
            bound *= d
            if arr.dtype != object and bound >= _INT64_SAFE:
                arr = arr.astype(object)
            arr = (d - n) * arr[0] + n * arr[1]
            denom *= d
        total = Fraction(int(arr.sum()) if isinstance(arr, np.ndarray) else int(arr), denom)
        return total if rational else float(total)
    arr = mask.astype(np.float64).reshape((2,) * m) if m else mask.astype(np.float64).reshape(())
    for x in values:
        x = float(x)
        arr = (1.0 - x) * arr[0] + x * arr[1]
    return float(arr)


def enumerate_probability(
    net: Network,
    lits,
    valuation: Mapping[str, Real],
    cap: int = DEFAULT_ATOM_CAP,
):
    """Probability that every literal holds.

    ``lits`` holds :class:`~qpnet.inference.Literal` objects or
    ``(node, positive)`` pairs; the empty conjunction has probability 1.
    Exact (a :class:`~fractions.Fraction`) for rational valuations.
    """
    pairs = _as_pairs(lits)
    for node, _ in pairs:
        if node not in net:
            raise UnknownNodeError(node)
    nodes = [n for n, _ in pairs]
    atoms = relevant_atoms(net, nodes)
    if len(atoms) > cap:
        raise TooManyAtomsError(len(atoms), cap)
    values = []
    for a in atoms:
        if a not in valuation:
            raise MissingAtomError(a)
        values.append(valuation[a])
    table = outcome_table(net, nodes, atoms)
    mask = np.ones(1 << len(atoms), dtype=bool)
    for node, positive in pairs:
        mask &= table[node] if positive else ~table[node]
    return _weighted_sum(mask, values)


def outcome_probability_pairs(net: Network, nodes: Sequence[str], valuation, cap: int = DEFAULT_ATOM_CAP):
    """Joint distribution of ``nodes``: map from tuple of truth values to
    probability, for every combination."""
    atoms = relevant_atoms(net, nodes)
    if len(atoms) > cap:
        raise TooManyAtomsError(len(atoms), cap)
    table = outcome_table(net, nodes, atoms)
    values = [valuation[a] for a in atoms]
    out = {}
    for bits in itertools.product((True, False), repeat=len(nodes)):
        mask = np.ones(1 << len(atoms), dtype=bool)
        for n, b in zip(nodes, bits):
            mask &= table[n] if b else ~table[n]
        out[bits] = _weighted_sum(mask, values)
    return out


# --- CPT chain rule ------------------------------------------------------------------

DEFAULT_CPT_NODE_CAP = 20


def cpt_joint(cpt: CptNetwork, assignment: Mapping[str, bool]):
    """Chain-rule probability of a full assignment of every node."""
    p = Fraction(1) if all(isinstance(x, Rational) for n in cpt.nodes for x in n.table) else 1.0
    for n in cpt.nodes:
        row = 0
        for parent in n.parents:
            row = (row << 1) | int(assignment[parent])
        t = n.table[row]
        p *= t if assignment[n.id] else 1 - t
    return p


def cpt_probability(cpt: CptNetwork, event: Mapping[str, bool], cap: int = DEFAULT_CPT_NODE_CAP):
    """P(event) for a partial assignment, by summing the chain rule over all
    completions."""
    problems = cpt.validate()
    if problems:
        raise CptError("; ".join(problems))
    ids = [n.id for n in cpt.nodes]
    for k in event:
        if k not in ids:
            raise UnknownNodeError(k)
    free = [i for i in ids if i not in event]
    if len(free) > cap:
        raise TooManyAtomsError(len(free), cap)
    total = 0
    for bits in itertools.product((False, True), repeat=len(free)):
        a = dict(event)
        a.update(zip(free, bits))
        total += cpt_joint(cpt, a)
    return total
