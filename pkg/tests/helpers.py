"""Random generators and literal reference implementations shared by tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from qpnet.algebra import MultilinearForm, Qp, WeakProd, expand, mono, one_minus, qsum, weak_prod
from qpnet.network import CptNetwork, CptNode, Link, Network, NodeKind, NodeSpec, root

ATOMS8 = tuple("abcdefgh")


# --- random QPs ---------------------------------------------------------------------------

def random_qp(rng: random.Random, depth: int = 6, atoms=ATOMS8, allow_sums: bool = True) -> Qp:
    """Random QP over ``atoms`` with nesting depth at most ``depth``. Weak
    products are built raw (no simplification) half of the time."""
    if depth <= 0 or rng.random() < 0.25:
        k = rng.randint(1, 3)
        return mono(*rng.sample(list(atoms), k))
    r = rng.random()
    if r < 0.3:
        return one_minus(random_qp(rng, depth - 1, atoms, allow_sums))
    if r < 0.75 or not allow_sums:
        n = rng.randint(2, 3)
        fs = [random_qp(rng, depth - 1, atoms, allow_sums) for _ in range(n)]
        return WeakProd(fs) if rng.random() < 0.5 else weak_prod(fs)
    n = rng.randint(2, 3)
    return qsum((rng.choice((1, -1)), random_qp(rng, depth - 1, atoms, allow_sums)) for _ in range(n))


def random_sum_free(rng: random.Random, depth: int = 4, atoms=ATOMS8) -> Qp:
    return random_qp(rng, depth, atoms, allow_sums=False)


def form_weak_product(forms) -> MultilinearForm:
    out = MultilinearForm.constant(1)
    for f in forms:
        out = out * f
    return out


def signed_subset_sum(rhos) -> MultilinearForm:
    """sum over nonzero bit-vectors b of odd(b) times the weak product of the
    selected rho_i, in multilinear-form arithmetic."""
    forms = [expand(r) for r in rhos]
    total = MultilinearForm()
    for bits in itertools.product((0, 1), repeat=len(forms)):
        k = sum(bits)
        if k == 0:
            continue
        term = form_weak_product(f for f, b in zip(forms, bits) if b)
        total = total + term if k % 2 else total - term
    return total


def random_valuation(rng: random.Random, atoms, exact: bool = True):
    if exact:
        return {a: Fraction(rng.randint(0, 10), 10) for a in atoms}
    return {a: rng.random() for a in atoms}


# --- random networks -----------------------------------------------------------------------

def random_network(
    rng: random.Random,
    max_nodes: int = 10,
    max_atoms: int = 12,
    max_or_fanin: int = 4,
    inhibitory: float = 0.2,
) -> Network:
    """Random valid AND-OR-NOT network. AND links carry no label (only the
    joint label); OR links each carry a fresh label; NOT links carry one."""
    counter = itertools.count()
    budget = [max_atoms]

    def fresh():
        if budget[0] > 0 and rng.random() < 0.85:
            budget[0] -= 1
            return f"x{next(counter)}"
        return 1

    n_nodes = rng.randint(3, max_nodes)
    n_roots = rng.randint(1, min(3, n_nodes - 1))
    nodes: list[NodeSpec] = [root(f"R{i}") for i in range(n_roots)]
    while len(nodes) < n_nodes:
        ids = [n.id for n in nodes]
        nid = f"N{len(nodes)}"
        kinds = ["or", "or", "and", "not"] if len(ids) >= 2 else ["or", "not"]
        kind = rng.choice(kinds)
        if kind == "or":
            ps = rng.sample(ids, rng.randint(1, min(max_or_fanin, len(ids))))
            links = tuple(Link(p, fresh(), rng.random() < inhibitory) for p in ps)
            nodes.append(NodeSpec(nid, NodeKind.OR, links))
        elif kind == "and":
            ps = rng.sample(ids, rng.randint(2, min(3, len(ids))))
            links = tuple(Link(p, 1, rng.random() < inhibitory) for p in ps)
            nodes.append(NodeSpec(nid, NodeKind.AND, links, fresh()))
        else:
            nodes.append(NodeSpec(nid, NodeKind.NOT, (Link(rng.choice(ids), fresh(), True),)))
    return Network(nodes).checked()


def random_literals(rng: random.Random, net: Network, k_max: int = 3):
    from qpnet.inference import Literal

    ids = [n.id for n in net.node_list()]
    k = rng.randint(1, min(k_max, len(ids)))
    return [Literal(n, rng.random() < 0.7) for n in rng.sample(ids, k)]


# --- random CPT networks --------------------------------------------------------------------

def random_cpt(rng: random.Random, max_nodes: int = 4, max_parents: int = 3, exact: bool = True) -> CptNetwork:
    def entry():
        r = rng.random()
        if r < 0.15:
            return Fraction(0) if exact else 0.0
        if r < 0.3:
            return Fraction(1) if exact else 1.0
        return Fraction(rng.randint(1, 19), 20) if exact else rng.random()

    n = rng.randint(1, max_nodes)
    nodes = []
    for i in range(n):
        k = rng.randint(0, min(i, max_parents))
        parents = tuple(rng.sample([f"V{j}" for j in range(i)], k))
        nodes.append(CptNode(f"V{i}", parents, tuple(entry() for _ in range(1 << k))))
    return CptNetwork(tuple(nodes))
