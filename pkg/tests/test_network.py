import itertools
import random
from fractions import Fraction

import pytest

from helpers import random_cpt, random_network
from qpnet.errors import CptError, NetworkError, NotARootError, UnknownNodeError, ValidationError
from qpnet.network import (
    TRUE_ROOT,
    CptNetwork,
    CptNode,
    Link,
    Network,
    NodeKind,
    NodeSpec,
    and_node,
    dumps_cpt,
    dumps_network,
    eliminate_inhibitory,
    from_cpt,
    loads_cpt,
    loads_network,
    normalize_roots,
    not_id,
    or_node,
    prime_id,
    root,
    validate,
)
from qpnet.oracle import cpt_probability, enumerate_probability
from qpnet.samples import chain_and, two_paths


def kinds(problems):
    return sorted(v.kind for v in problems)


def test_sample_networks_are_valid():
    assert validate(two_paths()) == []
    assert validate(chain_and()) == []
    assert two_paths().atoms == set("pqrstu")


def test_or_without_parents_is_invalid():
    net = Network([root("A"), NodeSpec("B", NodeKind.OR, ())])
    assert kinds(validate(net)) == ["arity"]


def test_duplicate_label_is_invalid():
    net = Network([root("A"), or_node("B", Link("A", "p")), or_node("C", Link("A", "p"))])
    assert kinds(validate(net)) == ["duplicate-label"]


def test_and_joint_label_counts_as_a_label():
    net = Network([root("A"), root("B"), or_node("C", Link("A", "p")), and_node("D", ["B", "C"], "p")])
    assert kinds(validate(net)) == ["duplicate-label"]


def test_cycle_dangling_and_arity():
    cyc = Network([or_node("A", Link("B", "p")), or_node("B", Link("A", "q"))])
    assert "cycle" in kinds(validate(cyc))
    dangling = Network([or_node("A", Link("Z", "p"))])
    assert "dangling" in kinds(validate(dangling))
    one_parent_and = Network([root("A"), and_node("B", ["A"])])
    assert kinds(validate(one_parent_and)) == ["arity"]
    not_ordinary = Network([root("A"), NodeSpec("N", NodeKind.NOT, (Link("A"),))])
    assert kinds(validate(not_ordinary)) == ["arity"]
    with pytest.raises(ValidationError):
        cyc.checked()


def test_labels_must_be_symbols_or_one():
    with pytest.raises(NetworkError):
        Link("A", 0.5)
    with pytest.raises(NetworkError):
        Link("A", "")


def test_normalize_roots():
    net = Network([root("A"), or_node("B", Link("A", "q"))])
    out = normalize_roots(net, {"A": "p"})
    assert out[prime_id("A")].kind is NodeKind.ROOT
    assert out["A"] == NodeSpec("A", NodeKind.OR, (Link(prime_id("A"), "p"),))
    assert validate(out) == []
    assert normalize_roots(out, {"A": "p"}) == out
    assert normalize_roots(net, {"A": 1}) == net
    with pytest.raises(NotARootError):
        normalize_roots(net, {"B": "r"})
    with pytest.raises(UnknownNodeError):
        normalize_roots(net, {"Z": "r"})


def test_normalize_roots_gives_root_its_prior():
    net = normalize_roots(Network([root("A")]), {"A": "p"})
    assert enumerate_probability(net, [("A", True)], {"p": Fraction(3, 10)}) == Fraction(3, 10)


def test_eliminate_inhibitory_example():
    net = Network([root("R"), or_node("A", Link("R", "a")), root("B"), and_node("C", [Link("A", 1, True), "B"], "c")])
    out = eliminate_inhibitory(net)
    assert out["C"].links == (Link(not_id("A")), Link("B"))
    assert out[not_id("A")].kind is NodeKind.NOT
    assert validate(out) == []
    plain = two_paths()
    assert eliminate_inhibitory(plain) is plain


def test_eliminate_inhibitory_preserves_probabilities():
    rng = random.Random(2)
    for _ in range(40):
        net = random_network(rng, max_nodes=8, inhibitory=0.5)
        out = eliminate_inhibitory(net)
        assert validate(out) == []
        for n in out.node_list():
            if n.kind is not NodeKind.NOT:
                assert not any(l.inhibitory for l in n.links)
        v = {a: Fraction(rng.randint(0, 8), 8) for a in net.atoms}
        for nid in net.nodes:
            for pos in (True, False):
                assert enumerate_probability(out, [(nid, pos)], v) == enumerate_probability(net, [(nid, pos)], v)


# --- CPT conversion ----------------------------------------------------------------------

def test_two_parent_cpt_makes_four_gates():
    cpt = CptNetwork(
        [
            CptNode("A", (), (Fraction(1, 2),)),
            CptNode("B", (), (Fraction(1, 3),)),
            CptNode("C", ("A", "B"), (Fraction(1, 10), Fraction(1, 5), Fraction(3, 10), Fraction(2, 5))),
        ]
    )
    net, symbols = from_cpt(cpt)
    gates = [n for n in net.node_list() if n.kind is NodeKind.AND]
    assert len(gates) == 4
    assert all(g.joint_label == 1 for g in gates)
    assert net["C"].kind is NodeKind.OR and len(net["C"].links) == 4
    assert symbols["θ_C_10"] == Fraction(3, 10)
    assert symbols["θ_A"] == Fraction(1, 2)
    gate_01 = net["@C:01"]
    assert gate_01.links == (Link("A", 1, True), Link("B", 1, False))
    assert validate(net) == []


def test_deterministic_or_cpt():
    cpt = CptNetwork([CptNode("A", (), (1,)), CptNode("B", (), (1,)), CptNode("C", ("A", "B"), (0, 1, 1, 1))])
    net, symbols = from_cpt(cpt)
    assert symbols == {}
    gates = [n for n in net.node_list() if n.kind is NodeKind.AND]
    assert len(gates) == 3 and all(g.joint_label == 1 for g in gates)
    assert enumerate_probability(net, [("C", True)], {}) == 1


def test_deterministic_or_truth_table():
    for a, b in itertools.product((0, 1), repeat=2):
        cpt = CptNetwork([CptNode("A", (), (a,)), CptNode("B", (), (b,)), CptNode("C", ("A", "B"), (0, 1, 1, 1))])
        net, _ = from_cpt(cpt)
        assert enumerate_probability(net, [("C", True)], {}) == (a or b)


def test_never_true_node():
    cpt = CptNetwork([CptNode("A", (), (0,)), CptNode("B", ("A",), (0, 0))])
    net, _ = from_cpt(cpt)
    assert TRUE_ROOT in net
    assert enumerate_probability(net, [("A", True)], {}) == 0
    assert enumerate_probability(net, [("B", False)], {}) == 1


def test_single_parent_rows_link_directly():
    cpt = CptNetwork([CptNode("A", (), (Fraction(1, 4),)), CptNode("B", ("A",), (Fraction(1, 5), Fraction(4, 5)))])
    net, symbols = from_cpt(cpt)
    assert net["B"].links == (Link("A", "θ_B_0", True), Link("A", "θ_B_1"))
    assert validate(net) == []
    v = dict(symbols)
    for a, b in itertools.product((True, False), repeat=2):
        assert enumerate_probability(net, [("A", a), ("B", b)], v) == cpt_probability(cpt, {"A": a, "B": b})


def test_random_cpt_preserves_joint_distribution():
    rng = random.Random(4)
    for _ in range(30):
        cpt = random_cpt(rng, max_nodes=3)
        net, symbols = from_cpt(cpt)
        assert validate(net) == []
        ids = [n.id for n in cpt.nodes]
        for bits in itertools.product((True, False), repeat=len(ids)):
            ev = dict(zip(ids, bits))
            assert enumerate_probability(net, list(ev.items()), symbols) == cpt_probability(cpt, ev)


def test_cpt_validation():
    with pytest.raises(CptError):
        from_cpt(CptNetwork([CptNode("A", (), (Fraction(1, 2), Fraction(1, 2)))]))
    with pytest.raises(CptError):
        from_cpt(CptNetwork([CptNode("A", (), (Fraction(3, 2),))]))
    with pytest.raises(CptError):
        from_cpt(CptNetwork([CptNode("A", ("Z",), (0, 1))]))


# --- JSON ---------------------------------------------------------------------------------

def test_network_json_round_trip():
    rng = random.Random(9)
    for net in [two_paths(), chain_and()] + [random_network(rng) for _ in range(20)]:
        assert loads_network(dumps_network(net)) == net


def test_network_json_format():
    text = '{"nodes":[{"id":"A","kind":"root","links":[]},{"id":"B","kind":"or","links":[{"from":"A","label":1,"inhibitory":false}]}]}'
    net = loads_network(text)
    assert net["B"].links == (Link("A", 1, False),)
    with pytest.raises(NetworkError):
        loads_network('{"nodes":[{"id":"B","kind":"or","links":[{"from":"A","label":0.5}]}]}')
    with pytest.raises(NetworkError):
        loads_network("not json")
    with pytest.raises(NetworkError):
        loads_network('{"nodes":[{"id":"B","kind":"xor"}]}')


def test_cpt_json_round_trip():
    rng = random.Random(10)
    for _ in range(20):
        cpt = random_cpt(rng, exact=True)
        assert loads_cpt(dumps_cpt(cpt)) == cpt
    for _ in range(20):
        cpt = random_cpt(rng, exact=False)
        back = loads_cpt(dumps_cpt(cpt))
        for a, b in zip(cpt.nodes, back.nodes):
            assert (a.id, a.parents) == (b.id, b.parents)
            assert [float(x) for x in b.table] == list(a.table)
    odd = CptNetwork([CptNode("A", (), (Fraction(1, 3),))])
    assert loads_cpt(dumps_cpt(odd)) == odd
    assert loads_cpt('{"nodes":[{"id":"A","parents":[],"table":[0.1]}]}').nodes[0].table == (Fraction(1, 10),)
