import random
from fractions import Fraction

import pytest

from helpers import random_literals, random_network, random_valuation
from qpnet.algebra import ONE, ZERO, equivalent, expand, mono, parse_qp, to_text, weak_prod
from qpnet.errors import (
    DegenerateDenominatorError,
    InvalidValuationError,
    QueryParseError,
    UnknownNodeError,
    ZeroEvidenceError,
)
from qpnet.inference import (
    BoostCoefficients,
    Literal,
    Query,
    boost_coefficients,
    boosted_conditional,
    conditional,
    conditional_probability,
    conditional_qps,
    event_probability,
    event_qp,
    marginal_qp,
    parse_query,
)
from qpnet.network import Link, Network, or_node, root
from qpnet.oracle import enumerate_probability
from qpnet.samples import chain_and, two_paths

HALF = Fraction(1, 2)
ALL_HALF = {a: HALF for a in "pqrstu"}


# --- query syntax ---------------------------------------------------------------------------

def test_parse_query():
    q = parse_query("B | F, !G")
    assert q.targets == (Literal("B"),)
    assert q.evidence == (Literal("F"), Literal("G", False))
    assert str(q) == "B | F, !G"
    assert parse_query("A, !B").evidence == ()


@pytest.mark.parametrize("bad", ["", "| F", "B |", "B | F | G", "B, B", "B | F, !F", "B,,C"])
def test_parse_query_errors(bad):
    with pytest.raises(QueryParseError):
        parse_query(bad)


def test_query_check_rejects_unknown_nodes():
    with pytest.raises(UnknownNodeError):
        parse_query("Z | F").check(two_paths())


# --- P* construction ---------------------------------------------------------------------

def test_marginal_examples():
    assert expand(marginal_qp(chain_and(), "E")) == expand(mono(*"pqrs"))
    assert equivalent(marginal_qp(two_paths(), "F"), parse_qp("1-(1-pqrs)*(1-qtu)"))
    for r in ("B0", "C0"):
        assert marginal_qp(two_paths(), r) == ONE


def test_event_examples():
    net = two_paths()
    e = event_qp(net, [Literal("B"), Literal("F", False)])
    assert equivalent(e, weak_prod([parse_qp("p"), parse_qp("(1-pqrs)*(1-qtu)")]))
    got = expand(e).evaluate(ALL_HALF)
    assert got == enumerate_probability(net, [("B", True), ("F", False)], ALL_HALF)
    assert event_qp(net, [Literal("B0", False)]) == ZERO
    assert event_qp(net, "B, B") == event_qp(net, "B")
    assert expand(event_qp(net, "F, !F")).is_zero()


def test_joint_is_weak_product_of_marginals():
    rng = random.Random(31)
    for _ in range(60):
        net = random_network(rng)
        ids = rng.sample(list(net.nodes), rng.randint(1, min(4, len(net.nodes))))
        joint = event_qp(net, [Literal(n) for n in ids])
        assert expand(joint) == expand(weak_prod([marginal_qp(net, n) for n in ids]))


def test_sharing_does_not_change_meaning():
    rng = random.Random(32)
    for _ in range(60):
        net = random_network(rng)
        for n in net.nodes:
            assert expand(marginal_qp(net, n, share=True)) == expand(marginal_qp(net, n, share=False))


def test_event_probability_matches_oracle():
    rng = random.Random(33)
    for _ in range(80):
        net = random_network(rng)
        lits = random_literals(rng, net)
        v = random_valuation(rng, net.atoms)
        assert event_probability(net, lits, v) == enumerate_probability(net, lits, v)


# --- conditioning --------------------------------------------------------------------------

def test_symbolic_conditional_example():
    qps = conditional_qps(two_paths(), parse_query("B | F"))
    assert expand(qps.numerator) == expand(parse_qp("p[1-(1-rs)(1-tu)]"))
    assert expand(qps.denominator) == expand(parse_qp("1-(1-prs)(1-tu)"))
    assert [to_text(f) for f in qps.cancelled] == ["q"]
    plain = conditional_qps(two_paths(), parse_query("B | F"), cancel=False)
    assert plain.cancelled == ()
    assert to_text(plain.denominator) == "q[1-(1-prs)(1-tu)]"


def test_conditional_value_example():
    res = conditional(two_paths(), "B | F", ALL_HALF)
    assert res.value == Fraction(7, 11)
    assert res.numerator == Fraction(7, 64) and res.denominator == Fraction(11, 64)
    oracle = conditional(two_paths(), "B | F", ALL_HALF, engine="oracle")
    assert oracle.value == Fraction(7, 11)
    assert conditional_probability(two_paths(), "B | F", {a: 0.5 for a in "pqrstu"}) == pytest.approx(7 / 11, abs=1e-12)


def test_self_conditioning_is_one():
    net = two_paths()
    for n in net.nodes:
        assert conditional_probability(net, Query((Literal(n),), (Literal(n),)), ALL_HALF) == 1


def test_zero_evidence():
    net = two_paths()
    with pytest.raises(ZeroEvidenceError):
        conditional(net, "F | !B0", ALL_HALF)
    with pytest.raises(ZeroEvidenceError):
        conditional(net, "B | F", dict(ALL_HALF, q=0))
    with pytest.raises(ZeroEvidenceError):
        conditional(net, "B | F", dict(ALL_HALF, q=0), engine="oracle")


def test_conditional_rejects_bad_input():
    with pytest.raises(InvalidValuationError):
        conditional(two_paths(), "B | F", dict(ALL_HALF, p=2))
    with pytest.raises(ValueError):
        conditional(two_paths(), "B | F", ALL_HALF, engine="magic")


def test_random_conditionals_match_oracle():
    rng = random.Random(34)
    checked = 0
    while checked < 60:
        net = random_network(rng)
        ids = list(net.nodes)
        if len(ids) < 2:
            continue
        t, e = rng.sample(ids, 2)
        q = Query((Literal(t, rng.random() < 0.7),), (Literal(e, rng.random() < 0.7),))
        v = random_valuation(rng, net.atoms)
        try:
            want = conditional(net, q, v, engine="oracle").value
        except ZeroEvidenceError:
            with pytest.raises(ZeroEvidenceError):
                conditional(net, q, v)
            continue
        got = conditional(net, q, v)
        assert got.value == want
        assert got.denominator == enumerate_probability(net, q.evidence, v)
        checked += 1


# --- boosting -----------------------------------------------------------------------------

def test_boost_matches_direct_at_small_value():
    v = dict(ALL_HALF, p=Fraction(1, 10_000))
    direct = conditional_probability(two_paths(), "B | F", v)
    assert boosted_conditional(two_paths(), "B | F", v, "p") == direct
    fv = {k: float(x) for k, x in v.items()}
    assert abs(boosted_conditional(two_paths(), "B | F", fv, "p") - float(direct)) <= 1e-9


def test_boost_with_unrelated_atom_has_zero_slope():
    net = Network([root("A"), or_node("B", Link("A", "p")), or_node("C", Link("A", "q"))])
    v = {"p": Fraction(1, 3), "q": Fraction(1, 1000)}
    c = boost_coefficients(net, "B", v, "q")
    assert c.c2 == 0 and c.c4 == 0
    assert boosted_conditional(net, "B", v, "q") == Fraction(1, 3)


def test_boost_at_probe_point():
    v = dict(ALL_HALF, p=Fraction(1))
    assert boosted_conditional(two_paths(), "B | F", v, "p") == conditional_probability(two_paths(), "B | F", v)


def test_boost_errors():
    with pytest.raises(DegenerateDenominatorError):
        BoostCoefficients(1, 1, 1, -1).value_at(1)
    with pytest.raises(InvalidValuationError):
        boosted_conditional(two_paths(), "B | F", {a: HALF for a in "qrstu"}, "p")
    with pytest.raises(ValueError):
        boost_coefficients(two_paths(), "B | F", ALL_HALF, "p", probes=(1, 1))
