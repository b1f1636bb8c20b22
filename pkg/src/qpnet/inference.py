"""QPs of network events, conditional probabilities and boosting."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Iterable, Mapping, Sequence

from .algebra import (
    DEFAULT_BUDGET,
    ONE,
    Mono,
    Qp,
    StrongProd,
    eliminate_star,
    evaluate,
    mono,
    one_minus,
    strong_prod,
    weak_prod,
)
from .errors import (
    DegenerateDenominatorError,
    InvalidValuationError,
    NetworkError,
    QueryParseError,
    UnknownNodeError,
    ZeroEvidenceError,
)
from .network import Link, Network, NodeKind


@dataclass(frozen=True)
class Literal:
    node: str
    positive: bool = True

    def __str__(self):
        return self.node if self.positive else f"!{self.node}"

    def negated(self) -> Literal:
        return Literal(self.node, not self.positive)


@dataclass(frozen=True)
class Query:
    targets: tuple[Literal, ...]
    evidence: tuple[Literal, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "evidence", tuple(self.evidence))
        if not self.targets:
            raise QueryParseError("a query needs at least one target")
        # a node may appear on both sides (P(R|R) = 1), not twice on one
        for side in (self.targets, self.evidence):
            nodes = [l.node for l in side]
            dup = sorted({n for n in nodes if nodes.count(n) > 1})
            if dup:
                raise QueryParseError(f"node(s) used twice on one side of the query: {', '.join(dup)}")

    def __str__(self):
        text = ", ".join(map(str, self.targets))
        if self.evidence:
            text += " | " + ", ".join(map(str, self.evidence))
        return text

    def check(self, net: Network) -> None:
        for l in self.targets + self.evidence:
            if l.node not in net:
                raise UnknownNodeError(l.node)


_LIT = re.compile(r"\s*(!?)\s*([^\s,|!]+)\s*")


def _parse_literals(text: str, where: str) -> list[Literal]:
    out = []
    for chunk in text.split(","):
        m = _LIT.fullmatch(chunk)
        if not m:
            raise QueryParseError(f"bad literal {chunk.strip()!r} in {where}")
        out.append(Literal(m.group(2), not m.group(1)))
    return out


def parse_query(text: str) -> Query:
    """Parse ``"B | F, !G"``: targets left of ``|``, evidence right of it,
    ``!`` negates."""
    parts = text.split("|")
    if len(parts) > 2:
        raise QueryParseError("at most one '|' is allowed")
    targets = _parse_literals(parts[0], "targets")
    evidence = _parse_literals(parts[1], "evidence") if len(parts) == 2 else []
    return Query(tuple(targets), tuple(evidence))


def as_literals(lits) -> list[Literal]:
    """Literals from a ``"B, !F"`` string or an iterable of literals,
    strings or ``(node, positive)`` pairs."""
    if isinstance(lits, str):
        return _parse_literals(lits, "event") if lits.strip() else []
    out = []
    for l in lits:
        if isinstance(l, Literal):
            out.append(l)
        elif isinstance(l, str):
            out.extend(_parse_literals(l, "literal"))
        else:
            out.append(Literal(l[0], bool(l[1])))
    return out


# --- P* ---------------------------------------------------------------------------------

def _label_qp(label) -> Qp:
    return ONE if label == 1 else mono(label)


class MarginalBuilder:
    """Builds P* for the nodes of one network, sharing the sub-results of
    common ancestors when ``share`` is true."""

    def __init__(self, net: Network, share: bool = True):
        net.checked()
        self.net = net
        self.share = share
        self._memo: dict[str, Qp] = {}

    def marginal(self, node_id: str) -> Qp:
        if not self.share:
            return self._fresh(node_id)
        if node_id not in self._memo:
            needed = self.net.ancestors([node_id])
            for nid in self.net.topological_order():
                if nid in needed and nid not in self._memo:
                    self._memo[nid] = self._build(nid, self._memo)
        return self._memo[node_id]

    def _build(self, nid: str, done: dict[str, Qp]) -> Qp:
        n = self.net[nid]
        if n.kind is NodeKind.ROOT:
            return ONE

        def fac(l: Link) -> Qp:
            parent = done[l.source] if self.share else self._fresh(l.source)
            base = one_minus(parent) if l.inhibitory else parent
            return weak_prod([_label_qp(l.label), base])

        if n.kind is NodeKind.OR:
            if not n.links:
                raise NetworkError(f"OR node {nid!r} without parents")
            return one_minus(weak_prod([one_minus(fac(l)) for l in n.links]))
        return weak_prod([_label_qp(n.joint_label), *(fac(l) for l in n.links)])

    def _fresh(self, nid: str) -> Qp:
        """P*(nid) rebuilt from scratch, with no shared subtrees."""
        return self._build(nid, {})


def marginal_qp(net: Network, node: str, share: bool = True) -> Qp:
    """P*(node): 1 for a root; for AND ``label * P*(A1) * ... * P*(An)``;
    for OR ``1 - (1 - p1*P*(A1)) * ... * (1 - pn*P*(An))``; for NOT
    ``label * (1 - P*(A))``. Inhibitory links use ``1 - P*(A)``."""
    if node not in net:
        raise UnknownNodeError(node)
    return MarginalBuilder(net, share).marginal(node)


def event_qp(net: Network, lits, builder: MarginalBuilder | None = None) -> Qp:
    """Weak product of ``P*(A)`` over positive and ``1 - P*(A)`` over
    negative literals. The empty event is 1; repeated literals count once
    and a node with both signs gives a QP equivalent to 0."""
    lits = list(dict.fromkeys(as_literals(lits)))
    for l in lits:
        if l.node not in net:
            raise UnknownNodeError(l.node)
    b = builder if builder is not None else MarginalBuilder(net)
    return weak_prod([_literal_qp(b, l) for l in lits])


def _literal_qp(b: MarginalBuilder, l: Literal) -> Qp:
    m = b.marginal(l.node)
    return m if l.positive else one_minus(m)


# --- conditioning ------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalQps:
    """Decomposed numerator and denominator of a conditional probability,
    plus the factors cancelled between them (which must be nonzero)."""

    numerator: Qp
    denominator: Qp
    cancelled: tuple[Qp, ...]


def _split_strong(e: Qp) -> tuple[frozenset, list[Qp]]:
    if type(e) is Mono:
        return e.atoms, []
    if type(e) is StrongProd:
        atoms = frozenset()
        rest = []
        for f in e.factors:
            if type(f) is Mono:
                atoms |= f.atoms
            else:
                rest.append(f)
        return atoms, rest
    return frozenset(), [e]


def _cancel_common(num: Qp, den: Qp) -> tuple[Qp, Qp, list[Qp]]:
    """Divide out monomial atoms and structurally equal factors common to
    the two decomposed strong products."""
    na, nrest = _split_strong(num)
    da, drest = _split_strong(den)
    common = na & da
    cancelled: list[Qp] = [Mono(common)] if common else []
    remaining = list(drest)
    kept_num = []
    for f in nrest:
        if f in remaining:
            remaining.remove(f)
            cancelled.append(f)
        else:
            kept_num.append(f)
    if not cancelled:
        return num, den, []
    new_num = strong_prod([mono(*sorted(na - common)), *kept_num])
    new_den = strong_prod([mono(*sorted(da - common)), *remaining])
    return new_num, new_den, cancelled


def conditional_qps(
    net: Network,
    query: Query,
    budget: int = DEFAULT_BUDGET,
    strategy: str = "split",
    cancel: bool = True,
) -> ConditionalQps:
    """Numerator ``event(targets + evidence)`` and denominator
    ``event(evidence)``, *-eliminated.

    With ``cancel``, an evidence factor sharing no atom with any other factor
    of the numerator is divided out before elimination, and common
    top-level factors of the two eliminated results are divided out after.
    """
    query.check(net)
    b = MarginalBuilder(net)
    tq = [_literal_qp(b, l) for l in query.targets if l not in query.evidence]
    eq = [_literal_qp(b, l) for l in query.evidence]
    cancelled: list[Qp] = []
    if cancel:
        kept = []
        for i, f in enumerate(eq):
            others = tq + eq[:i] + eq[i + 1:]
            if any(f.atoms & g.atoms for g in others) or not f.atoms:
                kept.append(f)
            else:
                cancelled.append(eliminate_star(f, budget, strategy))
        eq = kept
    num = eliminate_star(weak_prod(tq + eq), budget, strategy)
    den = eliminate_star(weak_prod(eq), budget, strategy)
    if cancel:
        num, den, more = _cancel_common(num, den)
        cancelled.extend(more)
    return ConditionalQps(num, den, tuple(cancelled))


def _check_valuation(v: Mapping[str, Real]) -> Mapping[str, Real]:
    for k, x in v.items():
        if isinstance(x, bool) or not isinstance(x, Real) or not 0 <= x <= 1:
            raise InvalidValuationError(f"value for {k!r} must be a number in [0, 1], got {x!r}")
    return v


def _divide(n: Real, d: Real) -> Real:
    if isinstance(n, Rational) and isinstance(d, Rational):
        return Fraction(n) / Fraction(d)
    return n / d


@dataclass(frozen=True)
class ConditionalResult:
    value: Real
    numerator: Real
    denominator: Real
    qps: ConditionalQps | None = None


ENGINES = ("exact", "oracle")


def conditional(
    net: Network,
    query: Query | str,
    valuation: Mapping[str, Real],
    engine: str = "exact",
    budget: int = DEFAULT_BUDGET,
    strategy: str = "split",
) -> ConditionalResult:
    """P(targets | evidence) with its numerator/denominator values (and, for
    the exact engine, the decomposed QPs)."""
    if isinstance(query, str):
        query = parse_query(query)
    query.check(net)
    _check_valuation(valuation)
    if engine == "oracle":
        from .oracle import enumerate_probability

        n = enumerate_probability(net, query.targets + query.evidence, valuation)
        d = enumerate_probability(net, query.evidence, valuation) if query.evidence else Fraction(1)
        if d == 0:
            raise ZeroEvidenceError()
        return ConditionalResult(_divide(n, d), n, d)
    if engine != "exact":
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    qps = conditional_qps(net, query, budget, strategy)
    scale = 1
    for f in qps.cancelled:
        scale = scale * evaluate(f, valuation)
    n = evaluate(qps.numerator, valuation)
    d = evaluate(qps.denominator, valuation)
    if d == 0 or scale == 0:
        raise ZeroEvidenceError()
    # report P(targets, evidence) and P(evidence) with cancelled factors restored
    return ConditionalResult(_divide(n, d), n * scale, d * scale, qps)


def conditional_probability(
    net: Network,
    query: Query | str,
    valuation: Mapping[str, Real],
    engine: str = "exact",
    budget: int = DEFAULT_BUDGET,
    strategy: str = "split",
) -> Real:
    return conditional(net, query, valuation, engine, budget, strategy).value


def event_probability(net: Network, lits, valuation: Mapping[str, Real], budget: int = DEFAULT_BUDGET) -> Real:
    """P(lits) by *-elimination and direct evaluation."""
    return evaluate(eliminate_star(event_qp(net, lits), budget), _check_valuation(valuation))


# --- boosting --------------------------------------------------------------------------------

@dataclass(frozen=True)
class BoostCoefficients:
    """numerator = c1 + c2*p, denominator = c3 + c4*p."""

    c1: Real
    c2: Real
    c3: Real
    c4: Real

    def value_at(self, p: Real) -> Real:
        den = self.c3 + self.c4 * p
        if den == 0:
            raise DegenerateDenominatorError(f"denominator c3 + c4*p vanishes at p = {p}")
        return (self.c1 + self.c2 * p) / den


DEFAULT_PROBES = (Fraction(1, 2), Fraction(1))


def boost_coefficients(
    net: Network,
    query: Query | str,
    valuation: Mapping[str, Real],
    boosted_atom: str,
    probes: Sequence[Real] = DEFAULT_PROBES,
    budget: int = DEFAULT_BUDGET,
    qps: ConditionalQps | None = None,
) -> BoostCoefficients:
    """Fit the numerator and denominator of the conditional as linear
    functions of ``boosted_atom`` from their values at two probe points."""
    if isinstance(query, str):
        query = parse_query(query)
    a, b = probes
    if a == b:
        raise ValueError("boost probes must differ")
    if qps is None:
        qps = conditional_qps(net, query, budget, cancel=False)
    base = dict(valuation)

    def at(p):
        v = dict(base)
        v[boosted_atom] = p
        return evaluate(qps.numerator, v), evaluate(qps.denominator, v)

    na, da = at(a)
    nb, db = at(b)
    c2 = (nb - na) / (b - a)
    c4 = (db - da) / (b - a)
    return BoostCoefficients(na - c2 * a, c2, da - c4 * a, c4)


def boosted_conditional(
    net: Network,
    query: Query | str,
    valuation: Mapping[str, Real],
    boosted_atom: str,
    probes: Sequence[Real] = DEFAULT_PROBES,
    budget: int = DEFAULT_BUDGET,
) -> Real:
    """The conditional at the true value of ``boosted_atom``, recovered from
    evaluations at the (large) probe values only."""
    if boosted_atom not in valuation:
        raise InvalidValuationError(f"no value for boosted atom {boosted_atom!r}")
    _check_valuation(valuation)
    coeffs = boost_coefficients(net, query, valuation, boosted_atom, probes, budget)
    return coeffs.value_at(valuation[boosted_atom])


def literals_of(lits: Iterable) -> tuple[Literal, ...]:
    return tuple(as_literals(lits))
