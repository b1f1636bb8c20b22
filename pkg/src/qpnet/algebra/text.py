"""Canonical text rendering of QPs and a parser for the same notation.

Notation::

    1-(1-p*q*r*s)*(1-q*t*u)     weak products written with "*"
    q[1-(1-prs)(1-tu)]          strong (ordinary) products by juxtaposition

Operator precedence, tightest first: juxtaposition, ``*``, then ``+``/``-``
(left associative). ``(``, ``[`` and ``{`` are interchangeable brackets.
Atoms are a letter followed by digit groups or ``_``-prefixed alphanumeric
groups (``p``, ``v12``, ``θ_C_01``); other names are back-quoted. ``·`` may
separate juxtaposed factors.

Rendering is canonical: monomial atoms are sorted, product factors are
sorted by their own text (monomials first), and bracket shapes are chosen
by nesting depth, innermost ``()``, then ``[]``, then ``{}``.
"""

from __future__ import annotations

import re

from ..errors import QpParseError
from .expr import (
    ONE,
    ZERO,
    Const,
    Mono,
    OneMinus,
    Qp,
    StrongProd,
    Sum,
    WeakProd,
    iter_nodes,
    qsum,
    strong_prod,
    weak_prod,
)
from .form import MultilinearForm, join_atoms

_BRACKETS = ("()", "[]", "{}")


def _group(text: str, depth: int) -> tuple[str, int]:
    b = _BRACKETS[min(depth, 2)]
    return f"{b[0]}{text}{b[1]}", depth + 1


def _needs_group(node: Qp) -> bool:
    return type(node) in (Sum, OneMinus)


def to_text(e: Qp, style: str = "compact") -> str:
    """Render ``e``.

    ``style="compact"`` juxtaposes monomial atoms (``pqrs``);
    ``style="weak"`` joins them with ``*`` (``p*q*r*s``), the form used for
    raw, un-eliminated QPs.
    """
    if style not in ("compact", "weak"):
        raise ValueError(f"unknown style {style!r}")
    if isinstance(e, MultilinearForm):
        return e.to_text()
    mono_sep = "*" if style == "weak" else ""
    memo: dict[int, tuple[str, int]] = {}

    def operand(node: Qp, force: bool) -> tuple[str, int]:
        text, depth = memo[id(node)]
        if force:
            return _group(text, depth)
        return text, depth

    for node in iter_nodes(e):
        t = type(node)
        if t is Const:
            out = (str(node.value), 0)
        elif t is Mono:
            out = (join_atoms(node.atoms, mono_sep), 0)
        elif t is OneMinus:
            text, depth = operand(node.child, _needs_group(node.child))
            out = ("1-" + text, depth)
        elif t is WeakProd:
            parts = [operand(f, _needs_group(f) or type(f) is WeakProd) for f in node.factors]
            parts.sort(key=lambda p: (not _is_mono_text(p[0]), p[0]))
            out = ("*".join(p[0] for p in parts), max(p[1] for p in parts))
        elif t is StrongProd:
            monos = [f for f in node.factors if type(f) is Mono]
            others = [operand(f, True) for f in node.factors if type(f) is not Mono]
            others.sort(key=lambda p: p[0])
            # Monomials inside a strong product are always juxtaposed.
            lead = join_atoms(frozenset().union(*(m.atoms for m in monos))) if monos else ""
            text = lead + "".join(p[0] for p in others)
            out = (text, max((p[1] for p in others), default=0))
        elif t is Sum:
            chunks = []
            depth = 0
            for i, (s, term) in enumerate(node.terms):
                text, d = operand(term, _needs_group(term))
                depth = max(depth, d)
                if s < 0:
                    chunks.append("-" + text)
                else:
                    chunks.append(("+" if i else "") + text)
            out = ("".join(chunks), depth)
        else:  # pragma: no cover
            raise TypeError(t)
        memo[id(node)] = out
    return memo[id(e)][0]


def _is_mono_text(text: str) -> bool:
    return not any(ch in text for ch in "()[]{}-+")


# --- parser ----------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<atom>[^\W\d_](?:\d+|_[^\W_]+)*)
  | (?P<quoted>`[^`]+`)
  | (?P<num>\d+)
  | (?P<op>[-+*·()\[\]{}])
    """,
    re.VERBOSE,
)

_TRANSLATE = str.maketrans({"−": "-", "∗": "*", "⋅": "·"})
_OPEN = {"(": ")", "[": "]", "{": "}"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    text = text.translate(_TRANSLATE)
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise QpParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "quoted":
            out.append(("atom", m.group()[1:-1], pos))
        elif kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", pos))
    return out


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value:
            raise QpParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def parse(self) -> Qp:
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise QpParseError(f"unexpected {v!r}", pos)
        return e

    def expr(self) -> Qp:
        terms: list[tuple[int, Qp]] = []
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        terms.append((sign, self.term()))
        while self.peek()[1] in ("+", "-"):
            sign = 1 if self.take()[1] == "+" else -1
            terms.append((sign, self.term()))
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return qsum(terms)

    def term(self) -> Qp:
        factors = [self.juxt()]
        while self.peek()[1] == "*":
            self.take()
            factors.append(self.juxt())
        return factors[0] if len(factors) == 1 else weak_prod(factors)

    def juxt(self) -> Qp:
        factors = [self.primary()]
        while True:
            kind, v, _ = self.peek()
            if v == "·":
                self.take()
                factors.append(self.primary())
            elif kind in ("atom", "num") or v in _OPEN:
                factors.append(self.primary())
            else:
                break
        if len(factors) == 1:
            return factors[0]
        try:
            return strong_prod(factors)
        except ValueError as exc:
            raise QpParseError(f"juxtaposed factors must be unrelated: {exc}", self.peek()[2]) from None

    def primary(self) -> Qp:
        kind, v, pos = self.take()
        if kind == "atom":
            return Mono((v,))
        if kind == "num":
            if v == "0":
                return ZERO
            if v == "1":
                return ONE
            raise QpParseError(f"only the constants 0 and 1 are allowed, found {v}", pos)
        if v in _OPEN:
            e = self.expr()
            self.expect(_OPEN[v])
            return e
        raise QpParseError(f"unexpected {v or 'end of input'!r}", pos)


def parse_qp(text: str) -> Qp:
    """Parse the QP notation produced by :func:`to_text`."""
    return _Parser(text).parse()
