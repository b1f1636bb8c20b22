"""Expanded multilinear normal form of a QP."""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping

from ..errors import MissingAtomError


# A letter, then any run of digit groups or ``_``-prefixed alphanumeric groups.
SIMPLE_ATOM = re.compile(r"[^\W\d_](?:\d+|_[^\W_]+)*")


def quote_atom(name: str) -> str:
    return name if SIMPLE_ATOM.fullmatch(name) else f"`{name}`"


def join_atoms(names: Iterable[str], sep: str = "") -> str:
    """Render atoms in sorted order. With ``sep=""`` atoms are juxtaposed,
    except that a name containing ``_`` is followed by ``·`` so that the
    parser can tell where it ends. Names outside the simple pattern are
    back-quoted."""
    names = [quote_atom(n) for n in sorted(names)]
    if sep:
        return sep.join(names)
    out = []
    for i, n in enumerate(names):
        out.append(n)
        if i + 1 < len(names) and "_" in n:
            out.append("·")
    return "".join(out)


def colex_key(atoms: frozenset) -> tuple:
    """Colexicographic subset order: compare the largest atom first."""
    return tuple(sorted(atoms, reverse=True))


class MultilinearForm:
    """Signed sum of monomials over distinct atoms.

    ``terms`` maps an atom set (the empty set is the constant term) to a
    nonzero rational coefficient. Instances are immutable; ``*`` is the weak
    product (monomials multiply by atom-set union), so the form never holds a
    power of an atom.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[frozenset, Rational] = {}
        for key, c in items:
            if not isinstance(c, Rational):
                raise TypeError(f"coefficients must be exact rationals, got {c!r}")
            key = frozenset(key)
            acc[key] = acc.get(key, 0) + c
        self._terms = {k: c for k, c in acc.items() if c != 0}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> MultilinearForm:
        f = cls.__new__(cls)
        f._terms = terms
        f._hash = None
        return f

    @classmethod
    def constant(cls, c: Rational) -> MultilinearForm:
        return cls({frozenset(): c})

    @classmethod
    def atom(cls, name: str) -> MultilinearForm:
        return cls({frozenset((name,)): 1})

    @property
    def terms(self) -> Mapping[frozenset, Rational]:
        return MappingProxyType(self._terms)

    @property
    def atoms(self) -> frozenset:
        return frozenset().union(*self._terms) if self._terms else frozenset()

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, MultilinearForm):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"MultilinearForm<{self.to_text()}>"

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: MultilinearForm) -> MultilinearForm:
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return MultilinearForm._raw(out)

    def __neg__(self) -> MultilinearForm:
        return MultilinearForm._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: MultilinearForm) -> MultilinearForm:
        return self + (-other)

    def __mul__(self, other: MultilinearForm) -> MultilinearForm:
        out: dict[frozenset, Rational] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = k1 | k2
                out[k] = out.get(k, 0) + c1 * c2
        return MultilinearForm._raw({k: c for k, c in out.items() if c})

    def scale(self, c: Rational) -> MultilinearForm:
        return MultilinearForm({k: v * c for k, v in self._terms.items()})

    def one_minus(self) -> MultilinearForm:
        return MultilinearForm.constant(1) - self

    # evaluation -------------------------------------------------------------

    def evaluate(self, valuation: Mapping[str, object]):
        """Value under ``valuation``. Exact (``Fraction``) when every value is
        rational, float otherwise."""
        total = 0
        for key, c in self._terms.items():
            term = c
            for a in key:
                try:
                    term = term * valuation[a]
                except KeyError:
                    raise MissingAtomError(a) from None
            total = total + term
        if isinstance(total, Rational) and not isinstance(total, int):
            return Fraction(total)
        return total

    # rendering ----------------------------------------------------------------

    def sorted_terms(self) -> list[tuple[frozenset, Rational]]:
        return sorted(self._terms.items(), key=lambda kv: colex_key(kv[0]))

    def to_text(self) -> str:
        """Canonical text such as ``pqrs+qtu-pqrstu`` (colex term order)."""
        if not self._terms:
            return "0"
        parts = []
        for i, (key, c) in enumerate(self.sorted_terms()):
            sign = "-" if c < 0 else ("+" if i else "")
            mag = abs(c)
            body = join_atoms(key)
            if not key:
                coef = str(mag)
            elif mag == 1:
                coef = ""
            elif isinstance(mag, int) or getattr(mag, "denominator", 1) == 1:
                coef = str(mag)
            else:
                coef = f"({mag})"
            parts.append(f"{sign}{coef}{body}")
        return "".join(parts)
