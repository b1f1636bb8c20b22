from __future__ import annotations

import math
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Mapping

from ..errors import InvalidValuationError, MissingAtomError


class Valuation(Mapping[str, Real]):
    """Immutable map from atom names to probabilities in [0, 1].

    Out-of-range or non-numeric values are rejected; they are never clamped.
    Values keep their type, so a valuation of ``Fraction`` values makes every
    downstream evaluation exact.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[str, Real] | Iterable[tuple[str, Real]] = ()):
        items = values.items() if isinstance(values, Mapping) else values
        checked = {}
        for name, x in items:
            if not isinstance(name, str) or not name:
                raise InvalidValuationError(f"atom names are nonempty strings, got {name!r}")
            if isinstance(x, bool) or not isinstance(x, Real):
                raise InvalidValuationError(f"value for {name!r} is not a number: {x!r}")
            if isinstance(x, float) and not math.isfinite(x):
                raise InvalidValuationError(f"value for {name!r} is not finite: {x!r}")
            if not 0 <= x <= 1:
                raise InvalidValuationError(f"value for {name!r} is outside [0, 1]: {x!r}")
            checked[name] = x
        self._values = checked

    @classmethod
    def uniform(cls, atoms: Iterable[str], value: Real = Fraction(1, 2)) -> Valuation:
        return cls({a: value for a in atoms})

    def __getitem__(self, name: str) -> Real:
        try:
            return self._values[name]
        except KeyError:
            raise MissingAtomError(name) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self):
        return f"Valuation({self._values!r})"

    def with_values(self, **updates: Real) -> Valuation:
        return Valuation({**self._values, **updates})

    def updated(self, updates: Mapping[str, Real]) -> Valuation:
        return Valuation({**self._values, **updates})

    def as_float(self) -> Valuation:
        return Valuation({k: float(v) for k, v in self._values.items()})

    def require(self, atoms: Iterable[str]) -> None:
        for a in atoms:
            if a not in self._values:
                raise MissingAtomError(a)


def as_valuation(v) -> Valuation:
    return v if isinstance(v, Valuation) else Valuation(v)
