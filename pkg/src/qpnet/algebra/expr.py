"""Quasi-probability expression trees.

Nodes are immutable and hashable. Structural sharing is allowed (and
encouraged: marginal QPs of a network share the sub-results of common
ancestors), so every traversal in this package memoizes on ``id(node)``.

The public constructors (``one_minus``, ``weak_prod``, ``strong_prod``,
``qsum``...) apply cheap, sound local simplifications. The node classes
themselves can be instantiated directly when a test needs an unsimplified
tree such as ``WeakProd((t, t))``.
"""

from __future__ import annotations

from typing import Iterable, Iterator


class Qp:
    """Base class of all QP nodes.

    ``atoms`` is the set of elementary-probability names occurring in the
    node, ``sum_free`` tells whether the subtree stays inside the grammar of
    constants, monomials, ``1-`` and products (such trees are idempotent under
    the weak product), ``size`` counts tree nodes with sharing expanded.
    """

    __slots__ = ("atoms", "sum_free", "size", "_hash")

    def __repr__(self):
        from .text import to_text

        return f"{type(self).__name__}<{to_text(self)}>"

    def __hash__(self):
        return self._hash

    def children(self) -> tuple[Qp, ...]:
        return ()


class Const(Qp):
    __slots__ = ("value",)

    def __init__(self, value: int):
        if value not in (0, 1):
            raise ValueError(f"QP constants are 0 or 1, got {value!r}")
        self.value = int(value)
        self.atoms = frozenset()
        self.sum_free = True
        self.size = 1
        self._hash = hash(("const", self.value))

    def __eq__(self, other):
        return self is other or (type(other) is Const and other.value == self.value)

    __hash__ = Qp.__hash__


class Mono(Qp):
    """Monomial: the product of a nonempty set of distinct atoms."""

    __slots__ = ()

    def __init__(self, atoms: Iterable[str]):
        atoms = frozenset(atoms)
        if not atoms:
            raise ValueError("a monomial needs at least one atom")
        for a in atoms:
            if not isinstance(a, str) or not a:
                raise ValueError(f"atom names are nonempty strings, got {a!r}")
        self.atoms = atoms
        self.sum_free = True
        self.size = 1
        self._hash = hash(("mono", atoms))

    def __eq__(self, other):
        return self is other or (type(other) is Mono and other.atoms == self.atoms)

    __hash__ = Qp.__hash__


class OneMinus(Qp):
    __slots__ = ("child",)

    def __init__(self, child: Qp):
        self.child = child
        self.atoms = child.atoms
        self.sum_free = child.sum_free
        self.size = child.size + 1
        self._hash = hash(("1-", child._hash))

    def children(self):
        return (self.child,)

    def __eq__(self, other):
        if self is other:
            return True
        return type(other) is OneMinus and other._hash == self._hash and other.child == self.child

    __hash__ = Qp.__hash__


class _Product(Qp):
    __slots__ = ("factors",)
    _tag = ""

    def __init__(self, factors: Iterable[Qp]):
        factors = tuple(factors)
        if len(factors) < 2:
            raise ValueError(f"{type(self).__name__} needs at least two factors")
        self.factors = factors
        self.atoms = frozenset().union(*(f.atoms for f in factors))
        self.sum_free = all(f.sum_free for f in factors)
        self.size = 1 + sum(f.size for f in factors)
        self._hash = hash((self._tag, tuple(f._hash for f in factors)))

    def children(self):
        return self.factors

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(other) is type(self)
            and other._hash == self._hash
            and len(other.factors) == len(self.factors)
            and all(a == b for a, b in zip(self.factors, other.factors))
        )

    __hash__ = Qp.__hash__


class WeakProd(_Product):
    """Idempotent product ``a * b * ...``; factors may share atoms."""

    __slots__ = ()
    _tag = "*"


class StrongProd(_Product):
    """Ordinary product of pairwise unrelated (atom-disjoint) factors."""

    __slots__ = ()
    _tag = "."

    def __init__(self, factors: Iterable[Qp]):
        super().__init__(factors)
        seen: set[str] = set()
        for f in self.factors:
            if seen & f.atoms:
                raise ValueError("strong product factors must not share atoms: " + ", ".join(sorted(seen & f.atoms)))
            seen |= f.atoms


class Sum(Qp):
    """Signed sum; ``terms`` is a tuple of ``(sign, expr)`` with sign in {+1, -1}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[int, Qp]]):
        terms = tuple((int(s), t) for s, t in terms)
        if not terms:
            raise ValueError("empty sum")
        for s, _ in terms:
            if s not in (1, -1):
                raise ValueError(f"sum signs are +1 or -1, got {s}")
        self.terms = terms
        self.atoms = frozenset().union(*(t.atoms for _, t in terms))
        self.sum_free = False
        self.size = 1 + sum(t.size for _, t in terms)
        self._hash = hash(("+", tuple((s, t._hash) for s, t in terms)))

    def children(self):
        return tuple(t for _, t in self.terms)

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(other) is Sum
            and other._hash == self._hash
            and len(other.terms) == len(self.terms)
            and all(s1 == s2 and t1 == t2 for (s1, t1), (s2, t2) in zip(self.terms, other.terms))
        )

    __hash__ = Qp.__hash__


ZERO = Const(0)
ONE = Const(1)


# --- smart constructors --------------------------------------------------------

def const(value: int) -> Const:
    return ONE if value else ZERO


def atom(name: str) -> Mono:
    return Mono((name,))


def mono(*names: str) -> Qp:
    """Monomial over ``names``; the empty monomial is the constant 1."""
    return Mono(names) if names else ONE


def one_minus(x: Qp) -> Qp:
    if type(x) is Const:
        return const(1 - x.value)
    if type(x) is OneMinus:
        return x.child
    return OneMinus(x)


def _annihilated(factors: list[Qp], mono_atoms: frozenset) -> bool:
    present = {f for f in factors if f.sum_free}
    for f in factors:
        if type(f) is OneMinus and f.child.sum_free:
            c = f.child
            if c in present:
                return True
            if type(c) is Mono and c.atoms <= mono_atoms:
                return True
    return False


def weak_prod(factors: Iterable[Qp]) -> Qp:
    """Weak product with product reduction, 0/1 folding, idempotent dedupe
    of repeated factors, and ``s * (1-s) -> 0``."""
    atoms: set[str] = set()
    rest: list[Qp] = []
    seen: set[Qp] = set()
    stack = list(factors)
    stack.reverse()
    while stack:
        f = stack.pop()
        t = type(f)
        if t is WeakProd:
            stack.extend(reversed(f.factors))
        elif t is Const:
            if f.value == 0:
                return ZERO
        elif t is Mono:
            atoms |= f.atoms
        elif f.sum_free:
            if f not in seen:
                seen.add(f)
                rest.append(f)
        else:
            rest.append(f)
    fatoms = frozenset(atoms)
    if _annihilated(rest, fatoms):
        return ZERO
    parts = ([Mono(fatoms)] if fatoms else []) + rest
    if not parts:
        return ONE
    if len(parts) == 1:
        return parts[0]
    return WeakProd(parts)


def weak_mul(a: Qp, b: Qp) -> Qp:
    return weak_prod((a, b))


def strong_prod(factors: Iterable[Qp]) -> Qp:
    """Ordinary product of unrelated factors; monomial factors are merged."""
    atoms: set[str] = set()
    rest: list[Qp] = []
    stack = list(factors)
    stack.reverse()
    while stack:
        f = stack.pop()
        t = type(f)
        if t is StrongProd:
            stack.extend(reversed(f.factors))
        elif t is Const:
            if f.value == 0:
                return ZERO
        elif t is Mono:
            if atoms & f.atoms:
                raise ValueError("strong product factors must not share atoms: " + ", ".join(sorted(atoms & f.atoms)))
            atoms |= f.atoms
        else:
            rest.append(f)
    parts = ([Mono(atoms)] if atoms else []) + rest
    if not parts:
        return ONE
    if len(parts) == 1:
        return parts[0]
    return StrongProd(parts)


def qsum(terms: Iterable[tuple[int, Qp]]) -> Qp:
    """Signed sum with flattening, constant folding and ``r - r`` cancellation."""
    total = 0
    counts: dict[Qp, int] = {}
    stack = [(int(s), t) for s, t in terms]
    stack.reverse()
    while stack:
        s, t = stack.pop()
        if type(t) is Sum:
            stack.extend(reversed([(s * s2, t2) for s2, t2 in t.terms]))
        elif type(t) is Const:
            total += s * t.value
        else:
            counts[t] = counts.get(t, 0) + s
    others = [(c, t) for t, c in counts.items() if c != 0]
    if total == 1 and len(others) == 1 and others[0][0] == -1:
        return one_minus(others[0][1])
    out: list[tuple[int, Qp]] = []
    sign = 1 if total > 0 else -1
    out.extend((sign, ONE) for _ in range(abs(total)))
    for c, t in others:
        sign = 1 if c > 0 else -1
        out.extend((sign, t) for _ in range(abs(c)))
    if not out:
        return ZERO
    if len(out) == 1 and out[0][0] == 1:
        return out[0][1]
    return Sum(out)


# --- traversal helpers -----------------------------------------------------------

def iter_nodes(e: Qp) -> Iterator[Qp]:
    """Distinct node objects of ``e``, children before parents."""
    seen: set[int] = set()
    stack: list[tuple[Qp, bool]] = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(node.children()):
            if id(c) not in seen:
                stack.append((c, False))


def rebuild(node: Qp, children: list[Qp]) -> Qp:
    """Rebuild ``node`` over new children through the smart constructors,
    returning ``node`` itself when nothing changed."""
    old = node.children()
    if len(old) == len(children) and all(a is b for a, b in zip(old, children)):
        return node
    t = type(node)
    if t is OneMinus:
        return one_minus(children[0])
    if t is WeakProd:
        return weak_prod(children)
    if t is StrongProd:
        return strong_prod(children)
    if t is Sum:
        return qsum((s, c) for (s, _), c in zip(node.terms, children))
    raise TypeError(f"cannot rebuild {t.__name__}")


def transform(e: Qp, leaf) -> Qp:
    """Bottom-up rewrite: ``leaf(node)`` may return a replacement for any
    node (checked before its children are visited); returning ``None``
    recurses."""
    memo: dict[int, Qp] = {}
    for node in iter_nodes(e):
        r = leaf(node)
        if r is None:
            kids = node.children()
            r = rebuild(node, [memo[id(c)] for c in kids]) if kids else node
        memo[id(node)] = r
    return memo[id(e)]


def assign(e: Qp, values: dict[str, int]) -> Qp:
    """Substitute the constants 0/1 for atoms."""
    if not values or not (e.atoms & values.keys()):
        return e

    def leaf(node):
        if not (node.atoms & values.keys()):
            return node
        if type(node) is Mono:
            keep = []
            for a in node.atoms:
                v = values.get(a)
                if v is None:
                    keep.append(a)
                elif v == 0:
                    return ZERO
            return Mono(keep) if keep else ONE
        return None

    return transform(e, leaf)


def replace(e: Qp, target: Qp, replacement: Qp) -> Qp:
    """Replace every structural occurrence of ``target`` inside ``e``."""
    if not (target.atoms <= e.atoms):
        return e

    def leaf(node):
        if not (target.atoms <= node.atoms):
            return node
        if node == target:
            return replacement
        return None

    return transform(e, leaf)


def kill_supersets(e: Qp, atoms: frozenset) -> Qp:
    """Set to 0 every monomial containing all of ``atoms``; sound next to a
    factor ``1 - prod(atoms)``."""
    if not (atoms <= e.atoms):
        return e

    def leaf(node):
        if not (atoms <= node.atoms):
            return node
        if type(node) is Mono:
            return ZERO
        return None

    return transform(e, leaf)


def subterms(e: Qp) -> set[Qp]:
    return set(iter_nodes(e))
