"""*-elimination: rewriting a QP into decomposed (directly evaluable) form.

Rules, in the order the eliminator tries them on a weak product whose
factors are related (share atoms):

1. book-keeping: unrelated factor groups become strong products;
2. resolution: a factor ``s`` lets every other factor substitute 1 for
   ``s`` (``1-s`` substitutes 0); for atoms this is plain substitution;
3. decoupling: ``(1-r*r1)*...*(1-r*rn)`` becomes ``1-r*[1-(1-r1)*...*(1-rn)]``;
4. distribution, the last resort, which may grow the expression.

Every rewrite preserves the expanded multilinear form.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

from ..errors import BudgetExceededError, PivotNotFoundError, ShapeMismatchError
from .expand import DEFAULT_CAP, ExpansionLimitError, expand, shared_atoms
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
    assign,
    iter_nodes,
    kill_supersets,
    mono,
    one_minus,
    qsum,
    rebuild,
    replace,
    strong_prod,
    subterms,
    weak_prod,
)

DEFAULT_BUDGET = 1 << 16
STRATEGIES = ("split", "distribute")


# --- helpers ---------------------------------------------------------------------

def _components(factors: Sequence[Qp]) -> list[list[Qp]]:
    """Group factors into classes connected by shared atoms."""
    n = len(factors)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[str, int] = {}
    for i, f in enumerate(factors):
        for a in f.atoms:
            j = owner.setdefault(a, i)
            if j != i:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[Qp]] = {}
    for i, f in enumerate(factors):
        groups.setdefault(find(i), []).append(f)
    return list(groups.values())


def _product_items(x: Qp) -> list[Qp] | None:
    """Top-level factors of a product-shaped expression, monomials split
    into single atoms; None if ``x`` is not product-shaped."""
    t = type(x)
    if t is Mono:
        return [Mono((a,)) for a in sorted(x.atoms)]
    if t in (WeakProd, StrongProd):
        out: list[Qp] = []
        for f in x.factors:
            inner = _product_items(f) if type(f) in (Mono, WeakProd, StrongProd) else None
            out.extend(inner if inner is not None else [f])
        return out
    return None


def _is_literal(f: Qp) -> bool:
    return type(f) is Mono or (type(f) is OneMinus and type(f.child) is Mono)


def _flatten(factors: Iterable[Qp]) -> list[Qp]:
    out: list[Qp] = []
    stack = list(factors)
    stack.reverse()
    while stack:
        f = stack.pop()
        if type(f) in (WeakProd, StrongProd):
            stack.extend(reversed(f.factors))
        else:
            out.append(f)
    return out


def _normalize(factors: Iterable[Qp]) -> list[Qp]:
    """Flatten products and apply the weak-product simplifications."""
    p = weak_prod(_flatten(factors))
    if type(p) is Const and p.value == 0:
        return [ZERO]
    return _flatten([p])


# --- the individual rules --------------------------------------------------------

def rule_bookkeeping(e: Qp) -> Qp:
    """Rewrite weak products of unrelated factors as strong products.

    A weak product whose factors fall into several unrelated groups becomes a
    strong product of the groups; groups that still share atoms stay weak.
    """

    memo: dict[int, Qp] = {}
    for node in iter_nodes(e):
        kids = [memo[id(c)] for c in node.children()]
        if type(node) is WeakProd:
            flat = _normalize(kids)
            if len(flat) == 1:
                out = flat[0]
            else:
                groups = _components(flat)
                out = strong_prod(g[0] if len(g) == 1 else WeakProd(g) for g in groups)
        else:
            out = rebuild(node, kids) if kids else node
        memo[id(node)] = out
    return memo[id(e)]


def _resolve_into(pivot: Qp, target: Qp) -> Qp:
    """Apply resolution on ``pivot`` to the co-factor ``target``."""
    if type(pivot) is Mono:
        return assign(target, dict.fromkeys(pivot.atoms, 1))
    if type(pivot) is OneMinus:
        inner = pivot.child
        if type(inner) is Mono:
            if len(inner.atoms) == 1:
                return assign(target, dict.fromkeys(inner.atoms, 0))
            return kill_supersets(replace(target, inner, ZERO), inner.atoms)
        if inner.sum_free:
            return replace(target, inner, ZERO)
        return target
    if pivot.sum_free:
        return replace(target, pivot, ONE)
    return target


def rule_resolution(e: Qp, pivot: Qp) -> Qp:
    """Resolution on the first weak product of ``e`` that has a factor equal
    to ``pivot`` or to ``1 - pivot``.

    ``s * t`` becomes ``s * t[1/s]`` and ``(1-s) * t`` becomes
    ``(1-s) * t[0/s]``. A monomial pivot also matches a monomial factor that
    contains it. Compound pivots must be sum-free (genuine QPs), since the
    rule relies on idempotency.
    """
    negated = one_minus(pivot)
    found = False

    def matches(f: Qp) -> Qp | None:
        if f == pivot or f == negated:
            return f
        if type(pivot) is Mono and type(f) is Mono and pivot.atoms <= f.atoms:
            return pivot
        return None

    memo: dict[int, Qp] = {}
    for node in iter_nodes(e):
        kids = [memo[id(c)] for c in node.children()]
        if not found and type(node) is WeakProd:
            flat = _flatten(kids)
            for i, f in enumerate(flat):
                piv = matches(f)
                if piv is not None:
                    if type(piv) is not Mono and not piv.sum_free and not (type(piv) is OneMinus and piv.child.sum_free):
                        raise ValueError("compound resolution pivots must be sum-free QPs")
                    found = True
                    rest = [_resolve_into(piv, g) for j, g in enumerate(flat) if j != i]
                    memo[id(node)] = weak_prod([f, *rest])
                    break
            else:
                memo[id(node)] = rebuild(node, kids)
            continue
        memo[id(node)] = rebuild(node, kids) if kids else node
    if not found:
        raise PivotNotFoundError("no weak product has a factor matching the pivot")
    return memo[id(e)]


def _split_decoupling(factor: Qp, rho_items: list[Qp]) -> Qp | None:
    """For ``factor = 1 - rho*rho_i`` return ``rho_i`` (1 if absent)."""
    if type(factor) is not OneMinus:
        return None
    items = _product_items(factor.child)
    if items is None:
        items = [factor.child]
    remaining = list(items)
    for r in rho_items:
        for k, it in enumerate(remaining):
            if it == r:
                del remaining[k]
                break
        else:
            return None
    return weak_prod(remaining) if remaining else ONE


def rule_decoupling(factors: Sequence[Qp], rho: Qp) -> Qp:
    """Rewrite ``(1-rho*rho_1)*...*(1-rho*rho_n)`` as
    ``1-rho*[1-(1-rho_1)*...*(1-rho_n)]``.

    A factor ``1-rho`` counts as ``rho_i = 1``. Raises
    :class:`ShapeMismatchError` if a factor does not have that shape.
    """
    if not factors:
        raise ShapeMismatchError("decoupling needs at least one factor")
    rho_items = _product_items(rho) or [rho]
    rests = []
    for f in factors:
        r = _split_decoupling(f, rho_items)
        if r is None:
            raise ShapeMismatchError(f"factor {f!r} is not of the form 1-rho*rho_i")
        rests.append(r)
    inner = weak_prod(one_minus(r) for r in rests)
    return one_minus(weak_prod([rho, one_minus(inner)]))


# --- the eliminator --------------------------------------------------------------

class _OutOfBudget(Exception):
    pass


class _Eliminator:
    def __init__(self, budget: int, strategy: str = "split", allow_distribution: bool = True, cap: int = DEFAULT_CAP):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
        self.budget = budget
        self.strategy = strategy
        self.allow_distribution = allow_distribution
        self.cap = cap
        self.steps = 0
        self.memo: dict[int, Qp] = {}
        self._sizes: dict[Qp, int] = {}

    def decompose(self, e: Qp) -> Qp:
        for node in iter_nodes(e):
            if id(node) in self.memo:
                continue
            kids = [self.memo[id(c)] for c in node.children()]
            if type(node) is WeakProd:
                out = self.combine(kids)
            elif type(node) is StrongProd:
                # strong factors are unrelated, but their decomposed forms may
                # still need book-keeping among themselves
                out = self.combine(kids)
            else:
                out = rebuild(node, kids) if kids else node
            self.memo[id(node)] = out
        return self.memo[id(e)]

    def combine(self, factors: Sequence[Qp]) -> Qp:
        pool = _normalize(factors)
        while True:
            if len(pool) == 1:
                return pool[0]
            groups = _components(pool)
            if len(groups) > 1:
                return strong_prod(self.combine(g) if len(g) > 1 else g[0] for g in groups)
            nxt = self.resolve(pool)
            if nxt is None:
                nxt = self.decouple(pool)
            if nxt is None:
                return self.distribute(pool)
            pool = _normalize(nxt)
            if type(pool[0]) is Const and pool[0].value == 0:
                return ZERO

    def resolve(self, pool: list[Qp]) -> list[Qp] | None:
        """One resolution sweep. Literal pivots (``a``, ``1-a``, monomials)
        go first, mirroring the 1-literal rule; a compound factor is used as a
        pivot only when it occurs inside another factor."""
        pool = list(pool)
        changed = False

        def apply(i, j):
            nonlocal changed
            new = _resolve_into(pool[i], pool[j])
            if new is not pool[j] and new != pool[j]:
                pool[j] = new
                changed = True

        for i in range(len(pool)):
            if _is_literal(pool[i]):
                for j in range(len(pool)):
                    if j != i and pool[i].atoms & pool[j].atoms:
                        apply(i, j)
        if changed:
            return pool
        for i, piv in enumerate(pool):
            inner = piv.child if type(piv) is OneMinus else piv
            if not inner.sum_free:
                continue
            for j in range(len(pool)):
                if j != i and inner.atoms <= pool[j].atoms and inner in subterms(pool[j]):
                    apply(i, j)
            if changed:
                return pool
        return None

    def decouple(self, pool: list[Qp]) -> list[Qp] | None:
        cands: list[tuple[int, list[Qp]]] = []
        for i, f in enumerate(pool):
            if type(f) is OneMinus:
                items = _product_items(f.child)
                if items is None:
                    items = [f.child]
                items = [it for it in items if it.sum_free]
                if items:
                    cands.append((i, items))
        if len(cands) < 2:
            return None
        counts: Counter = Counter()
        for _, items in cands:
            counts.update(set(items))
        best = max(counts.items(), key=lambda kv: (kv[1], -kv[0].size, _sort_text(kv[0])), default=None)
        if best is None or best[1] < 2:
            return None
        pick = best[0]
        group = [(i, items) for i, items in cands if pick in items]
        common = set(group[0][1])
        for _, items in group[1:]:
            common &= set(items)
        rho_items = [it for it in group[0][1] if it in common]
        rho = strong_prod(rho_items)
        rests = [_split_decoupling(pool[i], rho_items) for i, _ in group]
        inner = self.combine([one_minus(r) for r in rests])
        new = one_minus(self.combine([rho, one_minus(inner)]))
        taken = {i for i, _ in group}
        return [f for i, f in enumerate(pool) if i not in taken] + [new]

    def _charge(self):
        self.steps += 1
        if self.steps > self.budget:
            raise _OutOfBudget

    def distribute(self, pool: list[Qp]) -> Qp:
        if not self.allow_distribution:
            return WeakProd(pool)
        self._charge()
        if self.strategy == "split":
            return self._split(pool)
        return self._distribute_smallest(pool)

    def _split(self, pool: list[Qp]) -> Qp:
        # Distribute over 1 = a + (1-a) for the atom shared by most factors,
        # then resolve each branch on a / 1-a.
        counts: Counter = Counter()
        for f in pool:
            counts.update(f.atoms)
        a = min(counts, key=lambda k: (-counts[k], k))
        hi = self.combine([assign(f, {a: 1}) for f in pool])
        lo = self.combine([assign(f, {a: 0}) for f in pool])
        if hi == lo:
            return hi
        return qsum([(1, strong_prod([mono(a), hi])), (1, strong_prod([one_minus(mono(a)), lo]))])

    def _expanded_size(self, f: Qp) -> int:
        n = self._sizes.get(f)
        if n is None:
            try:
                n = len(expand(f, self.cap))
            except ExpansionLimitError:
                n = self.cap + 1
            self._sizes[f] = n
        return n

    def _distribute_smallest(self, pool: list[Qp]) -> Qp:
        # Distribute the other factors over the (fewest-expanded-terms)
        # factor that is a sum or a 1-difference.
        cands = [i for i, f in enumerate(pool) if type(f) in (OneMinus, Sum)]
        i = min(cands, key=lambda k: (self._expanded_size(pool[k]), pool[k].size, k))
        f = pool[i]
        others = pool[:i] + pool[i + 1:]
        if type(f) is OneMinus:
            terms = [(1, self.combine(others)), (-1, self.combine([f.child, *others]))]
        else:
            terms = [(s, self.combine([t, *others])) for s, t in f.terms]
        return qsum(terms)


def _sort_text(e: Qp) -> str:
    from .text import to_text

    return to_text(e)


def eliminate_star(e: Qp, budget: int = DEFAULT_BUDGET, strategy: str = "split") -> Qp:
    """Rewrite ``e`` into an equivalent decomposed QP.

    Book-keeping, resolution and decoupling are applied exhaustively; when
    none applies to a group of related factors, distribution is used, at most
    ``budget`` times. ``strategy="split"`` distributes over ``a + (1-a)`` for
    the most shared atom (a case split); ``strategy="distribute"`` distributes
    the remaining factors over the factor with the fewest expanded terms.

    Raises :class:`BudgetExceededError` carrying the partially rewritten
    expression and its residual shared atoms.
    """
    try:
        return _Eliminator(budget, strategy).decompose(e)
    except _OutOfBudget:
        partial = _Eliminator(budget, strategy, allow_distribution=False).decompose(e)
        raise BudgetExceededError(budget, partial, shared_atoms(partial)) from None
