"""Expansion of QPs to multilinear form, equivalence, and numeric evaluation.

Two expansion routes produce identical forms:

* ``sparse`` distributes products term by term over atom bitmasks and
  enforces the term cap as it goes;
* ``dense`` tabulates the expression on the Boolean cube of its atoms (each
  weak product becomes a pointwise product, since atoms are idempotent on
  {0, 1}) and recovers coefficients with a Möbius transform. It costs
  O(n 2^n) per node regardless of term count, so it is used for small atom
  counts.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Mapping

import numpy as np

from ..errors import ExpansionLimitError, MissingAtomError, NotDecomposedError
from .expr import Const, Mono, OneMinus, Qp, StrongProd, Sum, WeakProd, iter_nodes
from .form import MultilinearForm

DEFAULT_CAP = 1 << 18
DENSE_MAX_ATOMS = 14


def expand(e: Qp, cap: int = DEFAULT_CAP, method: str = "auto") -> MultilinearForm:
    """Fully distribute ``e`` into its canonical multilinear form.

    Raises :class:`ExpansionLimitError` when the form (or, on the sparse
    route, any intermediate form) has more than ``cap`` terms.
    """
    if isinstance(e, MultilinearForm):
        return e
    names = sorted(e.atoms)
    if method == "auto":
        method = "dense" if len(names) <= DENSE_MAX_ATOMS else "sparse"
    if method == "dense":
        masks = _expand_dense(e, names)
    elif method == "sparse":
        masks = _expand_sparse(e, names, cap)
    else:
        raise ValueError(f"unknown expansion method {method!r}")
    if len(masks) > cap:
        raise ExpansionLimitError(cap, len(masks))
    return MultilinearForm._raw({_mask_atoms(m, names): c for m, c in masks.items()})


def _mask_atoms(mask: int, names: list[str]) -> frozenset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(names[i])
        mask >>= 1
        i += 1
    return frozenset(out)


def _expand_sparse(e: Qp, names: list[str], cap: int) -> dict[int, int]:
    bit = {a: 1 << i for i, a in enumerate(names)}
    memo: dict[int, dict[int, int]] = {}

    def check(form):
        if len(form) > cap:
            raise ExpansionLimitError(cap, len(form))
        return form

    def mul(a: dict, b: dict) -> dict:
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, int] = {}
        get = out.get
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                k = m1 | m2
                out[k] = get(k, 0) + c1 * c2
        return check({k: c for k, c in out.items() if c})

    for node in iter_nodes(e):
        t = type(node)
        if t is Const:
            form = {0: 1} if node.value else {}
        elif t is Mono:
            m = 0
            for a in node.atoms:
                m |= bit[a]
            form = {m: 1}
        elif t is OneMinus:
            child = memo[id(node.child)]
            form = {k: -c for k, c in child.items()}
            v = form.get(0, 0) + 1
            if v:
                form[0] = v
            else:
                form.pop(0, None)
        elif t is WeakProd or t is StrongProd:
            form = {0: 1}
            for f in sorted(node.factors, key=lambda f: len(memo[id(f)])):
                form = mul(form, memo[id(f)])
                if not form:
                    break
        elif t is Sum:
            form = {}
            for s, term in node.terms:
                for k, c in memo[id(term)].items():
                    v = form.get(k, 0) + s * c
                    if v:
                        form[k] = v
                    else:
                        form.pop(k, None)
            check(form)
        else:  # pragma: no cover
            raise TypeError(t)
        memo[id(node)] = form
    return memo[id(e)]


def _cube_values(e: Qp, names: list[str]) -> np.ndarray:
    """Values of ``e`` at every 0/1 assignment; index bit i is atom names[i]."""
    n = len(names)
    idx = np.arange(1 << n, dtype=np.int64)
    bit = {a: i for i, a in enumerate(names)}
    order = list(iter_nodes(e))
    pending: dict[int, int] = {}
    for node in order:
        for c in node.children():
            pending[id(c)] = pending.get(id(c), 0) + 1
    memo: dict[int, np.ndarray] = {}

    def take(child):
        arr = memo[id(child)]
        pending[id(child)] -= 1
        if pending[id(child)] == 0:
            del memo[id(child)]
        return arr

    for node in order:
        t = type(node)
        if t is Const:
            val = np.full(1 << n, node.value, dtype=np.int64)
        elif t is Mono:
            m = 0
            for a in node.atoms:
                m |= 1 << bit[a]
            val = ((idx & m) == m).astype(np.int64)
        elif t is OneMinus:
            val = 1 - take(node.child)
        elif t is WeakProd or t is StrongProd:
            val = take(node.factors[0]).copy()
            for f in node.factors[1:]:
                val *= take(f)
        elif t is Sum:
            val = np.zeros(1 << n, dtype=np.int64)
            for s, term in node.terms:
                val += s * take(term)
        else:  # pragma: no cover
            raise TypeError(t)
        memo[id(node)] = val
    return memo[id(e)]


def _expand_dense(e: Qp, names: list[str]) -> dict[int, int]:
    coeffs = _cube_values(e, names).copy()
    n = len(names)
    for i in range(n):
        view = coeffs.reshape(-1, 2, 1 << i)
        view[:, 1, :] -= view[:, 0, :]
    nz = np.flatnonzero(coeffs)
    return {int(m): int(coeffs[m]) for m in nz}


def equivalent(a: Qp, b: Qp, cap: int = DEFAULT_CAP) -> bool:
    """QP equivalence, decided by equality of expanded forms."""
    return expand(a, cap) == expand(b, cap)


def is_zero(e: Qp, cap: int = DEFAULT_CAP) -> bool:
    return expand(e, cap).is_zero()


# --- decomposition checks and evaluation ------------------------------------------

def shared_atoms(e: Qp) -> frozenset:
    """Atoms occurring in two factors of some weak product of ``e``."""
    out: set[str] = set()
    for node in iter_nodes(e):
        if type(node) in (WeakProd, StrongProd):
            seen: set[str] = set()
            for f in node.factors:
                out |= seen & f.atoms
                seen |= f.atoms
    return frozenset(out)


def is_decomposed(e: Qp) -> bool:
    return not shared_atoms(e)


def evaluate(e, valuation: Mapping[str, object]):
    """Numeric value of a decomposed QP, or of a multilinear form.

    Products are evaluated as ordinary arithmetic products, which is only
    sound when no atom straddles a weak product; otherwise
    :class:`NotDecomposedError` is raised. Values are exact when the
    valuation is rational.
    """
    if isinstance(e, MultilinearForm):
        return e.evaluate(valuation)
    shared = shared_atoms(e)
    if shared:
        raise NotDecomposedError(shared)
    for a in e.atoms:
        if a not in valuation:
            raise MissingAtomError(a)
    return _evaluate_tree(e, valuation)


def _evaluate_tree(e: Qp, valuation):
    memo: dict[int, object] = {}
    for node in iter_nodes(e):
        t = type(node)
        if t is Const:
            v = node.value
        elif t is Mono:
            v = 1
            for a in sorted(node.atoms):
                v = v * valuation[a]
        elif t is OneMinus:
            v = 1 - memo[id(node.child)]
        elif t is WeakProd or t is StrongProd:
            v = 1
            for f in node.factors:
                v = v * memo[id(f)]
        elif t is Sum:
            v = 0
            for s, term in node.terms:
                v = v + s * memo[id(term)]
        else:  # pragma: no cover
            raise TypeError(t)
        memo[id(node)] = v
    out = memo[id(e)]
    if isinstance(out, Rational) and not isinstance(out, int):
        return Fraction(out)
    return out
