"""Quasi-probability expressions: construction, expansion, evaluation and
*-elimination."""

from .expand import (
    DEFAULT_CAP,
    equivalent,
    evaluate,
    expand,
    is_decomposed,
    is_zero,
    shared_atoms,
)
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
    atom,
    const,
    mono,
    one_minus,
    qsum,
    strong_prod,
    weak_mul,
    weak_prod,
)
from .form import MultilinearForm
from .rewrite import (
    DEFAULT_BUDGET,
    eliminate_star,
    rule_bookkeeping,
    rule_decoupling,
    rule_resolution,
)
from .text import parse_qp, to_text
from .valuation import Valuation, as_valuation

__all__ = [
    "DEFAULT_BUDGET",
    "DEFAULT_CAP",
    "ONE",
    "ZERO",
    "Const",
    "Mono",
    "MultilinearForm",
    "OneMinus",
    "Qp",
    "StrongProd",
    "Sum",
    "Valuation",
    "WeakProd",
    "as_valuation",
    "assign",
    "atom",
    "const",
    "eliminate_star",
    "equivalent",
    "evaluate",
    "expand",
    "is_decomposed",
    "is_zero",
    "mono",
    "one_minus",
    "parse_qp",
    "qsum",
    "rule_bookkeeping",
    "rule_decoupling",
    "rule_resolution",
    "shared_atoms",
    "strong_prod",
    "to_text",
    "weak_mul",
    "weak_prod",
]
