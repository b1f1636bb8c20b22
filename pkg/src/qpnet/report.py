"""Rendering of results as text lines or JSON records. The CLI prints only
what these functions return."""

from __future__ import annotations

import json
from fractions import Fraction
from numbers import Rational, Real

from .algebra import Qp, to_text


def probability(x: Real) -> str:
    return f"{float(x):.6f}"


def exact_text(x: Real) -> str | None:
    """``"7/11"`` for rational values, ``None`` for floats."""
    if isinstance(x, Rational):
        return str(Fraction(x))
    return None


def probability_record(query: str, engine: str, value: Real, **extra) -> dict:
    rec = {"query": query, "engine": engine, "probability": float(value)}
    ex = exact_text(value)
    if ex is not None:
        rec["exact"] = ex
    rec.update({k: v for k, v in extra.items() if v is not None})
    return rec


def infer_text(value: Real, *, numerator: Qp | None = None, denominator: Qp | None = None, cancelled=(), exact: Real | None = None, std: float | None = None, boost=None) -> str:
    lines = [probability(value)]
    if numerator is not None:
        lines.append("numerator " + to_text(numerator))
        lines.append("denominator " + to_text(denominator))
        if cancelled:
            lines.append("cancelled " + " ".join(to_text(c) for c in cancelled))
    if boost is not None:
        lines.append("boost c1={} c2={} c3={} c4={}".format(*(exact_text(c) or repr(float(c)) for c in (boost.c1, boost.c2, boost.c3, boost.c4))))
    if exact is not None:
        lines.append("exact " + probability(exact))
    if std is not None:
        lines.append("std " + probability(std))
    return "\n".join(lines)


def show_text(raw: Qp, decomposed: Qp, expanded=None) -> str:
    lines = ["raw " + to_text(raw, "weak"), "decomposed " + to_text(decomposed)]
    if expanded is not None:
        lines.append("expanded " + to_text(expanded))
    return "\n".join(lines)


def show_record(target: str, raw: Qp, decomposed: Qp, expanded=None) -> dict:
    rec = {"target": target, "raw": to_text(raw, "weak"), "decomposed": to_text(decomposed)}
    if expanded is not None:
        rec["expanded"] = to_text(expanded)
    return rec


def convert_text(node_count: int, symbols: dict) -> str:
    return f"c nodes {node_count}\nc symbols {len(symbols)}"


def to_json(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True)
