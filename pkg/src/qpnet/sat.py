"""Satisfiability and model counting through QPs.

A CNF formula maps to the weak product of its clause QPs, where a clause
``l1 or ... or lk`` becomes ``1 - c1 c2 ... ck`` with ``c = v`` for a
negative literal ``not v`` and ``c = 1-v`` for a positive literal ``v``. Read
as a probability with every variable independently true with probability
one half, the QP is #models / 2^n. *-elimination turns it into a
decomposed residual that can be evaluated directly, so the formula is
unsatisfiable exactly when the residual evaluates to 0 at one half.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .algebra import (
    DEFAULT_BUDGET,
    ONE,
    ZERO,
    Mono,
    OneMinus,
    Qp,
    StrongProd,
    eliminate_star,
    evaluate,
    expand,
    mono,
    one_minus,
    strong_prod,
    weak_prod,
)
from .errors import BudgetExceededError, DimacsParseError, HeaderMismatchError, TooManyVariablesError

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Clause:
    """Disjunction of ``(variable, positive)`` literals. Repeated literals
    are merged; a complementary pair makes the clause a tautology."""

    literals: tuple[tuple[str, bool], ...]
    tautology: bool = field(default=False, compare=False)

    def __init__(self, literals: Iterable[tuple[str, bool]]):
        merged: dict[str, bool] = {}
        taut = False
        for var, positive in literals:
            positive = bool(positive)
            if var in merged and merged[var] != positive:
                taut = True
            merged.setdefault(var, positive)
        object.__setattr__(self, "literals", tuple(merged.items()))
        object.__setattr__(self, "tautology", taut)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.literals)

    def satisfied_by(self, model: Mapping[str, bool]) -> bool:
        return self.tautology or any(model.get(v, False) == pos for v, pos in self.literals)

    def __len__(self):
        return len(self.literals)


@dataclass(frozen=True)
class CnfFormula:
    variables: tuple[str, ...]
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        known = set(self.variables)
        for c in self.clauses:
            for v in c.variables:
                if v not in known:
                    raise ValueError(f"clause variable {v!r} is not declared")

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[tuple[str, bool]]], variables: Sequence[str] | None = None) -> CnfFormula:
        cl = [c if isinstance(c, Clause) else Clause(c) for c in clauses]
        if variables is None:
            variables = list(dict.fromkeys(v for c in cl for v in c.variables))
        return cls(tuple(variables), tuple(cl))

    @property
    def has_empty_clause(self) -> bool:
        return any(c.is_empty for c in self.clauses)

    def with_clause(self, clause: Iterable[tuple[str, bool]]) -> CnfFormula:
        return CnfFormula(self.variables, self.clauses + (Clause(clause),))

    def satisfied_by(self, model: Mapping[str, bool]) -> bool:
        return all(c.satisfied_by(model) for c in self.clauses)

    def index(self, var: str) -> int:
        return self.variables.index(var) + 1


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF. Variables are named ``v1`` .. ``vn``; a clause may
    span lines and ends at ``0``; ``c`` lines are comments and a ``%`` line
    ends the clause section."""
    n = m = None
    clauses: list[Clause] = []
    current: list[tuple[str, bool]] = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if n is not None:
                raise DimacsParseError("second problem line", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError("expected 'p cnf <variables> <clauses>'", lineno)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError("header counts must be integers", lineno) from None
            if n < 0 or m < 0:
                raise DimacsParseError("header counts must be nonnegative", lineno)
            continue
        if n is None:
            raise DimacsParseError("clause before the 'p cnf' header", lineno)
        for tok in line.split():
            try:
                k = int(tok)
            except ValueError:
                raise DimacsParseError(f"not an integer literal: {tok!r}", lineno) from None
            if k == 0:
                clauses.append(Clause(current))
                current = []
                continue
            if abs(k) > n:
                raise HeaderMismatchError(f"line {lineno}: variable {abs(k)} exceeds declared count {n}")
            current.append((f"v{abs(k)}", k > 0))
        last_line = lineno
    if n is None:
        raise DimacsParseError("missing 'p cnf' header", 1)
    if current:
        raise DimacsParseError("last clause is not terminated by 0", last_line)
    if len(clauses) != m:
        raise HeaderMismatchError(f"header declares {m} clauses, found {len(clauses)}")
    return CnfFormula(tuple(f"v{i}" for i in range(1, n + 1)), tuple(clauses))


def to_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {len(f.variables)} {len(f.clauses)}"]
    for c in f.clauses:
        lits = [str(f.index(v) if pos else -f.index(v)) for v, pos in c.literals]
        lines.append(" ".join(lits + ["0"]))
    return "\n".join(lines) + "\n"


# --- QP encoding ----------------------------------------------------------------------------

def clause_qp(c: Clause) -> Qp:
    if c.tautology:
        return ONE
    if c.is_empty:
        return ZERO
    # the clause fails exactly when every literal is false
    falsifiers = [one_minus(mono(v)) if pos else mono(v) for v, pos in c.literals]
    return one_minus(strong_prod(falsifiers))


def cnf_to_qp(f: CnfFormula) -> Qp:
    """Weak product of the clause QPs, shortest clauses first."""
    ordered = sorted(f.clauses, key=len)
    return weak_prod([clause_qp(c) for c in ordered])


# --- decision ---------------------------------------------------------------------------------

class SatStatus(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class SatResult:
    status: SatStatus
    model: dict | None = None
    free: tuple[str, ...] = ()
    residual: Qp | None = None
    shared_atoms: frozenset = frozenset()


def _literal_factors(e: Qp) -> dict[str, bool] | None:
    """Assignment read off a product of atoms and ``1 - atom`` factors."""
    if e == ONE:
        return {}
    factors = e.factors if type(e) is StrongProd else (e,)
    out: dict[str, bool] = {}
    for f in factors:
        if type(f) is Mono:
            out.update((a, True) for a in f.atoms)
        elif type(f) is OneMinus and type(f.child) is Mono and len(f.child.atoms) == 1:
            (a,) = f.child.atoms
            out[a] = False
        else:
            return None
    return out


def _greedy_model(residual: Qp, order: Sequence[str]) -> dict[str, bool]:
    """Fix variables one at a time, keeping a value while the residual with
    the remaining variables at one half stays positive. The value is
    proportional to the number of extensions, so no choice is ever undone."""
    values: dict[str, Fraction] = {a: HALF for a in residual.atoms}
    model: dict[str, bool] = {}
    for var in order:
        if var not in values:
            continue
        values[var] = Fraction(1)
        if evaluate(residual, values) > 0:
            model[var] = True
            continue
        values[var] = Fraction(0)
        model[var] = False
    return model


def decide_sat(f: CnfFormula, budget: int = DEFAULT_BUDGET, strategy: str = "split") -> SatResult:
    """SAT with a model, UNSAT, or UNKNOWN when *-elimination runs out of
    budget. Variables that do not occur in the residual are reported as free
    and set to false in the model."""
    if f.has_empty_clause:
        return SatResult(SatStatus.UNSAT, residual=ZERO)
    try:
        residual = eliminate_star(cnf_to_qp(f), budget, strategy)
    except BudgetExceededError as exc:
        return SatResult(SatStatus.UNKNOWN, residual=exc.partial, shared_atoms=exc.shared_atoms)
    if evaluate(residual, {a: HALF for a in residual.atoms}) == 0:
        return SatResult(SatStatus.UNSAT, residual=residual)
    fixed = _literal_factors(residual)
    if fixed is None:
        fixed = _greedy_model(residual, f.variables)
    free = tuple(v for v in f.variables if v not in fixed)
    model = {v: fixed.get(v, False) for v in f.variables}
    return SatResult(SatStatus.SAT, model, free, residual)


DEFAULT_VARIABLE_CAP = 24


def count_models(f: CnfFormula, cap: int = DEFAULT_VARIABLE_CAP, method: str = "eliminate", budget: int = DEFAULT_BUDGET) -> int:
    """Number of satisfying assignments over all declared variables:
    2^n times the formula QP at one half.

    ``method="expand"`` evaluates the full multilinear expansion;
    ``method="eliminate"`` evaluates the *-eliminated residual, which is
    usually far smaller. Both are exact.
    """
    n = len(f.variables)
    if n > cap:
        raise TooManyVariablesError(n, cap)
    if f.has_empty_clause:
        return 0
    qp = cnf_to_qp(f)
    if method == "expand":
        e = expand(qp)
    elif method == "eliminate":
        e = eliminate_star(qp, budget)
    else:
        raise ValueError(f"unknown counting method {method!r}")
    value = Fraction(evaluate(e, {a: HALF for a in e.atoms}))
    count = value * (1 << n)
    if count.denominator != 1:  # pragma: no cover - would indicate an algebra bug
        raise ArithmeticError(f"non-integral model count {count}")
    return int(count)


def brute_force_models(f: CnfFormula) -> int:
    """Truth-table model count, for cross-checks on small formulas."""
    n = 0
    for bits in itertools.product((False, True), repeat=len(f.variables)):
        if f.satisfied_by(dict(zip(f.variables, bits))):
            n += 1
    return n


# --- solver-style output -------------------------------------------------------------------

def format_result(f: CnfFormula, result: SatResult) -> str:
    if result.status is SatStatus.SAT:
        lits = [str(f.index(v)) if result.model[v] else str(-f.index(v)) for v in f.variables]
        lines = ["s SATISFIABLE", "v " + " ".join(lits + ["0"])]
        if result.free:
            lines.append("c free " + " ".join(result.free))
        return "\n".join(lines)
    if result.status is SatStatus.UNSAT:
        return "s UNSATISFIABLE"
    lines = ["s UNKNOWN"]
    if result.shared_atoms:
        lines.append("c unresolved " + " ".join(sorted(result.shared_atoms)))
    return "\n".join(lines)


def format_count(count: int) -> str:
    return f"c models {count}"
