"""Exception hierarchy shared by every qpnet module."""


class QpError(Exception):
    """Base class for all qpnet errors."""


# --- algebra -----------------------------------------------------------------

class QpParseError(QpError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position


class ExpansionLimitError(QpError):
    """Raised when a multilinear expansion would exceed the configured term cap."""

    def __init__(self, cap, reached):
        super().__init__(f"expansion exceeded {cap} terms (reached {reached})")
        self.cap = cap
        self.reached = reached


class NotDecomposedError(QpError):
    def __init__(self, shared):
        names = ", ".join(sorted(shared))
        super().__init__(f"expression is not decomposed; shared atoms straddle a weak product: {names}")
        self.shared = frozenset(shared)


class MissingAtomError(QpError, KeyError):
    def __init__(self, atom):
        super().__init__(atom)
        self.atom = atom

    def __str__(self):
        return f"valuation has no value for atom {self.atom!r}"


class InvalidValuationError(QpError, ValueError):
    pass


class PivotNotFoundError(QpError, LookupError):
    pass


class ShapeMismatchError(QpError, ValueError):
    pass


class BudgetExceededError(QpError):
    """*-elimination ran out of distribution steps.

    ``partial`` holds the expression after the non-distributive rules and
    ``shared_atoms`` the atoms still straddling a weak product in it.
    """

    def __init__(self, budget, partial, shared_atoms):
        names = ", ".join(sorted(shared_atoms))
        super().__init__(f"elimination budget of {budget} distribution steps exceeded; residual shared atoms: {names}")
        self.budget = budget
        self.partial = partial
        self.shared_atoms = frozenset(shared_atoms)


# --- networks ----------------------------------------------------------------

class NetworkError(QpError, ValueError):
    pass


class ValidationError(NetworkError):
    def __init__(self, violations):
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"invalid network: {lines}")
        self.violations = list(violations)


class NotARootError(NetworkError):
    pass


class UnknownNodeError(NetworkError, KeyError):
    def __str__(self):
        return f"unknown node {self.args[0]!r}"


class CptError(NetworkError):
    pass


# --- inference ---------------------------------------------------------------

class QueryParseError(QpError, ValueError):
    pass


class ZeroEvidenceError(QpError, ZeroDivisionError):
    def __init__(self, message="zero-probability evidence"):
        super().__init__(message)


class DegenerateDenominatorError(ZeroEvidenceError):
    def __init__(self, message="boosted denominator vanishes at the target value"):
        super().__init__(message)


class TooManyAtomsError(QpError):
    def __init__(self, count, cap):
        super().__init__(f"{count} atoms exceed the enumeration cap of {cap}")
        self.count = count
        self.cap = cap


# --- sat -----------------------------------------------------------------------

class DimacsParseError(QpError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class HeaderMismatchError(DimacsParseError):
    pass


class TooManyVariablesError(QpError):
    def __init__(self, count, cap):
        super().__init__(f"{count} variables exceed the model-counting cap of {cap}")
        self.count = count
        self.cap = cap


# --- pulse trains --------------------------------------------------------------

class ConfigMismatchError(QpError, ValueError):
    pass


class ZeroEvidenceAreaError(ZeroEvidenceError):
    def __init__(self, message="evidence pulse train has zero area"):
        super().__init__(message)
