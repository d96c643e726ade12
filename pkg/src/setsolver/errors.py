"""Exception types shared across the solver."""


class SolverError(Exception):
    """Base class for all solver-raised errors."""


class SortError(SolverError):
    """A term was used where a different sort was required (e.g. a non-set tail)."""


class ParseError(SolverError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = "%s (line %d, column %d)" % (message, line, column)
        super().__init__(message)


class UnknownPredicate(SolverError):
    def __init__(self, name, arity):
        self.name = name
        self.arity = arity
        super().__init__("unknown predicate %s/%d" % (name, arity))


class NotNegatable(SolverError):
    """Raised when an atom or formula has no built-in negation."""


class BudgetExhausted(SolverError):
    """A search branch exceeded a configured budget.

    Signals possible divergence, never unsatisfiability.  ``kind`` is one of
    ``"rewrite"``, ``"unfold"`` or ``"timeout"``.
    """

    def __init__(self, kind, detail=""):
        self.kind = kind
        msg = "budget exhausted (%s)" % kind
        if detail:
            msg += ": " + detail
        super().__init__(msg)


class UnsupportedConstraint(SolverError):
    """Constraint is recognised but outside the implemented fragment."""


class UnsupportedNonlinear(SolverError):
    """A nonlinear integer term reached the linear arithmetic decider."""


class UnboundArithmetic(SolverError):
    """Arithmetic evaluation hit an unbound variable."""


class EnumerationTooLarge(SolverError):
    """Ground enumeration exceeded the configured candidate budget."""
