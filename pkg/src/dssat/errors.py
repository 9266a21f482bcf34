"""Exception hierarchy shared by every module in the package.

Errors fall into three groups: malformed inputs (construction and parse
errors), misuse of an operation (bad arguments, mismatched Skolem sets),
and desk-scale resource caps.  The command line maps the first two groups
to exit code 2 and the cap group to exit code 3.
"""


class DssatError(Exception):
    """Base class for all package errors."""


class ResourceCapError(DssatError):
    """A configurable size or search cap was exceeded."""


# ---------------------------------------------------------------- formulas

class InvalidFormula(DssatError):
    """Structural problem not covered by a more specific error."""


class DuplicateQuantifier(DssatError):
    """The same variable id is quantified more than once."""


class DanglingVariable(DssatError):
    """The matrix or a dependency list references an unquantified id."""


class BadProbability(DssatError):
    """A probability is outside [0, 1] or a distribution does not sum to 1."""


class IllegalDependency(DssatError):
    """A dependency names an existential variable or the variable itself."""


class PartialAssignment(DssatError):
    """An assignment is missing a variable the operation needs."""


class OutOfRange(DssatError):
    """A value lies outside its declared finite domain."""


# ---------------------------------------------------------------- file I/O

class ParseError(DssatError):
    """Syntax error with a 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class CountMismatch(ParseError):
    """Declared counts in a header disagree with the body."""


class UnknownVariable(ParseError):
    """A clause or table references a variable outside the prefix."""


class WrongTableLength(ParseError):
    """A Skolem table bitstring has the wrong length for its deps."""


class MissingFunction(ParseError):
    """A Skolem file omits a table for some existential variable."""


class RowNotNormalized(DssatError):
    """A stochastic table row does not sum to 1 within tolerance."""


class BadHorizon(DssatError):
    """A decision horizon below 1."""


# -------------------------------------------------------------- evaluation

class TooManyRandomVars(ResourceCapError):
    """Evaluation would exceed the random-variable or width cap."""


class SkolemMismatch(DssatError):
    """A Skolem set does not cover the formula's existentials exactly."""


class DepthBudgetExceeded(ResourceCapError):
    """Prefix recursion deeper than the configured budget."""


class NotLinearPrefix(DssatError):
    """An existential does not depend on exactly the preceding r/a block."""


class NonBooleanFormula(DssatError):
    """The operation requires a purely Boolean formula."""


# ------------------------------------------------------------------ search

class SearchSpaceTooLarge(ResourceCapError):
    """Skolem candidate space beyond the configured cap."""


class BadThreshold(DssatError):
    """Decision threshold outside [0, 1]."""


# ------------------------------------------------------------- reductions

class DomainTooLarge(ResourceCapError):
    """A finite domain too large to booleanize."""


# --------------------------------------------------------------- policies

class PartialPolicy(DssatError):
    """A joint policy missing an action for some reachable history."""


class PolicyMismatch(DssatError):
    """A policy indexed against the wrong model shape."""


class PolicySpaceTooLarge(ResourceCapError):
    """Deterministic policy enumeration beyond the configured cap."""


# ---------------------------------------------------------------- circuits

class UnsupportedGate(DssatError):
    """Unknown gate kind or illegal fan-in arity."""


class SharedInputMismatch(DssatError):
    """Specification and implementation disagree on primary inputs."""


class CyclicBlackBox(DssatError):
    """A black box participates in a cycle or feeds its own dependency cone."""


class ErrorRatesPresent(DssatError):
    """An operation requiring an error-free circuit saw an error rate."""
