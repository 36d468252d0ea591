"""Exception hierarchy shared across the package."""


class JostlabError(Exception):
    """Base class for all package errors."""


class DomainError(JostlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ThresholdError(DomainError):
    """The requested energy sits on the branch point E = 0."""


class EvaluationError(JostlabError):
    """A special-function evaluation failed to converge.

    Carries diagnostics so the failure can be reported with context.
    """

    def __init__(self, message, *, l=None, energy=None, r=None, terms_used=None,
                 last_term=None):
        super().__init__(message)
        self.l = l
        self.energy = energy
        self.r = r
        self.terms_used = terms_used
        self.last_term = last_term


class StiffnessError(JostlabError):
    """Adaptive step size underflowed; integration cannot proceed."""

    def __init__(self, message, *, r=None):
        super().__init__(message)
        self.r = r


class CutoffError(JostlabError):
    """No cutoff radius below R_max meets the requested tail tolerance."""


class PoleSignal(JostlabError):
    """|F_in| fell below the underflow guard; the S-matrix has a pole here."""


class MatchingError(JostlabError):
    """Wave-function matching denominator vanished; try a different radius."""


class ConfigError(JostlabError):
    """A potential configuration document failed to parse or validate."""

    def __init__(self, message, *, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
