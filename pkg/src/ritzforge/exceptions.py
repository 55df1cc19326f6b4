"""Exception hierarchy for ritzforge.

Every error raised on purpose by the package derives from
:class:`RitzForgeError`, so the CLI can map them all to one exit code.
Errors tied to a position (a pivot, a diagonal entry, a GMRES step) carry
it as an attribute using 1-based numbering.
"""


class RitzForgeError(Exception):
    """Base class of all ritzforge errors."""

    kind = "error"

    def record(self):
        """Machine-readable summary used by the CLI diagnostics."""
        out = {"error": self.kind, "message": str(self)}
        for attr in ("index", "step", "line", "path"):
            value = getattr(self, attr, None)
            if value is not None:
                out[attr] = value
        return out


class ArgumentError(RitzForgeError, ValueError):
    """An argument is outside the documented domain."""

    kind = "argument"


class StructureError(RitzForgeError, ValueError):
    """A matrix lacks a required structure (square, Hessenberg, ...)."""

    kind = "structure"


class SingularMatrixError(RitzForgeError, ArithmeticError):
    """A triangular matrix has a (numerically) zero diagonal entry."""

    kind = "singular-matrix"

    def __init__(self, msg, index):
        super().__init__(msg)
        self.index = index


class SingularSystemError(RitzForgeError, ArithmeticError):
    """LU elimination met a pivot below the singularity threshold."""

    kind = "singular-system"

    def __init__(self, msg, index):
        super().__init__(msg)
        self.index = index


class ConvergenceError(RitzForgeError, ArithmeticError):
    """The shifted QR iteration failed to deflate in time."""

    kind = "convergence"


class AdmissibilityError(RitzForgeError, ValueError):
    """A prescription (or its schedule) is not admissible.

    ``violations`` holds the offending :class:`~ritzforge.prescription.Violation`
    records when available.
    """

    kind = "admissibility"

    def __init__(self, msg, violations=()):
        super().__init__(msg)
        self.violations = list(violations)
        self.step = self.violations[0].step if self.violations else None


class PrematureTerminationError(RitzForgeError, ValueError):
    """The first row of Q exhausts its norm before the last column."""

    kind = "premature-termination"

    def __init__(self, msg, step):
        super().__init__(msg)
        self.step = step


class ConsistencyError(RitzForgeError, RuntimeError):
    """Two routes to the same quantity disagree beyond tolerance."""

    kind = "internal-consistency"

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class DegeneratePrescription(RitzForgeError, ArithmeticError):
    """The linear system for a column of R is singular."""

    kind = "degenerate-prescription"

    def __init__(self, msg, step):
        super().__init__(msg)
        self.step = step


class SingularRError(RitzForgeError, ArithmeticError):
    """A freshly built column of R has a negligible diagonal entry."""

    kind = "singular-r"

    def __init__(self, msg, step):
        super().__init__(msg)
        self.step = step


class ParseError(RitzForgeError, ValueError):
    """Malformed prescription JSON; ``path`` is a JSON pointer-ish locator."""

    kind = "parse"

    def __init__(self, msg, path="$"):
        super().__init__(f"{path}: {msg}")
        self.path = path


class MatrixMarketError(RitzForgeError, ValueError):
    """Malformed Matrix Market file."""

    kind = "matrix-market"

    def __init__(self, msg, line=None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line
