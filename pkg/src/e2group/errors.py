"""Exception hierarchy shared by every module of the package."""


class E2GroupError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(E2GroupError, ValueError):
    """Edge lengths or coordinates do not describe a valid Euclidean object."""


class DegenerateSimplexError(GeometryError):
    """A simplex has zero volume."""


class NotInSubgroupError(E2GroupError, ValueError):
    """A rotation is not in the requested subgroup.

    The Frobenius distance to the subgroup condition is kept in ``residual``.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class LemmaViolationError(E2GroupError, RuntimeError):
    """The extracted triangle angles disagree with the dihedral angles."""


class StatisticsError(E2GroupError, RuntimeError):
    """A Monte Carlo estimate could not reach the requested precision."""


class TriangulationError(E2GroupError, ValueError):
    """Malformed triangulation file or invalid simplicial complex.

    ``line`` is the 1-based source line when the error comes from parsing.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MoveError(E2GroupError, ValueError):
    """A Pachner move is not applicable at the requested target."""
