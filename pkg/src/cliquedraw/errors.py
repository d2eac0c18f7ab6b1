"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CliqueDrawError(Exception):
    """Base class for all package errors."""


class GraphError(CliqueDrawError):
    """Invalid graph, multigraph, blowup or decomposition structure."""


class GeometryError(CliqueDrawError):
    """Geometric precondition failure (degenerate input, no valid radius, ...)."""


class DegenerateSegmentError(GeometryError):
    """A zero-length segment was used where a proper segment is required."""


class NotPlanarError(CliqueDrawError):
    """Raised when a planar embedding is requested for a non-planar graph.

    Carries a Kuratowski witness: ``kind`` is ``"K5"`` or ``"K3,3"`` and
    ``witness`` the corresponding subdivision as a Graph.
    """

    def __init__(self, kind, witness):
        super().__init__(f"graph is not planar ({kind} subdivision found)")
        self.kind = kind
        self.witness = witness


class StructuralMismatchError(CliqueDrawError):
    """A piece fails the structural claim of its declared kind."""


class PerturbationError(GeometryError):
    """General-position repair did not converge within the retry budget."""


class GenerationBudgetError(CliqueDrawError):
    """A generator exhausted its resampling budget."""


class FormatError(CliqueDrawError):
    """Malformed input file.  ``line`` is the 1-based offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TamperError(FormatError):
    """An embedded crossing report does not match the recomputed one."""


class BoundViolationError(CliqueDrawError):
    """Observed crossings exceed the certified bound (internal invariant)."""
