"""Exception types raised across the package."""


class GQMError(Exception):
    """Base class for all errors raised by gqm."""


class StructuralError(GQMError, ValueError):
    """A matrix fails a structural property (Hermiticity, idempotence, trace...)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DimensionError(GQMError, ValueError):
    """Operands have incompatible shapes, or exceed the dimension cap."""


class HistoryIndexError(GQMError, IndexError):
    """A history index does not address a valid history of a grid."""


class EnumerationSizeError(GQMError, ValueError):
    """Exhaustive enumeration would exceed the configured cap."""

    def __init__(self, message, size):
        super().__init__(message)
        self.size = size


class CoverageError(GQMError, ValueError):
    """A coarse-graining map leaves some histories unassigned."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


class IncompleteGridError(GQMError, ValueError):
    """The class operators of a grid do not sum to the identity."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class PartitionError(GQMError, ValueError):
    """Regions do not form an exhaustive, exclusive partition of the sites."""


class UnsupportedStateError(GQMError, ValueError):
    """The operation is only defined for a narrower class of states."""


class RecordsUnavailable(GQMError):
    """Branch vectors are not mutually orthogonal, so no records exist.

    ``max_overlap`` is the largest raw overlap ``|<psi_a|psi_b>|`` between
    distinct branches; ``max_normalized_overlap`` divides it by the two
    branch norms.
    """

    def __init__(self, message, max_overlap, max_normalized_overlap):
        super().__init__(message)
        self.max_overlap = max_overlap
        self.max_normalized_overlap = max_normalized_overlap


class NotDecoherentError(GQMError):
    """Probabilities were requested from a set that does not decohere."""


class ConfigError(GQMError, ValueError):
    """A configuration document is malformed or violates the schema.

    ``violations`` holds ``(path, message)`` pairs.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.violations]
        super().__init__("; ".join(lines))
