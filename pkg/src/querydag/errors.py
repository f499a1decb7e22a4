"""Exception types shared across the package."""


class QueryDagError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(QueryDagError):
    """A document does not conform to its schema."""


class ValidationError(QueryDagError):
    """A structurally well-formed object violates a semantic invariant."""


class CapacityError(QueryDagError):
    """An exact brute-force computation exceeds its configured cap."""


class WireValueError(QueryDagError):
    """A wire lookup during output computation had no value supplied."""


class PipelineError(QueryDagError):
    """An end-to-end consistency check failed; indicates a construction bug."""


class GenerationError(QueryDagError):
    """Instance generation could not satisfy the requested constraints."""
