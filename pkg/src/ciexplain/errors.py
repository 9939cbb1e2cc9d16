"""Exception types shared across the package.

The CLI maps each family to a distinct exit code, so keep the hierarchy flat
and the categories coarse: input syntax, input semantics, lookups, and
constraint violations.
"""


class ParseError(Exception):
    """Malformed file content. Messages name the file and line number."""


class SchemaError(Exception):
    """Structurally valid input that violates the declared schema
    (unknown class name, duplicate sample id, bad field type)."""


class EmptyInputError(SchemaError):
    """A dataset file with a header but no sample records."""


class ZeroSupportError(ValueError):
    """An itemset has no supporting samples, so confidence is undefined."""


class UndefinedSubspaceError(ValueError):
    """A per-class measure was requested for a class with no samples."""


class InfeasibleCandidateError(ValueError):
    """A candidate explanation violates one of the hard size constraints."""


class UnknownIdError(KeyError):
    """A sample id or class name lookup failed."""
