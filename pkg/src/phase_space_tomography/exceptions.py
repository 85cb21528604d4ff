"""Error hierarchy for the toolkit.

All errors derive from ``ValueError`` so callers that only know about bad input keep
working; each carries a short machine-readable ``code`` used by the CLI error JSON.
"""


class TomographyError(ValueError):
    """Base class for toolkit errors."""

    code = "tomography_error"


class InvalidStateError(TomographyError):
    """Density matrix violates a state invariant or constructor precondition."""

    code = "invalid_state"


class ValidityWindowError(TomographyError):
    """Parameter outside the window where a reconstruction formula is valid."""

    code = "validity_window"


class TruncationError(TomographyError):
    """A series or tail bound failed to converge within its cap."""

    code = "truncation"


class IllConditionedError(TomographyError):
    """Least-squares or deconvolution problem too ill-conditioned to trust."""

    code = "ill_conditioned"


class GridError(TomographyError):
    """Grid does not cover the required region or nodes."""

    code = "grid"


class SchemaError(TomographyError):
    """Input file does not match the expected schema."""

    code = "schema"


class ConsistencyError(TomographyError):
    """Internal-consistency assertion failed (e.g. non-negligible imaginary part)."""

    code = "consistency"
