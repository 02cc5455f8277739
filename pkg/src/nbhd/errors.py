"""Exception types shared across the package.

Everything raised on purpose derives from :class:`NbhdError`, so callers
(FOR instance the command line front end) can distinguish bad input from
genuine bugs with a single except clause.
"""

from __future__ import annotations


class NbhdError(Exception):
    """Base class for all errors this package raises deliberately."""


class FormulaSyntaxError(NbhdError):
    """Raised by the parser; carries the offset of the offending token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ModelFormatError(NbhdError):
    """A model description (dict or JSON file) violates the schema."""


class UnknownWorldError(NbhdError):
    """A world reference does not name a world of the model."""


class ResourceLimitError(NbhdError):
    """A computation would exceed the configured resource guards."""


class ConstraintError(NbhdError):
    """A frame-constraint set cannot be satisfied or repaired as requested."""


class UnsupportedModelError(NbhdError):
    """An operation is only defined for the other model kind."""


class ProofFormatError(NbhdError):
    """A proof file or proof object is structurally malformed."""
