"""Exception hierarchy and desk-scale limits shared by all modules."""

from __future__ import annotations

import os

DEFAULT_MAX_ORDER = 1 << 24
DEFAULT_MAX_CUBE_DIM = 24

# Largest group order we accept at all; indices must fit in int64.
MAX_EXACT_ORDER = (1 << 63) - 1


class AddBasesError(Exception):
    """Base class for every error raised by this package."""

    code = "error"


class InstanceError(AddBasesError, ValueError):
    """An instance file is malformed or fails schema validation."""

    code = "validation"


class GroupMismatchError(AddBasesError, ValueError):
    code = "group_mismatch"


class DeskScaleError(AddBasesError):
    """An enumeration would exceed the configured desk-scale cap."""

    code = "desk_scale"


class SingularMatrixError(AddBasesError, ArithmeticError):
    code = "singular"


class InconsistentSystemError(AddBasesError, ArithmeticError):
    """A linear system has no solution.

    ``witness`` holds the index of the offending right-hand side column (or
    row of the target matrix) when one is known.
    """

    code = "inconsistent"

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotObliqueError(AddBasesError, ValueError):
    code = "not_oblique"

    def __init__(self, message: str, witness=None, block=None):
        super().__init__(message)
        self.witness = witness
        self.block = block


class FieldTooSmallError(AddBasesError, ValueError):
    """Raised when k > p, where existence of the synthesis is not guaranteed."""

    code = "field_too_small"


class SynthesisError(AddBasesError):
    code = "synthesis_failed"


class InvariantBreach(AddBasesError, AssertionError):
    """A proved inequality or identity failed: this is always a bug."""

    code = "invariant_breach"


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)


def max_order() -> int:
    """Cap on the order of groups we enumerate (``ADDBASES_MAX_ORDER``)."""
    return _env_int("ADDBASES_MAX_ORDER", DEFAULT_MAX_ORDER)


def max_cube_dim() -> int:
    """Cap on kr for unit-cube enumeration (``ADDBASES_MAX_CUBE_DIM``)."""
    return _env_int("ADDBASES_MAX_CUBE_DIM", DEFAULT_MAX_CUBE_DIM)
