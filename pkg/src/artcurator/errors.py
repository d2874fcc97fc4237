"""Domain errors shared across the toolkit.

Every error carries a machine-readable ``code`` (the class name) and a
``details`` mapping so the HTTP layer can surface module errors 1:1.
Unreadable files raise the builtin ``OSError``; the service maps it to the
code ``IoError``.
"""

from __future__ import annotations

from typing import Any


class ArtcuratorError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__


# -- catalog / embeddings -----------------------------------------------------

class DuplicateId(ArtcuratorError):
    """Two records share one painting id."""


class SchemaError(ArtcuratorError):
    """A record or header does not conform to the file schema."""


class NotFound(ArtcuratorError):
    """Lookup of an id that is not in the collection."""


class DimensionMismatch(ArtcuratorError):
    """A vector's length disagrees with the declared dimension."""


class UnknownPainting(ArtcuratorError):
    """A painting id is absent from the catalog or embedding space."""


class ZeroVector(ArtcuratorError):
    """An ingested vector has zero norm (kept, flagged, scored as 0)."""


# -- curation state machine ---------------------------------------------------

class EmptySeeds(ArtcuratorError):
    """A curation session needs at least one seed painting."""


class IllegalTransition(ArtcuratorError):
    """Operation not legal in the session's current state."""


class MissingReason(ArtcuratorError):
    """flag/reject actions require a nonempty reason."""


class WrongPickCount(ArtcuratorError):
    """Finalize received the wrong number of picks for a seed."""


class NotInList(ArtcuratorError):
    """A pick is neither in the seed's current list nor manually added."""


class UnknownSeed(ArtcuratorError):
    """Referenced seed is not one of the session's seeds."""


class OutOfOrder(ArtcuratorError):
    """Capture or event ordering violated (e.g. post before pre)."""


class MissingTimings(ArtcuratorError):
    """No seed has timing markers and no headless durations were supplied."""


# -- guided sessions / analytics ----------------------------------------------

class DuplicateCapture(ArtcuratorError):
    """An instrument that may be captured once was submitted twice."""


class EmptyText(ArtcuratorError):
    """Reflection or classifier input text is empty."""


class RangeError(ArtcuratorError):
    """A Likert-style item value is outside its allowed range."""


class IncompleteSession(ArtcuratorError):
    """An aggregate requires instruments the session does not carry."""


class ClassifierUnavailable(ArtcuratorError):
    """The named sentiment classifier is not registered."""


class UnknownTheme(ArtcuratorError):
    """Theme code outside the fixed ten-theme taxonomy."""


# -- persistence ----------------------------------------------------------------

class VersionConflict(ArtcuratorError):
    """Optimistic write carried a stale version."""
