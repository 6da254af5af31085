"""Exception hierarchy shared by all citegraph modules.

Every error raised by the library derives from CitegraphError so callers
(CLI, HTTP service) can map any library failure to one diagnostic path.
"""

from __future__ import annotations


class CitegraphError(Exception):
    """Base class for all citegraph errors."""


# --- identifier codec ------------------------------------------------------

class MalformedPrefix(CitegraphError):
    """Supplier prefix does not match the zero-delimited numeral pattern."""


class AmbiguousPrefix(CitegraphError):
    """Registering the prefix would break prefix-freeness of the registry."""


class UnsupportedCharacter(CitegraphError):
    """A character of the local identifier has no numeral-table code."""


class BadLocalId(CitegraphError):
    """Local identifier has the wrong shape for the supplier's codec kind."""


class UnknownPrefix(CitegraphError):
    """No registered supplier prefix heads the numeral sequence."""


class OddLengthBody(CitegraphError):
    """Paired-table body has odd length and cannot be split into codes."""


class UnknownCode(CitegraphError):
    """A two-digit code in the body is not assigned in the numeral table."""


class LeadingZeroBody(CitegraphError):
    """Verbatim-numeric body is empty or starts with a zero."""


class MalformedOci(CitegraphError):
    """Citation identifier text does not match ``oci:[0-9]+-[0-9]+``."""


# --- dates and durations ---------------------------------------------------

class MalformedDate(CitegraphError):
    """Partial date text or components are invalid."""


class MalformedDuration(CitegraphError):
    """Duration text does not parse as a signed calendar duration."""


# --- citation model --------------------------------------------------------

class NoEncodableIdentifier(CitegraphError):
    """Resource carries no identifier encodable under a registered supplier."""


class NoSharedIdentifier(CitegraphError):
    """Two resources cannot merge because they share no identifier."""


# --- graph store -----------------------------------------------------------

class TermNotFound(CitegraphError):
    """Dictionary lookup of an unassigned term id."""


class QuerySyntaxError(CitegraphError):
    """Query text failed to parse; carries the failure position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnboundVariable(CitegraphError):
    """Projected or filtered variable appears in no pattern."""


class NTriplesSyntaxError(CitegraphError):
    """Line-based RDF input failed to parse; carries the line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


# --- provenance ------------------------------------------------------------

class AlreadyExists(CitegraphError):
    """A provenance log already exists for the entity."""


class NoSuchEntity(CitegraphError):
    """No provenance log exists for the entity."""


class NonMonotonicTime(CitegraphError):
    """Snapshot timestamp is not strictly after the previous snapshot."""


class RemovedQuadAbsent(CitegraphError):
    """Delta removes a quad the entity does not currently hold."""


class BeforeCreation(CitegraphError):
    """Reconstruction time precedes the entity's creation snapshot."""


class DeltaSyntaxError(CitegraphError):
    """Serialized delta block failed to parse; carries the line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


# --- ingestion -------------------------------------------------------------

class HeaderMismatch(CitegraphError):
    """Citation CSV header does not match a supported column set."""


class OciMismatch(CitegraphError):
    """A CSV row's oci column disagrees with its citing/cited identifiers."""


# --- API service -----------------------------------------------------------

class ConfigError(CitegraphError):
    """Route or service configuration failed to parse."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


class ShadowedBuiltin(CitegraphError):
    """A configured route would shadow a built-in route."""


class BadIdentifier(CitegraphError):
    """Request carries an identifier that cannot be normalized."""


class NotAcceptable(CitegraphError):
    """No supported response format satisfies the request."""


class EmptyQuery(CitegraphError):
    """Search endpoint called with an empty query string."""


class UnknownOci(CitegraphError):
    """Well-formed OCI with no stored citation behind it."""
