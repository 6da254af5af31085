"""Open Citation Identifier codec.

An OCI names one citation: ``oci:`` followed by two numeral sequences
joined by a dash.  Each sequence starts with a registered supplier prefix
(a zero-delimited numeral head, e.g. ``020`` for Crossref-style DOIs,
``030`` for corpus numbers) and continues with the encoded local
identifier.  DOI-style identifiers are spelled out character by character
through a two-digit numeral table; corpus numbers are carried verbatim.

Because nothing in the identifier is opaque, decoding an OCI recovers the
citation direction, each side's supplier database and the local
identifier used there, with no lookup beyond the prefix registry.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import (
    AmbiguousPrefix,
    BadLocalId,
    LeadingZeroBody,
    MalformedOci,
    MalformedPrefix,
    UnknownCode,
    UnknownPrefix,
    OddLengthBody,
    UnsupportedCharacter,
)

# Identifies which completion of the character table this build ships.
# Only the digit, '/' and '-' codes are externally fixed; everything else
# is this table version.  Flagged in stats/metadata output so dumps can be
# checked against the table that produced them.
NUMERAL_TABLE_VERSION = "builtin-1"

# Symbols covering codes 37..62, in code order.  '/' is 36 and '-' is 63.
_SYMBOLS_37_TO_62 = ". _ : ; ( ) # + % & ? = * , @ ~ $ ! ' \" [ ] { } | ^".split(" ")

_PREFIX_RE = re.compile(r"^0([1-9][0-9]*0)+$")
_OCI_RE = re.compile(r"^(?:oci:)?([0-9]+)-([0-9]+)$")
_POSITIVE_INT_RE = re.compile(r"^[1-9][0-9]*$")
_NUMERALS_RE = re.compile(r"^[0-9]+$")


def _default_entries() -> dict[str, str]:
    entries = {str(d): f"0{d}" for d in range(10)}
    for i, ch in enumerate("abcdefghijklmnopqrstuvwxyz"):
        entries[ch] = str(10 + i)
    entries["/"] = "36"
    for i, ch in enumerate(_SYMBOLS_37_TO_62):
        entries[ch] = str(37 + i)
    entries["-"] = "63"
    return entries


class NumeralTable:
    """Bijective map between characters and two-digit code strings."""

    def __init__(self, entries: dict[str, str]):
        for ch, code in entries.items():
            if len(ch) != 1:
                raise ValueError(f"table keys must be single characters, got {ch!r}")
            if not (len(code) == 2 and code.isdigit()):
                raise ValueError(f"code for {ch!r} must be two decimal digits, got {code!r}")
        if len(set(entries.values())) != len(entries):
            raise ValueError("numeral table codes must be distinct")
        self._encode = dict(entries)
        self._decode = {code: ch for ch, code in entries.items()}

    @classmethod
    def default(cls) -> NumeralTable:
        return cls(_default_entries())

    def encode_char(self, ch: str) -> str:
        try:
            return self._encode[ch]
        except KeyError:
            raise UnsupportedCharacter(f"character {ch!r} has no numeral code") from None

    def decode_code(self, code: str) -> str:
        try:
            return self._decode[code]
        except KeyError:
            raise UnknownCode(f"code {code!r} is not assigned in the numeral table") from None

    def characters(self) -> str:
        """All encodable characters, in code order."""
        return "".join(ch for _, ch in sorted((c, ch) for ch, c in self._encode.items()))


class CodecKind(str, Enum):
    """How a supplier's local identifiers travel inside the numerals."""

    PAIRED_TABLE = "paired-table"
    VERBATIM_NUMERIC = "verbatim-numeric"


@dataclass(frozen=True)
class SupplierEntry:
    prefix: str
    name: str
    codec_kind: CodecKind
    scheme: str


@dataclass(frozen=True)
class OciSide:
    supplier: SupplierEntry
    local_id: str


@dataclass(frozen=True)
class Oci:
    citing: OciSide
    cited: OciSide
    canonical_text: str

    @property
    def numerals(self) -> str:
        """The two joined sequences without the scheme head."""
        return self.canonical_text[len("oci:"):]


class SupplierRegistry:
    """Prefix-free registry of supplier databases.

    Entries 020 (Crossref-style DOIs) and 030 (corpus numbers) are present
    from construction.  Registration is expected to finish before serving
    traffic; afterwards the registry is read-only and safe to share across
    threads.
    """

    def __init__(self, table: NumeralTable | None = None):
        self.table = table or NumeralTable.default()
        self._by_prefix: dict[str, SupplierEntry] = {}
        self.register("020", "crossref", CodecKind.PAIRED_TABLE, "doi")
        self.register("030", "occ", CodecKind.VERBATIM_NUMERIC, "occ")

    def register(self, prefix: str, name: str, codec_kind: CodecKind, scheme: str) -> SupplierEntry:
        if not _PREFIX_RE.match(prefix):
            raise MalformedPrefix(
                f"prefix {prefix!r} must be '0' followed by zero-terminated nonzero-led groups"
            )
        for existing in self._by_prefix:
            if existing.startswith(prefix) or prefix.startswith(existing):
                raise AmbiguousPrefix(f"prefix {prefix!r} collides with registered {existing!r}")
        entry = SupplierEntry(prefix, name, CodecKind(codec_kind), scheme)
        self._by_prefix[prefix] = entry
        return entry

    def entries(self) -> list[SupplierEntry]:
        return list(self._by_prefix.values())

    def by_prefix(self, prefix: str) -> SupplierEntry:
        try:
            return self._by_prefix[prefix]
        except KeyError:
            raise UnknownPrefix(f"no supplier registered under prefix {prefix!r}") from None

    def by_scheme(self, scheme: str) -> SupplierEntry | None:
        """First registered supplier for the identifier scheme, if any."""
        for entry in self._by_prefix.values():
            if entry.scheme == scheme:
                return entry
        return None

    # -- local identifier codec ----------------------------------------

    def encode_local(self, supplier: SupplierEntry | str, local_id: str) -> str:
        """Encode ``local_id`` into a supplier-prefixed numeral sequence."""
        entry = self._entry(supplier)
        if entry.codec_kind is CodecKind.PAIRED_TABLE:
            suffix = _doi_suffix(local_id)
            return entry.prefix + "".join(self.table.encode_char(ch) for ch in suffix)
        if not _POSITIVE_INT_RE.match(local_id):
            raise BadLocalId(
                f"{local_id!r} is not a positive integer without leading zeros"
            )
        return entry.prefix + local_id

    def decode_local(self, sequence: str) -> tuple[SupplierEntry, str]:
        """Split a numeral sequence into its supplier and local identifier.

        The registry is prefix-free, so the longest matching prefix is the
        only matching prefix.
        """
        if not _NUMERALS_RE.match(sequence):
            raise UnknownPrefix(f"{sequence!r} is not a numeral sequence")
        entry = None
        for prefix in sorted(self._by_prefix, key=len, reverse=True):
            if sequence.startswith(prefix):
                entry = self._by_prefix[prefix]
                break
        if entry is None:
            raise UnknownPrefix(f"no registered prefix heads {sequence!r}")
        body = sequence[len(entry.prefix):]
        if entry.codec_kind is CodecKind.PAIRED_TABLE:
            if len(body) % 2:
                raise OddLengthBody(f"paired-table body {body!r} has odd length")
            chars = [self.table.decode_code(body[i:i + 2]) for i in range(0, len(body), 2)]
            return entry, "10." + "".join(chars)
        if not body or body.startswith("0"):
            raise LeadingZeroBody(f"numeric body {body!r} is empty or zero-led")
        return entry, body

    # -- whole identifiers ----------------------------------------------

    def build_oci(self, citing: tuple[SupplierEntry | str, str],
                  cited: tuple[SupplierEntry | str, str]) -> Oci:
        citing_seq = self.encode_local(*citing)
        cited_seq = self.encode_local(*cited)
        citing_entry, citing_id = self.decode_local(citing_seq)
        cited_entry, cited_id = self.decode_local(cited_seq)
        return Oci(
            citing=OciSide(citing_entry, citing_id),
            cited=OciSide(cited_entry, cited_id),
            canonical_text=f"oci:{citing_seq}-{cited_seq}",
        )

    def parse_oci(self, text: str) -> Oci:
        """Parse OCI text, with or without the ``oci:`` scheme head."""
        m = _OCI_RE.match(text)
        if not m:
            raise MalformedOci(f"{text!r} does not match oci:[0-9]+-[0-9]+")
        citing_seq, cited_seq = m.group(1), m.group(2)
        citing = OciSide(*self._decode_side(citing_seq, "citing"))
        cited = OciSide(*self._decode_side(cited_seq, "cited"))
        return Oci(citing, cited, f"oci:{citing_seq}-{cited_seq}")

    def _decode_side(self, sequence: str, side: str) -> tuple[SupplierEntry, str]:
        try:
            return self.decode_local(sequence)
        except (UnknownPrefix, OddLengthBody, UnknownCode, LeadingZeroBody) as exc:
            raise type(exc)(f"{side} side: {exc}") from None

    def _entry(self, supplier: SupplierEntry | str) -> SupplierEntry:
        if isinstance(supplier, SupplierEntry):
            return supplier
        return self.by_prefix(supplier)


def _doi_suffix(local_id: str) -> str:
    """Normalize a DOI and strip the constant ``10.`` head."""
    doi = local_id.strip().lower()
    if doi.startswith("doi:"):
        doi = doi[len("doi:"):]
    if not doi.startswith("10."):
        raise BadLocalId(f"{local_id!r} is not a DOI (must start with '10.')")
    return doi[len("10."):]


def register_from_lines(registry: SupplierRegistry, lines: list[str]) -> list[SupplierEntry]:
    """Register extra suppliers from ``prefix,name,codec,scheme`` lines.

    Blank lines and ``#`` comments are skipped.  Codec is spelled
    ``paired-table`` or ``verbatim-numeric``.
    """
    added = []
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise MalformedPrefix(f"registry line needs 4 fields: {line!r}")
        prefix, name, codec, scheme = parts
        try:
            kind = CodecKind(codec)
        except ValueError:
            raise MalformedPrefix(f"unknown codec kind {codec!r} in {line!r}") from None
        added.append(registry.register(prefix, name, kind, scheme))
    return added
