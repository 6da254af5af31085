"""Bibliographic entity model and first-class citation properties.

Resources, agents, references, in-text pointers and annotations mirror the
classes a citation index stores; citations themselves carry their own data
(creation date, timespan, self-citation flags) rather than being bare links.
All records are plain values; persistence happens in the store layer.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

from citegraph.dates import PartialDate, SignedDuration, compute_timespan
from citegraph.errors import NoEncodableIdentifier, NoSharedIdentifier
from citegraph.oci import Oci, SupplierEntry, SupplierRegistry


class Scheme(str, Enum):
    DOI = "doi"
    OCC = "occ"
    ORCID = "orcid"
    ISSN = "issn"
    PMID = "pmid"
    OCI = "oci"
    OTHER = "other"


class Role(str, Enum):
    AUTHOR = "author"
    EDITOR = "editor"
    PUBLISHER = "publisher"


class DiscourseKind(str, Enum):
    SENTENCE = "sentence"
    PARAGRAPH = "paragraph"
    SECTION = "section"


_DOI_URL_HEADS = (
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
)


def normalize_doi(value: str) -> str:
    """Trim, drop a doi.org URL head or "doi:" label, and lowercase."""
    v = value.strip()
    lower = v.lower()
    for head in _DOI_URL_HEADS:
        if lower.startswith(head):
            v = v[len(head):]
            lower = v.lower()
            break
    if lower.startswith("doi:"):
        v = v[4:]
    return v.strip().lower()


def _normalize_orcid(value: str) -> str:
    v = value.strip()
    lower = v.lower()
    for head in ("https://orcid.org/", "http://orcid.org/"):
        if lower.startswith(head):
            v = v[len(head):]
            break
    return v.strip().upper()


@dataclass(frozen=True)
class Identifier:
    """External identifier of an entity; (scheme, value) is its identity."""

    scheme: Scheme
    value: str

    def __post_init__(self):
        if not self.value.strip():
            raise ValueError("identifier value must be nonempty")
        if self.scheme == Scheme.DOI:
            object.__setattr__(self, "value", normalize_doi(self.value))
        elif self.scheme == Scheme.ORCID:
            object.__setattr__(self, "value", _normalize_orcid(self.value))
        elif self.scheme == Scheme.ISSN:
            object.__setattr__(self, "value", self.value.strip().upper())
        else:
            object.__setattr__(self, "value", self.value.strip())
        if not self.value:
            raise ValueError("identifier value must be nonempty")


@dataclass(frozen=True)
class Agent:
    """A person or organization; must carry a name or an identifier."""

    id: int
    name: str = ""
    identifiers: tuple[Identifier, ...] = ()

    def __post_init__(self):
        if not self.name and not self.identifiers:
            raise ValueError("agent needs a name or an identifier")

    def orcids(self) -> set[str]:
        return {i.value for i in self.identifiers if i.scheme == Scheme.ORCID}


@dataclass(frozen=True)
class RoleInTime:
    """One agent holding one role (author, editor, publisher) on a resource."""

    agent: Agent
    role: Role
    resource_id: int
    order: int


@dataclass(frozen=True)
class Manifestation:
    """A format-specific embodiment of a resource (print run, digital file)."""

    format: str
    pages: str | None = None

    def __post_init__(self):
        if not self.format:
            raise ValueError("manifestation format must be nonempty")


@dataclass(frozen=True)
class DiscourseElement:
    kind: DiscourseKind
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("discourse element text must be nonempty")


@dataclass
class InTextReferencePointer:
    """A textual device such as "[1]" denoting a reference at a point in the text."""

    marker_text: str
    context: DiscourseElement
    annotation: Annotation | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.marker_text:
            raise ValueError("pointer marker text must be nonempty")


@dataclass(frozen=True)
class Annotation:
    """Links an in-text pointer to the citation it instantiates."""

    target_pointer: InTextReferencePointer = field(repr=False, compare=False)
    citation: Citation = None  # type: ignore[assignment]
    function: str | None = None

    def __post_init__(self):
        if self.target_pointer is None or self.citation is None:
            raise ValueError("annotation needs both a pointer and a citation")


def annotate_pointer(pointer: InTextReferencePointer, citation: Citation,
                     function: str | None = None) -> Annotation:
    """Create the annotation and attach it to the pointer in one step."""
    note = Annotation(target_pointer=pointer, citation=citation, function=function)
    pointer.annotation = note
    return note


@dataclass
class BibliographicReference:
    """An entry in a reference list, possibly resolved to an indexed resource."""

    id: int
    containing_resource_id: int
    raw_text: str
    resolved_target_id: int | None = None
    pointers: list[InTextReferencePointer] = field(default_factory=list)

    def __post_init__(self):
        if self.resolved_target_id is not None and self.resolved_target_id == self.containing_resource_id:
            raise ValueError("a reference cannot resolve to its own containing resource")


@dataclass
class BibliographicResource:
    """A published work: article, journal, book, or similar.

    The venue link points at the containing resource (an article's journal);
    the chain must stay acyclic. ISSNs are read through that chain, so an
    article reports its journal's ISSNs without storing them itself.
    """

    id: int
    identifiers: list[Identifier] = field(default_factory=list)
    title: str = ""
    pub_date: PartialDate | None = None
    venue: BibliographicResource | None = None
    roles: list[RoleInTime] = field(default_factory=list)
    references: list[BibliographicReference] = field(default_factory=list)
    manifestations: list[Manifestation] = field(default_factory=list)

    def set_venue(self, venue: BibliographicResource) -> None:
        seen = {self.id}
        cursor: BibliographicResource | None = venue
        while cursor is not None:
            if cursor.id in seen:
                raise ValueError("venue containment must be acyclic")
            seen.add(cursor.id)
            cursor = cursor.venue
        self.venue = venue

    def add_role(self, agent: Agent, role: Role, order: int) -> RoleInTime:
        if any(r.role == role and r.order == order for r in self.roles):
            raise ValueError(f"duplicate {role.value} at position {order}")
        rit = RoleInTime(agent=agent, role=role, resource_id=self.id, order=order)
        self.roles.append(rit)
        return rit

    def issns(self) -> set[str]:
        out = {i.value for i in self.identifiers if i.scheme == Scheme.ISSN}
        cursor = self.venue
        while cursor is not None:
            out |= {i.value for i in cursor.identifiers if i.scheme == Scheme.ISSN}
            cursor = cursor.venue
        return out

    def author_orcids(self) -> set[str]:
        out: set[str] = set()
        for r in self.roles:
            if r.role == Role.AUTHOR:
                out |= r.agent.orcids()
        return out

    def identifier(self, scheme: Scheme) -> Identifier | None:
        for i in self.identifiers:
            if i.scheme == scheme:
                return i
        return None


@dataclass(frozen=True)
class Citation:
    """A citation as a data entity in its own right, keyed by its OCI."""

    oci: Oci
    citing_id: Identifier
    cited_id: Identifier
    creation: PartialDate | None = None
    timespan: SignedDuration | None = None
    journal_sc: bool = False
    author_sc: bool = False


def classify_self_citation(citing: BibliographicResource,
                           cited: BibliographicResource) -> tuple[bool, bool]:
    """Flag author and journal self-citations by identifier overlap.

    Author self-citation: the two bylines share an ORCID. Journal
    self-citation: the two venues share an ISSN. Missing identifiers
    never produce a flag; names are never compared.
    """
    author_sc = bool(citing.author_orcids() & cited.author_orcids())
    journal_sc = bool(citing.issns() & cited.issns())
    return author_sc, journal_sc


def _encodable_identifier(resource: BibliographicResource,
                          registry: SupplierRegistry) -> tuple[SupplierEntry, Identifier]:
    # supplier registration order decides which identifier wins when
    # a resource carries several encodable ones
    for entry in registry.entries():
        for ident in resource.identifiers:
            if ident.scheme.value == entry.scheme:
                return entry, ident
    schemes = sorted({i.scheme.value for i in resource.identifiers})
    raise NoEncodableIdentifier(
        f"resource {resource.id} has no identifier under a registered supplier "
        f"(schemes present: {schemes or 'none'})"
    )


def make_citation(citing: BibliographicResource, cited: BibliographicResource,
                  registry: SupplierRegistry) -> Citation:
    """Build the full citation record between two resources.

    The OCI comes from each side's first supplier-encodable identifier,
    creation is the citing side's publication date, and the timespan is
    derived only when both dates are known.
    """
    citing_entry, citing_ident = _encodable_identifier(citing, registry)
    cited_entry, cited_ident = _encodable_identifier(cited, registry)
    oci = registry.build_oci((citing_entry, citing_ident.value),
                             (cited_entry, cited_ident.value))
    timespan: SignedDuration | None = None
    if citing.pub_date is not None and cited.pub_date is not None:
        timespan = compute_timespan(citing.pub_date, cited.pub_date)
    author_sc, journal_sc = classify_self_citation(citing, cited)
    return Citation(
        oci=oci,
        citing_id=citing_ident,
        cited_id=cited_ident,
        creation=citing.pub_date,
        timespan=timespan,
        journal_sc=journal_sc,
        author_sc=author_sc,
    )


_PRECISION_SORT = {"year": 0, "month": 1, "day": 2}


def _better_date(a: PartialDate | None, b: PartialDate | None) -> PartialDate | None:
    if a is None:
        return b
    if b is None:
        return a
    ra, rb = _PRECISION_SORT[a.precision], _PRECISION_SORT[b.precision]
    if ra != rb:
        return a if ra > rb else b
    return a if a.sort_key() <= b.sort_key() else b


def _better_title(a: str, b: str) -> str:
    if len(a) != len(b):
        return a if len(a) > len(b) else b
    return min(a, b)


def merge_resources(a: BibliographicResource,
                    b: BibliographicResource) -> BibliographicResource:
    """Merge two records of the same work into one canonical record.

    The inputs must share an identifier. Identifier, role, reference and
    manifestation lists are unioned and canonically sorted; the more
    precise date and the longer title win. Ties break toward the earlier
    date and the lexicographically smaller title, so the result does not
    depend on argument order.
    """
    shared = {(i.scheme, i.value) for i in a.identifiers} & \
             {(i.scheme, i.value) for i in b.identifiers}
    if not shared:
        raise NoSharedIdentifier(
            f"resources {a.id} and {b.id} share no identifier"
        )
    primary, secondary = (a, b) if a.id <= b.id else (b, a)
    merged_id = primary.id

    identifiers = sorted(set(a.identifiers) | set(b.identifiers),
                         key=lambda i: (i.scheme.value, i.value))

    roles: dict[tuple, RoleInTime] = {}
    for r in a.roles + b.roles:
        moved = dataclasses.replace(r, resource_id=merged_id)
        roles[(moved.role, moved.order, moved.agent)] = moved
    merged_roles = sorted(roles.values(),
                          key=lambda r: (r.role.value, r.order, r.agent.name))

    refs: dict[tuple, BibliographicReference] = {}
    for ref in a.references + b.references:
        key = (ref.raw_text, ref.resolved_target_id)
        kept = refs.get(key)
        if kept is None or ref.id < kept.id:
            refs[key] = dataclasses.replace(ref, containing_resource_id=merged_id)
    merged_refs = sorted(refs.values(), key=lambda r: (r.id, r.raw_text))

    manifestations = sorted(set(a.manifestations) | set(b.manifestations),
                            key=lambda m: (m.format, m.pages or ""))

    return BibliographicResource(
        id=merged_id,
        identifiers=identifiers,
        title=_better_title(a.title, b.title),
        pub_date=_better_date(a.pub_date, b.pub_date),
        venue=primary.venue or secondary.venue,
        roles=merged_roles,
        references=merged_refs,
        manifestations=manifestations,
    )
