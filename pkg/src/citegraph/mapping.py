"""Entity <-> quad mapping over the fixed vocabulary.

Every model type maps to a deterministic quad set and loads back to an
equal value. Entities with internal ids mint IRIs from them (br/, ra/,
be/, ar/); value-like parts without ids (identifiers, manifestations,
pointers and their context/annotation) get content-derived IRIs, so
equal values share an IRI. Citation sides carry no local record: a DOI
side is its doi.org IRI, a corpus side a br/ IRI.

Loaders sort the list-valued fields the same way merge_resources does
(identifiers by scheme and value, roles by role/order/name, references
by id, manifestations by format/pages); pointers keep their written
position. A record in that ordering is the canonical form the round
trip preserves.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from urllib.parse import quote, unquote

from citegraph import vocab
from citegraph.dates import format_duration, parse_duration
from citegraph.model import (
    Agent,
    Annotation,
    BibliographicReference,
    BibliographicResource,
    Citation,
    DiscourseElement,
    DiscourseKind,
    Identifier,
    InTextReferencePointer,
    Manifestation,
    Role,
    RoleInTime,
    Scheme,
)
from citegraph.oci import Oci, SupplierRegistry
from citegraph.terms import Iri, Literal, Quad, Term
from citegraph.vocab import date_literal, parse_date_literal, scheme_iri

DEFAULT_BASE = "https://w3id.org/oc/corpus/"
DOI_ORG = "https://doi.org/"
_URN_ID_HEAD = "urn:x-citegraph:id:"


def _digest(*parts: str) -> str:
    h = hashlib.sha1()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class IriMinter:
    """Mints entity IRIs under a configurable dataset base."""

    base: str = DEFAULT_BASE

    def resource(self, rid: int) -> Iri:
        return Iri(f"{self.base}br/{rid}")

    def agent(self, aid: int) -> Iri:
        return Iri(f"{self.base}ra/{aid}")

    def reference(self, bid: int) -> Iri:
        return Iri(f"{self.base}be/{bid}")

    def role(self, rit: RoleInTime) -> Iri:
        return Iri(f"{self.base}ar/{rit.resource_id}-{rit.role.value}-{rit.order}")

    def identifier(self, ident: Identifier) -> Iri:
        return Iri(f"{self.base}id/{ident.scheme.value}/{quote(ident.value, safe='')}")

    def manifestation(self, m: Manifestation) -> Iri:
        return Iri(f"{self.base}re/h{_digest(m.format, m.pages or '')}")

    def pointer(self, ptr: InTextReferencePointer) -> Iri:
        return Iri(f"{self.base}rp/h{self._pointer_digest(ptr)}")

    def discourse(self, de: DiscourseElement) -> Iri:
        return Iri(f"{self.base}de/h{_digest(de.kind.value, de.text)}")

    def annotation(self, ptr: InTextReferencePointer) -> Iri:
        return Iri(f"{self.base}an/h{self._pointer_digest(ptr)}")

    def citation(self, oci: Oci) -> Iri:
        return Iri(f"{self.base}ci/{oci.numerals}")

    def prov_graph(self, entity: Iri) -> Iri:
        return Iri(entity.value + "/prov")

    def snapshot(self, entity: Iri, seq: int) -> Iri:
        return Iri(f"{entity.value}/prov/se/{seq}")

    @staticmethod
    def _pointer_digest(ptr: InTextReferencePointer) -> str:
        return _digest(ptr.marker_text, ptr.context.kind.value, ptr.context.text)

    def side_iri(self, ident: Identifier) -> Iri:
        """IRI standing for a citation side known only by its identifier."""
        if ident.scheme == Scheme.DOI:
            # quoted so the IRI survives N-Triples (DOIs may hold <>" etc.)
            return Iri(DOI_ORG + quote(ident.value, safe="/"))
        if ident.scheme == Scheme.OCC:
            return Iri(f"{self.base}br/{ident.value}")
        return Iri(f"{_URN_ID_HEAD}{ident.scheme.value}:{quote(ident.value, safe='')}")

    def side_identifier(self, iri: Iri) -> Identifier:
        v = iri.value
        if v.startswith(DOI_ORG):
            return Identifier(Scheme.DOI, unquote(v[len(DOI_ORG):]))
        if v.startswith(f"{self.base}br/"):
            return Identifier(Scheme.OCC, v[len(self.base) + 3:])
        if v.startswith(_URN_ID_HEAD):
            scheme, _, rest = v[len(_URN_ID_HEAD):].partition(":")
            return Identifier(_scheme(scheme), unquote(rest))
        raise ValueError(f"not a citation-side IRI: {v}")


def _scheme(text: str) -> Scheme:
    try:
        return Scheme(text)
    except ValueError:
        return Scheme.OTHER


# --- entity -> quads ---------------------------------------------------------

def _identifier_quads(ident: Identifier, minter: IriMinter, out: list[Quad]) -> Iri:
    iri = minter.identifier(ident)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.IDENTIFIER))
    out.append(Quad(iri, vocab.USES_IDENTIFIER_SCHEME, scheme_iri(ident.scheme.value)))
    out.append(Quad(iri, vocab.HAS_LITERAL_VALUE, Literal(ident.value)))
    return iri


def _agent_quads(agent: Agent, minter: IriMinter, out: list[Quad]) -> Iri:
    iri = minter.agent(agent.id)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.AGENT))
    if agent.name:
        out.append(Quad(iri, vocab.NAME, Literal(agent.name)))
    for ident in agent.identifiers:
        out.append(Quad(iri, vocab.HAS_IDENTIFIER, _identifier_quads(ident, minter, out)))
    return iri


def _manifestation_quads(m: Manifestation, minter: IriMinter, out: list[Quad]) -> Iri:
    iri = minter.manifestation(m)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.MANIFESTATION))
    out.append(Quad(iri, vocab.FORMAT, Literal(m.format)))
    if m.pages is not None:
        out.append(Quad(iri, vocab.PAGE_RANGE, Literal(m.pages)))
    return iri


def _role_quads(rit: RoleInTime, minter: IriMinter, out: list[Quad]) -> Iri:
    iri = minter.role(rit)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.ROLE_IN_TIME))
    out.append(Quad(iri, vocab.WITH_ROLE, Iri(vocab.PRO + rit.role.value)))
    out.append(Quad(iri, vocab.POSITION,
                    Literal(str(rit.order), datatype=vocab.XSD_INTEGER)))
    out.append(Quad(iri, vocab.IS_HELD_BY, _agent_quads(rit.agent, minter, out)))
    return iri


def _discourse_quads(de: DiscourseElement, minter: IriMinter, out: list[Quad]) -> Iri:
    iri = minter.discourse(de)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.DISCOURSE_ELEMENT))
    out.append(Quad(iri, vocab.KIND, Literal(de.kind.value)))
    out.append(Quad(iri, vocab.HAS_CONTENT, Literal(de.text)))
    return iri


def _pointer_quads(ptr: InTextReferencePointer, position: int,
                   minter: IriMinter, out: list[Quad]) -> Iri:
    iri = minter.pointer(ptr)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.IN_TEXT_REFERENCE_POINTER))
    out.append(Quad(iri, vocab.HAS_CONTENT, Literal(ptr.marker_text)))
    out.append(Quad(iri, vocab.POSITION,
                    Literal(str(position), datatype=vocab.XSD_INTEGER)))
    out.append(Quad(_discourse_quads(ptr.context, minter, out),
                    vocab.IS_CONTEXT_OF, iri))
    if ptr.annotation is not None:
        _annotation_quads(ptr.annotation, iri, minter, out)
    return iri


def _annotation_quads(note: Annotation, pointer_iri: Iri,
                      minter: IriMinter, out: list[Quad]) -> Iri:
    iri = minter.annotation(note.target_pointer)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.ANNOTATION))
    out.append(Quad(iri, vocab.HAS_TARGET, pointer_iri))
    out.append(Quad(iri, vocab.HAS_BODY, _citation_quads(note.citation, minter, out)))
    if note.function is not None:
        out.append(Quad(iri, vocab.DESCRIPTION, Literal(note.function)))
    return iri


def _reference_quads(ref: BibliographicReference, minter: IriMinter,
                     out: list[Quad]) -> Iri:
    iri = minter.reference(ref.id)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.BIBLIOGRAPHIC_REFERENCE))
    out.append(Quad(iri, vocab.HAS_CONTENT, Literal(ref.raw_text)))
    if ref.resolved_target_id is not None:
        out.append(Quad(iri, vocab.REFERENCES, minter.resource(ref.resolved_target_id)))
    for position, ptr in enumerate(ref.pointers, start=1):
        out.append(Quad(_pointer_quads(ptr, position, minter, out),
                        vocab.DENOTES, iri))
    return iri


def _resource_quads(res: BibliographicResource, minter: IriMinter,
                    out: list[Quad]) -> Iri:
    iri = minter.resource(res.id)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.EXPRESSION))
    if res.title:
        out.append(Quad(iri, vocab.TITLE, Literal(res.title)))
    if res.pub_date is not None:
        out.append(Quad(iri, vocab.PUBLICATION_DATE, date_literal(res.pub_date)))
    for ident in res.identifiers:
        out.append(Quad(iri, vocab.HAS_IDENTIFIER, _identifier_quads(ident, minter, out)))
    if res.venue is not None:
        out.append(Quad(iri, vocab.PART_OF, _resource_quads(res.venue, minter, out)))
    for rit in res.roles:
        out.append(Quad(iri, vocab.IS_DOCUMENT_CONTEXT_FOR, _role_quads(rit, minter, out)))
    for ref in res.references:
        out.append(Quad(iri, vocab.PART, _reference_quads(ref, minter, out)))
    for m in res.manifestations:
        out.append(Quad(iri, vocab.EMBODIMENT, _manifestation_quads(m, minter, out)))
    return iri


def _citation_quads(cite: Citation, minter: IriMinter, out: list[Quad]) -> Iri:
    iri = minter.citation(cite.oci)
    citing = minter.side_iri(cite.citing_id)
    cited = minter.side_iri(cite.cited_id)
    out.append(Quad(iri, vocab.RDF_TYPE, vocab.CITATION))
    if cite.author_sc:
        out.append(Quad(iri, vocab.RDF_TYPE, vocab.AUTHOR_SELF_CITATION))
    if cite.journal_sc:
        out.append(Quad(iri, vocab.RDF_TYPE, vocab.JOURNAL_SELF_CITATION))
    out.append(Quad(iri, vocab.HAS_CITING_ENTITY, citing))
    out.append(Quad(iri, vocab.HAS_CITED_ENTITY, cited))
    out.append(Quad(citing, vocab.CITES, cited))
    if cite.creation is not None:
        out.append(Quad(iri, vocab.HAS_CITATION_CREATION_DATE, date_literal(cite.creation)))
    if cite.timespan is not None:
        out.append(Quad(iri, vocab.HAS_CITATION_TIME_SPAN,
                        Literal(format_duration(cite.timespan), datatype=vocab.XSD_DURATION)))
    oci_id = Identifier(Scheme.OCI, cite.oci.canonical_text)
    out.append(Quad(iri, vocab.HAS_IDENTIFIER, _identifier_quads(oci_id, minter, out)))
    return iri


_DISPATCH = {
    Identifier: _identifier_quads,
    Agent: _agent_quads,
    Manifestation: _manifestation_quads,
    RoleInTime: _role_quads,
    DiscourseElement: _discourse_quads,
    BibliographicReference: _reference_quads,
    BibliographicResource: _resource_quads,
    Citation: _citation_quads,
}


def entity_to_quads(entity, minter: IriMinter | None = None) -> list[Quad]:
    """Deterministic quad rendering of any model entity (plus its parts)."""
    minter = minter or IriMinter()
    out: list[Quad] = []
    kind = type(entity)
    if kind is InTextReferencePointer:
        _pointer_quads(entity, 1, minter, out)
    elif kind is Annotation:
        iri = _pointer_quads(entity.target_pointer, 1, minter, out)
        if entity.target_pointer.annotation is not entity:
            _annotation_quads(entity, iri, minter, out)
    else:
        fn = _DISPATCH.get(kind)
        if fn is None:
            raise TypeError(f"no quad mapping for {kind.__name__}")
        fn(entity, minter, out)
    seen = set()
    unique = []
    for q in out:
        if q not in seen:
            seen.add(q)
            unique.append(q)
    return unique


# --- quads -> entity ---------------------------------------------------------

class _View:
    """Subject-keyed view over a quad list for the loaders."""

    def __init__(self, quads, minter: IriMinter):
        self.minter = minter
        self.by_subject: dict[Term, dict[Term, list[Term]]] = {}
        for q in quads:
            self.by_subject.setdefault(q.subject, {}).setdefault(q.predicate, []).append(q.object)

    def objects(self, subject: Term, predicate: Term) -> list[Term]:
        return self.by_subject.get(subject, {}).get(predicate, [])

    def one(self, subject: Term, predicate: Term) -> Term | None:
        objs = self.objects(subject, predicate)
        if len(objs) > 1:
            raise ValueError(f"{predicate.value} is single-valued, "
                             f"found {len(objs)} on {subject}")
        return objs[0] if objs else None

    def text(self, subject: Term, predicate: Term) -> str | None:
        obj = self.one(subject, predicate)
        if obj is None:
            return None
        if not isinstance(obj, Literal):
            raise ValueError(f"expected a literal for {predicate.value}")
        return obj.lexical

    def types(self, subject: Term) -> set[Iri]:
        return set(self.objects(subject, vocab.RDF_TYPE))

    def subjects_of_type(self, cls: Iri) -> list[Term]:
        return [s for s in self.by_subject if cls in self.types(s)]

    def int_suffix(self, iri: Iri, segment: str) -> int:
        head = f"{self.minter.base}{segment}/"
        if not iri.value.startswith(head):
            raise ValueError(f"expected a {segment}/ IRI, got {iri.value}")
        return int(iri.value[len(head):])


def _load_identifier(view: _View, iri: Iri) -> Identifier:
    scheme_term = view.one(iri, vocab.USES_IDENTIFIER_SCHEME)
    value = view.text(iri, vocab.HAS_LITERAL_VALUE)
    if scheme_term is None or value is None:
        raise ValueError(f"incomplete identifier record at {iri.value}")
    return Identifier(_scheme(scheme_term.value[len(vocab.DATACITE):]), value)


def _load_agent(view: _View, iri: Iri) -> Agent:
    idents = sorted((_load_identifier(view, i) for i in view.objects(iri, vocab.HAS_IDENTIFIER)),
                    key=lambda i: (i.scheme.value, i.value))
    return Agent(id=view.int_suffix(iri, "ra"),
                 name=view.text(iri, vocab.NAME) or "",
                 identifiers=tuple(idents))


def _load_manifestation(view: _View, iri: Iri) -> Manifestation:
    fmt = view.text(iri, vocab.FORMAT)
    if fmt is None:
        raise ValueError(f"manifestation without a format at {iri.value}")
    return Manifestation(format=fmt, pages=view.text(iri, vocab.PAGE_RANGE))


def _load_role(view: _View, iri: Iri, resource_id: int) -> RoleInTime:
    role_term = view.one(iri, vocab.WITH_ROLE)
    order = view.text(iri, vocab.POSITION)
    holder = view.one(iri, vocab.IS_HELD_BY)
    if role_term is None or order is None or holder is None:
        raise ValueError(f"incomplete role record at {iri.value}")
    return RoleInTime(agent=_load_agent(view, holder),
                      role=Role(role_term.value[len(vocab.PRO):]),
                      resource_id=resource_id,
                      order=int(order))


def _load_discourse(view: _View, iri: Iri) -> DiscourseElement:
    return DiscourseElement(kind=DiscourseKind(view.text(iri, vocab.KIND)),
                            text=view.text(iri, vocab.HAS_CONTENT) or "")


def _load_pointer(view: _View, iri: Iri, registry: SupplierRegistry) -> InTextReferencePointer:
    context_subjects = [s for s, preds in view.by_subject.items()
                        if iri in preds.get(vocab.IS_CONTEXT_OF, [])]
    if len(context_subjects) != 1:
        raise ValueError(f"pointer {iri.value} needs exactly one context")
    ptr = InTextReferencePointer(
        marker_text=view.text(iri, vocab.HAS_CONTENT) or "",
        context=_load_discourse(view, context_subjects[0]),
    )
    for an in view.subjects_of_type(vocab.ANNOTATION):
        if view.one(an, vocab.HAS_TARGET) == iri:
            body = view.one(an, vocab.HAS_BODY)
            if body is None:
                raise ValueError(f"annotation {an} has no body")
            note = Annotation(target_pointer=ptr,
                              citation=load_citation(view, body, registry),
                              function=view.text(an, vocab.DESCRIPTION))
            ptr.annotation = note
    return ptr


def _pointer_position(view: _View, iri: Iri) -> int:
    return int(view.text(iri, vocab.POSITION) or 0)


def _load_reference(view: _View, iri: Iri, containing_id: int,
                    registry: SupplierRegistry) -> BibliographicReference:
    target = view.one(iri, vocab.REFERENCES)
    pointer_iris = [s for s, preds in view.by_subject.items()
                    if iri in preds.get(vocab.DENOTES, [])]
    pointer_iris.sort(key=lambda p: _pointer_position(view, p))
    return BibliographicReference(
        id=view.int_suffix(iri, "be"),
        containing_resource_id=containing_id,
        raw_text=view.text(iri, vocab.HAS_CONTENT) or "",
        resolved_target_id=None if target is None else view.int_suffix(target, "br"),
        pointers=[_load_pointer(view, p, registry) for p in pointer_iris],
    )


def _load_resource(view: _View, iri: Iri, registry: SupplierRegistry,
                   seen: frozenset) -> BibliographicResource:
    rid = view.int_suffix(iri, "br")
    if rid in seen:
        raise ValueError(f"venue chain loops through br/{rid}")
    res = BibliographicResource(id=rid, title=view.text(iri, vocab.TITLE) or "")
    date = view.one(iri, vocab.PUBLICATION_DATE)
    if date is not None:
        res.pub_date = parse_date_literal(date)
    res.identifiers = sorted(
        (_load_identifier(view, i) for i in view.objects(iri, vocab.HAS_IDENTIFIER)),
        key=lambda i: (i.scheme.value, i.value))
    venue = view.one(iri, vocab.PART_OF)
    if venue is not None:
        res.venue = _load_resource(view, venue, registry, seen | {rid})
    res.roles = sorted(
        (_load_role(view, r, rid) for r in view.objects(iri, vocab.IS_DOCUMENT_CONTEXT_FOR)),
        key=lambda r: (r.role.value, r.order, r.agent.name))
    res.references = sorted(
        (_load_reference(view, b, rid, registry) for b in view.objects(iri, vocab.PART)),
        key=lambda b: b.id)
    res.manifestations = sorted(
        (_load_manifestation(view, m) for m in view.objects(iri, vocab.EMBODIMENT)),
        key=lambda m: (m.format, m.pages or ""))
    return res


def load_citation(quads_or_view, iri: Iri | None = None,
                  registry: SupplierRegistry | None = None,
                  minter: IriMinter | None = None) -> Citation:
    """Rebuild a Citation from its quads (the inverse of entity_to_quads)."""
    registry = registry or SupplierRegistry()
    view = quads_or_view if isinstance(quads_or_view, _View) \
        else _View(quads_or_view, minter or IriMinter())
    if iri is None:
        candidates = view.subjects_of_type(vocab.CITATION)
        if len(candidates) != 1:
            raise ValueError(f"expected one citation, found {len(candidates)}")
        iri = candidates[0]
    head = f"{view.minter.base}ci/"
    if not iri.value.startswith(head):
        raise ValueError(f"not a citation IRI: {iri.value}")
    oci = registry.parse_oci("oci:" + iri.value[len(head):])
    citing = view.one(iri, vocab.HAS_CITING_ENTITY)
    cited = view.one(iri, vocab.HAS_CITED_ENTITY)
    if citing is None or cited is None:
        raise ValueError(f"citation {iri.value} is missing a side")
    creation = view.one(iri, vocab.HAS_CITATION_CREATION_DATE)
    timespan = view.text(iri, vocab.HAS_CITATION_TIME_SPAN)
    types = view.types(iri)
    return Citation(
        oci=oci,
        citing_id=view.minter.side_identifier(citing),
        cited_id=view.minter.side_identifier(cited),
        creation=None if creation is None else parse_date_literal(creation),
        timespan=None if timespan is None else parse_duration(timespan),
        journal_sc=vocab.JOURNAL_SELF_CITATION in types,
        author_sc=vocab.AUTHOR_SELF_CITATION in types,
    )


def load_resource(quads, iri: Iri | None = None,
                  registry: SupplierRegistry | None = None,
                  minter: IriMinter | None = None) -> BibliographicResource:
    """Rebuild a BibliographicResource, following its part/venue closure."""
    minter = minter or IriMinter()
    view = _View(quads, minter)
    if iri is None:
        roots = [s for s in view.subjects_of_type(vocab.EXPRESSION)
                 if not any(s in preds.get(vocab.PART_OF, [])
                            for preds in view.by_subject.values())]
        if len(roots) != 1:
            raise ValueError(f"expected one root resource, found {len(roots)}")
        iri = roots[0]
    return _load_resource(view, iri, registry or SupplierRegistry(), frozenset())


def load_agent(quads, iri: Iri, minter: IriMinter | None = None) -> Agent:
    return _load_agent(_View(quads, minter or IriMinter()), iri)


def load_identifier(quads, iri: Iri, minter: IriMinter | None = None) -> Identifier:
    return _load_identifier(_View(quads, minter or IriMinter()), iri)
