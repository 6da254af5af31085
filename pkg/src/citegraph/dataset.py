"""One handle on a citation index: store, provenance log, codec, IRI scheme.

The request handlers and the command line both go through this facade so a
citation row or a metadata row means the same thing everywhere.
"""

from __future__ import annotations

from pathlib import Path

from citegraph import vocab
from citegraph.ingest import (CSV_HEADER, IngestReport, export_citations_csv,
                              ingest_batch, parse_citation_csv,
                              parse_crossref_dump)
from citegraph.mapping import IriMinter, load_citation, load_resource
from citegraph.model import BibliographicResource, Citation, Identifier, Role, Scheme
from citegraph.ntriples import parse_nquads, serialize_nquads
from citegraph.oci import SupplierRegistry
from citegraph.provenance import ProvenanceLog
from citegraph.store import DEFAULT_GRAPH, QuadStore
from citegraph.terms import Iri, Quad

CITATION_COLUMNS = tuple(CSV_HEADER)
METADATA_COLUMNS = ("doi", "title", "date", "venue", "issn", "author",
                    "citation_count", "reference_count")
SEARCH_COLUMNS = ("match",) + METADATA_COLUMNS

# segments whose subjects always belong to the entity linking to them
_OWNED_SEGMENTS = frozenset({"id", "ar", "ra", "be", "re", "de", "rp", "an"})


class Dataset:
    """A quad store plus the machinery to read and grow it consistently."""

    def __init__(self, store: QuadStore | None = None,
                 registry: SupplierRegistry | None = None,
                 minter: IriMinter | None = None):
        self.store = store if store is not None else QuadStore()
        self.registry = registry or SupplierRegistry()
        self.minter = minter or IriMinter()
        self.provenance = ProvenanceLog(self.store, self.minter)

    # --- loading and persistence ---------------------------------------------

    def ingest_works(self, text, source_label: str, agent: str = "loader",
                     time=None) -> IngestReport:
        records, errors = parse_crossref_dump(text)
        return ingest_batch(records, self.store, self.provenance, source_label,
                            agent=agent, registry=self.registry,
                            minter=self.minter, time=time, errors=errors)

    def ingest_csv(self, text, source_label: str, agent: str = "loader",
                   time=None) -> IngestReport:
        rows, errors = parse_citation_csv(text)
        return ingest_batch(rows, self.store, self.provenance, source_label,
                            agent=agent, registry=self.registry,
                            minter=self.minter, time=time, errors=errors)

    def export_csv(self) -> str:
        return export_citations_csv(self.store, self.minter)

    def to_nquads(self) -> str:
        """Current state plus the provenance graphs recorded this session."""
        return serialize_nquads(self.store.quads() + self.provenance.prov_quads())

    def save(self, path) -> None:
        Path(path).write_text(self.to_nquads(), encoding="utf-8")

    @classmethod
    def load(cls, path, registry: SupplierRegistry | None = None,
             minter: IriMinter | None = None) -> "Dataset":
        ds = cls(registry=registry, minter=minter)
        ds.store.insert_many(parse_nquads(Path(path).read_text(encoding="utf-8")))
        return ds

    # --- citations ------------------------------------------------------------

    def citations_incoming(self, doi: str) -> list[Citation]:
        return self._citations_by_side(vocab.HAS_CITED_ENTITY, doi)

    def citations_outgoing(self, doi: str) -> list[Citation]:
        return self._citations_by_side(vocab.HAS_CITING_ENTITY, doi)

    def _citations_by_side(self, predicate: Iri, doi: str) -> list[Citation]:
        side = self.minter.side_iri(Identifier(Scheme.DOI, doi))
        found = [self._citation_at(q.subject)
                 for q in self.store.match_pattern(p=predicate, o=side,
                                                   g=DEFAULT_GRAPH)]
        found.sort(key=lambda c: c.oci.canonical_text)
        return found

    def citation_by_oci(self, text: str) -> Citation | None:
        """The stored citation for an OCI, or None; malformed text raises."""
        oci = self.registry.parse_oci(text)
        iri = self.minter.citation(oci)
        if not self._has_type(iri, vocab.CITATION):
            return None
        return self._citation_at(iri)

    def _citation_at(self, iri: Iri) -> Citation:
        quads = self.store.match_pattern(s=iri, g=DEFAULT_GRAPH)
        return load_citation(quads, iri, registry=self.registry,
                             minter=self.minter)

    def citation_row(self, c: Citation) -> dict[str, str]:
        """The citation as delimited-text fields; matches the CSV dump."""
        return {
            "oci": c.oci.canonical_text,
            "citing": c.citing_id.value,
            "cited": c.cited_id.value,
            "creation": str(c.creation) if c.creation else "",
            "timespan": str(c.timespan) if c.timespan else "",
            "journal_sc": "yes" if c.journal_sc else "no",
            "author_sc": "yes" if c.author_sc else "no",
        }

    # --- resources ------------------------------------------------------------

    def resource_iri_by_identifier(self, ident: Identifier) -> Iri | None:
        target = self.minter.identifier(ident)
        for q in self.store.match_pattern(p=vocab.HAS_IDENTIFIER, o=target,
                                          g=DEFAULT_GRAPH):
            if self._has_type(q.subject, vocab.EXPRESSION):
                return q.subject
        return None

    def resource_at(self, iri: Iri) -> BibliographicResource:
        return load_resource(self.entity_closure(iri), iri, minter=self.minter)

    def resource_by_doi(self, doi: str) -> BibliographicResource | None:
        iri = self.resource_iri_by_identifier(Identifier(Scheme.DOI, doi))
        return self.resource_at(iri) if iri is not None else None

    def resource_row(self, iri: Iri) -> dict[str, str]:
        resource = self.resource_at(iri)
        doi = resource.identifier(Scheme.DOI)
        return self.row_for_resource(resource, doi.value if doi else "")

    def metadata_row(self, doi: str) -> dict[str, str] | None:
        """Row for a locally known DOI, or None when the index lacks it."""
        resource = self.resource_by_doi(doi)
        if resource is None:
            return None
        return self.row_for_resource(resource, doi)

    def row_for_resource(self, resource: BibliographicResource,
                         doi: str) -> dict[str, str]:
        authors = [r.agent.name or "" for r in
                   sorted((r for r in resource.roles if r.role is Role.AUTHOR),
                          key=lambda r: r.order)]
        return {
            "doi": doi,
            "title": resource.title or "",
            "date": str(resource.pub_date) if resource.pub_date else "",
            "venue": (resource.venue.title or "") if resource.venue else "",
            "issn": "; ".join(sorted(resource.issns())),
            "author": "; ".join(a for a in authors if a),
            "citation_count": str(len(self.citations_incoming(doi))) if doi else "0",
            "reference_count": str(len(self.citations_outgoing(doi))) if doi else "0",
        }

    # --- search primitives ------------------------------------------------------

    def resources_with_title_matching(self, needle: str) -> list[Iri]:
        needle = needle.lower()
        return [q.subject
                for q in self.store.match_pattern(p=vocab.TITLE, g=DEFAULT_GRAPH)
                if needle in q.object.lexical.lower()
                and self._has_type(q.subject, vocab.EXPRESSION)]

    def resources_with_author_matching(self, needle: str) -> list[Iri]:
        needle = needle.lower()
        out: list[Iri] = []
        for q in self.store.match_pattern(p=vocab.NAME, g=DEFAULT_GRAPH):
            if needle in q.object.lexical.lower():
                out.extend(self._resources_of_agent(q.subject))
        return _unique(out)

    def resources_with_identifier(self, ident: Identifier) -> list[Iri]:
        target = self.minter.identifier(ident)
        out: list[Iri] = []
        for q in self.store.match_pattern(p=vocab.HAS_IDENTIFIER, o=target,
                                          g=DEFAULT_GRAPH):
            if self._has_type(q.subject, vocab.EXPRESSION):
                out.append(q.subject)
            else:
                # agent-held identifier; surface the works the agent took part in
                out.extend(self._resources_of_agent(q.subject))
        return _unique(out)

    def _resources_of_agent(self, agent: Iri) -> list[Iri]:
        out = []
        for role_q in self.store.match_pattern(p=vocab.IS_HELD_BY, o=agent,
                                               g=DEFAULT_GRAPH):
            for res_q in self.store.match_pattern(
                    p=vocab.IS_DOCUMENT_CONTEXT_FOR, o=role_q.subject,
                    g=DEFAULT_GRAPH):
                out.append(res_q.subject)
        return out

    # --- low-level helpers -------------------------------------------------------

    def _has_type(self, iri: Iri, cls: Iri) -> bool:
        return bool(self.store.match_pattern(s=iri, p=vocab.RDF_TYPE, o=cls,
                                             g=DEFAULT_GRAPH))

    def entity_closure(self, root: Iri) -> list[Quad]:
        """Quads of an entity and everything it owns, venue chain included."""
        seen = {root}
        queue = [root]
        out: list[Quad] = []
        while queue:
            subject = queue.pop()
            for q in self.store.match_pattern(s=subject, g=DEFAULT_GRAPH):
                out.append(q)
                if self._expands(q.predicate, q.object) and q.object not in seen:
                    seen.add(q.object)
                    queue.append(q.object)
        return out

    def _expands(self, predicate: Iri, obj) -> bool:
        if not isinstance(obj, Iri) or not obj.value.startswith(self.minter.base):
            return False
        segment = obj.value[len(self.minter.base):].split("/", 1)[0]
        if segment in _OWNED_SEGMENTS:
            return True
        if segment == "br":
            # follow the venue chain but never walk into cited works
            return predicate == vocab.PART_OF
        if segment == "ci":
            return predicate == vocab.HAS_BODY
        return False

    def stats(self) -> dict[str, int]:
        counts = {"quads": len(self.store)}
        for key, cls in (("resources", vocab.EXPRESSION),
                         ("citations", vocab.CITATION),
                         ("agents", vocab.AGENT),
                         ("references", vocab.BIBLIOGRAPHIC_REFERENCE),
                         ("identifiers", vocab.IDENTIFIER)):
            counts[key] = len(self.store.match_pattern(
                p=vocab.RDF_TYPE, o=cls, g=DEFAULT_GRAPH))
        return counts


def _unique(iris: list[Iri]) -> list[Iri]:
    seen: set[Iri] = set()
    out = []
    for iri in iris:
        if iri not in seen:
            seen.add(iri)
            out.append(iri)
    return out
