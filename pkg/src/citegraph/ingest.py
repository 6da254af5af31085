"""Loading the index: works dumps in, citation CSV in and out.

Two input families. A works dump (JSON array or JSON-lines of
Crossref-style objects) carries full metadata, so it produces resource
rows, reference entities, and derived citations. A citation CSV carries
only the citation records themselves and deliberately creates no
resource rows; the index stays lean and everything needed to rebuild the
network is inside the OCIs.

Identity rules during a batch load: resources are keyed by identifier
(an already-indexed DOI or ISSN wins and the incoming row just counts as
merged; no field-level update happens), citations are keyed by OCI.
Re-ingesting a batch therefore only moves the duplicate counters.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from citegraph import vocab
from citegraph.dates import PartialDate, parse_duration
from citegraph.errors import (
    CitegraphError,
    HeaderMismatch,
    MalformedDate,
    NoEncodableIdentifier,
    OciMismatch,
)
from citegraph.mapping import IriMinter, entity_to_quads
from citegraph.model import (
    Agent,
    BibliographicReference,
    BibliographicResource,
    Citation,
    Identifier,
    Role,
    Scheme,
    make_citation,
    merge_resources,
    normalize_doi,
)
from citegraph.oci import SupplierRegistry
from citegraph.provenance import ProvenanceLog
from citegraph.store import DEFAULT_GRAPH, QuadStore
from citegraph.terms import Iri, Literal

CSV_HEADER = ["oci", "citing", "cited", "creation", "timespan",
              "journal_sc", "author_sc"]
CSV_HEADER_MINIMAL = ["citing_id", "cited_id"]


@dataclass(frozen=True)
class WorkAuthor:
    family: str
    given: str = ""
    orcid: str | None = None


@dataclass(frozen=True)
class WorkReference:
    doi: str | None = None
    raw_text: str = ""


@dataclass(frozen=True)
class CrossrefWorkRecord:
    doi: str
    title: str = ""
    issued: PartialDate | None = None
    container_title: str = ""
    issns: tuple[str, ...] = ()
    authors: tuple[WorkAuthor, ...] = ()
    references: tuple[WorkReference, ...] = ()


@dataclass(frozen=True)
class CitationCsvRow:
    oci: str
    citing: str
    cited: str
    creation: str = ""
    timespan: str = ""
    journal_sc: bool = False
    author_sc: bool = False

    def to_citation(self, registry: SupplierRegistry) -> Citation:
        return Citation(
            oci=registry.parse_oci(self.oci),
            citing_id=Identifier(Scheme.DOI, self.citing),
            cited_id=Identifier(Scheme.DOI, self.cited),
            creation=PartialDate.parse(self.creation) if self.creation else None,
            timespan=parse_duration(self.timespan) if self.timespan else None,
            journal_sc=self.journal_sc,
            author_sc=self.author_sc,
        )


@dataclass
class IngestReport:
    records_read: int = 0
    resources_created: int = 0
    resources_merged: int = 0
    citations_created: int = 0
    citations_duplicate: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)


# --- works dumps -------------------------------------------------------------

def _first(value) -> str:
    if isinstance(value, list):
        return str(value[0]) if value else ""
    return str(value) if value is not None else ""


def _work_from_json(obj) -> CrossrefWorkRecord:
    if not isinstance(obj, dict):
        raise ValueError("work is not a JSON object")
    doi = normalize_doi(str(obj.get("DOI") or ""))
    if not doi:
        raise ValueError("work has no DOI")
    issued = None
    parts = (obj.get("issued") or {}).get("date-parts") or []
    if parts and parts[0]:
        issued = PartialDate.from_parts(parts[0])
    authors = []
    for a in obj.get("author") or []:
        family = str(a.get("family") or "").strip()
        given = str(a.get("given") or "").strip()
        if not family and not given:
            continue
        orcid = str(a["ORCID"]).strip() if a.get("ORCID") else None
        authors.append(WorkAuthor(family=family, given=given, orcid=orcid))
    references = []
    for r in obj.get("reference") or []:
        ref_doi = normalize_doi(str(r.get("DOI") or "")) or None
        references.append(WorkReference(doi=ref_doi,
                                        raw_text=str(r.get("unstructured") or "")))
    return CrossrefWorkRecord(
        doi=doi,
        title=_first(obj.get("title")),
        issued=issued,
        container_title=_first(obj.get("container-title")),
        issns=tuple(str(s).strip() for s in obj.get("ISSN") or [] if str(s).strip()),
        authors=tuple(authors),
        references=tuple(references),
    )


def parse_crossref_dump(source) -> tuple[list[CrossrefWorkRecord], list[tuple[int, str]]]:
    """Works from a JSON array or JSON-lines text; bad works become errors."""
    text = source.read() if hasattr(source, "read") else source
    records: list[CrossrefWorkRecord] = []
    errors: list[tuple[int, str]] = []
    if text.lstrip().startswith("["):
        try:
            objs = json.loads(text)
        except json.JSONDecodeError as exc:
            return [], [(exc.lineno, f"not valid JSON: {exc.msg}")]
        for n, obj in enumerate(objs, start=1):
            _collect_work(obj, n, records, errors)
    else:
        for n, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append((n, f"not valid JSON: {exc.msg}"))
                continue
            _collect_work(obj, n, records, errors)
    return records, errors


def _collect_work(obj, n, records, errors):
    try:
        records.append(_work_from_json(obj))
    except (ValueError, MalformedDate) as exc:
        errors.append((n, str(exc)))


@dataclass
class DerivedBatch:
    resources: list[BibliographicResource]
    by_doi: dict[str, BibliographicResource]
    citations: list[Citation]
    errors: list[tuple[int, str]]
    merged_in_batch: int = 0


class _IdCounters:
    def __init__(self, resource=1, reference=1, agent=1):
        self.resource = resource
        self.reference = reference
        self.agent = agent

    def next_resource(self) -> int:
        self.resource += 1
        return self.resource - 1

    def next_reference(self) -> int:
        self.reference += 1
        return self.reference - 1

    def next_agent(self) -> int:
        self.agent += 1
        return self.agent - 1


def derive_citations(records, registry: SupplierRegistry | None = None,
                     counters: _IdCounters | None = None) -> DerivedBatch:
    """Resources (merged by DOI) and citations for a batch of work records.

    Self-loop references stay as unresolved reference entities and the
    citation is suppressed; references without a DOI produce reference
    entities only. Every cited DOI that is not itself a work in the batch
    becomes an identifier-only resource.
    """
    registry = registry or SupplierRegistry()
    ids = counters or _IdCounters()
    by_doi: dict[str, BibliographicResource] = {}
    venues: dict[tuple, BibliographicResource] = {}
    merged = 0
    errors: list[tuple[int, str]] = []

    for rec in records:
        fresh = BibliographicResource(
            id=ids.next_resource(),
            identifiers=[Identifier(Scheme.DOI, rec.doi)],
            title=rec.title,
            pub_date=rec.issued,
        )
        if rec.container_title or rec.issns:
            key = (rec.container_title, frozenset(rec.issns))
            venue = venues.get(key)
            if venue is None:
                venue = BibliographicResource(
                    id=ids.next_resource(),
                    identifiers=sorted((Identifier(Scheme.ISSN, s) for s in set(rec.issns)),
                                       key=lambda i: i.value),
                    title=rec.container_title,
                )
                venues[key] = venue
            fresh.set_venue(venue)
        for k, author in enumerate(rec.authors, start=1):
            name = f"{author.given} {author.family}".strip()
            idents = ((Identifier(Scheme.ORCID, author.orcid),) if author.orcid else ())
            fresh.add_role(Agent(id=ids.next_agent(), name=name, identifiers=idents),
                           Role.AUTHOR, k)
        if rec.doi in by_doi:
            by_doi[rec.doi] = merge_resources(by_doi[rec.doi], fresh)
            merged += 1
        else:
            by_doi[rec.doi] = fresh

    citations: list[Citation] = []
    for n, rec in enumerate(records, start=1):
        work = by_doi[rec.doi]
        for ref in rec.references:
            target = None
            if ref.doi is not None and ref.doi != rec.doi:
                target = by_doi.get(ref.doi)
                if target is None:
                    target = BibliographicResource(
                        id=ids.next_resource(),
                        identifiers=[Identifier(Scheme.DOI, ref.doi)])
                    by_doi[ref.doi] = target
            work.references.append(BibliographicReference(
                id=ids.next_reference(),
                containing_resource_id=work.id,
                raw_text=ref.raw_text,
                resolved_target_id=None if target is None else target.id,
            ))
            if ref.doi is None:
                continue
            if ref.doi == rec.doi:
                errors.append((n, f"self-citation dropped: {rec.doi}"))
                continue
            try:
                citations.append(make_citation(work, target, registry))
            except NoEncodableIdentifier as exc:
                errors.append((n, str(exc)))

    resources = sorted(list(venues.values()) + list(by_doi.values()),
                       key=lambda r: r.id)
    return DerivedBatch(resources=resources, by_doi=by_doi, citations=citations,
                        errors=errors, merged_in_batch=merged)


# --- citation CSV ------------------------------------------------------------

def parse_citation_csv(source) -> tuple[list[CitationCsvRow], list[tuple[int, str]]]:
    """Rows from a 7-column or minimal 2-column citation CSV.

    The header must match one of the two supported column sets exactly.
    Row problems (bad flag, inconsistent oci, unparseable date) are
    collected per row, never fatal.
    """
    text = source.read() if hasattr(source, "read") else source
    registry = SupplierRegistry()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise HeaderMismatch("input is empty, expected a header row")
    if header == CSV_HEADER:
        minimal = False
    elif header == CSV_HEADER_MINIMAL:
        minimal = True
    else:
        raise HeaderMismatch(
            f"unsupported header {','.join(header)!r}; expected "
            f"{','.join(CSV_HEADER)!r} or {','.join(CSV_HEADER_MINIMAL)!r}")
    rows: list[CitationCsvRow] = []
    errors: list[tuple[int, str]] = []
    for cells in reader:
        line = reader.line_num
        if not cells:
            continue
        try:
            rows.append(_row_minimal(cells, registry) if minimal
                        else _row_full(cells, registry))
        except CitegraphError as exc:
            errors.append((line, str(exc)))
        except ValueError as exc:
            errors.append((line, str(exc)))
    return rows, errors


def _flag(cell: str) -> bool:
    value = cell.strip().lower()
    if value not in ("yes", "no"):
        raise ValueError(f"flag must be yes or no, got {cell!r}")
    return value == "yes"


def _row_full(cells: list[str], registry: SupplierRegistry) -> CitationCsvRow:
    if len(cells) != len(CSV_HEADER):
        raise ValueError(f"expected {len(CSV_HEADER)} columns, got {len(cells)}")
    oci_text, citing, cited, creation, timespan, j_flag, a_flag = cells
    citing = normalize_doi(citing)
    cited = normalize_doi(cited)
    if not citing or not cited:
        raise ValueError("citing and cited must be nonempty DOIs")
    claimed = registry.parse_oci(oci_text)
    minted = registry.build_oci(("020", citing), ("020", cited))
    if claimed.canonical_text != minted.canonical_text:
        raise OciMismatch(
            f"oci column says {claimed.canonical_text}, but citing/cited "
            f"encode to {minted.canonical_text}")
    creation = creation.strip()
    if creation:
        PartialDate.parse(creation)
    timespan = timespan.strip()
    if timespan:
        parse_duration(timespan)
    return CitationCsvRow(oci=minted.canonical_text, citing=citing, cited=cited,
                          creation=creation, timespan=timespan,
                          journal_sc=_flag(j_flag), author_sc=_flag(a_flag))


def _row_minimal(cells: list[str], registry: SupplierRegistry) -> CitationCsvRow:
    if len(cells) != 2:
        raise ValueError(f"expected 2 columns, got {len(cells)}")
    citing = normalize_doi(cells[0])
    cited = normalize_doi(cells[1])
    if not citing or not cited:
        raise ValueError("citing_id and cited_id must be nonempty DOIs")
    minted = registry.build_oci(("020", citing), ("020", cited))
    return CitationCsvRow(oci=minted.canonical_text, citing=citing, cited=cited)


# --- batch loading -----------------------------------------------------------

def _max_suffix(store: QuadStore, minter: IriMinter, cls: Iri, segment: str) -> int:
    head = f"{minter.base}{segment}/"
    best = 0
    for q in store.match_pattern(p=vocab.RDF_TYPE, o=cls, g=DEFAULT_GRAPH):
        value = q.subject.value
        if value.startswith(head) and value[len(head):].isdigit():
            best = max(best, int(value[len(head):]))
    return best


def _existing_resource_id(store: QuadStore, minter: IriMinter,
                          resource: BibliographicResource) -> int | None:
    """Store id of a row matching any of the resource's identifiers.

    Identifier-less venues fall back to an exact-title probe so that
    re-ingesting a batch cannot mint the same journal twice.
    """
    head = f"{minter.base}br/"
    probes = [(vocab.HAS_IDENTIFIER, minter.identifier(i))
              for i in resource.identifiers]
    if not probes and resource.title:
        probes = [(vocab.TITLE, Literal(resource.title))]
    for predicate, obj in probes:
        for q in store.match_pattern(p=predicate, o=obj, g=DEFAULT_GRAPH):
            value = q.subject.value
            if value.startswith(head) and value[len(head):].isdigit():
                return int(value[len(head):])
    return None


def _citation_known(store: QuadStore, minter: IriMinter, citation: Citation) -> bool:
    iri = minter.citation(citation.oci)
    return bool(store.match_pattern(s=iri, p=vocab.RDF_TYPE, o=vocab.CITATION,
                                    g=DEFAULT_GRAPH))


def ingest_batch(items, store: QuadStore, provenance: ProvenanceLog,
                 source_label: str, agent: str = "loader",
                 registry: SupplierRegistry | None = None,
                 minter: IriMinter | None = None,
                 time: datetime | None = None,
                 errors=()) -> IngestReport:
    """Load parsed works and CSV rows; one creation snapshot per new entity."""
    registry = registry or SupplierRegistry()
    minter = minter or IriMinter()
    now = time or datetime.now(timezone.utc)
    report = IngestReport(errors=list(errors))

    works = [i for i in items if isinstance(i, CrossrefWorkRecord)]
    rows = [i for i in items if isinstance(i, CitationCsvRow)]
    report.records_read = len(works) + len(rows)

    citations: list[Citation] = []
    if works:
        counters = _IdCounters(
            resource=_max_suffix(store, minter, vocab.EXPRESSION, "br") + 1,
            reference=_max_suffix(store, minter, vocab.BIBLIOGRAPHIC_REFERENCE, "be") + 1,
            agent=_max_suffix(store, minter, vocab.AGENT, "ra") + 1,
        )
        derived = derive_citations(works, registry, counters)
        report.errors.extend(derived.errors)
        report.resources_merged += derived.merged_in_batch
        # rows already in the store keep their ids; rewrite batch-local ids
        # so links from new rows land on the existing entities
        remap: dict[int, int] = {}
        to_write = []
        for resource in derived.resources:
            existing = _existing_resource_id(store, minter, resource)
            if existing is None:
                to_write.append(resource)
            else:
                remap[resource.id] = existing
                resource.id = existing
                report.resources_merged += 1
        for resource in to_write:
            if remap:
                resource.references = [
                    replace(ref, resolved_target_id=remap.get(
                        ref.resolved_target_id, ref.resolved_target_id))
                    for ref in resource.references]
            quads = set(entity_to_quads(resource, minter))
            if resource.venue is not None:
                quads -= set(entity_to_quads(resource.venue, minter))
            provenance.record_creation(minter.resource(resource.id), quads,
                                       agent, source_label, now)
            report.resources_created += 1
        citations.extend(derived.citations)

    for row in rows:
        citations.append(row.to_citation(registry))

    for citation in citations:
        if _citation_known(store, minter, citation):
            report.citations_duplicate += 1
            continue
        provenance.record_creation(minter.citation(citation.oci),
                                   entity_to_quads(citation, minter),
                                   agent, source_label, now)
        report.citations_created += 1
    return report


# --- export ------------------------------------------------------------------

def export_citations_csv(store: QuadStore,
                         minter: IriMinter | None = None) -> str:
    """Deterministic dump: header plus one row per citation, sorted by oci."""
    minter = minter or IriMinter()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    rows = []
    for q in store.match_pattern(p=vocab.RDF_TYPE, o=vocab.CITATION, g=DEFAULT_GRAPH):
        rows.append(_export_row(store, minter, q.subject))
    rows.sort(key=lambda r: r[0])
    writer.writerows(rows)
    return out.getvalue()


def _export_row(store: QuadStore, minter: IriMinter, iri: Iri) -> list[str]:
    head = f"{minter.base}ci/"
    fields = {"oci": "oci:" + iri.value[len(head):], "creation": "",
              "timespan": "", "journal_sc": "no", "author_sc": "no"}
    for q in store.match_pattern(s=iri, g=DEFAULT_GRAPH):
        if q.predicate == vocab.HAS_CITING_ENTITY:
            fields["citing"] = minter.side_identifier(q.object).value
        elif q.predicate == vocab.HAS_CITED_ENTITY:
            fields["cited"] = minter.side_identifier(q.object).value
        elif q.predicate == vocab.HAS_CITATION_CREATION_DATE:
            fields["creation"] = q.object.lexical
        elif q.predicate == vocab.HAS_CITATION_TIME_SPAN:
            fields["timespan"] = q.object.lexical
        elif q.predicate == vocab.RDF_TYPE:
            if q.object == vocab.JOURNAL_SELF_CITATION:
                fields["journal_sc"] = "yes"
            elif q.object == vocab.AUTHOR_SELF_CITATION:
                fields["author_sc"] = "yes"
    return [fields.get(col, "") for col in CSV_HEADER]
