"""Fixed vocabulary IRIs for the entity-to-quad mapping.

Classes come from the SPAR family (cito, fabio, biro, c4o, deo, pro,
datacite) plus foaf and the Web Annotation vocabulary; descriptive
properties from Dublin Core, PRISM and FRBR; change tracking from PROV.
Dates are typed by their precision (xsd:date / gYearMonth / gYear).
"""

from __future__ import annotations

from citegraph.dates import DAY, MONTH, YEAR, PartialDate
from citegraph.errors import MalformedDate
from citegraph.terms import Iri, Literal

CITO = "http://purl.org/spar/cito/"
FABIO = "http://purl.org/spar/fabio/"
BIRO = "http://purl.org/spar/biro/"
C4O = "http://purl.org/spar/c4o/"
DEO = "http://purl.org/spar/deo/"
PRO = "http://purl.org/spar/pro/"
DATACITE = "http://purl.org/spar/datacite/"
FOAF = "http://xmlns.com/foaf/0.1/"
OA = "http://www.w3.org/ns/oa#"
PROV = "http://www.w3.org/ns/prov#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
DCTERMS = "http://purl.org/dc/terms/"
PRISM = "http://prismstandard.org/namespaces/basic/2.0/"
FRBR = "http://purl.org/vocab/frbr/core#"
XSD = "http://www.w3.org/2001/XMLSchema#"
LITERAL = "http://www.essepuntato.it/2010/06/literalreification/"
SCHEMA = "http://schema.org/"

RDF_TYPE = Iri(RDF + "type")

# classes (Figure-1 inventory)
CITATION = Iri(CITO + "Citation")
AUTHOR_SELF_CITATION = Iri(CITO + "AuthorSelfCitation")
JOURNAL_SELF_CITATION = Iri(CITO + "JournalSelfCitation")
EXPRESSION = Iri(FABIO + "Expression")
MANIFESTATION = Iri(FABIO + "Manifestation")
BIBLIOGRAPHIC_REFERENCE = Iri(BIRO + "BibliographicReference")
IN_TEXT_REFERENCE_POINTER = Iri(C4O + "InTextReferencePointer")
DISCOURSE_ELEMENT = Iri(DEO + "DiscourseElement")
ANNOTATION = Iri(OA + "Annotation")
AGENT = Iri(FOAF + "Agent")
ROLE_IN_TIME = Iri(PRO + "RoleInTime")
IDENTIFIER = Iri(DATACITE + "Identifier")

# citation properties
CITES = Iri(CITO + "cites")
HAS_CITING_ENTITY = Iri(CITO + "hasCitingEntity")
HAS_CITED_ENTITY = Iri(CITO + "hasCitedEntity")
HAS_CITATION_CREATION_DATE = Iri(CITO + "hasCitationCreationDate")
HAS_CITATION_TIME_SPAN = Iri(CITO + "hasCitationTimeSpan")

# descriptive properties
TITLE = Iri(DCTERMS + "title")
DESCRIPTION = Iri(DCTERMS + "description")
FORMAT = Iri(DCTERMS + "format")
KIND = Iri(DCTERMS + "type")
PUBLICATION_DATE = Iri(PRISM + "publicationDate")
PAGE_RANGE = Iri(PRISM + "pageRange")
PART_OF = Iri(FRBR + "partOf")
PART = Iri(FRBR + "part")
EMBODIMENT = Iri(FRBR + "embodiment")
NAME = Iri(FOAF + "name")

# identifiers
HAS_IDENTIFIER = Iri(DATACITE + "hasIdentifier")
USES_IDENTIFIER_SCHEME = Iri(DATACITE + "usesIdentifierScheme")
HAS_LITERAL_VALUE = Iri(LITERAL + "hasLiteralValue")

# roles
WITH_ROLE = Iri(PRO + "withRole")
IS_HELD_BY = Iri(PRO + "isHeldBy")
IS_DOCUMENT_CONTEXT_FOR = Iri(PRO + "isDocumentContextFor")
POSITION = Iri(SCHEMA + "position")

# references, pointers, annotations
REFERENCES = Iri(BIRO + "references")
HAS_CONTENT = Iri(C4O + "hasContent")
DENOTES = Iri(C4O + "denotes")
IS_CONTEXT_OF = Iri(C4O + "isContextOf")
HAS_TARGET = Iri(OA + "hasTarget")
HAS_BODY = Iri(OA + "hasBody")

# provenance
GENERATED_AT_TIME = Iri(PROV + "generatedAtTime")
INVALIDATED_AT_TIME = Iri(PROV + "invalidatedAtTime")
WAS_ATTRIBUTED_TO = Iri(PROV + "wasAttributedTo")
HAD_PRIMARY_SOURCE = Iri(PROV + "hadPrimarySource")
SPECIALIZATION_OF = Iri(PROV + "specializationOf")
# no standard property carries a textual update script; kept in a local URN
HAS_UPDATE_QUERY = Iri("urn:x-citegraph:hasUpdateQuery")

XSD_DATE = XSD + "date"
XSD_GYEARMONTH = XSD + "gYearMonth"
XSD_GYEAR = XSD + "gYear"
XSD_DURATION = XSD + "duration"
XSD_DATETIME = XSD + "dateTime"
XSD_INTEGER = XSD + "integer"

_DATATYPE_BY_PRECISION = {DAY: XSD_DATE, MONTH: XSD_GYEARMONTH, YEAR: XSD_GYEAR}
_PRECISION_BY_DATATYPE = {v: k for k, v in _DATATYPE_BY_PRECISION.items()}


def date_literal(date: PartialDate) -> Literal:
    """Render a partial date with the datatype carrying its precision."""
    return Literal(date.isoformat(), datatype=_DATATYPE_BY_PRECISION[date.precision])


def parse_date_literal(literal: Literal) -> PartialDate:
    date = PartialDate.parse(literal.lexical)
    expected = _PRECISION_BY_DATATYPE.get(literal.datatype or "")
    if expected is not None and expected != date.precision:
        raise MalformedDate(
            f"datatype {literal.datatype} disagrees with lexical {literal.lexical!r}")
    return date


def scheme_iri(scheme: str) -> Iri:
    return Iri(DATACITE + scheme)
