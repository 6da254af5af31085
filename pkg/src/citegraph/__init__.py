"""Desk-scale open citation index.

The pieces, roughly bottom up: identifier codec (oci), partial dates and
durations (dates), RDF-ish terms and a dictionary-encoded quad store with a
small SELECT engine (terms, store, query, ntriples), the bibliographic model
and its quad mapping (model, vocab, mapping), snapshot provenance
(provenance), batch loading (ingest), and the user-facing faces: Dataset,
the REST routes, and the command line (dataset, api, remote, cli, report).
"""

from citegraph.dataset import Dataset
from citegraph.dates import PartialDate, SignedDuration, compute_timespan
from citegraph.mapping import IriMinter, entity_to_quads, load_citation, load_resource
from citegraph.model import (Agent, BibliographicReference,
                             BibliographicResource, Citation, Identifier,
                             Role, Scheme, make_citation)
from citegraph.oci import Oci, SupplierRegistry
from citegraph.provenance import Delta, ProvenanceLog, Snapshot
from citegraph.store import DEFAULT_GRAPH, QuadStore
from citegraph.terms import Blank, Iri, Literal, Quad

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "BibliographicReference",
    "BibliographicResource",
    "Blank",
    "Citation",
    "DEFAULT_GRAPH",
    "Dataset",
    "Delta",
    "Identifier",
    "Iri",
    "IriMinter",
    "Literal",
    "Oci",
    "PartialDate",
    "ProvenanceLog",
    "Quad",
    "QuadStore",
    "Role",
    "Scheme",
    "SignedDuration",
    "Snapshot",
    "SupplierRegistry",
    "compute_timespan",
    "entity_to_quads",
    "load_citation",
    "load_resource",
    "make_citation",
]
