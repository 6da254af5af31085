"""HTTP face of the index: read-only routes with content negotiation.

Handlers are plain methods over a Dataset so they can be exercised without a
server; the FastAPI wiring at the bottom adapts them. Extra routes come from
a hash-directive config text and run canned store queries.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import re
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from citegraph.dataset import (CITATION_COLUMNS, METADATA_COLUMNS,
                               SEARCH_COLUMNS, Dataset)
from citegraph.errors import (BadIdentifier, CitegraphError, ConfigError,
                              EmptyQuery, NotAcceptable, QuerySyntaxError,
                              ShadowedBuiltin, UnknownOci)
from citegraph.mapping import entity_to_quads
from citegraph.model import Citation, Identifier, Scheme, normalize_doi
from citegraph.ntriples import serialize_ntriples
from citegraph.oci import OciSide, SupplierRegistry
from citegraph.query import evaluate, parse_query
from citegraph.remote import REMOTE_FIELDS, MetadataClient, NullMetadataClient
from citegraph.terms import Iri, Literal

API_BASE = "/index/api/v1"


class FormatChoice(enum.Enum):
    JSON = "json"
    CSV = "csv"
    SCHOLIX = "scholix"
    NTRIPLES = "ntriples"

    @property
    def media_type(self) -> str:
        return _MEDIA_OF[self]


_MEDIA_OF = {
    FormatChoice.JSON: "application/json",
    FormatChoice.CSV: "text/csv",
    FormatChoice.SCHOLIX: "application/scholix+json",
    FormatChoice.NTRIPLES: "application/n-triples",
}
MEDIA_TYPES = {media: fmt for fmt, media in _MEDIA_OF.items()}


def negotiate_format(accept: str | None, requested: str | None = None,
                     default: FormatChoice = FormatChoice.JSON) -> FormatChoice:
    """Pick a response format; an explicit format= request wins over Accept."""
    if requested:
        try:
            return FormatChoice(requested.strip().lower())
        except ValueError:
            raise NotAcceptable(f"unknown format {requested!r}") from None
    if accept is None or not accept.strip():
        return default
    for part in accept.split(","):
        media = part.split(";", 1)[0].strip().lower()
        if media == "*/*":
            return default
        if media in MEDIA_TYPES:
            return MEDIA_TYPES[media]
    raise NotAcceptable(f"no supported media type in {accept!r}")


# --- route table ---------------------------------------------------------------

@dataclass(frozen=True)
class RouteSpec:
    """One GET route: either a built-in handler or a configured query."""

    url: str
    method: str = "get"
    handler: str | None = None
    call: str | None = None
    field_types: tuple[tuple[str, str], ...] = ()
    output: tuple[str, ...] = ()
    default_format: FormatChoice = FormatChoice.JSON

    @property
    def builtin(self) -> bool:
        return self.handler is not None


BUILTIN_ROUTES: tuple[RouteSpec, ...] = (
    RouteSpec(url="/citations/{doi}", handler="citations",
              output=CITATION_COLUMNS),
    RouteSpec(url="/references/{doi}", handler="references",
              output=CITATION_COLUMNS),
    RouteSpec(url="/citation-count/{doi}", handler="citation_count",
              output=("count",)),
    RouteSpec(url="/reference-count/{doi}", handler="reference_count",
              output=("count",)),
    RouteSpec(url="/citation/{oci}", handler="citation",
              output=CITATION_COLUMNS),
    RouteSpec(url="/metadata/{dois}", handler="metadata",
              output=METADATA_COLUMNS),
    RouteSpec(url="/search", handler="search", output=SEARCH_COLUMNS),
    RouteSpec(url="/oci/{oci}", handler="resolve", output=CITATION_COLUMNS),
)

_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")
_PARAM_TYPES = ("str", "int", "doi", "oci")
_ROUTE_KEYS = ("url", "method", "call", "field_type", "output", "format")
_DUMMY_PARAM = {
    "str": "x",
    "int": "1",
    "doi": "10.1/x",
    "oci": SupplierRegistry().build_oci(("020", "10.1/a"),
                                        ("020", "10.1/b")).canonical_text,
}


def _shape(url: str) -> str:
    return _PLACEHOLDER_RE.sub("{}", url)


@dataclass
class _Pending:
    url: str
    line: int
    method: str = "get"
    call: str | None = None
    field_types: list[tuple[str, str]] = field(default_factory=list)
    output: tuple[str, ...] = ()
    default_format: FormatChoice = FormatChoice.JSON
    in_call: bool = False


def load_route_config(text: str) -> list[RouteSpec]:
    """Built-in routes plus any configured ones; empty text is fine.

    A route is a block of #key value lines starting at #url. Bare lines
    continue the #call query, so multi-line queries need no escaping.
    """
    routes = list(BUILTIN_ROUTES)
    shapes = {_shape(r.url): r for r in routes}
    pending: _Pending | None = None

    def finish():
        if pending is None:
            return
        spec = _finalize(pending)
        clash = shapes.get(_shape(spec.url))
        if clash is not None:
            if clash.builtin:
                raise ShadowedBuiltin(
                    f"{spec.url} shadows the built-in route {clash.url}")
            raise ConfigError(f"duplicate route {spec.url}", pending.line)
        shapes[_shape(spec.url)] = spec
        routes.append(spec)

    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            if pending is not None:
                pending.in_call = False
            continue
        if not line.startswith("#"):
            if pending is None or not pending.in_call:
                raise ConfigError("text outside a #call block", n)
            pending.call = (pending.call or "") + "\n" + line
            continue
        key, _, value = line[1:].partition(" ")
        key, value = key.strip(), value.strip()
        if key == "url":
            finish()
            pending = _Pending(url=value, line=n)
            continue
        if key not in _ROUTE_KEYS:
            raise ConfigError(f"unknown directive #{key}", n)
        if pending is None:
            raise ConfigError(f"#{key} before any #url", n)
        pending.in_call = False
        if key == "method":
            if value.lower() != "get":
                raise ConfigError("only GET routes are supported", n)
        elif key == "call":
            pending.call = value
            pending.in_call = True
        elif key == "field_type":
            parts = value.split()
            if len(parts) != 2 or parts[0] not in _PARAM_TYPES:
                raise ConfigError(
                    "expected #field_type <str|int|doi|oci> <name>", n)
            pending.field_types.append((parts[1], parts[0]))
        elif key == "output":
            pending.output = tuple(value.replace(",", " ").split())
        elif key == "format":
            try:
                pending.default_format = FormatChoice(value.lower())
            except ValueError:
                raise ConfigError(f"unknown format {value!r}", n) from None
    finish()
    return routes


def _finalize(p: _Pending) -> RouteSpec:
    if not p.url.startswith("/"):
        raise ConfigError(f"url must start with /, got {p.url!r}", p.line)
    if p.call is None or not p.call.strip():
        raise ConfigError("route has no #call query", p.line)
    if not p.output:
        raise ConfigError("route has no #output columns", p.line)
    url_names = set(_PLACEHOLDER_RE.findall(p.url))
    for name in _PLACEHOLDER_RE.findall(p.call):
        if name not in url_names:
            raise ConfigError(
                f"query placeholder {{{name}}} is not in the url template",
                p.line)
    types = dict(p.field_types)
    for name in types:
        if name not in url_names:
            raise ConfigError(
                f"#field_type names unknown placeholder {{{name}}}", p.line)
    spec = RouteSpec(url=p.url, call=p.call,
                     field_types=tuple(p.field_types), output=p.output,
                     default_format=p.default_format)
    # probe with placeholder stand-ins so broken queries fail at load time
    dummies = {name: _DUMMY_PARAM[types.get(name, "str")] for name in url_names}
    try:
        probe = parse_query(_substituted_query(spec, dummies))
    except QuerySyntaxError as exc:
        raise ConfigError(f"query does not parse: {exc}", p.line) from None
    variables = {v.name for v in probe.variables}
    for column in p.output:
        if column not in variables:
            raise ConfigError(
                f"output column {column} is not selected by the query", p.line)
    return spec


def _checked_param(declared: str, raw: str) -> str:
    if declared == "int":
        if not re.fullmatch(r"[0-9]+", raw):
            raise BadIdentifier(f"{raw!r} is not an integer")
        return raw
    if declared == "doi":
        return _clean_doi(raw)
    if declared == "oci":
        return SupplierRegistry().parse_oci(raw).canonical_text
    return raw.replace("\\", "\\\\").replace('"', '\\"')


def _substituted_query(spec: RouteSpec, params: dict[str, str]) -> str:
    types = dict(spec.field_types)
    values = {name: _checked_param(types.get(name, "str"), params.get(name, ""))
              for name in _PLACEHOLDER_RE.findall(spec.url)}
    return _PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], spec.call)


# --- handlers ------------------------------------------------------------------

_DOI_RE = re.compile(r"10\.[0-9]+(\.[0-9]+)*/.+")
_DOI_SYNTAX = re.compile(
    r"(doi:|https?://(dx\.)?doi\.org/)?10\.[0-9]+(\.[0-9]+)*/\S+",
    re.IGNORECASE)
_ORCID_SYNTAX = re.compile(
    r"(https?://orcid\.org/)?[0-9]{4}-[0-9]{4}-[0-9]{4}-[0-9]{3}[0-9Xx]")


def _clean_doi(raw: str) -> str:
    doi = normalize_doi(raw)
    if not _DOI_RE.fullmatch(doi):
        raise BadIdentifier(f"{raw!r} is not a DOI")
    return doi


@dataclass
class RouteResult:
    """Rows ready to render; citations ride along for the RDF-ish formats."""

    columns: tuple[str, ...]
    rows: list[dict[str, str]]
    citations: list[Citation] | None = None


class Api:
    """The route handlers, independent of any web framework."""

    def __init__(self, dataset: Dataset, remote: MetadataClient | None = None,
                 provider: str = "citegraph"):
        self.dataset = dataset
        self.remote = remote if remote is not None else NullMetadataClient()
        self.provider = provider

    def run(self, spec: RouteSpec, params: dict[str, str]) -> RouteResult:
        if spec.handler is None:
            return self.run_config_route(spec, params)
        return getattr(self, "handle_" + spec.handler)(**params)

    # citation lists and counts

    def handle_citations(self, doi: str) -> RouteResult:
        return self._citation_list(self.dataset.citations_incoming, doi)

    def handle_references(self, doi: str) -> RouteResult:
        return self._citation_list(self.dataset.citations_outgoing, doi)

    def _citation_list(self, side, doi: str) -> RouteResult:
        citations = side(_clean_doi(doi))
        rows = [self.dataset.citation_row(c) for c in citations]
        return RouteResult(CITATION_COLUMNS, rows, citations=citations)

    def handle_citation_count(self, doi: str) -> RouteResult:
        return self._count(self.handle_citations(doi))

    def handle_reference_count(self, doi: str) -> RouteResult:
        return self._count(self.handle_references(doi))

    @staticmethod
    def _count(listing: RouteResult) -> RouteResult:
        return RouteResult(("count",), [{"count": str(len(listing.rows))}])

    # single-citation lookup; /citation/{oci} and the /oci/{oci} resolver

    def handle_citation(self, oci: str) -> RouteResult:
        parsed = self.dataset.registry.parse_oci(oci)
        found = self.dataset.citation_by_oci(oci)
        if found is None:
            raise UnknownOci(
                f"no citation stored for {parsed.canonical_text}; it decodes "
                f"to citing {_side_text(parsed.citing)} and "
                f"cited {_side_text(parsed.cited)}")
        return RouteResult(CITATION_COLUMNS, [self.dataset.citation_row(found)],
                           citations=[found])

    def handle_resolve(self, oci: str) -> RouteResult:
        return self.handle_citation(oci)

    # metadata with remote fallback

    def handle_metadata(self, dois: str) -> RouteResult:
        rows = []
        for piece in dois.split(","):
            if not piece.strip():
                continue
            doi = _clean_doi(piece)
            row = self.dataset.metadata_row(doi)
            rows.append(row if row is not None else self._remote_row(doi))
        if not rows:
            raise BadIdentifier("no identifiers given")
        return RouteResult(METADATA_COLUMNS, rows)

    def _remote_row(self, doi: str) -> dict[str, str]:
        row = dict.fromkeys(METADATA_COLUMNS, "")
        row.update(doi=doi, citation_count="0", reference_count="0")
        try:
            fetched = self.remote.fetch(doi)
        except Exception:
            return row  # a dead remote degrades to the identifier-only row
        for key in REMOTE_FIELDS:
            if fetched and fetched.get(key):
                row[key] = fetched[key]
        return row

    # search

    def handle_search(self, q: str, kind: str = "auto") -> RouteResult:
        if not q or not q.strip():
            raise EmptyQuery("q must be a nonempty string")
        needle = q.strip()
        kind = (kind or "auto").strip().lower()
        if kind not in ("auto", "title", "author", "identifier"):
            raise BadIdentifier(f"unknown search kind {kind!r}")
        ident = _as_identifier(needle) if kind in ("auto", "identifier") else None
        if kind == "identifier" and ident is None:
            raise BadIdentifier(f"{q!r} is neither a DOI nor an ORCID")
        pairs: list[tuple[str, Iri]] = []
        if ident is not None:
            # identifier syntax decides the mode; no substring fallback
            pairs += [("identifier", iri) for iri in
                      self.dataset.resources_with_identifier(ident)]
        else:
            if kind in ("title", "auto"):
                pairs += [("title", iri) for iri in
                          self.dataset.resources_with_title_matching(needle)]
            if kind in ("author", "auto"):
                pairs += [("author", iri) for iri in
                          self.dataset.resources_with_author_matching(needle)]
        by_iri: dict[Iri, str] = {}
        for match_field, iri in pairs:
            if iri not in by_iri or match_field < by_iri[iri]:
                by_iri[iri] = match_field
        rows = [{"match": match_field} | self.dataset.resource_row(iri)
                for iri, match_field in by_iri.items()]
        rows.sort(key=lambda r: (r["match"], r["title"]))
        return RouteResult(SEARCH_COLUMNS, rows)

    # configured routes

    def run_config_route(self, spec: RouteSpec,
                         params: dict[str, str]) -> RouteResult:
        query = parse_query(_substituted_query(spec, params))
        bindings = evaluate(self.dataset.store, query)
        position = {name: i for i, name in enumerate(bindings.variables)}
        rows = [{column: _term_text(row[position[column]])
                 for column in spec.output} for row in bindings.rows]
        return RouteResult(spec.output, rows)


def _as_identifier(text: str) -> Identifier | None:
    if _DOI_SYNTAX.fullmatch(text):
        return Identifier(Scheme.DOI, text)
    if _ORCID_SYNTAX.fullmatch(text):
        return Identifier(Scheme.ORCID, text)
    return None


def _side_text(side: OciSide) -> str:
    return f"{side.supplier.scheme} {side.local_id}"


def _term_text(term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, Literal):
        return term.lexical
    return str(term)


# --- rendering -----------------------------------------------------------------

def render(result: RouteResult, fmt: FormatChoice, *,
           provider: str = "citegraph", minter=None) -> tuple[str, str]:
    """Response body and media type for the negotiated format."""
    if fmt is FormatChoice.JSON:
        return _json_text(result.rows), fmt.media_type
    if fmt is FormatChoice.CSV:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(result.columns)
        for row in result.rows:
            writer.writerow([row.get(column, "") for column in result.columns])
        return out.getvalue(), fmt.media_type
    if result.citations is None:
        raise NotAcceptable(f"{fmt.value} renders citation records only")
    if fmt is FormatChoice.SCHOLIX:
        links = [scholix_link(c, provider) for c in result.citations]
        return _json_text(links), fmt.media_type
    quads = []
    for citation in result.citations:
        quads.extend(entity_to_quads(citation, minter))
    return serialize_ntriples(quads), fmt.media_type


def _json_text(value) -> str:
    return json.dumps(value, ensure_ascii=False, indent=1) + "\n"


def scholix_link(c: Citation, provider: str = "citegraph") -> dict:
    """Scholix interchange form; both ends decode from the OCI itself."""
    return {
        "LinkPublicationDate": str(c.creation) if c.creation else "",
        "LinkProvider": [{"Name": provider}],
        "RelationshipType": "References",
        "Source": _scholix_end(c.oci.citing),
        "Target": _scholix_end(c.oci.cited),
    }


def _scholix_end(side: OciSide) -> dict:
    return {"Identifier": side.local_id,
            "IDScheme": side.supplier.scheme,
            "Type": "literature"}


# --- service settings ------------------------------------------------------------

SERVICE_DEFAULTS = {
    "host": "127.0.0.1",
    "port": "8080",
    "data": "",
    "routes": "",
    "remote": "",
    "provider": "citegraph",
}


def parse_service_config(text: str) -> dict[str, str]:
    """Flat key=value settings; unknown keys and bare lines are errors."""
    settings = dict(SERVICE_DEFAULTS)
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError("expected key=value", n)
        if key not in SERVICE_DEFAULTS:
            raise ConfigError(f"unknown setting {key!r}", n)
        if key == "port" and not re.fullmatch(r"[0-9]+", value):
            raise ConfigError(f"port must be a number, got {value!r}", n)
        settings[key] = value
    return settings


# --- web wiring ------------------------------------------------------------------

def build_app(dataset: Dataset, *, routes: list[RouteSpec] | None = None,
              remote: MetadataClient | None = None,
              provider: str = "citegraph", base: str = API_BASE):
    """A FastAPI application serving the route table over the dataset."""
    api = Api(dataset, remote=remote, provider=provider)
    app = FastAPI(title="citegraph", docs_url=None, redoc_url=None,
                  openapi_url=None)

    def make_endpoint(spec: RouteSpec):
        def endpoint(request: Request) -> Response:
            return _respond(api, spec, request)
        endpoint.__name__ = "route" + re.sub(r"\W+", "_", spec.url)
        return endpoint

    for spec in routes if routes is not None else BUILTIN_ROUTES:
        # the resolver dereferences identifiers, so it sits at the site root
        path = spec.url if spec.handler == "resolve" else base + spec.url
        app.add_api_route(_starlette_path(spec, path), make_endpoint(spec),
                          methods=["GET"])
    return app


def _starlette_path(spec: RouteSpec, path: str) -> str:
    types = dict(spec.field_types)

    def convert(m):
        name = m.group(1)
        declared = types.get(name, "doi" if name in ("doi", "dois") else "str")
        # DOIs contain slashes, so those segments must match across them
        return "{%s:path}" % name if declared == "doi" else m.group(0)

    return _PLACEHOLDER_RE.sub(convert, path)


def _respond(api: Api, spec: RouteSpec, request: Request) -> Response:
    try:
        fmt = negotiate_format(request.headers.get("accept"),
                               request.query_params.get("format") or None,
                               default=spec.default_format)
        if spec.handler == "search":
            params = {"q": request.query_params.get("q", ""),
                      "kind": request.query_params.get("kind", "auto")}
        else:
            params = {key: str(value)
                      for key, value in request.path_params.items()}
        result = api.run(spec, params)
        body, media = render(result, fmt, provider=api.provider,
                             minter=api.dataset.minter)
        return Response(content=body, media_type=media)
    except CitegraphError as exc:
        if isinstance(exc, UnknownOci):
            status = 404
        elif isinstance(exc, NotAcceptable):
            status = 406
        else:
            status = 400
        return JSONResponse(status_code=status,
                            content={"error": _error_code(exc),
                                     "message": str(exc)})


def _error_code(exc: CitegraphError) -> str:
    name = type(exc).__name__
    return re.sub(r"(?<=[a-z0-9])(?=[A-Z])", "_", name).lower()
