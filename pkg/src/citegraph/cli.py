"""Command line for building, querying and serving a citation index.

Machine-readable results go to stdout; per-record diagnostics go to stderr.
Bad input exits 1, misuse of the command line itself exits 2.
"""

from __future__ import annotations

import csv
import functools
import io
from pathlib import Path

import click

from citegraph.api import (SERVICE_DEFAULTS, Api, FormatChoice, build_app,
                           load_route_config, parse_service_config, render)
from citegraph.dataset import Dataset
from citegraph.errors import CitegraphError
from citegraph.oci import SupplierRegistry, register_from_lines
from citegraph.query import evaluate, parse_query
from citegraph.remote import HttpMetadataClient
from citegraph.report import render_stats, write_figures
from citegraph.terms import Iri, Literal


def _fail_cleanly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CitegraphError as exc:
            raise click.ClickException(str(exc)) from exc
    return wrapper


def _registry(registry_path: str | None) -> SupplierRegistry:
    registry = SupplierRegistry()
    if registry_path:
        lines = Path(registry_path).read_text(encoding="utf-8").splitlines()
        register_from_lines(registry, lines)
    return registry


def _open(data_path: str, registry_path: str | None = None) -> Dataset:
    path = Path(data_path)
    registry = _registry(registry_path)
    if path.exists():
        return Dataset.load(path, registry=registry)
    return Dataset(registry=registry)


def _plain(term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, Literal):
        return term.lexical
    return str(term)


_data_option = click.option("--data", "data_path", required=True,
                            type=click.Path(),
                            help="index file (N-Quads), created if missing")
_format_option = click.option("--format", "fmt", default="json",
                              show_default=True,
                              type=click.Choice([f.value for f in FormatChoice]),
                              help="output format")
_registry_option = click.option("--registry", "registry_path", default=None,
                                type=click.Path(exists=True, dir_okay=False),
                                help="extra supplier prefixes, one "
                                     "prefix,name,codec,scheme per line")


@click.group()
def main():
    """Work with a desk-scale open citation index."""


# --- identifier codec -----------------------------------------------------------

@main.group()
def oci():
    """Encode, decode and check citation identifiers."""


@oci.command("encode")
@click.argument("identifiers", nargs=-1, required=True)
@click.option("--supplier", default="020", show_default=True,
              help="registry prefix applied to every side")
@_registry_option
@_fail_cleanly
def oci_encode(identifiers, supplier, registry_path):
    """Numerals for one identifier, or the full OCI for a CITING CITED pair."""
    registry = _registry(registry_path)
    if len(identifiers) == 1:
        click.echo(registry.encode_local(supplier, identifiers[0]))
    elif len(identifiers) == 2:
        citing, cited = identifiers
        click.echo(registry.build_oci((supplier, citing),
                                      (supplier, cited)).canonical_text)
    else:
        raise click.UsageError("expected one identifier or a citing/cited pair")


@oci.command("decode")
@click.argument("text")
@_registry_option
@_fail_cleanly
def oci_decode(text, registry_path):
    """Print side,scheme,value lines for an identifier."""
    parsed = _registry(registry_path).parse_oci(text)
    for label, side in (("citing", parsed.citing), ("cited", parsed.cited)):
        click.echo(f"{label},{side.supplier.scheme},{side.local_id}")


@oci.command("validate")
@click.argument("text")
@_registry_option
@_fail_cleanly
def oci_validate(text, registry_path):
    """Exit 0 when TEXT is a decodable identifier, 1 otherwise."""
    _registry(registry_path).parse_oci(text)
    click.echo("valid")


# --- loading --------------------------------------------------------------------

@main.group()
def ingest():
    """Load records into the index."""


def _ingest_command(name, method, help_text):
    @ingest.command(name, help=help_text)
    @click.argument("source", type=click.File("r", encoding="utf-8"))
    @_data_option
    @_registry_option
    @click.option("--source-label", default=None,
                  help="provenance source recorded for the batch")
    @_fail_cleanly
    def command(source, data_path, registry_path, source_label):
        label = source_label or getattr(source, "name", None) or "stdin"
        ds = _open(data_path, registry_path)
        report = getattr(ds, method)(source.read(), label)
        ds.save(data_path)
        for key in ("records_read", "resources_created", "resources_merged",
                    "citations_created", "citations_duplicate"):
            click.echo(f"{key}={getattr(report, key)}")
        for line, message in report.errors:
            click.echo(f"line {line}: {message}", err=True)
    return command


_ingest_command("works", "ingest_works",
                "Load a JSON array or JSON-lines dump of work records.")
_ingest_command("csv", "ingest_csv",
                "Load citation rows from delimited text.")


# --- dumping --------------------------------------------------------------------

@main.group()
def export():
    """Write the index back out."""


@export.command("csv")
@_data_option
@_fail_cleanly
def export_csv(data_path):
    """Print every citation as delimited text."""
    click.echo(_open(data_path).export_csv(), nl=False)


@export.command("nquads")
@_data_option
@_fail_cleanly
def export_nquads(data_path):
    """Print the whole index, provenance graphs included."""
    click.echo(_open(data_path).to_nquads(), nl=False)


# --- querying -------------------------------------------------------------------

@main.command()
@click.argument("source", type=click.File("r", encoding="utf-8"))
@_data_option
@_fail_cleanly
def query(source, data_path):
    """Run a SELECT query from a file (or - for stdin) against the index."""
    ds = _open(data_path)
    bindings = evaluate(ds.store, parse_query(source.read()))
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(bindings.variables)
    writer.writerows([_plain(term) for term in row] for row in bindings.rows)
    click.echo(out.getvalue(), nl=False)


# --- the API handlers, from the shell ---------------------------------------------

def _emit(data_path: str, fmt: str, handler: str,
          registry_path: str | None = None, **params):
    ds = _open(data_path, registry_path)
    result = getattr(Api(ds), handler)(**params)
    body, _media = render(result, FormatChoice(fmt), minter=ds.minter)
    click.echo(body, nl=False)


@main.command()
@click.argument("oci_text", metavar="OCI")
@_data_option
@_format_option
@_registry_option
@_fail_cleanly
def resolve(oci_text, data_path, fmt, registry_path):
    """Print the stored citation behind an identifier."""
    _emit(data_path, fmt, "handle_citation", registry_path, oci=oci_text)


@main.group()
def lookup():
    """Ask the index what the REST routes would answer."""


def _lookup_command(name, handler, param, help_text):
    @lookup.command(name, help=help_text)
    @click.argument("value", metavar=param.upper())
    @_data_option
    @_format_option
    @_fail_cleanly
    def command(value, data_path, fmt):
        _emit(data_path, fmt, handler, **{param: value})
    return command


_lookup_command("citations", "handle_citations", "doi",
                "Rows for citations pointing at DOI.")
_lookup_command("references", "handle_references", "doi",
                "Rows for citations going out of DOI.")
_lookup_command("citation-count", "handle_citation_count", "doi",
                "How many stored citations point at DOI.")
_lookup_command("reference-count", "handle_reference_count", "doi",
                "How many stored citations go out of DOI.")
_lookup_command("metadata", "handle_metadata", "dois",
                "Metadata rows for a comma-separated DOI list.")


@lookup.command("search")
@click.argument("q")
@click.option("--kind", default="auto", show_default=True,
              type=click.Choice(["auto", "title", "author", "identifier"]))
@_data_option
@_format_option
@_fail_cleanly
def lookup_search(q, kind, data_path, fmt):
    """Rows for works matching a title, author or identifier."""
    _emit(data_path, fmt, "handle_search", q=q, kind=kind)


# --- reporting ------------------------------------------------------------------

@main.command()
@_data_option
@click.option("--figures", "figures_dir", type=click.Path(file_okay=False),
              default=None, help="also render charts into this directory")
@click.option("--format", "fmt", default="csv", show_default=True,
              type=click.Choice(["csv", "json"]))
@_fail_cleanly
def stats(data_path, figures_dir, fmt):
    """Print index counts; optionally render figures next to them."""
    ds = _open(data_path)
    click.echo(render_stats(ds, fmt), nl=False)
    if figures_dir:
        for path in write_figures(ds, figures_dir):
            click.echo(str(path), err=True)


# --- serving --------------------------------------------------------------------

def build_service(settings: dict[str, str]):
    """The FastAPI app for settled service settings; serve and tests share it."""
    data = settings.get("data") or ""
    ds = Dataset.load(data) if data and Path(data).exists() else Dataset()
    routes = None
    if settings.get("routes"):
        routes = load_route_config(
            Path(settings["routes"]).read_text(encoding="utf-8"))
    remote = (HttpMetadataClient(settings["remote"])
              if settings.get("remote") else None)
    return build_app(ds, routes=routes, remote=remote,
                     provider=settings.get("provider") or "citegraph")


@main.command()
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False),
              help="key=value settings file")
@click.option("--host", default=None, help="bind address")
@click.option("--port", type=int, default=None, help="bind port")
@click.option("--data", "data_path", type=click.Path(), default=None,
              help="index file (N-Quads)")
@click.option("--routes", "routes_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="extra route definitions")
@_fail_cleanly
def serve(config_path, host, port, data_path, routes_path):
    """Serve the REST API over a saved index."""
    settings = dict(SERVICE_DEFAULTS)
    if config_path:
        settings.update(parse_service_config(
            Path(config_path).read_text(encoding="utf-8")))
    for key, value in (("host", host), ("port", port),
                       ("data", data_path), ("routes", routes_path)):
        if value is not None:
            settings[key] = str(value)
    app = build_service(settings)

    import uvicorn

    uvicorn.run(app, host=settings["host"], port=int(settings["port"]))
