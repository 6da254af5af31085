"""Lookup of works the local index has never seen.

Remote calls sit behind a small protocol so request handlers can run against
an in-memory stand-in. A client that raises is the handler's cue to degrade
to an identifier-only answer; nothing here retries or caches.
"""

from __future__ import annotations

import json
from typing import Protocol
from urllib.parse import quote

import httpx

from citegraph.ingest import parse_crossref_dump

REMOTE_FIELDS = ("title", "date", "venue", "issn", "author")


class MetadataClient(Protocol):
    def fetch(self, doi: str) -> dict[str, str] | None:
        """Partial metadata row for a DOI, or None when unknown."""


class NullMetadataClient:
    """Knows nothing; callers fall back to identifier-only rows."""

    def fetch(self, doi: str) -> dict[str, str] | None:
        return None


class StaticMetadataClient:
    """Canned rows keyed by DOI; stands in for the network in tests."""

    def __init__(self, rows: dict[str, dict[str, str]] | None = None,
                 fail_with: Exception | None = None):
        self.rows = rows or {}
        self.fail_with = fail_with
        self.calls: list[str] = []

    def fetch(self, doi: str) -> dict[str, str] | None:
        self.calls.append(doi)
        if self.fail_with is not None:
            raise self.fail_with
        return self.rows.get(doi)


class HttpMetadataClient:
    """Crossref-style works endpoint: GET <base>/works/<doi>."""

    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def fetch(self, doi: str) -> dict[str, str] | None:
        response = httpx.get(
            f"{self.base_url}/works/{quote(doi, safe='')}",
            timeout=self.timeout)
        if response.status_code == 404:
            return None
        response.raise_for_status()
        return work_json_to_row(response.json().get("message", {}))


def work_json_to_row(obj) -> dict[str, str] | None:
    """Metadata row fields from one Crossref-style work object."""
    records, _ = parse_crossref_dump(json.dumps([obj]))
    if not records:
        return None
    rec = records[0]
    return {
        "title": rec.title,
        "date": str(rec.issued) if rec.issued else "",
        "venue": rec.container_title,
        "issn": "; ".join(sorted(set(rec.issns))),
        "author": "; ".join(f"{a.given} {a.family}".strip()
                            for a in rec.authors),
    }
