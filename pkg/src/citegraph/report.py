"""Summary numbers for an index, with optional rendered figures.

Figures go through the Agg backend so reports work on headless machines.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from citegraph import vocab  # noqa: E402
from citegraph.dataset import Dataset  # noqa: E402
from citegraph.dates import parse_duration  # noqa: E402
from citegraph.store import DEFAULT_GRAPH  # noqa: E402

STATS_COLUMNS = ("metric", "value")


def stats_rows(dataset: Dataset) -> list[dict[str, str]]:
    counts = dataset.stats()
    return [{"metric": key, "value": str(counts[key])} for key in counts]


def render_stats(dataset: Dataset, fmt: str = "csv") -> str:
    rows = stats_rows(dataset)
    if fmt == "json":
        return json.dumps(rows, ensure_ascii=False, indent=1) + "\n"
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(STATS_COLUMNS)
    writer.writerows([row["metric"], row["value"]] for row in rows)
    return out.getvalue()


def citations_by_year(dataset: Dataset) -> dict[int, int]:
    years: dict[int, int] = {}
    for q in dataset.store.match_pattern(p=vocab.HAS_CITATION_CREATION_DATE,
                                         g=DEFAULT_GRAPH):
        year = int(q.object.lexical[:4])
        years[year] = years.get(year, 0) + 1
    return years


def timespan_months(dataset: Dataset) -> list[float]:
    spans = []
    for q in dataset.store.match_pattern(p=vocab.HAS_CITATION_TIME_SPAN,
                                         g=DEFAULT_GRAPH):
        d = parse_duration(q.object.lexical)
        months = d.years * 12 + d.months + d.days / 30.0
        spans.append(-months if d.negative else months)
    return sorted(spans)


def write_figures(dataset: Dataset, directory) -> list[Path]:
    """Render the report figures as PNG files; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    years = citations_by_year(dataset)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if years:
        ordered = sorted(years)
        ax.bar([str(y) for y in ordered], [years[y] for y in ordered],
               color="#365f91")
    ax.set_title("Citations by creation year")
    ax.set_xlabel("year")
    ax.set_ylabel("citations")
    fig.tight_layout()
    path = directory / "citations_by_year.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    spans = timespan_months(dataset)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if spans:
        ax.hist(spans, bins=min(30, max(5, len(spans) // 3 + 1)),
                color="#8c3b3b")
    ax.set_title("Citation timespans")
    ax.set_xlabel("months between cited and citing publication")
    ax.set_ylabel("citations")
    fig.tight_layout()
    path = directory / "citation_timespans.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
