"""Shared fixture builders for the test suite."""

import json
import random


def make_synthetic_dump(works: int = 50, refs: int = 120, seed: int = 0,
                        lines: bool = False) -> tuple[str, set[tuple[str, str]]]:
    """A Crossref-style dump whose reference edges all stay inside the set.

    Returns the JSON text and the exact (citing_doi, cited_doi) edge set;
    edges are distinct ordered pairs, never self-loops, so every edge
    yields exactly one citation.
    """
    rng = random.Random(seed)
    dois = [f"10.5000/w{i:03d}" for i in range(works)]
    journals = [
        {"title": f"Journal {j}", "issn": f"{1000 + j:04d}-{8000 + j:04d}"}
        for j in range(5)
    ]
    pairs = [(a, b) for a in range(works) for b in range(works) if a != b]
    edges = rng.sample(pairs, refs)
    by_citing: dict[int, list[int]] = {}
    for a, b in edges:
        by_citing.setdefault(a, []).append(b)

    objs = []
    for i, doi in enumerate(dois):
        journal = journals[i % len(journals)]
        year = rng.randint(1990, 2024)
        date_parts = [year, rng.randint(1, 12), rng.randint(1, 28)]
        obj = {
            "DOI": doi.upper() if rng.random() < 0.2 else doi,
            "title": [f"Study {i} of {rng.choice('abcdefgh')}"],
            "issued": {"date-parts": [date_parts[:rng.randint(1, 3)]]},
            "container-title": [journal["title"]],
            "ISSN": [journal["issn"]],
            "author": [
                {"family": f"Fam{i}", "given": f"Giv{k}",
                 **({"ORCID": f"https://orcid.org/0000-0002-{i:04d}-{k:04d}"}
                    if rng.random() < 0.5 else {})}
                for k in range(rng.randint(1, 3))
            ],
            "reference": [
                {"DOI": dois[b], "unstructured": f"Work {b} and friends"}
                for b in by_citing.get(i, [])
            ],
        }
        objs.append(obj)
    text = ("\n".join(json.dumps(o) for o in objs) if lines
            else json.dumps(objs, indent=1))
    return text, {(dois[a], dois[b]) for a, b in edges}
