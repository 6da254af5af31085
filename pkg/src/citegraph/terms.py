"""RDF term types, their textual form, and the interning dictionary."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from citegraph.errors import TermNotFound


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        if not self.value:
            raise ValueError("IRI must be nonempty")


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self):
        if self.datatype is not None and self.language is not None:
            raise ValueError("a literal has at most one of datatype/language")


@dataclass(frozen=True)
class Blank:
    label: str

    def __post_init__(self):
        if not self.label:
            raise ValueError("blank node label must be nonempty")


Term = Union[Iri, Literal, Blank]

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_literal(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def term_text(term: Term) -> str:
    """Canonical single-line rendering, also used as the sort key."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, Blank):
        return f"_:{term.label}"
    body = f'"{escape_literal(term.lexical)}"'
    if term.datatype is not None:
        return f"{body}^^<{term.datatype}>"
    if term.language is not None:
        return f"{body}@{term.language}"
    return body


def is_absolute(iri: Iri) -> bool:
    # absolute = carries a scheme; the cheap test is the presence of ':'
    return ":" in iri.value


@dataclass(frozen=True)
class Quad:
    """One statement; graph None means the default graph."""

    subject: Term
    predicate: Term
    object: Term
    graph: Term | None = None

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise ValueError("literal in subject position")
        if not isinstance(self.predicate, Iri):
            raise ValueError("predicate must be an IRI")
        if self.graph is not None and not isinstance(self.graph, Iri):
            raise ValueError("graph must be an IRI or default")

    def triple(self) -> tuple[Term, Term, Term]:
        return (self.subject, self.predicate, self.object)


class TermDict:
    """Bijective term <-> integer id mapping, stable for the dataset lifetime."""

    def __init__(self):
        self._by_term: dict[Term, int] = {}
        self._by_id: dict[int, Term] = {}
        self._next = 1

    def intern(self, term: Term) -> int:
        found = self._by_term.get(term)
        if found is not None:
            return found
        tid = self._next
        self._next += 1
        self._by_term[term] = tid
        self._by_id[tid] = term
        return tid

    def lookup(self, tid: int) -> Term:
        try:
            return self._by_id[tid]
        except KeyError:
            raise TermNotFound(f"no term interned under id {tid}") from None

    def id_of(self, term: Term) -> int | None:
        """Id if already interned, else None; never allocates."""
        return self._by_term.get(term)

    def __len__(self) -> int:
        return len(self._by_term)
