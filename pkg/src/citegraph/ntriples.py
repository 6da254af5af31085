"""Line-based N-Triples / N-Quads reading and writing.

One statement per line, ` .` terminated; IRIs in angle brackets, blank
nodes as `_:label`, literals quoted with optional `^^<datatype>` or
`@lang`. Backslash escapes cover the quote, the backslash itself, and
newline / carriage return / tab. The serializer emits each distinct
statement once, sorted by term text, so equal quad sets give identical
bytes.
"""

from __future__ import annotations

import re
from typing import Iterable

from citegraph.errors import NTriplesSyntaxError
from citegraph.terms import Blank, Iri, Literal, Quad, Term, term_text

_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}
_BLANK_RE = re.compile(r"_:([A-Za-z0-9][A-Za-z0-9_.-]*)")
_LANG_RE = re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")


class _Cursor:
    def __init__(self, text: str, line_no: int):
        self.text = text
        self.pos = 0
        self.line_no = line_no

    def fail(self, message: str):
        raise NTriplesSyntaxError(message, self.line_no)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def read_iri(self) -> Iri:
        # absoluteness is a store-level invariant, not a syntax rule here
        end = self.text.find(">", self.pos + 1)
        if end < 0:
            self.fail("unterminated IRI")
        value = self.text[self.pos + 1:end]
        if any(ch in value for ch in '<" \t'):
            self.fail(f"malformed IRI: {value!r}")
        if not value:
            self.fail("empty IRI")
        self.pos = end + 1
        return Iri(value)

    def read_literal(self) -> Literal:
        chars = []
        i = self.pos + 1
        while True:
            if i >= len(self.text):
                self.fail("unterminated literal")
            ch = self.text[i]
            if ch == '"':
                break
            if ch == "\\":
                if i + 1 >= len(self.text) or self.text[i + 1] not in _UNESCAPES:
                    self.fail("unknown escape sequence")
                chars.append(_UNESCAPES[self.text[i + 1]])
                i += 2
                continue
            chars.append(ch)
            i += 1
        self.pos = i + 1
        lexical = "".join(chars)
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            if self.peek() != "<":
                self.fail("datatype must be an IRI")
            return Literal(lexical, datatype=self.read_iri().value)
        if self.peek() == "@":
            m = _LANG_RE.match(self.text, self.pos)
            if not m:
                self.fail("malformed language tag")
            self.pos = m.end()
            return Literal(lexical, language=m.group(1))
        return Literal(lexical)

    def read_blank(self) -> Blank:
        m = _BLANK_RE.match(self.text, self.pos)
        if not m:
            self.fail("malformed blank node label")
        self.pos = m.end()
        return Blank(m.group(1))

    def read_term(self) -> Term:
        head = self.peek()
        if head == "<":
            return self.read_iri()
        if head == '"':
            return self.read_literal()
        if head == "_":
            return self.read_blank()
        self.fail(f"expected a term, found {self.text[self.pos:self.pos + 10]!r}")


def _parse_line(line: str, line_no: int, allow_graph: bool) -> Quad | None:
    cur = _Cursor(line, line_no)
    cur.skip_ws()
    if not cur.peek() or cur.peek() == "#":
        return None
    terms = [cur.read_term()]
    for _ in range(2):
        cur.skip_ws()
        terms.append(cur.read_term())
    cur.skip_ws()
    graph: Term | None = None
    if cur.peek() and cur.peek() != ".":
        if not allow_graph:
            cur.fail("expected ' .' after the object")
        graph = cur.read_term()
        if not isinstance(graph, Iri):
            cur.fail("graph label must be an IRI")
        cur.skip_ws()
    if cur.peek() != ".":
        cur.fail("missing statement terminator")
    cur.pos += 1
    cur.skip_ws()
    if cur.peek():
        cur.fail("trailing content after statement terminator")
    try:
        return Quad(terms[0], terms[1], terms[2], graph)
    except ValueError as exc:
        raise NTriplesSyntaxError(str(exc), line_no) from None


def _parse(text: str, allow_graph: bool) -> list[Quad]:
    out = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        quad = _parse_line(line, line_no, allow_graph)
        if quad is not None:
            out.append(quad)
    return out


def parse_ntriples(text: str) -> list[Quad]:
    """Triples in document order, all in the default graph."""
    return _parse(text, allow_graph=False)


def parse_nquads(text: str) -> list[Quad]:
    """Statements in document order; a fourth term names the graph."""
    return _parse(text, allow_graph=True)


def _graph_key(quad: Quad) -> str:
    return "" if quad.graph is None else term_text(quad.graph)


def _sorted_unique(quads: Iterable[Quad], with_graph: bool) -> list[Quad]:
    if with_graph:
        unique = set(quads)
        return sorted(unique, key=lambda q: (_graph_key(q), term_text(q.subject),
                                             term_text(q.predicate), term_text(q.object)))
    unique = {q.triple() for q in quads}
    return sorted((Quad(s, p, o) for s, p, o in unique),
                  key=lambda q: (term_text(q.subject), term_text(q.predicate),
                                 term_text(q.object)))


def serialize_ntriples(quads: Iterable[Quad]) -> str:
    """Graph-blind triple dump: distinct triples, sorted, one per line."""
    return "".join(
        f"{term_text(q.subject)} {term_text(q.predicate)} {term_text(q.object)} .\n"
        for q in _sorted_unique(quads, with_graph=False)
    )


def serialize_nquads(quads: Iterable[Quad]) -> str:
    lines = []
    for q in _sorted_unique(quads, with_graph=True):
        cols = [term_text(q.subject), term_text(q.predicate), term_text(q.object)]
        if q.graph is not None:
            cols.append(term_text(q.graph))
        lines.append(" ".join(cols) + " .\n")
    return "".join(lines)
