"""A small SELECT-only query language over the quad store.

Grammar:
    query   := "SELECT" var+ "WHERE" "{" (pattern ".")+ filter* "}" ("LIMIT" int)?
    pattern := term term term
    filter  := "FILTER(" var op (literal|iri) ")"
    op      := = | != | < | <= | > | >= | CONTAINS

Patterns are triples and match statements in every graph (a statement
present in two graphs joins once). Filter comparisons work on the
bound term: = and != are term equality; the ordering operators compare
two numeric literals numerically, otherwise two terms of the same kind
by their text, and terms of different kinds never satisfy an ordering
operator; CONTAINS is substring containment on the term's plain text.
Result rows are sorted by the text of the projected terms, leftmost
variable first, before any LIMIT is applied.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from citegraph.errors import NTriplesSyntaxError, QuerySyntaxError, UnboundVariable
from citegraph.ntriples import _Cursor
from citegraph.store import QuadStore
from citegraph.terms import Blank, Iri, Literal, Term, term_text

_KEYWORDS = {"SELECT", "WHERE", "FILTER", "LIMIT", "CONTAINS"}
_OPS = {"=", "!=", "<", "<=", ">", ">=", "CONTAINS"}

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
      | (?P<iri><[^<>\s]*>)
      | (?P<literal>"(?:[^"\\]|\\.)*"(?:\^\^<[^<>\s]*>|@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*)?)
      | (?P<blank>_:[A-Za-z0-9][A-Za-z0-9_.-]*)
      | (?P<int>[0-9]+)
      | (?P<word>[A-Za-z]+)
      | (?P<op>!=|<=|>=|=|<|>)
      | (?P<punct>[{}().])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Var:
    name: str


PatternTerm = Union[Var, Iri, Literal, Blank]
Pattern = tuple[PatternTerm, PatternTerm, PatternTerm]


@dataclass(frozen=True)
class Filter:
    var: Var
    op: str
    value: Term


@dataclass(frozen=True)
class Query:
    variables: tuple[Var, ...]
    patterns: tuple[Pattern, ...]
    filters: tuple[Filter, ...] = ()
    limit: int | None = None


@dataclass(frozen=True)
class BindingSet:
    variables: tuple[str, ...]
    rows: tuple[tuple[Term, ...], ...]


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}",
                                   line, pos - line_start + 1)
        kind = m.lastgroup
        raw = m.group()
        if kind == "ws":
            line += raw.count("\n")
            if "\n" in raw:
                line_start = m.start() + raw.rindex("\n") + 1
        else:
            column = m.start() - line_start + 1
            if kind == "word":
                upper = raw.upper()
                if upper not in _KEYWORDS:
                    raise QuerySyntaxError(f"unknown keyword {raw!r}", line, column)
                kind, raw = "keyword", upper
            tokens.append(_Token(kind, raw, line, column))
        pos = m.end()
    tokens.append(_Token("eof", "", line, len(text) - line_start + 1))
    return tokens


def _literal_from_token(tok: _Token) -> Literal:
    cur = _Cursor(tok.text, tok.line)
    try:
        return cur.read_literal()
    except NTriplesSyntaxError as exc:
        raise QuerySyntaxError(str(exc), tok.line, tok.column) from None


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise QuerySyntaxError(message, tok.line, tok.column)

    def expect_keyword(self, word: str) -> None:
        tok = self.next()
        if tok.kind != "keyword" or tok.text != word:
            self.fail(f"expected {word}", tok)

    def expect_punct(self, ch: str) -> None:
        tok = self.next()
        if tok.kind != "punct" or tok.text != ch:
            self.fail(f"expected {ch!r}", tok)

    def term(self) -> PatternTerm:
        tok = self.next()
        if tok.kind == "var":
            return Var(tok.text[1:])
        if tok.kind == "iri":
            return Iri(tok.text[1:-1])
        if tok.kind == "literal":
            return _literal_from_token(tok)
        if tok.kind == "blank":
            return Blank(tok.text[2:])
        self.fail("expected a term", tok)

    def constant(self) -> Term:
        tok = self.peek()
        if tok.kind == "iri":
            return Iri(self.next().text[1:-1])
        if tok.kind == "literal":
            return _literal_from_token(self.next())
        self.fail("expected a literal or IRI", tok)


def parse_query(text: str) -> Query:
    parser = _Parser(_tokenize(text))
    parser.expect_keyword("SELECT")
    variables = []
    while parser.peek().kind == "var":
        variables.append(Var(parser.next().text[1:]))
    if not variables:
        parser.fail("expected at least one variable after SELECT")
    parser.expect_keyword("WHERE")
    parser.expect_punct("{")

    patterns: list[Pattern] = []
    while True:
        patterns.append((parser.term(), parser.term(), parser.term()))
        parser.expect_punct(".")
        nxt = parser.peek()
        if nxt.kind in ("var", "iri", "literal", "blank"):
            continue
        break

    filters: list[Filter] = []
    while parser.peek().kind == "keyword" and parser.peek().text == "FILTER":
        parser.next()
        parser.expect_punct("(")
        tok = parser.next()
        if tok.kind != "var":
            parser.fail("FILTER must test a variable", tok)
        var = Var(tok.text[1:])
        op_tok = parser.next()
        if op_tok.kind == "op":
            op = op_tok.text
        elif op_tok.kind == "keyword" and op_tok.text == "CONTAINS":
            op = "CONTAINS"
        else:
            parser.fail("expected a comparison operator", op_tok)
        filters.append(Filter(var, op, parser.constant()))
        parser.expect_punct(")")

    parser.expect_punct("}")
    limit = None
    if parser.peek().kind == "keyword" and parser.peek().text == "LIMIT":
        parser.next()
        tok = parser.next()
        if tok.kind != "int":
            parser.fail("LIMIT needs an integer", tok)
        limit = int(tok.text)
    if parser.peek().kind != "eof":
        parser.fail("unexpected trailing content")

    seen = {t.name for pat in patterns for t in pat if isinstance(t, Var)}
    for v in variables:
        if v.name not in seen:
            raise UnboundVariable(f"projected variable ?{v.name} appears in no pattern")
    for f in filters:
        if f.var.name not in seen:
            raise UnboundVariable(f"filtered variable ?{f.var.name} appears in no pattern")

    return Query(tuple(variables), tuple(patterns), tuple(filters), limit)


# --- evaluation --------------------------------------------------------------

def _as_number(lexical: str) -> float | None:
    try:
        return int(lexical)
    except ValueError:
        try:
            return float(lexical)
        except ValueError:
            return None


def _plain_text(term: Term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, Blank):
        return term.label
    return term.lexical


def filter_passes(term: Term, op: str, const: Term) -> bool:
    """Shared comparison semantics; see the module docstring."""
    if op == "=":
        return term == const
    if op == "!=":
        return term != const
    if op == "CONTAINS":
        return _plain_text(const) in _plain_text(term)
    if isinstance(term, Literal) and isinstance(const, Literal):
        a, b = _as_number(term.lexical), _as_number(const.lexical)
        if a is not None and b is not None:
            left, right = a, b
        else:
            left, right = term.lexical, const.lexical
    elif type(term) is type(const):
        left, right = _plain_text(term), _plain_text(const)
    else:
        return False
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


def _pattern_ids(store: QuadStore, pattern: Pattern,
                 binding: dict[str, int]) -> tuple[int | None, ...]:
    out: list[int | None] = []
    for t in pattern:
        if isinstance(t, Var):
            out.append(binding.get(t.name))
        else:
            tid = store.id_of(t)
            out.append(-1 if tid is None else tid)
    out.append(None)  # any graph
    return tuple(out)


def _match_triples(store: QuadStore, ids) -> list[tuple[int, int, int]]:
    return sorted({(s, p, o) for (s, p, o, _g) in store.match_ids(ids)})


def evaluate(store: QuadStore, query: Query) -> BindingSet:
    """Join the patterns most-selective-first, filter, project, sort, limit."""
    with store.reading():
        counts = []
        for i, pattern in enumerate(query.patterns):
            hits = _match_triples(store, _pattern_ids(store, pattern, {}))
            counts.append((len(hits), i))
        order = [i for _, i in sorted(counts)]

        solutions: list[dict[str, int]] = [{}]
        for i in order:
            pattern = query.patterns[i]
            grown: list[dict[str, int]] = []
            for sol in solutions:
                for triple in _match_triples(store, _pattern_ids(store, pattern, sol)):
                    ext = dict(sol)
                    ok = True
                    for t, tid in zip(pattern, triple):
                        if not isinstance(t, Var):
                            continue
                        bound = ext.get(t.name)
                        if bound is None:
                            ext[t.name] = tid
                        elif bound != tid:
                            ok = False
                            break
                    if ok:
                        grown.append(ext)
            solutions = grown
            if not solutions:
                break

        rows = []
        for sol in solutions:
            terms = {name: store.lookup(tid) for name, tid in sol.items()}
            if all(filter_passes(terms[f.var.name], f.op, f.value) for f in query.filters):
                rows.append(tuple(terms[v.name] for v in query.variables))

    rows.sort(key=lambda row: tuple(term_text(t) for t in row))
    if query.limit is not None:
        rows = rows[:query.limit]
    return BindingSet(tuple(v.name for v in query.variables), tuple(rows))
