"""Quad store tests: dictionary, indexes, pattern matching, line I/O."""

import random
import threading

import pytest

from citegraph.errors import NTriplesSyntaxError, TermNotFound
from citegraph.ntriples import (
    parse_nquads,
    parse_ntriples,
    serialize_nquads,
    serialize_ntriples,
)
from citegraph.store import DEFAULT_GRAPH, QuadStore, _ORDERS
from citegraph.terms import Blank, Iri, Literal, Quad, TermDict, term_text

CITES = Iri("http://purl.org/spar/cito/cites")


def iri(n):
    return Iri(f"http://x.test/{n}")


class TestTermDict:
    def test_intern_idempotent(self):
        d = TermDict()
        assert d.intern(CITES) == d.intern(CITES)
        assert len(d) == 1

    def test_lookup_inverts_intern(self):
        d = TermDict()
        terms = [CITES, Literal("x"), Literal("5", datatype="http://www.w3.org/2001/XMLSchema#integer"),
                 Literal("hi", language="en"), Blank("b0")]
        for t in terms:
            assert d.lookup(d.intern(t)) == t

    def test_unassigned_id_reported(self):
        with pytest.raises(TermNotFound):
            TermDict().lookup(404)

    def test_id_of_never_allocates(self):
        d = TermDict()
        assert d.id_of(CITES) is None
        assert len(d) == 0


class TestTermInvariants:
    def test_literal_datatype_xor_language(self):
        with pytest.raises(ValueError):
            Literal("x", datatype="http://d.test/t", language="en")

    def test_quad_positions(self):
        with pytest.raises(ValueError):
            Quad(Literal("s"), CITES, iri(1))
        with pytest.raises(ValueError):
            Quad(iri(1), Literal("p"), iri(2))
        with pytest.raises(ValueError):
            Quad(iri(1), CITES, iri(2), graph=Literal("g"))
        Quad(Blank("b"), CITES, Literal("fine"))

    def test_term_text_forms(self):
        assert term_text(iri(1)) == "<http://x.test/1>"
        assert term_text(Blank("b0")) == "_:b0"
        assert term_text(Literal('sa"id')) == '"sa\\"id"'
        assert term_text(Literal("5", datatype="http://d.test/int")) == '"5"^^<http://d.test/int>'
        assert term_text(Literal("hi", language="en")) == '"hi"@en'


class TestStoreBasics:
    def test_duplicate_insert_returns_false(self):
        s = QuadStore()
        q = Quad(iri("a"), CITES, iri("b"))
        assert s.insert_quad(q) is True
        assert s.insert_quad(q) is False
        assert len(s) == 1

    def test_insert_then_remove_leaves_empty(self):
        s = QuadStore()
        q = Quad(iri("a"), CITES, iri("b"))
        s.insert_quad(q)
        assert s.remove_quad(q) is True
        assert s.remove_quad(q) is False
        assert len(s) == 0
        assert s.quads() == []

    def test_predicate_match(self):
        s = QuadStore()
        s.insert_quad(Quad(iri("PaperA"), CITES, iri("PaperB")))
        s.insert_quad(Quad(iri("PaperA"), Iri("http://x.test/title"), Literal("t")))
        hits = s.match_pattern(p=CITES)
        assert len(hits) == 1
        assert hits[0].object == iri("PaperB")

    def test_relative_iri_rejected_at_insert(self):
        s = QuadStore()
        with pytest.raises(ValueError):
            s.insert_quad(Quad(Iri("a"), CITES, iri("b")))

    def test_unknown_term_matches_nothing(self):
        s = QuadStore()
        s.insert_quad(Quad(iri("a"), CITES, iri("b")))
        assert s.match_pattern(s=iri("never-seen")) == []

    def test_graph_wildcard_and_default_marker(self):
        s = QuadStore()
        g = iri("g1")
        s.insert_quad(Quad(iri("a"), CITES, iri("b")))
        s.insert_quad(Quad(iri("a"), CITES, iri("b"), graph=g))
        assert len(s.match_pattern(s=iri("a"))) == 2
        assert len(s.match_pattern(s=iri("a"), g=DEFAULT_GRAPH)) == 1
        assert s.match_pattern(g=g)[0].graph == g


def random_quad(rng, n_terms=8, graphs=(None, "g1", "g2")):
    def pick_node():
        return Blank(f"b{rng.randrange(3)}") if rng.random() < 0.15 else iri(rng.randrange(n_terms))

    def pick_object():
        if rng.random() < 0.3:
            return Literal(str(rng.randrange(n_terms)))
        return pick_node()

    g = rng.choice(graphs)
    return Quad(pick_node(), Iri(f"http://x.test/p{rng.randrange(4)}"),
                pick_object(), graph=None if g is None else iri(g))


def naive_match(quads, s=None, p=None, o=None, g="any"):
    out = []
    for q in quads:
        if s is not None and q.subject != s:
            continue
        if p is not None and q.predicate != p:
            continue
        if o is not None and q.object != o:
            continue
        if g != "any" and q.graph != g:
            continue
        out.append(q)
    return out


def index_contents(store, name):
    order = _ORDERS[name]
    inverse = [0, 0, 0, 0]
    for slot, original in enumerate(order):
        inverse[original] = slot
    found = set()
    index = store._indexes[name]
    for a, la in index.items():
        for b, lb in la.items():
            for c, lc in lb.items():
                for d in lc:
                    keys = (a, b, c, d)
                    found.add(tuple(keys[inverse[i]] for i in range(4)))
    return found


class TestMatchAgainstOracle:
    def test_random_patterns_match_naive_scan(self):
        for seed in range(80):
            rng = random.Random(seed)
            store = QuadStore()
            live = set()
            for _ in range(rng.randrange(1, 60)):
                q = random_quad(rng)
                if rng.random() < 0.2 and live:
                    victim = rng.choice(sorted(live, key=repr))
                    store.remove_quad(victim)
                    live.discard(victim)
                else:
                    store.insert_quad(q)
                    live.add(q)
            assert len(store) == len(live)
            for _ in range(10):
                probe = random_quad(rng)
                s = probe.subject if rng.random() < 0.5 else None
                p = probe.predicate if rng.random() < 0.5 else None
                o = probe.object if rng.random() < 0.5 else None
                got = store.match_pattern(s=s, p=p, o=o)
                want = naive_match(live, s=s, p=p, o=o)
                assert sorted(map(repr, got)) == sorted(map(repr, want))

    def test_all_three_indexes_hold_identical_sets(self):
        rng = random.Random(5)
        store = QuadStore()
        for _ in range(200):
            if rng.random() < 0.3 and len(store):
                store.remove_quad(rng.choice(store.quads()))
            else:
                store.insert_quad(random_quad(rng))
        spog = index_contents(store, "spog")
        assert spog == index_contents(store, "posg") == index_contents(store, "ospg")
        assert len(spog) == len(store)


def test_concurrent_readers_see_whole_quads():
    store = QuadStore()
    stop = threading.Event()
    errors = []

    def writer():
        for i in range(300):
            store.insert_quad(Quad(iri(f"s{i}"), CITES, iri(f"o{i}")))
        stop.set()

    def reader():
        while not stop.is_set():
            for q in store.match_pattern(p=CITES):
                if q.subject.value[len("http://x.test/s"):] != q.object.value[len("http://x.test/o"):]:
                    errors.append(q)

    threads = [threading.Thread(target=writer)] + [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(store) == 300


class TestNTriples:
    def test_single_triple(self):
        quads = parse_ntriples('<a:x> <b:y> "c" .')
        assert quads == [Quad(Iri("a:x"), Iri("b:y"), Literal("c"))]
        assert quads[0].graph is None

    def test_relative_iri_parses(self):
        # the line format does not police absoluteness; the store does
        assert parse_ntriples("<a> <b> <c> .")[0].subject == Iri("a")

    def test_escaped_quote_round_trip(self):
        line = '<a:s> <a:p> "sa\\"id" .\n'
        quads = parse_ntriples(line)
        assert quads[0].object == Literal('sa"id')
        assert serialize_ntriples(quads) == line

    def test_all_escapes_round_trip(self):
        text = 'tab\there "quote" back\\slash\nnewline\rcr'
        out = serialize_ntriples([Quad(Iri("a:s"), Iri("a:p"), Literal(text))])
        assert parse_ntriples(out)[0].object == Literal(text)
        assert "\n" not in out.strip("\n")

    def test_datatype_and_language(self):
        doc = ('<a:s> <a:p> "5"^^<http://www.w3.org/2001/XMLSchema#integer> .\n'
               '<a:s> <a:p> "hi"@en-GB .\n')
        quads = parse_ntriples(doc)
        assert quads[0].object.datatype == "http://www.w3.org/2001/XMLSchema#integer"
        assert quads[1].object.language == "en-GB"
        assert serialize_ntriples(quads) == doc

    def test_blank_nodes_and_comments(self):
        doc = "# leading comment\n\n_:b0 <a:p> _:b1 .\n"
        quads = parse_ntriples(doc)
        assert quads == [Quad(Blank("b0"), Iri("a:p"), Blank("b1"))]

    def test_serializer_sorts_and_dedupes(self):
        a = Quad(Iri("a:1"), Iri("a:p"), Literal("x"))
        b = Quad(Iri("a:0"), Iri("a:p"), Literal("y"))
        assert serialize_ntriples([a, b, a]) == serialize_ntriples([b, a])
        assert serialize_ntriples([a, b]).splitlines()[0].startswith("<a:0>")

    def test_parse_serialize_identity_on_canonical_docs(self):
        rng = random.Random(3)
        for _ in range(20):
            quads = {random_quad(rng) for _ in range(rng.randrange(1, 30))}
            doc = serialize_nquads(quads)
            assert serialize_nquads(parse_nquads(doc)) == doc
            triple_doc = serialize_ntriples(quads)
            assert serialize_ntriples(parse_ntriples(triple_doc)) == triple_doc

    def test_nquads_graph_column(self):
        doc = "<a:s> <a:p> <a:o> <a:g> .\n"
        quads = parse_nquads(doc)
        assert quads[0].graph == Iri("a:g")
        assert serialize_nquads(quads) == doc
        with pytest.raises(NTriplesSyntaxError):
            parse_ntriples(doc)

    def test_default_graph_sorts_before_named(self):
        named = Quad(Iri("a:s"), Iri("a:p"), Iri("a:o"), graph=Iri("a:g"))
        plain = Quad(Iri("z:s"), Iri("z:p"), Iri("z:o"))
        lines = serialize_nquads([named, plain]).splitlines()
        assert lines[0].startswith("<z:s>")

    @pytest.mark.parametrize("bad,line_no", [
        ('<a:s> <a:p> "unterminated .', 1),
        ("<a:s> <a:p> <a:o>", 1),
        ('<a:s> <a:p> "x" extra junk .', 1),
        ('<a:s> <a:p> "bad\\qescape" .', 1),
        ('<a:s> <a:p> <a:o> .\n"lit" <a:p> <a:o> .', 2),
        ("<a:s> <never closed", 1),
    ])
    def test_errors_carry_line_numbers(self, bad, line_no):
        with pytest.raises(NTriplesSyntaxError) as info:
            parse_nquads(bad)
        assert info.value.line == line_no
