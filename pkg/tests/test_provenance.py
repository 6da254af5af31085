"""Snapshot log behavior, delta text round trips, and time travel."""

import random
from datetime import datetime, timedelta, timezone

import pytest

from citegraph import vocab
from citegraph.errors import (
    AlreadyExists,
    BeforeCreation,
    DeltaSyntaxError,
    NonMonotonicTime,
    NoSuchEntity,
    RemovedQuadAbsent,
)
from citegraph.ntriples import parse_nquads, serialize_nquads
from citegraph.provenance import Delta, ProvenanceLog, parse_delta, serialize_delta
from citegraph.store import QuadStore
from citegraph.terms import Iri, Literal, Quad

ENTITY = Iri("https://w3id.org/oc/corpus/br/1")
T0 = datetime(2026, 8, 15, 12, 0, 0, tzinfo=timezone.utc)


def _t(seconds: int) -> datetime:
    return T0 + timedelta(seconds=seconds)


def _title(text: str) -> Quad:
    return Quad(ENTITY, vocab.TITLE, Literal(text))


def _fresh() -> tuple[QuadStore, ProvenanceLog]:
    store = QuadStore()
    return store, ProvenanceLog(store)


class TestRecording:
    def test_creation_is_seq_one_and_live(self):
        _, log = _fresh()
        snap = log.record_creation(ENTITY, {_title("A")}, "curator", "src", T0)
        assert snap.seq == 1
        assert snap.invalidated_at is None
        assert snap.delta.empty
        assert log.current_snapshot(ENTITY).seq == 1

    def test_creation_inserts_into_store(self):
        store, log = _fresh()
        log.record_creation(ENTITY, {_title("A")}, "curator", "src", T0)
        assert store.match_pattern(s=ENTITY) == [_title("A")]

    def test_duplicate_creation(self):
        _, log = _fresh()
        log.record_creation(ENTITY, set(), "curator", "src", T0)
        with pytest.raises(AlreadyExists):
            log.record_creation(ENTITY, set(), "curator", "src", _t(5))

    def test_title_change(self):
        store, log = _fresh()
        log.record_creation(ENTITY, {_title("A")}, "curator", "src", T0)
        snap = log.record_update(
            ENTITY, Delta(added={_title("B")}, removed={_title("A")}),
            "curator", "src", _t(10), description="title fixed")
        assert snap.seq == 2
        assert store.match_pattern(s=ENTITY, p=vocab.TITLE) == [_title("B")]
        assert log.current_snapshot(ENTITY) is snap
        assert log.snapshots(ENTITY)[0].invalidated_at == _t(10)

    def test_empty_delta_is_a_valid_confirmation(self):
        _, log = _fresh()
        log.record_creation(ENTITY, {_title("A")}, "curator", "src", T0)
        snap = log.record_update(ENTITY, Delta(), "curator", "recheck", _t(3))
        assert snap.seq == 2
        assert log.entity_quads(ENTITY) == {_title("A")}

    @pytest.mark.parametrize("when", [_t(-5), T0])
    def test_non_monotonic_time(self, when):
        _, log = _fresh()
        log.record_creation(ENTITY, set(), "curator", "src", T0)
        with pytest.raises(NonMonotonicTime):
            log.record_update(ENTITY, Delta(), "curator", "src", when)

    def test_subsecond_gap_is_a_tie(self):
        _, log = _fresh()
        log.record_creation(ENTITY, set(), "curator", "src", T0)
        with pytest.raises(NonMonotonicTime):
            log.record_update(ENTITY, Delta(), "curator", "src",
                              T0 + timedelta(microseconds=900_000))

    def test_removed_quad_absent(self):
        _, log = _fresh()
        log.record_creation(ENTITY, {_title("A")}, "curator", "src", T0)
        with pytest.raises(RemovedQuadAbsent):
            log.record_update(ENTITY, Delta(removed={_title("zzz")}),
                              "curator", "src", _t(5))

    def test_unknown_entity(self):
        _, log = _fresh()
        with pytest.raises(NoSuchEntity):
            log.record_update(ENTITY, Delta(), "curator", "src", T0)
        with pytest.raises(NoSuchEntity):
            log.reconstruct_at(ENTITY, T0)
        with pytest.raises(NoSuchEntity):
            log.snapshots(ENTITY)

    def test_naive_datetimes_read_as_utc(self):
        _, log = _fresh()
        snap = log.record_creation(ENTITY, set(), "curator", "src",
                                   datetime(2026, 8, 15, 12, 0, 0, 123456))
        assert snap.generated_at == T0

    def test_overlapping_delta_rejected(self):
        with pytest.raises(ValueError):
            Delta(added={_title("A")}, removed={_title("A")})


class TestReconstruction:
    def _two_step(self):
        store, log = _fresh()
        log.record_creation(ENTITY, {_title("A")}, "curator", "src", T0)
        log.record_update(ENTITY, Delta(added={_title("B")}, removed={_title("A")}),
                          "curator", "src", _t(10))
        return log

    def test_between_snapshots(self):
        log = self._two_step()
        assert log.reconstruct_at(ENTITY, _t(5)) == {_title("A")}

    def test_at_boundaries(self):
        log = self._two_step()
        assert log.reconstruct_at(ENTITY, T0) == {_title("A")}
        assert log.reconstruct_at(ENTITY, _t(10)) == {_title("B")}

    def test_after_latest(self):
        log = self._two_step()
        assert log.reconstruct_at(ENTITY, _t(9999)) == {_title("B")}

    def test_before_creation(self):
        log = self._two_step()
        with pytest.raises(BeforeCreation):
            log.reconstruct_at(ENTITY, _t(-1))

    def test_inverse_application_restores_state(self):
        rng = random.Random(7)
        state = {_title(f"q{i}") for i in range(6)}
        removed = set(rng.sample(sorted(state, key=repr), 2))
        delta = Delta(added={_title("new")}, removed=removed)
        after = (state - delta.removed) | delta.added
        back = (after - delta.inverse().removed) | delta.inverse().added
        assert back == state


class TestLogIntegrity:
    def test_gapless_increasing_single_live(self):
        _, log = _fresh()
        log.record_creation(ENTITY, set(), "curator", "src", T0)
        for k in range(2, 8):
            log.record_update(ENTITY, Delta(added={_title(f"t{k}")}),
                              "curator", "src", _t(10 * k))
        snaps = log.snapshots(ENTITY)
        assert [s.seq for s in snaps] == list(range(1, 8))
        times = [s.generated_at for s in snaps]
        assert times == sorted(times) and len(set(times)) == len(times)
        live = [s for s in snaps if s.invalidated_at is None]
        assert [s.seq for s in live] == [snaps[-1].seq]
        for prev, nxt in zip(snaps, snaps[1:]):
            assert prev.invalidated_at == nxt.generated_at


class TestDeltaText:
    def test_empty(self):
        assert serialize_delta(Delta()) == "DELETE DATA { }; INSERT DATA { }"
        assert parse_delta("DELETE DATA { }; INSERT DATA { }") == Delta()

    def test_one_add_round_trips_byte_exactly(self):
        d = Delta(added={_title("only")})
        text = serialize_delta(d)
        assert parse_delta(text) == d
        assert serialize_delta(parse_delta(text)) == text

    def test_braces_inside_literals(self):
        d = Delta(added={_title('set {a, b}; right')},
                  removed={Quad(ENTITY, vocab.TITLE, Literal('old "quoted"'),
                                Iri("https://g.example/1"))})
        assert parse_delta(serialize_delta(d)) == d

    @pytest.mark.parametrize("text,line", [
        ("DELETE DATA { }", 1),
        ("INSERT DATA { }; DELETE DATA { }", 1),
        ("DELETE DATA {\n<a:b> <a:c> .\n}; INSERT DATA { }", 2),
        ("DELETE DATA { }; INSERT DATA {\n\n<a:b> nope <a:c> .\n}", 3),
        ("DELETE DATA { }; INSERT DATA { } trailing", 1),
        ("DELETE DATA { ; INSERT DATA { }", 1),
    ])
    def test_malformed(self, text, line):
        with pytest.raises(DeltaSyntaxError) as err:
            parse_delta(text)
        assert err.value.line == line

    def test_random_round_trips(self):
        for seed in range(30):
            rng = random.Random(seed)
            pool = [Quad(Iri(f"b:s{i}"), Iri(f"b:p{i % 3}"),
                         Literal(f"v{i}", datatype="b:dt" if i % 4 == 0 else None),
                         Iri(f"b:g{i % 2}") if i % 5 == 0 else None)
                    for i in range(10)]
            chosen = rng.sample(pool, 6)
            d = Delta(added=set(chosen[:3]), removed=set(chosen[3:]))
            text = serialize_delta(d)
            assert parse_delta(text) == d
            assert serialize_delta(parse_delta(text)) == text


class TestProvQuads:
    def test_graph_and_properties(self):
        _, log = _fresh()
        log.record_creation(ENTITY, {_title("A")}, "curator",
                            "https://api.crossref.org", T0)
        delta = Delta(added={_title("B")}, removed={_title("A")})
        log.record_update(ENTITY, delta, "curator",
                          "https://api.crossref.org", _t(10), "title fixed")
        quads = log.prov_quads(ENTITY)
        graph = Iri(ENTITY.value + "/prov")
        assert quads and all(q.graph == graph for q in quads)
        se1 = Iri(ENTITY.value + "/prov/se/1")
        se2 = Iri(ENTITY.value + "/prov/se/2")
        assert Quad(se1, vocab.SPECIALIZATION_OF, ENTITY, graph) in quads
        assert Quad(se1, vocab.GENERATED_AT_TIME,
                    Literal("2026-08-15T12:00:00Z", datatype=vocab.XSD_DATETIME),
                    graph) in quads
        assert Quad(se1, vocab.INVALIDATED_AT_TIME,
                    Literal("2026-08-15T12:00:10Z", datatype=vocab.XSD_DATETIME),
                    graph) in quads
        assert Quad(se2, vocab.HAD_PRIMARY_SOURCE,
                    Iri("https://api.crossref.org"), graph) in quads
        update_texts = [q.object.lexical for q in quads
                        if q.subject == se2 and q.predicate == vocab.HAS_UPDATE_QUERY]
        assert len(update_texts) == 1
        assert parse_delta(update_texts[0]) == delta
        no_query = [q for q in quads
                    if q.subject == se1 and q.predicate == vocab.HAS_UPDATE_QUERY]
        assert no_query == []

    def test_round_trips_through_nquads(self):
        _, log = _fresh()
        log.record_creation(ENTITY, {_title("A")}, "curator", "src", T0)
        log.record_update(ENTITY, Delta(added={_title("B")}), "curator", "src", _t(4))
        text = serialize_nquads(log.prov_quads())
        assert set(parse_nquads(text)) == set(log.prov_quads())


def _random_quad(rng: random.Random) -> Quad:
    return Quad(ENTITY, Iri(f"ex:p{rng.randint(0, 5)}"),
                Literal(f"v{rng.randint(0, 30)}"))


def test_time_travel_matches_full_copy_oracle():
    for seed in range(100):
        rng = random.Random(seed)
        store = QuadStore()
        log = ProvenanceLog(store)
        state = {_random_quad(rng) for _ in range(rng.randint(0, 8))}
        log.record_creation(ENTITY, state, "curator", "seed", T0)
        copies = [(T0, frozenset(state))]
        when = T0
        for _ in range(rng.randint(1, 20)):
            removable = sorted(state, key=repr)
            removed = set(rng.sample(removable, min(len(removable), rng.randint(0, 3))))
            added = {q for q in (_random_quad(rng) for _ in range(rng.randint(0, 3)))
                     if q not in removed}
            state = (state - removed) | added
            when += timedelta(seconds=rng.randint(2, 40))
            log.record_update(ENTITY, Delta(added=added, removed=removed),
                              "curator", "seed", when)
            copies.append((when, frozenset(state)))
        probes = []
        for (t_a, copy_a), (t_b, _) in zip(copies, copies[1:]):
            probes.append((t_a, copy_a))
            probes.append((t_a + (t_b - t_a) / 2, copy_a))
        probes.append(copies[-1])
        probes.append((copies[-1][0] + timedelta(seconds=60), copies[-1][1]))
        for t, expected in probes:
            assert log.reconstruct_at(ENTITY, t) == expected, f"seed {seed} at {t}"
        assert log.entity_quads(ENTITY) == copies[-1][1]
