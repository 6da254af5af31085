"""Snapshot logs: who changed which entity, when, and what exactly.

Each tracked entity carries a gapless snapshot sequence starting at 1.
The creation snapshot has an empty delta; every later snapshot stores the
forward delta that produced it. Reading current data costs nothing; going
back in time applies inverse deltas from the newest snapshot downward, so
reconstruction cost scales with distance into the past, not with history
length up front.

Writes go through the store one quad at a time (single-writer discipline).
reconstruct_at never touches the store: it replays the log's own record of
the entity's quads, so it is safe to call concurrently with writers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from citegraph import vocab
from citegraph.errors import (
    AlreadyExists,
    BeforeCreation,
    DeltaSyntaxError,
    NoSuchEntity,
    NonMonotonicTime,
    NTriplesSyntaxError,
    RemovedQuadAbsent,
)
from citegraph.mapping import IriMinter
from citegraph.ntriples import parse_nquads, serialize_nquads
from citegraph.store import QuadStore
from citegraph.terms import Iri, Literal, Quad


@dataclass(frozen=True)
class Delta:
    """A reversible change: quads to remove and quads to add."""

    added: frozenset[Quad] = frozenset()
    removed: frozenset[Quad] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "added", frozenset(self.added))
        object.__setattr__(self, "removed", frozenset(self.removed))
        overlap = self.added & self.removed
        if overlap:
            raise ValueError(f"{len(overlap)} quad(s) both added and removed")

    @property
    def empty(self) -> bool:
        return not self.added and not self.removed

    def inverse(self) -> Delta:
        return Delta(added=self.removed, removed=self.added)


@dataclass(frozen=True)
class Snapshot:
    entity: Iri
    seq: int
    generated_at: datetime
    agent: str
    primary_source: str
    description: str = ""
    invalidated_at: datetime | None = None
    delta: Delta = field(default_factory=Delta)


def _utc_second(t: datetime) -> datetime:
    """Clamp to the log's resolution: UTC, whole seconds."""
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc).replace(microsecond=0)


def _timestamp_literal(t: datetime) -> Literal:
    return Literal(t.strftime("%Y-%m-%dT%H:%M:%SZ"), datatype=vocab.XSD_DATETIME)


def _ref_term(text: str):
    # agent and source refs may be IRIs or plain labels
    return Iri(text) if "://" in text or text.startswith("urn:") else Literal(text)


class ProvenanceLog:
    """Per-entity snapshot history bound to one quad store."""

    def __init__(self, store: QuadStore, minter: IriMinter | None = None):
        self._store = store
        self._minter = minter or IriMinter()
        self._snapshots: dict[Iri, list[Snapshot]] = {}
        self._current: dict[Iri, set[Quad]] = {}

    def entities(self) -> list[Iri]:
        return list(self._snapshots)

    def snapshots(self, entity: Iri) -> tuple[Snapshot, ...]:
        return tuple(self._snapshots[self._known(entity)])

    def current_snapshot(self, entity: Iri) -> Snapshot:
        return self._snapshots[self._known(entity)][-1]

    def entity_quads(self, entity: Iri) -> frozenset[Quad]:
        return frozenset(self._current[self._known(entity)])

    def record_creation(self, entity: Iri, initial_quads, agent: str,
                        source: str, time: datetime,
                        description: str = "") -> Snapshot:
        if entity in self._snapshots:
            raise AlreadyExists(f"entity already tracked: {entity.value}")
        quads = set(initial_quads)
        snap = Snapshot(entity=entity, seq=1, generated_at=_utc_second(time),
                        agent=agent, primary_source=source,
                        description=description)
        self._store.insert_many(quads)
        self._snapshots[entity] = [snap]
        self._current[entity] = quads
        return snap

    def record_update(self, entity: Iri, delta: Delta, agent: str,
                      source: str, time: datetime,
                      description: str = "") -> Snapshot:
        history = self._snapshots[self._known(entity)]
        time = _utc_second(time)
        last = history[-1]
        if time <= last.generated_at:
            raise NonMonotonicTime(
                f"{time.isoformat()} is not after {last.generated_at.isoformat()}")
        current = self._current[entity]
        missing = delta.removed - current
        if missing:
            sample = serialize_nquads(list(missing)[:1]).strip()
            raise RemovedQuadAbsent(
                f"{len(missing)} quad(s) to remove are not present, e.g. {sample}")
        # drop adds that are already present, else the inverse delta would
        # delete quads the entity held before this update
        delta = Delta(added=delta.added - current, removed=delta.removed)
        snap = Snapshot(entity=entity, seq=last.seq + 1, generated_at=time,
                        agent=agent, primary_source=source,
                        description=description, delta=delta)
        for q in delta.removed:
            self._store.remove_quad(q)
        for q in delta.added:
            self._store.insert_quad(q)
        current -= delta.removed
        current |= delta.added
        history[-1] = replace(last, invalidated_at=time)
        history.append(snap)
        return snap

    def reconstruct_at(self, entity: Iri, t: datetime) -> set[Quad]:
        history = self._snapshots[self._known(entity)]
        t = _utc_second(t)
        if t < history[0].generated_at:
            raise BeforeCreation(
                f"{t.isoformat()} predates creation at "
                f"{history[0].generated_at.isoformat()}")
        state = set(self._current[entity])
        for snap in reversed(history):
            if snap.generated_at <= t:
                break
            state -= snap.delta.added
            state |= snap.delta.removed
        return state

    def prov_quads(self, entity: Iri | None = None) -> list[Quad]:
        """History rendered as quads, one named graph per entity."""
        targets = [self._known(entity)] if entity is not None else self.entities()
        out: list[Quad] = []
        for target in targets:
            graph = self._minter.prov_graph(target)
            for snap in self._snapshots[target]:
                se = self._minter.snapshot(target, snap.seq)
                out.append(Quad(se, vocab.SPECIALIZATION_OF, target, graph))
                out.append(Quad(se, vocab.GENERATED_AT_TIME,
                                _timestamp_literal(snap.generated_at), graph))
                if snap.invalidated_at is not None:
                    out.append(Quad(se, vocab.INVALIDATED_AT_TIME,
                                    _timestamp_literal(snap.invalidated_at), graph))
                out.append(Quad(se, vocab.WAS_ATTRIBUTED_TO,
                                _ref_term(snap.agent), graph))
                out.append(Quad(se, vocab.HAD_PRIMARY_SOURCE,
                                _ref_term(snap.primary_source), graph))
                if snap.description:
                    out.append(Quad(se, vocab.DESCRIPTION,
                                    Literal(snap.description), graph))
                if snap.seq > 1:
                    out.append(Quad(se, vocab.HAS_UPDATE_QUERY,
                                    Literal(serialize_delta(snap.delta)), graph))
        return out

    def _known(self, entity: Iri) -> Iri:
        if entity not in self._snapshots:
            raise NoSuchEntity(f"no provenance log for {entity.value}")
        return entity


# --- delta text --------------------------------------------------------------

def serialize_delta(d: Delta) -> str:
    return (_section("DELETE DATA", d.removed)
            + "; "
            + _section("INSERT DATA", d.added))


def _section(keyword: str, quads: frozenset[Quad]) -> str:
    if not quads:
        return keyword + " { }"
    return f"{keyword} {{\n{serialize_nquads(quads)}}}"


def parse_delta(text: str) -> Delta:
    scanner = _Scanner(text)
    removed = scanner.section("DELETE DATA")
    scanner.expect(";")
    added = scanner.section("INSERT DATA")
    scanner.end()
    try:
        return Delta(added=frozenset(added), removed=frozenset(removed))
    except ValueError as exc:
        raise DeltaSyntaxError(str(exc), 1)


class _Scanner:
    """Brace-matching scanner for delta text; quote-aware, line-tracking."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def line(self, pos: int | None = None) -> int:
        return self.text.count("\n", 0, self.pos if pos is None else pos) + 1

    def fail(self, message: str):
        raise DeltaSyntaxError(message, self.line())

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, token: str):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            self.fail(f"expected {token!r}")
        self.pos += len(token)

    def section(self, keyword: str) -> list[Quad]:
        self.expect(keyword)
        self.expect("{")
        start = self.pos
        in_string = False
        escaped = False
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "}":
                body = self.text[start:self.pos]
                self.pos += 1
                return self._parse_body(body, self.line(start))
            self.pos += 1
        self.fail(f"unterminated {keyword} block")

    def _parse_body(self, body: str, first_line: int) -> list[Quad]:
        try:
            return parse_nquads(body)
        except NTriplesSyntaxError as exc:
            message = exc.args[0].removesuffix(f" (line {exc.line})")
            raise DeltaSyntaxError(message, first_line + exc.line - 1) from exc

    def end(self):
        self.skip_ws()
        if self.pos != len(self.text):
            self.fail("trailing content after INSERT DATA block")
