"""Dictionary-encoded quad store with three access-path indexes.

Quads are interned into integer ids and held in SPOG, POSG and OSPG
nested-dict indexes; a pattern match walks the index whose key order
gives the longest run of bound positions. Set semantics throughout.

Concurrency: one writer at a time, any number of readers. Readers are
admitted whenever no write is in progress (writers take no priority),
which makes nested read sections safe; a write mutates all three
indexes before readers are readmitted, so a quad is never half-visible.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Iterator

from citegraph.terms import Iri, Quad, Term, TermDict, is_absolute

_DEFAULT_GRAPH = 0  # reserved id; real term ids start at 1


class _DefaultGraphMarker:
    def __repr__(self):
        return "DEFAULT_GRAPH"


# pass as g= to restrict a match to the default graph (None means any graph)
DEFAULT_GRAPH = _DefaultGraphMarker()

# index definitions: position order over (s, p, o, g) = (0, 1, 2, 3)
_ORDERS = {
    "spog": (0, 1, 2, 3),
    "posg": (1, 2, 0, 3),
    "ospg": (2, 0, 1, 3),
}


class _ReadWriteLock:
    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writing = False

    @contextmanager
    def read(self):
        with self._cond:
            while self._writing:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            while self._writing or self._readers:
                self._cond.wait()
            self._writing = True
        try:
            yield
        finally:
            with self._cond:
                self._writing = False
                self._cond.notify_all()


def _validate(quad: Quad) -> None:
    for term in (quad.subject, quad.predicate, quad.object, quad.graph):
        if isinstance(term, Iri) and not is_absolute(term):
            raise ValueError(f"IRI not absolute: {term.value!r}")


class QuadStore:
    def __init__(self):
        self._dict = TermDict()
        self._lock = _ReadWriteLock()
        self._indexes: dict[str, dict] = {name: {} for name in _ORDERS}
        self._count = 0

    # --- writes -------------------------------------------------------------

    def insert_quad(self, quad: Quad) -> bool:
        _validate(quad)
        ids = self._intern_quad(quad)
        with self._lock.write():
            if self._present(ids):
                return False
            for name, order in _ORDERS.items():
                self._index_add(self._indexes[name], tuple(ids[i] for i in order))
            self._count += 1
            return True

    def insert_many(self, quads) -> int:
        """Insert a batch under one lock acquisition; returns how many were new."""
        prepared = []
        for quad in quads:
            _validate(quad)
            prepared.append(self._intern_quad(quad))
        added = 0
        with self._lock.write():
            for ids in prepared:
                if self._present(ids):
                    continue
                for name, order in _ORDERS.items():
                    self._index_add(self._indexes[name], tuple(ids[i] for i in order))
                self._count += 1
                added += 1
        return added

    def remove_quad(self, quad: Quad) -> bool:
        keys = []
        for term in (quad.subject, quad.predicate, quad.object):
            tid = self._dict.id_of(term)
            if tid is None:
                return False
            keys.append(tid)
        if quad.graph is None:
            keys.append(_DEFAULT_GRAPH)
        else:
            gid = self._dict.id_of(quad.graph)
            if gid is None:
                return False
            keys.append(gid)
        ids = tuple(keys)
        with self._lock.write():
            if not self._present(ids):
                return False
            for name, order in _ORDERS.items():
                self._index_remove(self._indexes[name], tuple(ids[i] for i in order))
            self._count -= 1
            return True

    # --- reads --------------------------------------------------------------

    def __len__(self) -> int:
        return self._count

    def intern(self, term: Term) -> int:
        return self._dict.intern(term)

    def lookup(self, tid: int) -> Term:
        return self._dict.lookup(tid)

    def id_of(self, term: Term) -> int | None:
        return self._dict.id_of(term)

    def match_pattern(self, s: Term | None = None, p: Term | None = None,
                      o: Term | None = None, g=None) -> list[Quad]:
        """All quads matching the bound positions; None is a wildcard.

        The graph position additionally accepts DEFAULT_GRAPH to match
        only quads outside any named graph.
        """
        with self._lock.read():
            return [self._to_quad(ids) for ids in
                    self._match_ids(self._pattern_ids(s, p, o, g))]

    def quads(self) -> list[Quad]:
        return self.match_pattern()

    @contextmanager
    def reading(self) -> Iterator[None]:
        """Hold off writers across a multi-call read (a consistent snapshot)."""
        with self._lock.read():
            yield

    def match_ids(self, pattern: tuple[int | None, int | None, int | None, int | None],
                  ) -> list[tuple[int, int, int, int]]:
        """Id-level match for the query engine; caller handles locking."""
        return self._match_ids(pattern)

    # --- internals ----------------------------------------------------------

    def _intern_quad(self, quad: Quad) -> tuple[int, int, int, int]:
        return (
            self._dict.intern(quad.subject),
            self._dict.intern(quad.predicate),
            self._dict.intern(quad.object),
            _DEFAULT_GRAPH if quad.graph is None else self._dict.intern(quad.graph),
        )

    def _pattern_ids(self, s, p, o, g):
        out: list[int | None] = []
        for term in (s, p, o):
            if term is None:
                out.append(None)
            else:
                tid = self._dict.id_of(term)
                out.append(-1 if tid is None else tid)
        if g is None:
            out.append(None)
        elif g is DEFAULT_GRAPH:
            out.append(_DEFAULT_GRAPH)
        else:
            gid = self._dict.id_of(g)
            out.append(-1 if gid is None else gid)
        return tuple(out)

    def _present(self, ids: tuple[int, int, int, int]) -> bool:
        s, p, o, g = ids
        return g in self._indexes["spog"].get(s, {}).get(p, {}).get(o, ())

    @staticmethod
    def _index_add(index: dict, keys: tuple[int, int, int, int]) -> None:
        a, b, c, d = keys
        index.setdefault(a, {}).setdefault(b, {}).setdefault(c, set()).add(d)

    @staticmethod
    def _index_remove(index: dict, keys: tuple[int, int, int, int]) -> None:
        a, b, c, d = keys
        level_b = index[a]
        level_c = level_b[b]
        leaf = level_c[c]
        leaf.discard(d)
        if not leaf:
            del level_c[c]
            if not level_c:
                del level_b[b]
                if not level_b:
                    del index[a]

    def _match_ids(self, pattern) -> list[tuple[int, int, int, int]]:
        if any(v == -1 for v in pattern):
            return []  # a bound term the dictionary has never seen
        name, order = self._pick_index(pattern)
        reordered = tuple(pattern[i] for i in order)
        inverse = [0, 0, 0, 0]
        for slot, original in enumerate(order):
            inverse[original] = slot
        out = []
        for keys in self._walk(self._indexes[name], reordered, ()):
            out.append(tuple(keys[i] for i in inverse))
        return out

    @staticmethod
    def _pick_index(pattern) -> tuple[str, tuple[int, int, int, int]]:
        best, best_len = "spog", -1
        for name, order in _ORDERS.items():
            run = 0
            for position in order:
                if pattern[position] is None:
                    break
                run += 1
            if run > best_len:
                best, best_len = name, run
        return best, _ORDERS[best]

    def _walk(self, node, wanted, prefix):
        depth = len(prefix)
        if depth == 3:
            want = wanted[3]
            for leaf in (node if want is None else (want,) if want in node else ()):
                yield prefix + (leaf,)
            return
        want = wanted[depth]
        if want is None:
            for key, child in node.items():
                yield from self._walk(child, wanted, prefix + (key,))
        elif want in node:
            yield from self._walk(node[want], wanted, prefix + (want,))

    def _to_quad(self, ids: tuple[int, int, int, int]) -> Quad:
        s, p, o, g = ids
        return Quad(
            subject=self._dict.lookup(s),
            predicate=self._dict.lookup(p),
            object=self._dict.lookup(o),
            graph=None if g == _DEFAULT_GRAPH else self._dict.lookup(g),
        )
