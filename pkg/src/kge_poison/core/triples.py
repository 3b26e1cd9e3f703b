from enum import Enum
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np


class Side(Enum):
    HEAD = "head"
    TAIL = "tail"

    @property
    def other(self) -> 'Side':
        return Side.TAIL if self is Side.HEAD else Side.HEAD


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int

    def entity(self, side: Side) -> int:
        return self.head if side is Side.HEAD else self.tail

    def involves(self, entity: int) -> bool:
        return self.head == entity or self.tail == entity

    def __str__(self) -> str:
        return f"({self.head}, {self.relation}, {self.tail})"


class TripleStore:
    """
    Deduplicated, ordered set of triples with head/tail position indexes.
    Immutable after construction; edits produce a new store (see with_edits).
    """

    def __init__(self, triples: Iterable[Tuple[int, int, int]] = (),
                 num_entities: Optional[int] = None, num_relations: Optional[int] = None):
        self._triples: List[Triple] = []
        self._positions: Dict[Triple, int] = {}
        self._by_head: Dict[int, List[int]] = {}
        self._by_tail: Dict[int, List[int]] = {}
        self.duplicates = 0
        for h, r, t in triples:
            triple = Triple(int(h), int(r), int(t))
            if triple in self._positions:
                self.duplicates += 1
                continue
            position = len(self._triples)
            self._triples.append(triple)
            self._positions[triple] = position
            self._by_head.setdefault(triple.head, []).append(position)
            self._by_tail.setdefault(triple.tail, []).append(position)

        max_entity = max((max(t.head, t.tail) for t in self._triples), default=-1)
        max_relation = max((t.relation for t in self._triples), default=-1)
        self.num_entities = max(num_entities or 0, max_entity + 1)
        self.num_relations = max(num_relations or 0, max_relation + 1)

    # --- Container protocol ---

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: object) -> bool:
        return tuple(triple) in self._positions  # type: ignore[arg-type]

    def __getitem__(self, position: int) -> Triple:
        return self._triples[position]

    def __repr__(self) -> str:
        return (f"TripleStore(triples={len(self)}, entities={self.num_entities}, "
                f"relations={self.num_relations})")

    # --- Index access ---

    def by_head(self, entity: int) -> Sequence[int]:
        return self._by_head.get(entity, ())

    def by_tail(self, entity: int) -> Sequence[int]:
        return self._by_tail.get(entity, ())

    def incident(self, entity: int, side: Side) -> List[Triple]:
        """Stored triples holding entity in the given slot, in position order."""
        positions = self.by_head(entity) if side is Side.HEAD else self.by_tail(entity)
        return [self._triples[p] for p in positions]

    def degree(self, entity: int) -> int:
        return len(self.by_head(entity)) + len(self.by_tail(entity))

    def degrees(self) -> np.ndarray:
        """Degree of every entity id, as one array."""
        out = np.zeros(self.num_entities, dtype=np.int64)
        if self._triples:
            arr = self.as_array()
            np.add.at(out, arr[:, 0], 1)
            np.add.at(out, arr[:, 2], 1)
        return out

    def as_array(self) -> np.ndarray:
        """(n, 3) int64 array of (head, relation, tail) in store order."""
        if not self._triples:
            return np.zeros((0, 3), dtype=np.int64)
        return np.asarray(self._triples, dtype=np.int64)

    def codes(self) -> np.ndarray:
        """Sorted scalar codes of all triples, for vectorized membership tests."""
        return np.sort(encode_triples(self.as_array(), self.num_entities, self.num_relations))

    # --- Copy with edits ---

    def with_edits(self, adds: Iterable[Tuple[int, int, int]] = (),
                   deletes: Iterable[Tuple[int, int, int]] = ()) -> 'TripleStore':
        """New store without `deletes` and with `adds` appended, keeping relative order."""
        removed = {Triple(*t) for t in deletes}
        kept = [t for t in self._triples if t not in removed]
        return TripleStore(kept + [Triple(*t) for t in adds],
                           num_entities=self.num_entities, num_relations=self.num_relations)


def encode_triples(triples: np.ndarray, num_entities: int, num_relations: int) -> np.ndarray:
    """Maps (h, r, t) rows to unique int64 codes ((h * R) + r) * E + t."""
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    return (triples[:, 0] * num_relations + triples[:, 1]) * num_entities + triples[:, 2]


def is_member(sorted_codes: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Membership of `queries` codes in the sorted code array of a store."""
    queries = np.asarray(queries, dtype=np.int64)
    if len(sorted_codes) == 0:
        return np.zeros(len(queries), dtype=bool)
    index = np.minimum(np.searchsorted(sorted_codes, queries), len(sorted_codes) - 1)
    return sorted_codes[index] == queries
