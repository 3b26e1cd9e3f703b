"""Candidate spaces shared by the informed attacks and the random baselines."""
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Optional

import numpy as np

from ..core.triples import Side, Triple, TripleStore, encode_triples, is_member


@dataclass
class CandidateSet:
    entity: int
    triples: np.ndarray
    at_head: np.ndarray  # perturbed entity is in the head slot

    def __len__(self) -> int:
        return len(self.triples)

    @property
    def others(self) -> np.ndarray:
        """The entity opposite the perturbed one in every candidate."""
        return np.where(self.at_head, self.triples[:, 2], self.triples[:, 0])

    def select(self, mask: np.ndarray) -> 'CandidateSet':
        return CandidateSet(self.entity, self.triples[mask], self.at_head[mask])

    @classmethod
    def empty(cls, entity: int) -> 'CandidateSet':
        return cls(entity, np.zeros((0, 3), dtype=np.int64), np.zeros(0, dtype=bool))


def delete_candidates(store: TripleStore, entity: int, side: Side, both_orientations: bool = False,
                      exclude: AbstractSet[Triple] = frozenset(),
                      exclude_entities: AbstractSet[int] = frozenset()) -> CandidateSet:
    """
    Stored facts holding `entity` in the `side` slot (both slots with
    both_orientations), minus `exclude` and minus facts whose other entity is
    in `exclude_entities`.
    """
    rows, at_head = [], []
    sides = (side, side.other) if both_orientations else (side,)
    seen = set()
    for slot in sides:
        for triple in store.incident(entity, slot):
            if triple in exclude or (triple, slot) in seen:
                continue
            other = triple.tail if slot is Side.HEAD else triple.head
            if other in exclude_entities:
                continue
            seen.add((triple, slot))
            rows.append(triple)
            at_head.append(slot is Side.HEAD)
    if not rows:
        return CandidateSet.empty(entity)
    return CandidateSet(entity, np.asarray(rows, dtype=np.int64), np.asarray(at_head, dtype=bool))


def add_candidates(store: TripleStore, entity: int, side: Side, sample: int,
                   rng: Optional[np.random.Generator] = None, allow_self_loops: bool = False,
                   exclude: Iterable[Triple] = (),
                   exclude_entities: AbstractSet[int] = frozenset(),
                   codes: Optional[np.ndarray] = None) -> CandidateSet:
    """
    (relation, entity) combinations placed around `entity` on `side`, excluding
    stored facts, `exclude`, self-loops (unless allowed) and `exclude_entities`.
    With 0 < sample < |R| x |E| a uniform sample of pairs is drawn without
    replacement before filtering.
    """
    num_relations, num_entities = store.num_relations, store.num_entities
    total = num_relations * num_entities
    if sample and sample < total:
        if rng is None:
            raise ValueError("sampling add candidates needs a random generator")
        pairs = np.sort(rng.choice(total, size=sample, replace=False))
    else:
        pairs = np.arange(total, dtype=np.int64)
    relations, others = np.divmod(pairs.astype(np.int64), num_entities)

    triples = _place(entity, relations, others, side)
    keep = np.ones(len(triples), dtype=bool)
    if not allow_self_loops:
        keep &= others != entity
    if exclude_entities:
        keep &= ~np.isin(others, np.fromiter(exclude_entities, dtype=np.int64))
    keep &= ~is_member(codes if codes is not None else store.codes(),
                        encode_triples(triples, num_entities, num_relations))
    excluded = [tuple(t) for t in exclude]
    if excluded:
        keep &= ~np.isin(encode_triples(triples, num_entities, num_relations),
                         encode_triples(np.asarray(excluded), num_entities, num_relations))
    triples = triples[keep]
    return CandidateSet(entity, triples, np.full(len(triples), side is Side.HEAD))


def draw_add_candidate(store: TripleStore, entity: int, side: Side, rng: np.random.Generator,
                       allow_self_loops: bool = False, exclude: AbstractSet[Triple] = frozenset(),
                       exclude_entities: AbstractSet[int] = frozenset(), attempts: int = 1000) -> Optional[Triple]:
    """One uniform draw from the add space of add_candidates, by rejection. None if nothing is found."""
    for _ in range(attempts):
        relation = int(rng.integers(store.num_relations))
        other = int(rng.integers(store.num_entities))
        if other == entity and not allow_self_loops:
            continue
        if other in exclude_entities:
            continue
        triple = Triple(entity, relation, other) if side is Side.HEAD else Triple(other, relation, entity)
        if triple in store or triple in exclude:
            continue
        return triple
    return None


def _place(entity: int, relations: np.ndarray, others: np.ndarray, side: Side) -> np.ndarray:
    fixed = np.full(len(relations), entity, dtype=np.int64)
    if side is Side.HEAD:
        return np.stack([fixed, relations, others], axis=1)
    return np.stack([others, relations, fixed], axis=1)
