from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DimensionMismatch


@dataclass
class RelationParams:
    """Parameters of one relation: a translation vector, a d x d matrix, or both."""
    vector: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None


class EmbeddingStore:
    """
    Entity vectors (num_entities x d) plus per-relation parameters:
    TransE keeps vectors, TransR vectors and projection matrices, RESCAL matrices.
    """

    def __init__(self, entities: np.ndarray,
                 relation_vectors: Optional[np.ndarray] = None,
                 relation_matrices: Optional[np.ndarray] = None):
        self.entities = np.asarray(entities, dtype=np.float64)
        if self.entities.ndim != 2:
            raise ValueError("entity embeddings must be a 2-d array")
        self.relation_vectors = None if relation_vectors is None else np.asarray(relation_vectors, dtype=np.float64)
        self.relation_matrices = None if relation_matrices is None else np.asarray(relation_matrices, dtype=np.float64)

        d = self.dim
        if self.relation_vectors is not None and self.relation_vectors.shape[1:] != (d,):
            raise DimensionMismatch(d, self.relation_vectors.shape[-1], "relation vector")
        if self.relation_matrices is not None and self.relation_matrices.shape[1:] != (d, d):
            raise DimensionMismatch(d, self.relation_matrices.shape[-1], "relation matrix")
        if self.relation_vectors is None and self.relation_matrices is None:
            raise ValueError("an embedding store needs relation vectors or matrices")

    @property
    def dim(self) -> int:
        return self.entities.shape[1]

    @property
    def num_entities(self) -> int:
        return self.entities.shape[0]

    @property
    def num_relations(self) -> int:
        params = self.relation_vectors if self.relation_vectors is not None else self.relation_matrices
        return params.shape[0]

    def entity(self, entity_id: int) -> np.ndarray:
        return self.entities[entity_id]

    def relation(self, relation_id: int) -> RelationParams:
        return RelationParams(
            None if self.relation_vectors is None else self.relation_vectors[relation_id],
            None if self.relation_matrices is None else self.relation_matrices[relation_id],
        )

    def is_finite(self) -> bool:
        arrays = [a for a in (self.entities, self.relation_vectors, self.relation_matrices) if a is not None]
        return all(np.isfinite(a).all() for a in arrays)

    def normalize_entities(self) -> None:
        """Scales every entity vector with L2 norm above 1 back onto the unit sphere."""
        norms = np.linalg.norm(self.entities, axis=1, keepdims=True)
        np.divide(self.entities, np.maximum(norms, 1.0), out=self.entities)

    def copy(self) -> 'EmbeddingStore':
        return EmbeddingStore(
            self.entities.copy(),
            None if self.relation_vectors is None else self.relation_vectors.copy(),
            None if self.relation_matrices is None else self.relation_matrices.copy(),
        )

    def equals(self, other: 'EmbeddingStore') -> bool:
        """Exact (bitwise) equality of all parameters."""
        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b)
        return (same(self.entities, other.entities)
                and same(self.relation_vectors, other.relation_vectors)
                and same(self.relation_matrices, other.relation_matrices))

    def __repr__(self) -> str:
        return f"EmbeddingStore(entities={self.num_entities}, relations={self.num_relations}, dim={self.dim})"
