"""
Plausibility scoring functions and their analytic gradients.

Higher scores mean more plausible facts: the distance based models are negated,
TransE f = -||h + r - t||, TransR f = -||M_r h + r - M_r t||, RESCAL f = h^T M_r t.

All models work on batches: heads/tails are (B, d), relation vectors (B, d) and
relation matrices (B, d, d), with None for parameters a model does not use.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..errors import DimensionMismatch, ZeroResidual
from .embeddings import EmbeddingStore, RelationParams


class ModelKind(Enum):
    TRANSE = "transe"
    TRANSR = "transr"
    RESCAL = "rescal"

    @property
    def tag(self) -> int:
        return _TAGS[self]

    @classmethod
    def from_tag(cls, tag: int) -> 'ModelKind':
        for kind, value in _TAGS.items():
            if value == tag:
                return kind
        raise ValueError(f"unknown model tag {tag}")

    @property
    def uses_vectors(self) -> bool:
        return self is not ModelKind.RESCAL

    @property
    def uses_matrices(self) -> bool:
        return self is not ModelKind.TRANSE


_TAGS = {ModelKind.TRANSE: 0, ModelKind.TRANSR: 1, ModelKind.RESCAL: 2}


@dataclass
class ScoreGradient:
    d_head: np.ndarray
    d_tail: np.ndarray


@dataclass
class BatchGradient:
    """Partial derivatives of f for every row of a batch."""
    d_head: np.ndarray
    d_tail: np.ndarray
    d_vector: Optional[np.ndarray]
    d_matrix: Optional[np.ndarray]
    zero_residual: np.ndarray


class ScoringModel:
    """Base class; subclasses implement scores() and gradients()."""

    kind: ModelKind

    def scores(self, heads: np.ndarray, vectors: Optional[np.ndarray],
               matrices: Optional[np.ndarray], tails: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement abstract method 'scores'")

    def gradients(self, heads: np.ndarray, vectors: Optional[np.ndarray],
                  matrices: Optional[np.ndarray], tails: np.ndarray) -> BatchGradient:
        raise NotImplementedError("Subclasses must implement abstract method 'gradients'")

    def score_all_heads(self, emb: EmbeddingStore, relation: int, tail: int) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement abstract method 'score_all_heads'")

    def score_all_tails(self, emb: EmbeddingStore, head: int, relation: int) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement abstract method 'score_all_tails'")

    # --- Batch gathering ---

    def gather(self, emb: EmbeddingStore, triples: np.ndarray) -> Tuple[np.ndarray, Optional[np.ndarray], Optional[np.ndarray], np.ndarray]:
        """Looks up (heads, vectors, matrices, tails) for an (B, 3) id array."""
        triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        self._check_store(emb)
        vectors = emb.relation_vectors[triples[:, 1]] if self.kind.uses_vectors else None
        matrices = emb.relation_matrices[triples[:, 1]] if self.kind.uses_matrices else None
        return emb.entities[triples[:, 0]], vectors, matrices, emb.entities[triples[:, 2]]

    def score_triples(self, emb: EmbeddingStore, triples: np.ndarray) -> np.ndarray:
        return self.scores(*self.gather(emb, triples))

    # --- Single fact ---

    def score(self, emb: EmbeddingStore, h: int, r: int, t: int) -> float:
        return float(self.score_triples(emb, np.array([[h, r, t]]))[0])

    def grad(self, emb: EmbeddingStore, h: int, r: int, t: int) -> ScoreGradient:
        """Raises ZeroResidual when a translation residual is exactly zero."""
        heads, vectors, matrices, tails = self.gather(emb, np.array([[h, r, t]]))
        g = self.gradients(heads, vectors, matrices, tails)
        if g.zero_residual[0]:
            raise ZeroResidual((h, r, t))
        return ScoreGradient(g.d_head[0], g.d_tail[0])

    def score_vectors(self, head: np.ndarray, params: RelationParams, tail: np.ndarray) -> float:
        args = self._single(head, params, tail)
        return float(self.scores(*args)[0])

    def grad_vectors(self, head: np.ndarray, params: RelationParams, tail: np.ndarray) -> ScoreGradient:
        g = self.gradients(*self._single(head, params, tail))
        if g.zero_residual[0]:
            raise ZeroResidual()
        return ScoreGradient(g.d_head[0], g.d_tail[0])

    def _single(self, head, params: RelationParams, tail):
        head = np.asarray(head, dtype=np.float64)
        tail = np.asarray(tail, dtype=np.float64)
        d = head.shape[-1]
        if tail.shape[-1] != d:
            raise DimensionMismatch(d, tail.shape[-1], "tail vector")
        vector = matrix = None
        if self.kind.uses_vectors:
            if params.vector is None:
                raise ValueError(f"{self.kind.value} needs a relation vector")
            vector = np.asarray(params.vector, dtype=np.float64)
            if vector.shape[-1] != d:
                raise DimensionMismatch(d, vector.shape[-1], "relation vector")
            vector = vector[None]
        if self.kind.uses_matrices:
            if params.matrix is None:
                raise ValueError(f"{self.kind.value} needs a relation matrix")
            matrix = np.asarray(params.matrix, dtype=np.float64)
            if matrix.shape != (d, d):
                raise DimensionMismatch(d, matrix.shape[-1], "relation matrix")
            matrix = matrix[None]
        return head[None], vector, matrix, tail[None]

    def _check_store(self, emb: EmbeddingStore) -> None:
        if self.kind.uses_vectors and emb.relation_vectors is None:
            raise ValueError(f"{self.kind.value} needs relation vectors in the embedding store")
        if self.kind.uses_matrices and emb.relation_matrices is None:
            raise ValueError(f"{self.kind.value} needs relation matrices in the embedding store")


def _residual_norm(u: np.ndarray, norm: str) -> np.ndarray:
    if norm == "l1":
        return np.abs(u).sum(axis=-1)
    return np.linalg.norm(u, axis=-1)


def _residual_direction(u: np.ndarray, norm: str) -> Tuple[np.ndarray, np.ndarray]:
    """d||u||/du per row, plus the mask of rows with u == 0 (direction set to 0)."""
    length = _residual_norm(u, norm)
    zero = length == 0.0
    if norm == "l1":
        return np.sign(u), zero
    safe = np.where(zero, 1.0, length)[:, None]
    return np.where(zero[:, None], 0.0, u / safe), zero


class TransE(ScoringModel):
    """f = -||h + r - t|| (L2 by default, L1 with sign subgradients)."""

    kind = ModelKind.TRANSE

    def __init__(self, norm: str = "l2"):
        if norm not in ("l1", "l2"):
            raise ValueError(f"norm must be 'l1' or 'l2', got {norm!r}")
        self.norm = norm

    def scores(self, heads, vectors, matrices, tails):
        return -_residual_norm(heads + vectors - tails, self.norm)

    def gradients(self, heads, vectors, matrices, tails):
        direction, zero = _residual_direction(heads + vectors - tails, self.norm)
        return BatchGradient(-direction, direction, -direction, None, zero)

    def score_all_heads(self, emb, relation, tail):
        u = emb.entities + (emb.relation_vectors[relation] - emb.entities[tail])
        return -_residual_norm(u, self.norm)

    def score_all_tails(self, emb, head, relation):
        u = (emb.entities[head] + emb.relation_vectors[relation]) - emb.entities
        return -_residual_norm(u, self.norm)


class TransR(ScoringModel):
    """f = -||M_r h + r - M_r t||; entities are projected into the relation space."""

    kind = ModelKind.TRANSR

    def scores(self, heads, vectors, matrices, tails):
        u = np.einsum("bij,bj->bi", matrices, heads - tails) + vectors
        return -np.linalg.norm(u, axis=-1)

    def gradients(self, heads, vectors, matrices, tails):
        diff = heads - tails
        u = np.einsum("bij,bj->bi", matrices, diff) + vectors
        direction, zero = _residual_direction(u, "l2")
        back = np.einsum("bij,bi->bj", matrices, direction)  # M^T u / ||u||
        d_matrix = -direction[:, :, None] * diff[:, None, :]
        return BatchGradient(-back, back, -direction, d_matrix, zero)

    def score_all_heads(self, emb, relation, tail):
        m = emb.relation_matrices[relation]
        offset = emb.relation_vectors[relation] - m @ emb.entities[tail]
        return -np.linalg.norm(emb.entities @ m.T + offset, axis=1)

    def score_all_tails(self, emb, head, relation):
        m = emb.relation_matrices[relation]
        anchor = m @ emb.entities[head] + emb.relation_vectors[relation]
        return -np.linalg.norm(anchor - emb.entities @ m.T, axis=1)


class Rescal(ScoringModel):
    """f = h^T M_r t (bilinear)."""

    kind = ModelKind.RESCAL

    def scores(self, heads, vectors, matrices, tails):
        return np.einsum("bi,bij,bj->b", heads, matrices, tails)

    def gradients(self, heads, vectors, matrices, tails):
        d_head = np.einsum("bij,bj->bi", matrices, tails)
        d_tail = np.einsum("bij,bi->bj", matrices, heads)
        d_matrix = heads[:, :, None] * tails[:, None, :]
        return BatchGradient(d_head, d_tail, None, d_matrix, np.zeros(len(heads), dtype=bool))

    def score_all_heads(self, emb, relation, tail):
        return emb.entities @ (emb.relation_matrices[relation] @ emb.entities[tail])

    def score_all_tails(self, emb, head, relation):
        return emb.entities @ (emb.relation_matrices[relation].T @ emb.entities[head])


def make_model(kind: ModelKind, norm: str = "l2") -> ScoringModel:
    if kind is ModelKind.TRANSE:
        return TransE(norm)
    if kind is ModelKind.TRANSR:
        return TransR()
    if kind is ModelKind.RESCAL:
        return Rescal()
    raise ValueError(f"unsupported model kind {kind!r}")
