"""
Margin ranking training with uniform negative sampling, shared by all models:

    L = sum max(0, margin - f(pos) + f(neg))

Negatives replace the head or the tail (probability 1/2 each) with a uniform
entity such that the corrupted triple is not an observed fact.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import List, Literal, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from .core.embeddings import EmbeddingStore
from .core.models import ModelKind, ScoringModel, make_model
from .core.triples import TripleStore, encode_triples, is_member
from .errors import EmptyStore

# corrupted triples that hit an observed fact are redrawn at most this often
MAX_RESAMPLE = 10


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dim: int = Field(50, ge=1)
    epochs: int = Field(200, ge=0)
    batch_size: int = Field(1024, ge=1)
    learning_rate: float = Field(0.01, gt=0)
    margin: float = Field(1.0, gt=0)
    negatives_per_positive: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    normalize_entities: bool = True
    norm: Literal["l2", "l1"] = "l2"
    regularization: float = Field(0.0, ge=0)
    fixed_negatives: bool = False
    threads: int = Field(1, ge=1)


def init_embeddings(kind: ModelKind, num_entities: int, num_relations: int, dim: int, seed: int) -> EmbeddingStore:
    """
    Uniform [-6/sqrt(d), 6/sqrt(d)] entity and relation vectors. TransR projections
    start as identity, RESCAL matrices uniform in [-6/d, 6/d].
    """
    if num_entities < 1 or num_relations < 1 or dim < 1:
        raise ValueError("entity count, relation count and dimension must all be >= 1")
    rng = np.random.default_rng(seed)
    bound = 6.0 / np.sqrt(dim)
    entities = rng.uniform(-bound, bound, size=(num_entities, dim))
    vectors = rng.uniform(-bound, bound, size=(num_relations, dim)) if kind.uses_vectors else None
    matrices = None
    if kind is ModelKind.TRANSR:
        matrices = np.tile(np.eye(dim), (num_relations, 1, 1))
    elif kind is ModelKind.RESCAL:
        small = 6.0 / dim
        matrices = rng.uniform(-small, small, size=(num_relations, dim, dim))
    return EmbeddingStore(entities, vectors, matrices)


class Trainer:
    """
    Trains one model kind on a triple store. Single-threaded runs are fully
    determined by the seed; threads > 1 applies lock-free concurrent updates
    and is not reproducible.
    """

    def __init__(self, kind: ModelKind, config: Optional[TrainConfig] = None):
        self.kind = kind
        self.config = config or TrainConfig()
        self.model: ScoringModel = make_model(kind, self.config.norm)
        self.losses: List[float] = []

    def fit(self, store: TripleStore, progress: bool = False) -> EmbeddingStore:
        if len(store) == 0:
            raise EmptyStore()
        cfg = self.config
        emb = self.initial_embeddings(store)
        self.losses = []
        if cfg.epochs == 0:
            return emb

        rng = np.random.default_rng(self._seeds()[1])
        triples = store.as_array()
        codes = store.codes()
        positives = np.repeat(triples, cfg.negatives_per_positive, axis=0)
        fixed = self._corrupt(positives, codes, store, rng) if cfg.fixed_negatives else None

        epochs = tqdm(range(1, cfg.epochs + 1), desc="train", unit="epoch", disable=not progress, leave=False)
        for epoch in epochs:
            order = rng.permutation(len(positives))
            batches = [order[i:i + cfg.batch_size] for i in range(0, len(order), cfg.batch_size)]
            if cfg.threads == 1:
                total = sum(self._run_batch(emb, positives, fixed, codes, store, batch, rng) for batch in batches)
            else:
                total = self._run_parallel(emb, positives, fixed, codes, store, batches, rng)
            if cfg.normalize_entities:
                emb.normalize_entities()
            mean_loss = total / len(positives)
            self.losses.append(mean_loss)
            logger.info("epoch {}, mean_loss {:.6f}", epoch, mean_loss)
        return emb

    def initial_embeddings(self, store: TripleStore) -> EmbeddingStore:
        """The starting point of fit(); depends only on the seed and the store sizes."""
        init_seed = int(self._seeds()[0].generate_state(1)[0])
        return init_embeddings(self.kind, store.num_entities, store.num_relations, self.config.dim, init_seed)

    def _seeds(self):
        return np.random.SeedSequence(self.config.seed).spawn(2)

    # --- Negative sampling ---

    def _corrupt(self, positives: np.ndarray, codes: np.ndarray, store: TripleStore,
                 rng: np.random.Generator) -> np.ndarray:
        negatives = positives.copy()
        replace_head = rng.random(len(positives)) < 0.5
        pending = np.arange(len(positives))
        for _ in range(MAX_RESAMPLE + 1):
            drawn = rng.integers(0, store.num_entities, size=len(pending))
            negatives[pending, 0] = np.where(replace_head[pending], drawn, positives[pending, 0])
            negatives[pending, 2] = np.where(replace_head[pending], positives[pending, 2], drawn)
            hits = is_member(codes, encode_triples(negatives[pending], store.num_entities, store.num_relations))
            pending = pending[hits]
            if len(pending) == 0:
                break
        return negatives

    # --- SGD ---

    def _run_batch(self, emb, positives, fixed, codes, store, batch, rng) -> float:
        pos = positives[batch]
        neg = fixed[batch] if fixed is not None else self._corrupt(pos, codes, store, rng)
        return self._step(emb, pos, neg)

    def _run_parallel(self, emb, positives, fixed, codes, store, batches, rng) -> float:
        streams = [np.random.default_rng(seed) for seed in rng.integers(0, 2 ** 63, size=self.config.threads)]

        def worker(index: int) -> float:
            worker_rng = streams[index]
            return sum(self._run_batch(emb, positives, fixed, codes, store, batch, worker_rng)
                       for batch in batches[index::self.config.threads])

        with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
            return float(sum(pool.map(worker, range(self.config.threads))))

    def _step(self, emb: EmbeddingStore, pos: np.ndarray, neg: np.ndarray) -> float:
        cfg = self.config
        f_pos = self.model.score_triples(emb, pos)
        f_neg = self.model.score_triples(emb, neg)
        loss = np.maximum(0.0, cfg.margin - f_pos + f_neg)
        active = loss > 0
        if not active.any():
            return 0.0
        pos, neg = pos[active], neg[active]
        g_pos = self.model.gradients(*self.model.gather(emb, pos))
        g_neg = self.model.gradients(*self.model.gather(emb, neg))

        lr = cfg.learning_rate
        # descend on L: raise f(pos), lower f(neg)
        np.add.at(emb.entities, pos[:, 0], lr * g_pos.d_head)
        np.add.at(emb.entities, pos[:, 2], lr * g_pos.d_tail)
        np.add.at(emb.entities, neg[:, 0], -lr * g_neg.d_head)
        np.add.at(emb.entities, neg[:, 2], -lr * g_neg.d_tail)
        if g_pos.d_vector is not None:
            np.add.at(emb.relation_vectors, pos[:, 1], lr * g_pos.d_vector)
            np.add.at(emb.relation_vectors, neg[:, 1], -lr * g_neg.d_vector)
        if g_pos.d_matrix is not None:
            np.add.at(emb.relation_matrices, pos[:, 1], lr * g_pos.d_matrix)
            np.add.at(emb.relation_matrices, neg[:, 1], -lr * g_neg.d_matrix)
            if cfg.regularization > 0:
                touched = np.unique(np.concatenate([pos[:, 1], neg[:, 1]]))
                emb.relation_matrices[touched] *= 1.0 - lr * cfg.regularization
        return float(loss.sum())


def train(store: TripleStore, kind: ModelKind, config: Optional[TrainConfig] = None,
          progress: bool = False) -> EmbeddingStore:
    return Trainer(kind, config).fit(store, progress=progress)
