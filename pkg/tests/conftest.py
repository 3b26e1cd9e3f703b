"""Shared fixtures: tiny graphs and seeded embedding stores."""
from pathlib import Path
from typing import Callable, List, Tuple

import numpy as np
import pytest
from loguru import logger

from kge_poison.core import EmbeddingStore, ModelKind, TripleStore, make_model


@pytest.fixture
def chain_store() -> TripleStore:
    """0 -> 1 -> 2"""
    return TripleStore([(0, 0, 1), (1, 0, 2)])


@pytest.fixture
def triangle_store() -> TripleStore:
    return TripleStore([(0, 0, 1), (1, 0, 2), (2, 0, 0)])


@pytest.fixture
def proxy_store() -> TripleStore:
    """
    Entity 0 reaches proxy 2 through entity 1 (degree 2); the proxy heads one
    fact (2, 1, 3). Entities 4 and 5 sit apart.
    """
    return TripleStore([(0, 0, 1), (1, 0, 2), (2, 1, 3), (4, 0, 5)], num_entities=6, num_relations=2)


@pytest.fixture
def make_embeddings() -> Callable[..., EmbeddingStore]:
    """Random stores with normally distributed parameters, one per (kind, sizes, seed)."""
    def build(kind: ModelKind, num_entities: int, num_relations: int, dim: int = 6, seed: int = 0) -> EmbeddingStore:
        rng = np.random.default_rng(seed)
        entities = rng.normal(size=(num_entities, dim))
        vectors = rng.normal(size=(num_relations, dim)) if kind.uses_vectors else None
        matrices = rng.normal(size=(num_relations, dim, dim)) / np.sqrt(dim) if kind.uses_matrices else None
        return EmbeddingStore(entities, vectors, matrices)
    return build


@pytest.fixture
def transe():
    return make_model(ModelKind.TRANSE)


@pytest.fixture
def random_store() -> Callable[..., TripleStore]:
    def build(num_entities: int = 12, num_relations: int = 3, num_triples: int = 30, seed: int = 0) -> TripleStore:
        rng = np.random.default_rng(seed)
        triples = set()
        while len(triples) < num_triples:
            h, t = rng.integers(num_entities, size=2)
            if h != t:
                triples.add((int(h), int(rng.integers(num_relations)), int(t)))
        return TripleStore(sorted(triples), num_entities=num_entities, num_relations=num_relations)
    return build


@pytest.fixture
def write_split(tmp_path: Path) -> Callable[..., Tuple[Path, Path]]:
    """Writes NAME_TSV train/test files of a random graph; test facts are held out of training."""
    def build(num_entities: int = 15, num_relations: int = 3, num_train: int = 45, num_test: int = 6,
              seed: int = 0) -> Tuple[Path, Path]:
        rng = np.random.default_rng(seed)
        # a ring through every entity keeps the test split inside the training vocabulary
        ring = [(e, 0, (e + 1) % num_entities) for e in range(num_entities)]
        facts: List[Tuple[int, int, int]] = []
        seen = set(ring)
        while len(facts) < num_train + num_test:
            h, t = (int(x) for x in rng.integers(num_entities, size=2))
            triple = (h, int(rng.integers(num_relations)), t)
            if h != t and triple not in seen:
                seen.add(triple)
                facts.append(triple)
        directory = tmp_path / "toy"
        directory.mkdir(exist_ok=True)
        train, test = directory / "train.txt", directory / "test.txt"
        train_lines = [f"e{h}\tr{r}\te{t}" for h, r, t in ring + facts[:num_train]]
        train.write_text("\n".join(train_lines) + "\n", encoding="utf-8")
        test.write_text("\n".join(f"e{h}\tr{r}\te{t}" for h, r, t in facts[num_train:]) + "\n", encoding="utf-8")
        return train, test
    return build


@pytest.fixture
def log_messages():
    """Collects loguru messages emitted during the test."""
    messages: List[str] = []
    handler = logger.add(lambda m: messages.append(m.record["message"]), level="DEBUG", format="{message}")
    yield messages
    logger.remove(handler)
