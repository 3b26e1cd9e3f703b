"""
Binary checkpoint codec.

Layout (all little endian): magic b"KGEB", then 32-bit unsigned version, model
tag, num_entities, num_relations, dim; then the entity matrix row-major as
32-bit floats; then relation vectors (if the model has them) and relation
matrices (if the model has them), each in relation-id order, row-major.
A JSON sidecar "<file>.json" records model kind, dataset hash, seed and the
training configuration.
"""
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .embeddings import EmbeddingStore
from .models import ModelKind
from .triples import TripleStore

MAGIC = b"KGEB"
FORMAT_VERSION = 1

_HEADER = np.dtype("<u4")
_FLOAT = np.dtype("<f4")


def save_checkpoint(path: Union[str, Path], emb: EmbeddingStore, kind: ModelKind,
                    metadata: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = np.array([FORMAT_VERSION, kind.tag, emb.num_entities, emb.num_relations, emb.dim], dtype=_HEADER)
    with path.open("wb") as f:
        f.write(MAGIC)
        f.write(header.tobytes())
        f.write(np.ascontiguousarray(emb.entities, dtype=_FLOAT).tobytes())
        if kind.uses_vectors:
            f.write(np.ascontiguousarray(emb.relation_vectors, dtype=_FLOAT).tobytes())
        if kind.uses_matrices:
            f.write(np.ascontiguousarray(emb.relation_matrices, dtype=_FLOAT).tobytes())

    sidecar = {"model": kind.value}
    sidecar.update(metadata or {})
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[ModelKind, EmbeddingStore]:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path} is not a KGEB checkpoint")
    version, tag, num_entities, num_relations, dim = np.frombuffer(raw, dtype=_HEADER, count=5, offset=4)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    kind = ModelKind.from_tag(int(tag))
    offset = 4 + 5 * _HEADER.itemsize

    def take(count: int, shape: Tuple[int, ...]) -> np.ndarray:
        nonlocal offset
        values = np.frombuffer(raw, dtype=_FLOAT, count=count, offset=offset)
        offset += count * _FLOAT.itemsize
        return values.reshape(shape).astype(np.float64)

    entities = take(int(num_entities) * int(dim), (int(num_entities), int(dim)))
    vectors = take(int(num_relations) * int(dim), (int(num_relations), int(dim))) if kind.uses_vectors else None
    matrices = (take(int(num_relations) * int(dim) * int(dim), (int(num_relations), int(dim), int(dim)))
                if kind.uses_matrices else None)
    if offset != len(raw):
        raise ValueError(f"{path}: {len(raw) - offset} trailing bytes")
    return kind, EmbeddingStore(entities, vectors, matrices)


def load_metadata(path: Union[str, Path]) -> Dict[str, Any]:
    return json.loads(sidecar_path(Path(path)).read_text(encoding="utf-8"))


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def dataset_hash(store: TripleStore) -> str:
    """sha256 over the store's (h, r, t) rows in order."""
    return hashlib.sha256(np.ascontiguousarray(store.as_array(), dtype="<i8").tobytes()).hexdigest()
