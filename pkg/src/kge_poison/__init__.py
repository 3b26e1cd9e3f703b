import importlib.metadata

try:
    __version__ = importlib.metadata.version("kge-poison")
except importlib.metadata.PackageNotFoundError:
    __version__ = "unknown"

from .core import (Vocabulary, Side, Triple, TripleStore, Orientation, DirectedHop, PathCandidate, TripleFormat,
                   EmbeddingStore, RelationParams, ModelKind, ScoringModel, TransE, TransR, Rescal, make_model,
                   enumerate_paths, load_triples, write_triples, save_checkpoint, load_checkpoint)
from .training import TrainConfig, Trainer, train, init_embeddings
from .evaluation import RankResult, EvalReport, rank_target, rank_targets, aggregate
from .attacks import (Action, Strategy, AttackConfig, IndirectConfig, Perturbation, direct_attack, indirect_attack,
                      random_direct, random_indirect, make_strategy)
from .experiment import ExperimentConfig, sample_targets, apply_perturbations, run_pipeline, run_sweep
