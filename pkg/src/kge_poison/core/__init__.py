from .vocabulary import Vocabulary
from .triples import Side, Triple, TripleStore, encode_triples, is_member
from .paths import Orientation, DirectedHop, PathCandidate, neighbors, enumerate_paths
from .io import TripleFormat, load_triples, write_triples
from .embeddings import EmbeddingStore, RelationParams
from .models import ModelKind, ScoreGradient, BatchGradient, ScoringModel, TransE, TransR, Rescal, make_model
from .checkpoint import save_checkpoint, load_checkpoint, load_metadata, dataset_hash
