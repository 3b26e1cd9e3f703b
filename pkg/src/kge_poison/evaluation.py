"""
Raw link-prediction ranking of targeted facts.

For a target (h, r, t) every entity replaces the head (then the tail); the rank
of the true entity is 1 + the number of entities scoring strictly higher. Ties
do not count against the truth, and corruptions that are training facts are
not filtered.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .core.embeddings import EmbeddingStore
from .core.models import ScoringModel
from .core.triples import Side, Triple, TripleStore
from .errors import EmptyResults

HITS_AT = 10


@dataclass(frozen=True)
class RankResult:
    target: Triple
    head_rank: int
    tail_rank: int

    def ranks(self, side_only: Optional[Side] = None) -> List[int]:
        if side_only is Side.HEAD:
            return [self.head_rank]
        if side_only is Side.TAIL:
            return [self.tail_rank]
        return [self.head_rank, self.tail_rank]

    def to_dict(self) -> Dict[str, Any]:
        return {"head": self.target.head, "relation": self.target.relation, "tail": self.target.tail,
                "head_rank": self.head_rank, "tail_rank": self.tail_rank}


@dataclass
class EvalReport:
    per_target: List[RankResult]
    mrr: float
    hits_at_10: float
    flagged: List[Triple] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mrr": self.mrr,
            "hits_at_10": self.hits_at_10,
            "per_target": [r.to_dict() for r in self.per_target],
            "flagged": [list(t) for t in self.flagged],
        }


def _rank(scores: np.ndarray, truth: int) -> int:
    return int(np.count_nonzero(scores > scores[truth])) + 1


def rank_target(emb: EmbeddingStore, model: ScoringModel, store: Optional[TripleStore], target: Triple) -> RankResult:
    """`store` is accepted for symmetry with the filtered protocol but never read."""
    h, r, t = target
    head_scores = model.score_all_heads(emb, r, t)
    tail_scores = model.score_all_tails(emb, h, r)
    return RankResult(Triple(h, r, t), _rank(head_scores, h), _rank(tail_scores, t))


def rank_targets(emb: EmbeddingStore, model: ScoringModel, targets: Iterable[Triple]) -> List[RankResult]:
    return [rank_target(emb, model, None, target) for target in targets]


def aggregate(results: Sequence[RankResult], side_only: Optional[Side] = None,
              flagged: Iterable[Triple] = ()) -> EvalReport:
    """MRR and Hits@10 over both ranks of every target (or one side with side_only)."""
    if not results:
        raise EmptyResults()
    ranks = np.array([rank for result in results for rank in result.ranks(side_only)], dtype=np.float64)
    return EvalReport(
        per_target=list(results),
        mrr=float(np.mean(1.0 / ranks)),
        hits_at_10=float(np.mean(ranks <= HITS_AT)),
        flagged=list(flagged),
    )
