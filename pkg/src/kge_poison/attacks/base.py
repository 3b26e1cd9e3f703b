from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.triples import Side, Triple


class Action(Enum):
    ADD = "add"
    DELETE = "delete"


class Strategy(Enum):
    DIRECT_ADD = "direct-add"
    DIRECT_DELETE = "direct-delete"
    INDIRECT_ADD = "indirect-add"
    INDIRECT_DELETE = "indirect-delete"
    RANDOM_DA = "random-da"
    RANDOM_DD = "random-dd"
    RANDOM_IA = "random-ia"
    RANDOM_ID = "random-id"

    @property
    def action(self) -> Action:
        if self in (Strategy.DIRECT_ADD, Strategy.INDIRECT_ADD, Strategy.RANDOM_DA, Strategy.RANDOM_IA):
            return Action.ADD
        return Action.DELETE

    @property
    def indirect(self) -> bool:
        return self in (Strategy.INDIRECT_ADD, Strategy.INDIRECT_DELETE, Strategy.RANDOM_IA, Strategy.RANDOM_ID)

    @property
    def random(self) -> bool:
        return self.value.startswith("random-")


class AttackConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    budget: int = Field(1, ge=1)
    eps_h: float = Field(1.0, gt=0)
    lambda1: float = 1.0
    lambda2: float = 1.0
    # 0 scans every (relation, entity) pair
    add_candidate_sample: int = Field(10_000, ge=0)
    target_side: Side = Side.HEAD
    rng_seed: int = Field(0, ge=0, lt=2 ** 64)
    both_orientations: bool = False
    allow_self_loops: bool = False
    promote: bool = False


class IndirectConfig(AttackConfig):
    k: int = Field(2, ge=1)
    paths: int = Field(10, ge=1)
    lam: float = Field(1.0, alias="lambda")

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


@dataclass(frozen=True)
class IndirectDetails:
    path: List[int]
    proxy: int
    psi: float
    eta: float
    penalty: float


@dataclass(frozen=True)
class Perturbation:
    action: Action
    triple: Triple
    benefit: float
    details: Optional[IndirectDetails] = None

    def to_dict(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "action": self.action.value,
            "head": self.triple.head,
            "relation": self.triple.relation,
            "tail": self.triple.tail,
            "benefit": self.benefit,
        }
        if self.details is not None:
            record.update(path=list(self.details.path), proxy=self.details.proxy, psi=self.details.psi,
                          eta=self.details.eta, penalty=self.details.penalty)
        return record

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> 'Perturbation':
        details = None
        if "proxy" in record:
            details = IndirectDetails(list(record["path"]), int(record["proxy"]), float(record["psi"]),
                                      float(record["eta"]), float(record["penalty"]))
        triple = Triple(int(record["head"]), int(record["relation"]), int(record["tail"]))
        return cls(Action(record["action"]), triple, float(record["benefit"]), details)


def target_rng(seed: int, target: Triple) -> np.random.Generator:
    """Per-target random stream, independent of the order targets are processed in."""
    return np.random.default_rng(np.random.SeedSequence([seed, target.head, target.relation, target.tail]))
