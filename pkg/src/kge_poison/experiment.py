"""
End-to-end poisoning experiments.

A run loads a train/test split, samples targeted test facts, trains a clean
model, generates perturbations for every target with one strategy, merges them
into a single poisoned training set, retrains from scratch and ranks the
targets again. Outputs in the run directory:

    report.json          clean and poisoned reports plus run metadata
    summary.csv          dataset, model, strategy, budget, clean/poisoned MRR and H@10
    perturbations.json   perturbations per target, flagged targets
    timing.csv           per-target generation time
    clean.kgeb, poisoned.kgeb (+ .json sidecars) and the poisoned training file
"""
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from .attacks import Action, AttackStrategy, IndirectConfig, Perturbation, Strategy, make_strategy
from .core import (EmbeddingStore, ModelKind, ScoringModel, Side, Triple, TripleFormat, TripleStore, Vocabulary,
                   dataset_hash, load_checkpoint, load_triples, make_model, save_checkpoint, write_triples)
from .errors import AttackAborted, ConflictingPerturbation, InsufficientEligibleTargets
from .evaluation import EvalReport, aggregate, rank_targets
from .training import TrainConfig, Trainer

REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.csv"
PERTURBATIONS_FILE = "perturbations.json"
TIMING_FILE = "timing.csv"
CLEAN_CHECKPOINT = "clean.kgeb"
POISONED_CHECKPOINT = "poisoned.kgeb"

SUMMARY_COLUMNS = ["dataset", "model", "strategy", "budget", "clean_mrr", "poisoned_mrr", "clean_h10", "poisoned_h10"]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    train_path: Path
    test_path: Path
    dataset: Optional[str] = None
    format: TripleFormat = TripleFormat.NAME_TSV
    model: ModelKind = ModelKind.TRANSE
    train: TrainConfig = Field(default_factory=TrainConfig)
    strategy: Strategy = Strategy.DIRECT_DELETE
    attack: IndirectConfig = Field(default_factory=IndirectConfig)
    num_targets: int = Field(100, ge=1)
    out_dir: Path = Path("results")
    # seeds target sampling; training and attacks carry their own seeds
    seed: int = Field(0, ge=0, lt=2 ** 64)
    threads: int = Field(1, ge=1)
    per_target_retrain: bool = False
    side_only: Optional[Side] = None
    progress: bool = False

    @property
    def dataset_name(self) -> str:
        return self.dataset or self.train_path.parent.name or self.train_path.stem


# --- Targets and perturbation sets ---

def sample_targets(test_store: TripleStore, train_store: TripleStore, n: int, seed: int) -> List[Triple]:
    """Uniform sample without replacement of test facts that are not training facts."""
    eligible, in_training, unknown = [], 0, 0
    for triple in test_store:
        if max(triple.head, triple.tail) >= train_store.num_entities or triple.relation >= train_store.num_relations:
            unknown += 1
        elif triple in train_store:
            in_training += 1
        else:
            eligible.append(triple)
    if in_training:
        logger.warning("skipped {} test triple(s) that are training facts", in_training)
    if unknown:
        logger.warning("skipped {} test triple(s) outside the training vocabulary", unknown)
    if n > len(eligible):
        raise InsufficientEligibleTargets(n, len(eligible))
    order = np.random.default_rng(seed).permutation(len(eligible))[:n]
    return [eligible[i] for i in order]


def apply_perturbations(store: TripleStore, perturbations: Sequence[Perturbation]) -> TripleStore:
    """Applies the perturbations in order; any conflict rejects the whole set."""
    adds, deletes = [], []
    touched = set()
    for p in perturbations:
        if p.triple in touched:
            raise ConflictingPerturbation(p.action.value, tuple(p.triple), "triple is already perturbed")
        touched.add(p.triple)
        if p.action is Action.DELETE:
            if p.triple not in store:
                raise ConflictingPerturbation(p.action.value, tuple(p.triple), "not in the store")
            deletes.append(p.triple)
        else:
            if p.triple in store:
                raise ConflictingPerturbation(p.action.value, tuple(p.triple), "already in the store")
            adds.append(p.triple)
    return store.with_edits(adds, deletes)


def merge_perturbations(per_target: Dict[Triple, List[Perturbation]]) -> List[Perturbation]:
    """Concatenates per-target lists in target order, dropping exact repeats."""
    merged, seen, dropped = [], set(), 0
    for perturbations in per_target.values():
        for p in perturbations:
            if (p.action, p.triple) in seen:
                dropped += 1
                continue
            seen.add((p.action, p.triple))
            merged.append(p)
    if dropped:
        logger.warning("merged {} perturbation(s) shared between targets", dropped)
    return merged


def write_perturbations(path: Union[str, Path], strategy: Strategy, per_target: Dict[Triple, List[Perturbation]],
                        flagged: Iterable[Triple] = ()) -> None:
    record = {
        "strategy": strategy.value,
        "targets": [{"target": list(target), "perturbations": [p.to_dict() for p in perturbations]}
                    for target, perturbations in per_target.items()],
        "flagged": [list(t) for t in flagged],
    }
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_perturbations(path: Union[str, Path]) -> Tuple[Strategy, Dict[Triple, List[Perturbation]]]:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    per_target = {Triple(*entry["target"]): [Perturbation.from_dict(p) for p in entry["perturbations"]]
                  for entry in record["targets"]}
    return Strategy(record["strategy"]), per_target


# --- Attack generation ---

@dataclass
class TimingLog:
    records: List[Tuple[str, Triple, float]] = field(default_factory=list)

    def record(self, strategy: Strategy, target: Triple, seconds: float) -> None:
        self.records.append((strategy.value, target, seconds))

    def report_timing(self) -> Dict[str, float]:
        """Mean generation seconds per target, per strategy."""
        by_strategy: Dict[str, List[float]] = {}
        for name, _, seconds in self.records:
            by_strategy.setdefault(name, []).append(seconds)
        return {name: float(np.mean(values)) for name, values in by_strategy.items()}

    def to_frame(self) -> pd.DataFrame:
        rows = [{"strategy": name, "head": t.head, "relation": t.relation, "tail": t.tail, "seconds": seconds}
                for name, t, seconds in self.records]
        return pd.DataFrame(rows, columns=["strategy", "head", "relation", "tail", "seconds"])


@dataclass
class AttackOutcome:
    strategy: Strategy
    per_target: Dict[Triple, List[Perturbation]]
    flagged: List[Triple]
    timing: TimingLog

    def merged(self) -> List[Perturbation]:
        return merge_perturbations(self.per_target)

    @property
    def count(self) -> int:
        return sum(len(p) for p in self.per_target.values())


def generate_perturbations(attack: AttackStrategy, targets: Sequence[Triple], threads: int = 1,
                           progress: bool = False) -> AttackOutcome:
    """
    Runs the attack on every target. Aborted targets are flagged and left
    unattacked. Results keep the target order whatever the thread count.
    """
    def run(target: Triple) -> Tuple[Optional[List[Perturbation]], float]:
        start = time.perf_counter()
        try:
            perturbations = attack.generate(target)
        except AttackAborted as e:
            logger.warning("target {}: attack aborted: {}", target, e)
            perturbations = None
        return perturbations, time.perf_counter() - start

    outcome = AttackOutcome(attack.strategy, {}, [], TimingLog())
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = pool.map(run, targets) if threads > 1 else map(run, targets)
        for target, (perturbations, seconds) in tqdm(zip(targets, results), total=len(targets),
                                                     desc=attack.strategy.value, unit="target",
                                                     disable=not progress, leave=False):
            outcome.timing.record(attack.strategy, target, seconds)
            if perturbations is None:
                outcome.flagged.append(target)
            else:
                outcome.per_target[target] = perturbations
    logger.info("{}: {} perturbation(s) for {} target(s), {} flagged", attack.strategy.value, outcome.count,
                len(targets), len(outcome.flagged))
    return outcome


def poisoned_file_name(fmt: TripleFormat) -> str:
    return "poisoned_train.tsv" if fmt is TripleFormat.NAME_TSV else "poisoned_train.txt"


def store_statistics(store: TripleStore) -> Dict[str, Any]:
    degrees = store.degrees()
    return {
        "entities": store.num_entities,
        "relations": store.num_relations,
        "triples": len(store),
        "mean_degree": float(degrees.mean()) if len(degrees) else 0.0,
        "max_degree": int(degrees.max()) if len(degrees) else 0,
    }


# --- Experiment ---

class Experiment:
    """Shared state of one dataset / model / strategy run."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.model: ScoringModel = make_model(config.model, config.train.norm)
        self.vocabulary: Optional[Vocabulary] = None
        self.train_store: Optional[TripleStore] = None
        self.targets: List[Triple] = []
        self.clean_embeddings: Optional[EmbeddingStore] = None

    def load(self) -> 'Experiment':
        cfg = self.config
        self.vocabulary, self.train_store = load_triples(cfg.train_path, cfg.format)
        self.vocabulary.freeze()
        _, test_store = load_triples(cfg.test_path, cfg.format, self.vocabulary)
        self.targets = sample_targets(test_store, self.train_store, cfg.num_targets, cfg.seed)
        logger.info("{}: {} training triples, {} targets", cfg.dataset_name, len(self.train_store), len(self.targets))
        return self

    # --- Models ---

    def train(self, store: TripleStore) -> EmbeddingStore:
        return Trainer(self.config.model, self.config.train).fit(store, progress=self.config.progress)

    def train_clean(self, out_dir: Optional[Path] = None) -> EmbeddingStore:
        self.clean_embeddings = self.train(self.train_store)
        out_dir = Path(out_dir or self.config.out_dir)
        save_checkpoint(out_dir / CLEAN_CHECKPOINT, self.clean_embeddings, self.config.model,
                        self.checkpoint_metadata(self.train_store))
        return self.clean_embeddings

    def use_checkpoint(self, path: Union[str, Path]) -> EmbeddingStore:
        kind, emb = load_checkpoint(path)
        if kind is not self.config.model:
            raise ValueError(f"checkpoint holds a {kind.value} model, expected {self.config.model.value}")
        if emb.num_entities < self.train_store.num_entities or emb.num_relations < self.train_store.num_relations:
            raise ValueError("checkpoint does not cover the training vocabulary")
        self.clean_embeddings = emb
        return emb

    def checkpoint_metadata(self, store: TripleStore) -> Dict[str, Any]:
        return {"dataset": self.config.dataset_name, "dataset_hash": dataset_hash(store),
                "seed": self.config.train.seed, "train": self.config.train.model_dump(mode="json")}

    def evaluate(self, emb: EmbeddingStore, flagged: Iterable[Triple] = ()) -> EvalReport:
        return aggregate(rank_targets(emb, self.model, self.targets), self.config.side_only, flagged)

    # --- Poisoning ---

    def attack(self, attack_config: Optional[IndirectConfig] = None) -> AttackOutcome:
        cfg = self.config
        strategy = make_strategy(cfg.strategy, self.train_store, self.clean_embeddings, self.model,
                                 attack_config or cfg.attack)
        return generate_perturbations(strategy, self.targets, cfg.threads, cfg.progress)

    def retrain_and_evaluate(self, outcome: AttackOutcome, out_dir: Path) -> EvalReport:
        if self.config.per_target_retrain:
            return self._retrain_per_target(outcome)
        poisoned = apply_perturbations(self.train_store, outcome.merged())
        write_triples(out_dir / poisoned_file_name(self.config.format), self.vocabulary, poisoned, self.config.format)
        emb = self.train(poisoned)
        save_checkpoint(out_dir / POISONED_CHECKPOINT, emb, self.config.model, self.checkpoint_metadata(poisoned))
        return self.evaluate(emb, outcome.flagged)

    def _retrain_per_target(self, outcome: AttackOutcome) -> EvalReport:
        results = []
        for target in tqdm(self.targets, desc="retrain", unit="target", disable=not self.config.progress, leave=False):
            perturbations = outcome.per_target.get(target, [])
            # same seed and store as the clean run
            emb = self.clean_embeddings
            if perturbations:
                emb = self.train(apply_perturbations(self.train_store, perturbations))
            results.extend(rank_targets(emb, self.model, [target]))
        return aggregate(results, self.config.side_only, outcome.flagged)

    # --- Reports ---

    def metadata(self, attack_config: IndirectConfig) -> Dict[str, Any]:
        cfg = self.config
        return {
            "dataset": cfg.dataset_name,
            "dataset_hash": dataset_hash(self.train_store),
            "model": cfg.model.value,
            "strategy": cfg.strategy.value,
            "budget": attack_config.budget,
            "num_targets": len(self.targets),
            "seed": cfg.seed,
            "retrain": "per-target" if cfg.per_target_retrain else "per-strategy",
            "side_only": cfg.side_only.value if cfg.side_only else None,
            "train": cfg.train.model_dump(mode="json"),
            "attack": attack_config.model_dump(mode="json", by_alias=True),
        }

    def summary_row(self, clean: EvalReport, poisoned: EvalReport, budget: int) -> Dict[str, Any]:
        return {"dataset": self.config.dataset_name, "model": self.config.model.value,
                "strategy": self.config.strategy.value, "budget": budget,
                "clean_mrr": clean.mrr, "poisoned_mrr": poisoned.mrr,
                "clean_h10": clean.hits_at_10, "poisoned_h10": poisoned.hits_at_10}

    def write_outputs(self, out_dir: Path, clean: EvalReport, poisoned: EvalReport, outcome: AttackOutcome,
                      attack_config: IndirectConfig) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        report = {
            "metadata": self.metadata(attack_config),
            "clean": clean.to_dict(),
            "poisoned": poisoned.to_dict(),
            "perturbation_count": outcome.count,
        }
        (out_dir / REPORT_FILE).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        write_perturbations(out_dir / PERTURBATIONS_FILE, outcome.strategy, outcome.per_target, outcome.flagged)
        outcome.timing.to_frame().to_csv(out_dir / TIMING_FILE, index=False)
        row = self.summary_row(clean, poisoned, attack_config.budget)
        pd.DataFrame([row], columns=SUMMARY_COLUMNS).to_csv(out_dir / SUMMARY_FILE, index=False)


def run_pipeline(config: ExperimentConfig) -> Tuple[EvalReport, EvalReport]:
    """Clean training, attack, poisoning, retraining and evaluation of one strategy."""
    out_dir = Path(config.out_dir)
    experiment = Experiment(config).load()
    clean_emb = experiment.train_clean(out_dir)
    clean = experiment.evaluate(clean_emb)
    logger.info("clean: mrr {:.4f}, hits@10 {:.4f}", clean.mrr, clean.hits_at_10)

    outcome = experiment.attack()
    poisoned = experiment.retrain_and_evaluate(outcome, out_dir)
    logger.info("poisoned: mrr {:.4f}, hits@10 {:.4f}", poisoned.mrr, poisoned.hits_at_10)
    experiment.write_outputs(out_dir, clean, poisoned, outcome, config.attack)
    for name, seconds in outcome.timing.report_timing().items():
        logger.info("{}: {:.3f} s per target", name, seconds)
    return clean, poisoned


def run_sweep(config: ExperimentConfig, budgets: Sequence[int]) -> pd.DataFrame:
    """One clean model, then attack / retrain / evaluate per budget; one summary row per budget."""
    out_dir = Path(config.out_dir)
    experiment = Experiment(config).load()
    clean = experiment.evaluate(experiment.train_clean(out_dir))

    rows = []
    for budget in budgets:
        attack_config = IndirectConfig.model_validate({**config.attack.model_dump(), "budget": budget})
        budget_dir = out_dir / f"budget_{budget}"
        budget_dir.mkdir(parents=True, exist_ok=True)
        outcome = experiment.attack(attack_config)
        poisoned = experiment.retrain_and_evaluate(outcome, budget_dir)
        experiment.write_outputs(budget_dir, clean, poisoned, outcome, attack_config)
        rows.append(experiment.summary_row(clean, poisoned, budget))
        logger.info("budget {}: mrr {:.4f} -> {:.4f}", budget, clean.mrr, poisoned.mrr)

    frame = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    frame.to_csv(out_dir / SUMMARY_FILE, index=False)
    return frame
