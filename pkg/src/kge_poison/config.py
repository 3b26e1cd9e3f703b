"""
Config file layer.

Files are INI style with sections [data], [train], [attack], [indirect] and
[experiment]. Every key has a command-line flag of the same name (dashes for
underscores); a flag that is given wins over the file, and a given --seed also
wins over the file's train_seed and attack_seed. Values stay strings
until the pydantic models coerce and validate them.
"""
import configparser
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from .attacks import IndirectConfig
from .core import TripleFormat
from .experiment import ExperimentConfig
from .training import TrainConfig


@dataclass(frozen=True)
class Option:
    section: str
    key: str
    # (group, field) pairs the value is written to; groups: experiment, train, attack
    targets: Tuple[Tuple[str, str], ...]


def _opt(section: str, key: str, *targets: Tuple[str, str]) -> Option:
    return Option(section, key, targets)


OPTIONS = (
    _opt("data", "train", ("experiment", "train_path")),
    _opt("data", "test", ("experiment", "test_path")),
    _opt("data", "dataset", ("experiment", "dataset")),
    _opt("data", "format", ("experiment", "format")),

    _opt("train", "model", ("experiment", "model")),
    _opt("train", "dim", ("train", "dim")),
    _opt("train", "epochs", ("train", "epochs")),
    _opt("train", "batch_size", ("train", "batch_size")),
    _opt("train", "learning_rate", ("train", "learning_rate")),
    _opt("train", "margin", ("train", "margin")),
    _opt("train", "negatives", ("train", "negatives_per_positive")),
    _opt("train", "norm", ("train", "norm")),
    _opt("train", "normalize_entities", ("train", "normalize_entities")),
    _opt("train", "regularization", ("train", "regularization")),
    _opt("train", "train_seed", ("train", "seed")),
    _opt("train", "fixed_negatives", ("train", "fixed_negatives")),
    _opt("train", "train_threads", ("train", "threads")),

    _opt("attack", "strategy", ("experiment", "strategy")),
    _opt("attack", "budget", ("attack", "budget")),
    _opt("attack", "eps_h", ("attack", "eps_h")),
    _opt("attack", "lambda1", ("attack", "lambda1")),
    _opt("attack", "lambda2", ("attack", "lambda2")),
    _opt("attack", "sample", ("attack", "add_candidate_sample")),
    _opt("attack", "side", ("attack", "target_side")),
    _opt("attack", "attack_seed", ("attack", "rng_seed")),
    _opt("attack", "both_orientations", ("attack", "both_orientations")),
    _opt("attack", "allow_self_loops", ("attack", "allow_self_loops")),
    _opt("attack", "promote", ("attack", "promote")),

    _opt("indirect", "k_hops", ("attack", "k")),
    _opt("indirect", "paths", ("attack", "paths")),
    _opt("indirect", "lambda", ("attack", "lambda")),

    _opt("experiment", "num_targets", ("experiment", "num_targets")),
    _opt("experiment", "out", ("experiment", "out_dir")),
    _opt("experiment", "seed", ("experiment", "seed"), ("train", "seed"), ("attack", "rng_seed")),
    _opt("experiment", "threads", ("experiment", "threads")),
    _opt("experiment", "per_target_retrain", ("experiment", "per_target_retrain")),
    _opt("experiment", "side_only", ("experiment", "side_only")),
)

_BY_KEY = {(o.section, o.key): o for o in OPTIONS}
STAGE_SEEDS = ("train_seed", "attack_seed")


def load_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Reads an INI file into {option key: raw value}; unknown sections or keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    with Path(path).open(encoding="utf-8") as f:
        parser.read_file(f)
    values = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            option = _BY_KEY.get((section, key))
            if option is None:
                raise ValueError(f"{path}: unknown option [{section}] {key}")
            values[option.key] = value
    return values


def merge_values(file_values: Mapping[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """File values overlaid with every override that is not None."""
    merged = dict(file_values)
    if overrides.get("seed") is not None:
        # a given --seed also replaces the stage seeds of the file
        for key in STAGE_SEEDS:
            merged.pop(key, None)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def _groups(values: Mapping[str, Any]) -> Dict[str, Dict[str, Any]]:
    groups: Dict[str, Dict[str, Any]] = {"experiment": {}, "train": {}, "attack": {}}
    # the global seed goes first so section seeds override it
    for option in sorted(OPTIONS, key=lambda o: len(o.targets), reverse=True):
        if option.key not in values:
            continue
        for group, name in option.targets:
            groups[group][name] = values[option.key]
    return groups


def resolve_dataset(values: Dict[str, Any]) -> Dict[str, Any]:
    """--dataset DIR fills in the train/test files of a benchmark directory when they are not given."""
    dataset = values.get("dataset")
    if dataset is None or not Path(dataset).is_dir():
        return values
    directory = Path(dataset)
    fmt = TripleFormat(values.get("format", TripleFormat.NAME_TSV.value))
    names = ("train.txt", "test.txt") if fmt is TripleFormat.NAME_TSV else ("train2id.txt", "test2id.txt")
    resolved = dict(values)
    resolved.setdefault("train", str(directory / names[0]))
    resolved.setdefault("test", str(directory / names[1]))
    resolved["dataset"] = directory.name
    return resolved


def train_config(values: Mapping[str, Any]) -> TrainConfig:
    return TrainConfig.model_validate(_groups(values)["train"])


def attack_config(values: Mapping[str, Any]) -> IndirectConfig:
    return IndirectConfig.model_validate(_groups(values)["attack"])


def experiment_config(values: Mapping[str, Any], **extra: Any) -> ExperimentConfig:
    groups = _groups(resolve_dataset(dict(values)))
    return ExperimentConfig.model_validate({
        **groups["experiment"],
        "train": TrainConfig.model_validate(groups["train"]),
        "attack": IndirectConfig.model_validate(groups["attack"]),
        **extra,
    })


def read_values(config_path: Optional[Union[str, Path]], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    file_values = load_config_file(config_path) if config_path else {}
    return merge_values(file_values, overrides)
