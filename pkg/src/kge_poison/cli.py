"""Command line entry point: ``kge-poison <command> [options]``."""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from loguru import logger
from pydantic import ValidationError

from .attacks import Strategy
from .config import OPTIONS, experiment_config, read_values, resolve_dataset, train_config
from .core import ModelKind, Side, TripleFormat, dataset_hash, load_triples, save_checkpoint, write_triples
from .errors import KgePoisonError
from .experiment import (CLEAN_CHECKPOINT, PERTURBATIONS_FILE, TIMING_FILE, Experiment, apply_perturbations,
                         load_perturbations, merge_perturbations, poisoned_file_name, run_pipeline, run_sweep,
                         store_statistics, write_perturbations)
from .log import configure_logging
from .training import Trainer

_OPTION_KEYS = {option.key for option in OPTIONS}


# --- Argument groups ---

def _add_data_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("data")
    group.add_argument("--dataset", help="benchmark directory holding the split files, or a dataset name")
    group.add_argument("--train", help="training triples")
    group.add_argument("--test", help="test triples")
    group.add_argument("--format", choices=[f.value for f in TripleFormat])


def _add_train_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("training")
    group.add_argument("--model", choices=[k.value for k in ModelKind])
    group.add_argument("--dim", type=int)
    group.add_argument("--epochs", type=int)
    group.add_argument("--batch-size", type=int)
    group.add_argument("--learning-rate", "--lr", dest="learning_rate", type=float)
    group.add_argument("--margin", type=float)
    group.add_argument("--negatives", type=int, help="negatives per positive")
    group.add_argument("--norm", choices=["l2", "l1"], help="TransE distance")
    group.add_argument("--normalize-entities", action=argparse.BooleanOptionalAction, default=None)
    group.add_argument("--regularization", type=float, help="relation matrix decay")
    group.add_argument("--fixed-negatives", action=argparse.BooleanOptionalAction, default=None)
    group.add_argument("--train-seed", type=int)
    group.add_argument("--train-threads", type=int)


def _add_attack_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("attack")
    group.add_argument("--strategy", choices=[s.value for s in Strategy])
    group.add_argument("--budget", type=int, help="perturbations per target (M)")
    group.add_argument("--eps-h", type=float, help="shift step size")
    group.add_argument("--lambda1", type=float)
    group.add_argument("--lambda2", type=float)
    group.add_argument("--sample", type=int, help="add candidates sampled per entity, 0 for all")
    group.add_argument("--side", choices=[s.value for s in Side], help="attacked entity of the target")
    group.add_argument("--attack-seed", type=int)
    group.add_argument("--both-orientations", action=argparse.BooleanOptionalAction, default=None)
    group.add_argument("--allow-self-loops", action=argparse.BooleanOptionalAction, default=None)
    group.add_argument("--promote", action=argparse.BooleanOptionalAction, default=None)
    group.add_argument("--k-hops", type=int)
    group.add_argument("--paths", type=int, help="paths kept per target (P)")
    group.add_argument("--lambda", type=float, help="path penalty weight")


def _add_experiment_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("experiment")
    group.add_argument("--num-targets", type=int)
    group.add_argument("--threads", type=int, help="targets attacked in parallel")
    group.add_argument("--per-target-retrain", action=argparse.BooleanOptionalAction, default=None)
    group.add_argument("--side-only", choices=[s.value for s in Side], help="rank only one side of each target")


def _budgets(text: str) -> List[int]:
    try:
        return [int(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated budgets, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file; flags override its values")
    common.add_argument("--seed", type=int, help="seed for target sampling, training and attacks")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="store_true")
    common.add_argument("--progress", action="store_true", help="show progress bars")

    parser = argparse.ArgumentParser(prog="kge-poison", description="Data poisoning attacks on knowledge graph embeddings.")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", parents=[common], help="train a clean model and save a checkpoint")
    _add_data_args(train)
    _add_train_args(train)
    train.set_defaults(func=cmd_train)

    attack = commands.add_parser("attack", parents=[common], help="generate perturbations for sampled targets")
    for add in (_add_data_args, _add_train_args, _add_attack_args, _add_experiment_args):
        add(attack)
    attack.add_argument("--checkpoint", help="clean checkpoint (default <out>/clean.kgeb)")
    attack.set_defaults(func=cmd_attack)

    poison = commands.add_parser("poison", parents=[common], help="apply a perturbation file to a training set")
    _add_data_args(poison)
    poison.add_argument("--perturbations", required=True)
    poison.set_defaults(func=cmd_poison)

    evaluate = commands.add_parser("eval", parents=[common], help="rank sampled targets with a checkpoint")
    for add in (_add_data_args, _add_train_args, _add_experiment_args):
        add(evaluate)
    evaluate.add_argument("--checkpoint", required=True)
    evaluate.set_defaults(func=cmd_eval)

    pipeline = commands.add_parser("pipeline", parents=[common], help="train, attack, poison, retrain and evaluate")
    for add in (_add_data_args, _add_train_args, _add_attack_args, _add_experiment_args):
        add(pipeline)
    pipeline.set_defaults(func=cmd_pipeline)

    sweep = commands.add_parser("sweep", parents=[common], help="pipeline over several budgets")
    for add in (_add_data_args, _add_train_args, _add_attack_args, _add_experiment_args):
        add(sweep)
    sweep.add_argument("--budgets", type=_budgets, default=[1, 2, 4, 6])
    sweep.set_defaults(func=cmd_sweep)

    stats = commands.add_parser("stats", parents=[common], help="entity, relation and degree statistics")
    _add_data_args(stats)
    stats.set_defaults(func=cmd_stats)
    return parser


# --- Commands ---

def _require(values: Dict[str, Any], key: str) -> str:
    if values.get(key) is None:
        raise ValueError(f"--{key} (or the [data] {key} key, or --dataset DIR) is required")
    return str(values[key])


def _out_dir(values: Dict[str, Any]) -> Path:
    return Path(values.get("out") or "results")


def _print_json(record: Dict[str, Any]) -> None:
    print(json.dumps(record, indent=2, sort_keys=True))


def cmd_train(args, values: Dict[str, Any]) -> int:
    values = resolve_dataset(values)
    fmt = TripleFormat(values.get("format", TripleFormat.NAME_TSV.value))
    kind = ModelKind(values.get("model", ModelKind.TRANSE.value))
    cfg = train_config(values)
    train_path = Path(_require(values, "train"))
    _, store = load_triples(train_path, fmt)
    emb = Trainer(kind, cfg).fit(store, progress=args.progress)
    metadata = {"dataset": values.get("dataset") or train_path.parent.name or train_path.stem,
                "dataset_hash": dataset_hash(store), "seed": cfg.seed, "train": cfg.model_dump(mode="json")}
    path = save_checkpoint(_out_dir(values) / CLEAN_CHECKPOINT, emb, kind, metadata)
    logger.info("checkpoint written to {}", path)
    return 0


def cmd_attack(args, values: Dict[str, Any]) -> int:
    cfg = experiment_config(values, progress=args.progress)
    experiment = Experiment(cfg).load()
    checkpoint = Path(args.checkpoint) if args.checkpoint else cfg.out_dir / CLEAN_CHECKPOINT
    if checkpoint.exists():
        experiment.use_checkpoint(checkpoint)
    else:
        logger.info("{} not found, training a clean model", checkpoint)
        experiment.train_clean(cfg.out_dir)
    outcome = experiment.attack()
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_perturbations(cfg.out_dir / PERTURBATIONS_FILE, outcome.strategy, outcome.per_target, outcome.flagged)
    outcome.timing.to_frame().to_csv(cfg.out_dir / TIMING_FILE, index=False)
    _print_json({"perturbations": outcome.count, "flagged": len(outcome.flagged),
                 "seconds_per_target": outcome.timing.report_timing()})
    return 0


def cmd_poison(args, values: Dict[str, Any]) -> int:
    values = resolve_dataset(values)
    fmt = TripleFormat(values.get("format", TripleFormat.NAME_TSV.value))
    vocabulary, store = load_triples(_require(values, "train"), fmt)
    _, per_target = load_perturbations(args.perturbations)
    poisoned = apply_perturbations(store, merge_perturbations(per_target))
    path = _out_dir(values) / poisoned_file_name(fmt)
    write_triples(path, vocabulary, poisoned, fmt)
    logger.info("{} triples -> {} triples written to {}", len(store), len(poisoned), path)
    return 0


def cmd_eval(args, values: Dict[str, Any]) -> int:
    cfg = experiment_config(values, progress=args.progress)
    experiment = Experiment(cfg).load()
    report = experiment.evaluate(experiment.use_checkpoint(args.checkpoint))
    _print_json({"mrr": report.mrr, "hits_at_10": report.hits_at_10, "targets": len(report.per_target)})
    return 0


def cmd_pipeline(args, values: Dict[str, Any]) -> int:
    cfg = experiment_config(values, progress=args.progress)
    clean, poisoned = run_pipeline(cfg)
    _print_json({"clean_mrr": clean.mrr, "poisoned_mrr": poisoned.mrr,
                 "clean_h10": clean.hits_at_10, "poisoned_h10": poisoned.hits_at_10,
                 "flagged": len(poisoned.flagged)})
    return 0


def cmd_sweep(args, values: Dict[str, Any]) -> int:
    cfg = experiment_config(values, progress=args.progress)
    print(run_sweep(cfg, args.budgets).to_string(index=False))
    return 0


def cmd_stats(args, values: Dict[str, Any]) -> int:
    values = resolve_dataset(values)
    fmt = TripleFormat(values.get("format", TripleFormat.NAME_TSV.value))
    _, store = load_triples(_require(values, "train"), fmt)
    _print_json(store_statistics(store))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(-1 if args.quiet else args.verbose)
    overrides = {key: value for key, value in vars(args).items() if key in _OPTION_KEYS}
    try:
        values = read_values(args.config, overrides)
        return args.func(args, values)
    except ValidationError as e:
        logger.error("invalid configuration:\n{}", e)
        return 2
    except KgePoisonError as e:
        logger.error("{}", e)
        return 1
    except ValueError as e:
        logger.error("{}", e)
        return 2
    except OSError as e:
        logger.error("{}", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
