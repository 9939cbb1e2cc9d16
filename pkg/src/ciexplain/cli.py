"""Command-line front end.

Subcommands: `mine` writes the itemset store, `explain` produces an
instance / class / global explanation record, `eval` runs the evaluation
harness, and `report` re-renders a saved report.  Options come from
built-in defaults, then an optional JSON config file (``--config`` or the
``CIEXPLAIN_CONFIG`` environment variable), then command-line flags, in
that order of precedence.

Exit codes: 0 on success, 2 for parse errors, 3 for schema violations,
4 for failed lookups, 5 for infeasible explanation constraints, 6 for
I/O failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import classwise, instance, miner
from .classwise import ObjectiveConfig
from .corpus import MODES, Dataset, load_dataset, load_lexicon
from .errors import (InfeasibleCandidateError, ParseError, SchemaError,
                     UnknownIdError)
from .evaluation import (BaselineConfig, EvalReport, SweepConfig, evaluate)
from .miner import MiningParams

log = logging.getLogger("ciexplain")

CONFIG_ENV_VAR = "CIEXPLAIN_CONFIG"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SCHEMA = 3
EXIT_LOOKUP = 4
EXIT_INFEASIBLE = 5
EXIT_IO = 6

STORE_NAME = "itemsets.jsonl"


@dataclass
class RunConfig:
    dataset: str | None = None
    mode: str = "pre-annotated"
    lexicon: str | None = None
    out: str = "out"
    seed: int = 0
    jobs: int = 1
    mining: MiningParams = field(default_factory=MiningParams)
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    sweeps: list[SweepConfig] = field(default_factory=list)
    baselines: list[BaselineConfig] = field(default_factory=list)
    alpha_cap: int | None = None
    gamma_budget: int = 10
    conflict_penalty: float = 1.0


def _int_list(text: str) -> tuple[int, ...]:
    try:
        budgets = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")
    if not budgets or any(b < 1 for b in budgets):
        raise argparse.ArgumentTypeError("budgets must be positive")
    if list(budgets) != sorted(set(budgets)):
        raise argparse.ArgumentTypeError("budgets must be strictly increasing")
    return budgets


def _weights(text: str) -> tuple[float, ...]:
    try:
        weights = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")
    if len(weights) != 6:
        raise argparse.ArgumentTypeError(f"expected 6 weights, got {len(weights)}")
    return weights


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (defaults to $%s)" % CONFIG_ENV_VAR)
    parser.add_argument("--dataset", help="dataset file, one JSON record per line")
    parser.add_argument("--mode", choices=MODES, help="concept source (default pre-annotated)")
    parser.add_argument("--lexicon", help="tab-separated gazetteer, required in lexicon mode")
    parser.add_argument("--out", help="output directory (default out)")
    parser.add_argument("--seed", type=int, help="seed for all randomized steps")
    parser.add_argument("--jobs", type=int, help="worker cap for per-class steps")


def _add_mining(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--min-conf", type=float, help="confidence threshold (default 0.8)")
    parser.add_argument("--max-k", type=int, help="largest itemset size (default 3)")
    parser.add_argument("--min-support", type=int, help="support floor (default 1)")


def _add_objective(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--theta1", type=int, help="bound on itemsets per explanation")
    parser.add_argument("--theta2", type=int, help="bound on summed concept count")
    parser.add_argument("--theta3", type=int, help="bound on single itemset length")
    parser.add_argument("--delta", type=float, help="local-search improvement threshold")
    parser.add_argument("--weights", type=_weights,
                        help="six comma-separated reward weights")
    parser.add_argument("--unnormalized", action="store_true", default=None,
                        help="score rewards on their raw scales")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ciexplain",
        description="Explain a black-box text classifier with per-class "
                    "confident concept itemsets.")
    commands = parser.add_subparsers(dest="command", required=True)

    mine = commands.add_parser("mine", help="mine the per-class itemset store")
    _add_common(mine)
    _add_mining(mine)

    explain = commands.add_parser("explain", help="explain an instance, a class, "
                                                  "or the whole model")
    _add_common(explain)
    _add_mining(explain)
    _add_objective(explain)
    explain.add_argument("--store", help="itemset store (default <out>/%s)" % STORE_NAME)
    explain.add_argument("--mine-first", action="store_true",
                         help="mine (and write) the store before explaining")
    scope = explain.add_mutually_exclusive_group(required=True)
    scope.add_argument("--instance", metavar="SAMPLE_ID")
    scope.add_argument("--class", dest="class_name", metavar="CLASS_NAME")
    scope.add_argument("--global", dest="global_scope", action="store_true")
    explain.add_argument("--alpha-cap", type=int,
                         help="cap on scored itemsets per class (instance scope)")
    explain.add_argument("--gamma", type=int, help="unit budget (global scope)")
    explain.add_argument("--conflict-penalty", type=float,
                         help="weight on newly conflicted samples (global scope)")

    evaluate_cmd = commands.add_parser("eval", help="run the evaluation harness")
    _add_common(evaluate_cmd)
    _add_mining(evaluate_cmd)
    _add_objective(evaluate_cmd)
    evaluate_cmd.add_argument("--store", help="itemset store (default <out>/%s)" % STORE_NAME)
    evaluate_cmd.add_argument("--mine-first", action="store_true",
                              help="mine (and write) the store before evaluating")
    evaluate_cmd.add_argument("--alpha", type=_int_list, metavar="B1,B2,...",
                              help="instance-score cap sweep budgets")
    evaluate_cmd.add_argument("--beta", type=_int_list, metavar="B1,B2,...",
                              help="class-explanation size sweep budgets")
    evaluate_cmd.add_argument("--gamma", type=_int_list, metavar="B1,B2,...",
                              help="global-unit sweep budgets")
    evaluate_cmd.add_argument("--baseline", action="append", choices=("random", "greedy"),
                              help="baseline to run (repeatable)")
    evaluate_cmd.add_argument("--n-words", type=int, help="words per class for baselines")
    evaluate_cmd.add_argument("--conflict-penalty", type=float,
                              help="weight on newly conflicted samples (gamma sweep)")

    report = commands.add_parser("report", help="re-render a saved report")
    report.add_argument("--report", required=True, help="report.json written by eval")

    return parser


def _load_config_file(path: str | None) -> dict:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return data


def _config_error(message: str) -> SchemaError:
    return SchemaError(f"config: {message}")


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file, and flags into one RunConfig."""
    data = _load_config_file(getattr(args, "config", None))
    cfg = RunConfig()

    try:
        for key in ("dataset", "mode", "lexicon", "out"):
            if data.get(key) is not None:
                setattr(cfg, key, str(data[key]))
        for key in ("seed", "jobs", "gamma_budget"):
            if data.get(key) is not None:
                setattr(cfg, key, int(data[key]))
        if data.get("alpha_cap") is not None:
            cfg.alpha_cap = int(data["alpha_cap"])
        if data.get("conflict_penalty") is not None:
            cfg.conflict_penalty = float(data["conflict_penalty"])
        if data.get("mining") is not None:
            m = data["mining"]
            cfg.mining = MiningParams(
                min_conf=float(m.get("min_conf", cfg.mining.min_conf)),
                max_k=int(m.get("max_k", cfg.mining.max_k)),
                min_support=int(m.get("min_support", cfg.mining.min_support)))
        if data.get("objective") is not None:
            o = data["objective"]
            cfg.objective = ObjectiveConfig(
                weights=tuple(o.get("weights", cfg.objective.weights)),
                max_size=int(o.get("theta1", cfg.objective.max_size)),
                max_concepts=int(o.get("theta2", cfg.objective.max_concepts)),
                max_len=int(o.get("theta3", cfg.objective.max_len)),
                delta=float(o.get("delta", cfg.objective.delta)),
                normalized=bool(o.get("normalized", cfg.objective.normalized)))
        if data.get("sweeps") is not None:
            cfg.sweeps = [SweepConfig(axis, tuple(budgets))
                          for axis, budgets in data["sweeps"].items()]
        if data.get("baselines") is not None:
            cfg.baselines = [
                BaselineConfig(kind=entry["kind"],
                               n_words=int(entry.get("n_words", 10)),
                               seed=int(entry.get("seed", cfg.seed)))
                for entry in data["baselines"]]
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise _config_error(str(exc)) from None

    for key in ("dataset", "mode", "lexicon", "out", "seed", "jobs"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)

    mining_updates = {name: value for name, value in (
        ("min_conf", getattr(args, "min_conf", None)),
        ("max_k", getattr(args, "max_k", None)),
        ("min_support", getattr(args, "min_support", None))) if value is not None}
    if mining_updates:
        try:
            cfg.mining = replace(cfg.mining, **mining_updates)
        except ValueError as exc:
            raise _config_error(str(exc)) from None

    objective_updates = {name: value for name, value in (
        ("max_size", getattr(args, "theta1", None)),
        ("max_concepts", getattr(args, "theta2", None)),
        ("max_len", getattr(args, "theta3", None)),
        ("delta", getattr(args, "delta", None)),
        ("weights", getattr(args, "weights", None))) if value is not None}
    if getattr(args, "unnormalized", None):
        objective_updates["normalized"] = False
    if objective_updates:
        try:
            cfg.objective = replace(cfg.objective, **objective_updates)
        except ValueError as exc:
            raise _config_error(str(exc)) from None

    for axis in ("alpha", "beta", "gamma"):
        budgets = getattr(args, axis, None)
        if isinstance(budgets, tuple):
            cfg.sweeps = [s for s in cfg.sweeps if s.axis != axis]
            cfg.sweeps.append(SweepConfig(axis, budgets))
    if getattr(args, "baseline", None):
        n_words = getattr(args, "n_words", None) or 10
        cfg.baselines = [BaselineConfig(kind=kind, n_words=n_words, seed=cfg.seed)
                         for kind in args.baseline]
    elif getattr(args, "n_words", None):
        cfg.baselines = [replace(b, n_words=args.n_words) for b in cfg.baselines]

    if getattr(args, "alpha_cap", None) is not None:
        cfg.alpha_cap = args.alpha_cap
    if getattr(args, "gamma", None) is not None and isinstance(args.gamma, int):
        cfg.gamma_budget = args.gamma
    if getattr(args, "conflict_penalty", None) is not None:
        cfg.conflict_penalty = args.conflict_penalty

    cfg.sweeps.sort(key=lambda s: ("alpha", "beta", "gamma").index(s.axis))
    return cfg


def _require_dataset(cfg: RunConfig) -> Dataset:
    if not cfg.dataset:
        raise _config_error("no dataset given (flag --dataset or config key)")
    lexicon = None
    if cfg.mode == "lexicon":
        if cfg.lexicon is None:
            raise _config_error("lexicon mode needs --lexicon")
        lexicon = load_lexicon(cfg.lexicon)
    return load_dataset(cfg.dataset, mode=cfg.mode, lexicon=lexicon)


def _store_path(cfg: RunConfig, args: argparse.Namespace) -> Path:
    explicit = getattr(args, "store", None)
    return Path(explicit) if explicit else Path(cfg.out) / STORE_NAME


def _write_json(record: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _mine_store(cfg: RunConfig, dataset: Dataset, store: Path) -> miner.MinedItemsets:
    mined = miner.mine_all(dataset, cfg.mining, jobs=cfg.jobs)
    store.parent.mkdir(parents=True, exist_ok=True)
    miner.write_store(mined, dataset.classes, store)
    if mined.total == 0:
        log.warning("no confident itemsets at min_conf=%s", cfg.mining.min_conf)
    return mined


def cmd_mine(cfg: RunConfig, args: argparse.Namespace) -> int:
    dataset = _require_dataset(cfg)
    store = _store_path(cfg, args)
    mined = _mine_store(cfg, dataset, store)
    summary = miner.summarize(mined, dataset.classes)
    summary["params"] = {"min_conf": cfg.mining.min_conf, "max_k": cfg.mining.max_k,
                         "min_support": cfg.mining.min_support}
    _write_json(summary, Path(cfg.out) / "mining_summary.json")
    log.info("wrote %d itemsets to %s", mined.total, store)
    print(store)
    return EXIT_OK


def _obtain_store(cfg: RunConfig, args: argparse.Namespace,
                  dataset: Dataset) -> miner.MinedItemsets:
    store = _store_path(cfg, args)
    if getattr(args, "mine_first", False):
        return _mine_store(cfg, dataset, store)
    return miner.load_store(store, dataset.classes)


def cmd_explain(cfg: RunConfig, args: argparse.Namespace) -> int:
    dataset = _require_dataset(cfg)
    mined = _obtain_store(cfg, args, dataset)
    out = Path(cfg.out)
    if args.instance is not None:
        sample = dataset.sample_by_id(args.instance)
        explanation = instance.explain_instance(sample, mined, cap=cfg.alpha_cap)
        record = instance.to_record(explanation, dataset.classes)
        path = out / f"instance_{args.instance}.json"
    elif args.class_name is not None:
        label = dataset.class_by_name(args.class_name)
        explanation = classwise.explain_class(label.id, dataset, mined, cfg.objective)
        record = classwise.to_record(explanation, dataset.classes)
        path = out / f"class_{label.name}.json"
    else:
        result = classwise.global_explanation(mined, dataset, cfg.gamma_budget,
                                              cfg.conflict_penalty)
        record = classwise.global_to_record(result, dataset.classes,
                                            cfg.gamma_budget, cfg.conflict_penalty)
        path = out / "global.json"
    _write_json(record, path)
    print(json.dumps(record, sort_keys=True, indent=2))
    return EXIT_OK


def report_to_dict(report: EvalReport, cfg: RunConfig) -> dict:
    record = {
        "seed": cfg.seed,
        "dataset": cfg.dataset,
        "params": {
            "mode": cfg.mode,
            "mining": {"min_conf": cfg.mining.min_conf, "max_k": cfg.mining.max_k,
                       "min_support": cfg.mining.min_support},
            "objective": {"weights": list(cfg.objective.weights),
                          "theta1": cfg.objective.max_size,
                          "theta2": cfg.objective.max_concepts,
                          "theta3": cfg.objective.max_len,
                          "delta": cfg.objective.delta,
                          "normalized": cfg.objective.normalized},
            "conflict_penalty": cfg.conflict_penalty,
        },
        "instance_fidelity": report.instance_fidelity,
        "classwise_fidelity": report.classwise_fidelity,
        "abstain_rate": report.abstain_rate,
    }
    if report.curves:
        record["curves"] = {axis: [[budget, value] for budget, value in points]
                            for axis, points in report.curves.items()}
    if report.baselines:
        record["baselines"] = [
            {"label": r.config.label, "kind": r.config.kind,
             "n_words": r.config.n_words,
             "seed": r.config.seed if r.config.kind == "random" else None,
             "fidelity": r.fidelity,
             "words": {str(q): ws for q, ws in sorted(r.words.items())}}
            for r in report.baselines]
    return record


def render_summary(record: dict) -> str:
    lines = ["evaluation summary"]
    lines.append(f"  dataset             {record.get('dataset')}")
    lines.append(f"  seed                {record.get('seed')}")
    lines.append(f"  instance fidelity   {record['instance_fidelity']:.6f}")
    lines.append(f"  classwise fidelity  {record['classwise_fidelity']:.6f}")
    lines.append(f"  abstain rate        {record['abstain_rate']:.6f}")
    curves = record.get("curves")
    if curves:
        lines.append("curves")
        for axis in sorted(curves):
            for budget, value in curves[axis]:
                lines.append(f"  {axis:<6} {budget:>4}  {value:.6f}")
    baselines = record.get("baselines")
    if baselines:
        lines.append("baselines")
        for entry in baselines:
            lines.append(f"  {entry['label']:<24} {entry['fidelity']:.6f}")
    return "\n".join(lines) + "\n"


def _write_curves(record: dict, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis", "budget", "fidelity"])
        for axis in sorted(record["curves"]):
            for budget, value in record["curves"][axis]:
                writer.writerow([axis, budget, value])


def cmd_eval(cfg: RunConfig, args: argparse.Namespace) -> int:
    dataset = _require_dataset(cfg)
    mined = _obtain_store(cfg, args, dataset)
    report = evaluate(dataset, mined, cfg.objective, sweeps=cfg.sweeps,
                      baselines=cfg.baselines, conflict_penalty=cfg.conflict_penalty,
                      jobs=cfg.jobs)
    record = report_to_dict(report, cfg)
    out = Path(cfg.out)
    _write_json(record, out / "report.json")
    if record.get("curves"):
        _write_curves(record, out / "curves.csv")
    summary = render_summary(record)
    with open(out / "summary.txt", "w", encoding="utf-8") as fh:
        fh.write(summary)
    print(summary, end="")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    with open(args.report, encoding="utf-8") as fh:
        try:
            record = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.report}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if "instance_fidelity" not in record:
        raise SchemaError(f"{args.report}: not an evaluation report")
    print(render_summary(record), end="")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args)
        cfg = build_config(args)
        if args.command == "mine":
            return cmd_mine(cfg, args)
        if args.command == "explain":
            return cmd_explain(cfg, args)
        return cmd_eval(cfg, args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except UnknownIdError as exc:
        # KeyError reprs its message; unwrap for readability.
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_LOOKUP
    except InfeasibleCandidateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
