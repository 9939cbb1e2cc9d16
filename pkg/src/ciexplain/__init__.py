"""Model-agnostic explanations for black-box text classifiers, built from
per-class confident concept itemsets.

Typical flow: `load_dataset` -> `mine_all` -> `explain_instance` /
`explain_class` / `global_explanation` -> `evaluate`.
"""

from .corpus import (ClassLabel, Concept, Dataset, Lexicon, Sample, annotate,
                     build_index, load_dataset, load_lexicon, tokenize)
from .errors import (EmptyInputError, InfeasibleCandidateError, ParseError,
                     SchemaError, UndefinedSubspaceError, UnknownIdError,
                     ZeroSupportError)
from .miner import (ConfidentItemset, MinedItemsets, MiningParams, confidence,
                    load_store, mine_all, mine_class, write_store)
from .instance import (ABSTAIN, InstanceExplanation, confidence_score,
                       explain_instance, match_itemsets)
from .classwise import (ClassExplanation, GlobalExplanation, ObjectiveConfig,
                        PropertyRecord, coverage, explain_all_classes,
                        explain_class, fidelity, global_explanation,
                        interpretability_properties, local_search, objective)
from .evaluation import (BaselineConfig, BaselineResult, EvalReport, SweepConfig,
                         abstain_rate, baseline_greedy, baseline_random,
                         classwise_fidelity, evaluate, global_fidelity,
                         grid_search_weights, instance_fidelity, sweep)

__version__ = "0.1.0"

__all__ = [
    "ABSTAIN", "BaselineConfig", "BaselineResult", "ClassExplanation",
    "ClassLabel", "Concept", "ConfidentItemset", "Dataset", "EmptyInputError",
    "EvalReport", "GlobalExplanation", "InfeasibleCandidateError",
    "InstanceExplanation", "Lexicon", "MinedItemsets", "MiningParams",
    "ObjectiveConfig", "ParseError", "PropertyRecord", "Sample", "SchemaError",
    "SweepConfig", "UndefinedSubspaceError", "UnknownIdError",
    "ZeroSupportError", "abstain_rate", "annotate", "baseline_greedy",
    "baseline_random", "build_index", "classwise_fidelity", "confidence",
    "confidence_score", "coverage", "evaluate", "explain_all_classes",
    "explain_class", "explain_instance", "fidelity", "global_explanation",
    "global_fidelity", "grid_search_weights", "instance_fidelity",
    "interpretability_properties", "load_dataset", "load_lexicon",
    "load_store", "local_search", "match_itemsets", "mine_all", "mine_class",
    "objective", "sweep", "tokenize", "write_store",
]
