"""Learning-curve benchmarking: active vs passive labeling budgets.

Runs the margin-based learner and the random (passive) baseline under
identical seeds, measures the full-pool reference score, and reports how
many labels each learner needs to first reach a target within a small gap
of that reference. Everything is deterministic given (corpus, config).
"""

from dataclasses import dataclass

import numpy as np

from .classifier import evaluate, train_head
from .corpus import Corpus, split_pool_test
from .session import RoundRecord, SessionConfig, run_simulation
from .strategies import QueryStrategy


@dataclass
class CompareResult:
    full_pool_f1: float
    target_f1: float
    margin_history: list[RoundRecord]
    random_history: list[RoundRecord]
    margin_labels_to_target: int | None
    random_labels_to_target: int | None


def full_pool_macro_f1(corpus: Corpus, config: SessionConfig) -> float:
    """Macro F1 of a head trained on every pool label, on the held-out test set."""
    pool_ids, test_ids = split_pool_test(corpus, config.test_fraction, config.rng_seed)
    label_index = {label: i for i, label in enumerate(config.label_set)}
    pool_docs = [corpus.by_id[i] for i in pool_ids]
    missing = [doc.id for doc in pool_docs if doc.gold_label is None]
    if missing:
        raise ValueError(f"full-pool training requires gold labels; {len(missing)} lack one")
    x = np.stack([doc.embedding for doc in pool_docs])
    y = np.asarray([label_index[doc.gold_label] for doc in pool_docs])
    head = train_head(x, y, list(config.label_set), config.train, corpus.dim)
    test_docs = [corpus.by_id[i] for i in test_ids]
    return evaluate(head, test_docs).macro_f1


def labels_to_reach(history: list[RoundRecord], target: float) -> int | None:
    """Labels used by the first round whose macro F1 reaches the target."""
    for record in history:
        if record.macro_f1 is not None and record.macro_f1 >= target:
            return record.n_labeled
    return None


def compare_strategies(corpus: Corpus, config: SessionConfig, gap: float = 0.02) -> CompareResult:
    """Margin vs random under identical seeds; target = full-pool F1 - gap."""
    full_f1 = full_pool_macro_f1(corpus, config)
    target = full_f1 - gap

    def with_strategy(strategy: QueryStrategy) -> SessionConfig:
        return SessionConfig(
            label_set=list(config.label_set),
            test_fraction=config.test_fraction,
            n_seed=config.n_seed,
            batch_size=config.batch_size,
            max_rounds=config.max_rounds,
            strategy=strategy,
            rng_seed=config.rng_seed,
            train=config.train,
            stop_f1_threshold=config.stop_f1_threshold,
        )

    margin_history = run_simulation(corpus, with_strategy(QueryStrategy.MARGIN))
    random_history = run_simulation(corpus, with_strategy(QueryStrategy.RANDOM))
    return CompareResult(
        full_pool_f1=full_f1,
        target_f1=target,
        margin_history=margin_history,
        random_history=random_history,
        margin_labels_to_target=labels_to_reach(margin_history, target),
        random_labels_to_target=labels_to_reach(random_history, target),
    )
