"""
Model evaluation: stratified k-fold cross-validation, confusion matrices,
out-of-period holdout scoring, and the sector ranking report.

Folds come from scikit-learn's StratifiedKFold with shuffling seeded by the
run seed, so fold sizes and per-class counts differ by at most one.
"""
import logging
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import StratifiedKFold

from mining.errors import ConfigError, EmptyDataset, SchemaMismatch, TooFewRows
from mining.features import CLASS_COLUMN, SECTOR_COLUMN, ClassLabel, DiscretizedRow
from mining.prune import PruneConfig, prune_tree
from mining.rules import Rule, extract_rules
from mining.tree import (
    Dataset,
    DecisionNode,
    TreeConfig,
    UNSEEN_MAJORITY,
    build_tree,
    classify,
    depth,
    leaf_count,
    node_count,
    render_tree,
)

logger = logging.getLogger(__name__)

MEAN_RANK = 'mean-rank'
GOOD_SHARE = 'good-share'
SECTOR_SCORE_METHODS = (MEAN_RANK, GOOD_SHARE)

_GOOD_OR_BETTER = (ClassLabel.EXCELLENT, ClassLabel.VERY_GOOD, ClassLabel.GOOD)


# --- Confusion matrix ---
@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts indexed by (actual, predicted) over `classes`."""
    classes: tuple[str, ...]
    counts: np.ndarray

    @classmethod
    def empty(cls, classes: Sequence[str]) -> 'ConfusionMatrix':
        classes = tuple(classes)
        return cls(classes, np.zeros((len(classes), len(classes)), dtype=np.int64))

    @classmethod
    def from_predictions(cls, classes: Sequence[str], actual: Sequence[str], predicted: Sequence[str]) -> 'ConfusionMatrix':
        if len(actual) != len(predicted):
            raise SchemaMismatch(f"{len(actual)} actual labels but {len(predicted)} predictions")
        classes = tuple(classes)
        unknown = next((label for label in (*actual, *predicted) if label not in classes), None)
        if unknown is not None:
            raise SchemaMismatch(f"class {unknown!r} is not among {classes}")
        if not actual:
            return cls.empty(classes)
        counts = confusion_matrix(list(actual), list(predicted), labels=list(classes))
        return cls(classes, counts.astype(np.int64))

    def __add__(self, other: 'ConfusionMatrix') -> 'ConfusionMatrix':
        if self.classes != other.classes:
            raise SchemaMismatch(f"cannot add confusion matrices over {self.classes} and {other.classes}")
        return ConfusionMatrix(self.classes, self.counts + other.counts)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConfusionMatrix)
            and self.classes == other.classes
            and np.array_equal(self.counts, other.counts)
        )

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            self.counts,
            index=pd.Index(self.classes, name='actual'),
            columns=pd.Index(self.classes, name='predicted'),
        )

    def render(self) -> str:
        return self.to_frame().to_string()


# --- Folds ---
def fold_assignment(labels: Sequence[str], k: int, seed: int) -> np.ndarray:
    """Fold index per row (0..k-1), from a shuffled StratifiedKFold."""
    if k < 2:
        raise ConfigError('FOLDS', f"need at least 2 folds, got {k}")
    n = len(labels)
    if n < k:
        raise TooFewRows(f"{n} rows cannot fill {k} folds")
    largest = max(Counter(labels).values())
    if largest < k:
        raise TooFewRows(f"no class has {k} rows (largest has {largest}); lower the fold count")

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    folds = np.empty(n, dtype=np.int64)
    with warnings.catch_warnings():
        # Classes smaller than k are spread one row per fold.
        warnings.simplefilter('ignore', UserWarning)
        for index, (_, test) in enumerate(splitter.split(np.zeros((n, 1)), np.asarray(labels))):
            folds[test] = index
    return folds


def fold_indices(data: Dataset, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """(train indices, test indices) per fold, both ascending."""
    folds = fold_assignment(data.labels, k, seed)
    return [(np.flatnonzero(folds != f), np.flatnonzero(folds == f)) for f in range(k)]


def stratified_kfold(data: Dataset, k: int, seed: int) -> list[tuple[Dataset, Dataset]]:
    return [
        (data.subset(train.tolist()), data.subset(test.tolist()))
        for train, test in fold_indices(data, k, seed)
    ]


# --- Cross-validation ---
@dataclass(frozen=True)
class FoldResult:
    index: int
    confusion: ConfusionMatrix

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy


@dataclass(frozen=True)
class HoldoutResult:
    confusion: ConfusionMatrix
    source: str = ''

    @property
    def rows(self) -> int:
        return self.confusion.total

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy


def fit(data: Dataset, tree_config: TreeConfig | None = None, prune_config: PruneConfig | None = None, audit=None) -> DecisionNode:
    """Induce on `data` and prune."""
    return prune_tree(build_tree(data, config=tree_config), prune_config, audit)


def predict_labels(tree: DecisionNode, data: Dataset, unseen_value: str = UNSEEN_MAJORITY) -> list[str]:
    return [classify(tree, data.row_dict(i), unseen_value)[0] for i in range(len(data))]


def _run_fold(index: int, data: Dataset, train: np.ndarray, test: np.ndarray, tree_config: TreeConfig, prune_config: PruneConfig) -> FoldResult:
    train_set = data.subset(train.tolist())
    test_set = data.subset(test.tolist())
    tree = fit(train_set, tree_config, prune_config)
    predicted = predict_labels(tree, test_set, tree_config.unseen_value)
    confusion = ConfusionMatrix.from_predictions(data.classes, test_set.labels, predicted)
    logger.debug(f"Fold {index + 1}: {confusion.correct}/{confusion.total} correct.")
    return FoldResult(index, confusion)


@dataclass(frozen=True)
class EvaluationReport:
    rows: int
    attributes: tuple[str, ...]
    folds: int
    seed: int
    fold_results: tuple[FoldResult, ...]
    confusion: ConfusionMatrix
    tree: DecisionNode
    rules: tuple[Rule, ...]
    tree_config: TreeConfig = field(default_factory=TreeConfig)
    prune_config: PruneConfig = field(default_factory=PruneConfig)
    holdout: HoldoutResult | None = None

    @property
    def fold_accuracies(self) -> list[float]:
        return [fold.accuracy for fold in self.fold_results]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def pooled_accuracy(self) -> float:
        return self.confusion.accuracy

    @property
    def leaf_count(self) -> int:
        return leaf_count(self.tree)

    @property
    def tree_size(self) -> int:
        return node_count(self.tree)

    @property
    def depth(self) -> int:
        return depth(self.tree)

    @property
    def rule_count(self) -> int:
        return len(self.rules)

    def with_holdout(self, holdout: HoldoutResult) -> 'EvaluationReport':
        return replace(self, holdout=holdout)

    def render_text(self) -> str:
        title = 'pruned tree' if self.prune_config.enabled else 'unpruned tree'
        lines = [
            '=== Run information ===',
            '',
            f"Instances:  {self.rows}",
            f"Attributes: {len(self.attributes)}",
            *(f"            {name}" for name in self.attributes),
            f"Test mode:  {self.folds}-fold stratified cross-validation (seed {self.seed})",
            f"Settings:   criterion={self.tree_config.criterion} min_leaf={self.tree_config.min_leaf_count}"
            f" confidence={self.prune_config.confidence:g}",
            '',
            '=== Classifier model (full training set) ===',
            '',
            title,
            '-' * len(title),
            render_tree(self.tree).rstrip('\n'),
            '',
            f"Size of the tree : {self.tree_size}",
            f"Depth of the tree : {self.depth}",
            f"Number of Rules : {self.rule_count}",
            '',
            '=== Stratified cross-validation ===',
            '',
        ]
        for fold in self.fold_results:
            lines.append(f"Fold {fold.index + 1:>2}: {fold.accuracy:.4f} ({fold.confusion.correct}/{fold.confusion.total})")
        lines += [
            '',
            f"Mean accuracy:   {self.mean_accuracy:.4f}",
            f"Pooled accuracy: {self.pooled_accuracy:.4f} ({self.confusion.correct}/{self.confusion.total})",
            '',
            '=== Confusion matrix ===',
            '',
            self.confusion.render(),
        ]
        if self.holdout is not None:
            source = f" ({self.holdout.source})" if self.holdout.source else ''
            lines += [
                '',
                f"=== Holdout evaluation{source} ===",
                '',
                f"Accuracy: {self.holdout.accuracy:.4f} ({self.holdout.confusion.correct}/{self.holdout.rows})",
                '',
                self.holdout.confusion.render(),
            ]
        return '\n'.join(lines) + '\n'

    def metrics_frame(self) -> pd.DataFrame:
        metrics = [
            ('rows', str(self.rows)),
            ('folds', str(self.folds)),
            ('seed', str(self.seed)),
            ('mean_accuracy', f"{self.mean_accuracy:.6f}"),
            ('pooled_accuracy', f"{self.pooled_accuracy:.6f}"),
        ]
        metrics += [(f"fold_{f.index + 1}_accuracy", f"{f.accuracy:.6f}") for f in self.fold_results]
        metrics += [
            ('leaf_count', str(self.leaf_count)),
            ('tree_size', str(self.tree_size)),
            ('depth', str(self.depth)),
            ('rule_count', str(self.rule_count)),
        ]
        if self.holdout is not None:
            metrics += [
                ('holdout_rows', str(self.holdout.rows)),
                ('holdout_accuracy', f"{self.holdout.accuracy:.6f}"),
            ]
        return pd.DataFrame(metrics, columns=['metric', 'value'])


def cross_validate(
    data: Dataset,
    k: int = 10,
    seed: int = 1,
    tree_config: TreeConfig | None = None,
    prune_config: PruneConfig | None = None,
    workers: int = 1,
) -> EvaluationReport:
    """
    Per fold: induce on the training part, prune, classify the test part.
    Fold results are collected by fold index, so the report does not depend
    on `workers`. The reported model is induced on all rows.
    """
    tree_config = tree_config or TreeConfig()
    prune_config = prune_config or PruneConfig()
    if workers < 1:
        raise ConfigError('WORKERS', f"must be at least 1, got {workers}")
    if len(data) == 0:
        raise EmptyDataset('cannot cross-validate an empty dataset')

    splits = fold_indices(data, k, seed)
    jobs = (
        delayed(_run_fold)(i, data, train, test, tree_config, prune_config)
        for i, (train, test) in enumerate(splits)
    )
    if workers > 1:
        results = Parallel(n_jobs=workers, prefer='threads')(jobs)
    else:
        results = [job(*args, **kwargs) for job, args, kwargs in jobs]
    results = tuple(sorted(results, key=lambda r: r.index))

    pooled = ConfusionMatrix.empty(data.classes)
    for result in results:
        pooled = pooled + result.confusion

    tree = fit(data, tree_config, prune_config)
    report = EvaluationReport(
        rows=len(data),
        attributes=data.attribute_names,
        folds=k,
        seed=seed,
        fold_results=results,
        confusion=pooled,
        tree=tree,
        rules=tuple(extract_rules(tree)),
        tree_config=tree_config,
        prune_config=prune_config,
    )
    logger.info(f"{k}-fold cross-validation: mean accuracy {report.mean_accuracy:.4f} over {len(data)} rows.")
    return report


def evaluate_holdout(
    tree: DecisionNode,
    data: Dataset,
    classes: Sequence[str] = (),
    unseen_value: str = UNSEEN_MAJORITY,
    source: str = '',
) -> HoldoutResult:
    """
    Score an already trained tree on a separately labelled table. The matrix
    covers `classes` followed by any further classes the table introduces.
    """
    predicted = predict_labels(tree, data, unseen_value)
    labels = tuple(dict.fromkeys([*classes, *data.classes, *predicted]))
    confusion = ConfusionMatrix.from_predictions(labels, data.labels, predicted)
    logger.info(f"Holdout accuracy {confusion.accuracy:.4f} over {confusion.total} rows.")
    return HoldoutResult(confusion, source)


# --- Sector ranking ---
@dataclass(frozen=True)
class SectorStanding:
    sector: str
    rows: int
    distribution: tuple[tuple[ClassLabel, int], ...]
    score: float
    excellent_share: float
    rank: int


@dataclass(frozen=True)
class SectorRanking:
    method: str
    standings: tuple[SectorStanding, ...]

    @property
    def sectors(self) -> list[str]:
        return [s.sector for s in self.standings]

    def to_frame(self) -> pd.DataFrame:
        records = []
        for s in self.standings:
            record = {'rank': s.rank, SECTOR_COLUMN: s.sector, 'rows': s.rows}
            record.update({label.value: count for label, count in s.distribution})
            record['score'] = f"{s.score:.6f}"
            record['excellent_share'] = f"{s.excellent_share:.6f}"
            records.append(record)
        columns = ['rank', SECTOR_COLUMN, 'rows', *(l.value for l in ClassLabel), 'score', 'excellent_share']
        return pd.DataFrame(records, columns=columns)


def _sector_pairs(rows: Sequence[DiscretizedRow] | pd.DataFrame) -> list[tuple[str, ClassLabel]]:
    if isinstance(rows, pd.DataFrame):
        missing = [c for c in (SECTOR_COLUMN, CLASS_COLUMN) if c not in rows.columns]
        if missing:
            raise SchemaMismatch(f"sector ranking needs columns {missing}")
        try:
            return [(str(s), ClassLabel.parse(c)) for s, c in zip(rows[SECTOR_COLUMN], rows[CLASS_COLUMN])]
        except ValueError as e:
            raise SchemaMismatch(str(e)) from e
    return [(row.sector, ClassLabel(row.class_label)) for row in rows]


def rank_sectors(rows: Sequence[DiscretizedRow] | pd.DataFrame, method: str = MEAN_RANK) -> SectorRanking:
    """
    Per-sector class distribution and score, best first. mean-rank scores the
    mean of Excellent=5..Bad=1; good-share scores the share of Good or better.
    Ties fall to the Excellent share, then the sector name.
    """
    if method not in SECTOR_SCORE_METHODS:
        raise ConfigError('SECTOR_SCORE', f"expected one of {SECTOR_SCORE_METHODS}, got {method!r}")
    pairs = _sector_pairs(rows)
    if not pairs:
        raise EmptyDataset('cannot rank sectors without rows')

    counts: dict[str, dict[ClassLabel, int]] = {}
    for sector, label in pairs:
        per_sector = counts.setdefault(sector, {l: 0 for l in ClassLabel})
        per_sector[label] += 1

    scored = []
    for sector, per_sector in counts.items():
        n = sum(per_sector.values())
        if method == MEAN_RANK:
            score = sum(label.rank * c for label, c in per_sector.items()) / n
        else:
            score = sum(per_sector[label] for label in _GOOD_OR_BETTER) / n
        scored.append((sector, n, tuple(per_sector.items()), score, per_sector[ClassLabel.EXCELLENT] / n))

    scored.sort(key=lambda s: (-s[3], -s[4], s[0]))
    standings = tuple(
        SectorStanding(sector, n, distribution, score, excellent, rank)
        for rank, (sector, n, distribution, score, excellent) in enumerate(scored, start=1)
    )
    return SectorRanking(method, standings)

