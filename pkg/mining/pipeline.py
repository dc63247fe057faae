"""
End-to-end stages shared by the command handlers: featurize, train, predict
and evaluate, plus the serialisable Model.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import pandas as pd

from mining.errors import EmptyDataset, SchemaMismatch, UnknownAccount
from mining.evaluation import EvaluationReport, SectorRanking, cross_validate, evaluate_holdout, rank_sectors
from mining.features import (
    ACCOUNT_COLUMN,
    CLASS_COLUMN,
    FEATURE_FIELDS,
    SECTOR_COLUMN,
    ClassLabel,
    DiscretizedRow,
    FilterReport,
    RawFeatureRow,
    aggregate_all,
    discretize_row,
    discretized_frame,
    raw_frame,
    statistical_filter,
)
from mining.ingest import (
    AccountProfile,
    TransactionRecord,
    account_window,
    filter_transactions,
    select_active_window,
    select_complete_windows,
)
from mining.prune import PruneConfig, prune_tree
from mining.rules import Rule, classify_with_rules, extract_rules
from mining.tree import (
    Attribute,
    Dataset,
    DecisionNode,
    TreeConfig,
    build_tree,
    tree_from_dict,
    tree_to_dict,
)
from utils.config import PipelineConfig

logger = logging.getLogger(__name__)

MODEL_FORMAT = 1
PREDICTION_COLUMNS = [ACCOUNT_COLUMN, CLASS_COLUMN, 'rule_index', 'fallback']


def normalize_label(text: str) -> str:
    return ClassLabel.parse(text).value


# --- featurize ---
@dataclass(frozen=True)
class FeaturizeResult:
    raw: list[RawFeatureRow]
    rows: list[DiscretizedRow]
    retained: list[str]
    report: FilterReport

    def raw_frame(self) -> pd.DataFrame:
        return raw_frame(self.raw)

    def discretized_frame(self) -> pd.DataFrame:
        return discretized_frame(self.rows, self.retained)


def select_transactions(
    accounts: Sequence[AccountProfile],
    transactions: Sequence[TransactionRecord],
    config: PipelineConfig,
) -> list[TransactionRecord]:
    """Transactions passing the global filters and each account's own observation window."""
    filtered = filter_transactions(transactions, config.allowed_codes, config.window, config.system_narratives)
    windows = {a.account_no: account_window(a, config.window_months) for a in accounts}
    return [
        t for t in filtered
        if t.account_no in windows and windows[t.account_no].contains(t.tx_date)
    ]


def featurize(
    accounts: Sequence[AccountProfile],
    transactions: Sequence[TransactionRecord],
    config: PipelineConfig,
) -> FeaturizeResult:
    known = {a.account_no for a in accounts}
    for t in transactions:
        if t.account_no not in known:
            raise UnknownAccount(t.account_no)

    selected = select_active_window(accounts, config.selection_window)
    selected = select_complete_windows(selected, config.window, config.window_months)
    if not selected:
        logger.warning('No active account has a complete observation window inside the study window; writing empty tables.')
        report = FilterReport(tuple(FEATURE_FIELDS), (), 0)
        return FeaturizeResult([], [], list(FEATURE_FIELDS), report)

    kept = select_transactions(selected, transactions, config)
    logger.info(f"Kept {len(kept)} of {len(transactions)} transactions for {len(selected)} accounts.")

    raw = aggregate_all(kept, selected, config.window_months)
    retained, report = statistical_filter(raw, config.null_fraction_threshold)
    rows = [discretize_row(r, retained, config.schemes, config.score_components) for r in raw]
    return FeaturizeResult(raw, rows, retained, report)


# --- train ---
@dataclass(frozen=True)
class Model:
    tree: DecisionNode
    attributes: tuple[Attribute, ...]
    classes: tuple[str, ...]
    rows: int
    tree_config: TreeConfig = field(default_factory=TreeConfig)
    prune_config: PruneConfig = field(default_factory=PruneConfig)

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def rules(self) -> list[Rule]:
        return extract_rules(self.tree)

    def to_dict(self) -> dict:
        return {
            'format': MODEL_FORMAT,
            'rows': self.rows,
            'attributes': [{'name': a.name, 'values': list(a.values)} for a in self.attributes],
            'classes': list(self.classes),
            'tree_config': self.tree_config.to_dict(),
            'prune_config': self.prune_config.to_dict(),
            'tree': tree_to_dict(self.tree),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> 'Model':
        if payload.get('format') != MODEL_FORMAT:
            raise SchemaMismatch(f"unsupported model format {payload.get('format')!r}")
        try:
            return cls(
                tree=tree_from_dict(payload['tree']),
                attributes=tuple(Attribute(a['name'], tuple(a['values'])) for a in payload['attributes']),
                classes=tuple(payload['classes']),
                rows=int(payload['rows']),
                tree_config=TreeConfig(**payload['tree_config']),
                prune_config=PruneConfig(**payload['prune_config']),
            )
        except (KeyError, TypeError) as e:
            raise SchemaMismatch(f"malformed model file: {e}") from e


def training_dataset(frame: pd.DataFrame) -> Dataset:
    return Dataset.from_frame(frame, CLASS_COLUMN, (ACCOUNT_COLUMN,), normalize_label)


def train(frame: pd.DataFrame, config: PipelineConfig, audit: Callable[[str], None] | None = None) -> Model:
    data = training_dataset(frame)
    if len(data) == 0:
        raise EmptyDataset('training table has no rows')
    tree = prune_tree(build_tree(data, config=config.tree), config.prune, audit)
    return Model(tree, data.attributes, data.classes, len(data), config.tree, config.prune)


# --- predict ---
def predict(model: Model, frame: pd.DataFrame, fallback: bool = True) -> pd.DataFrame:
    """One prediction per row with the index of the matching rule (blank when the fallback answered)."""
    missing = [name for name in model.attribute_names if name not in frame.columns]
    if missing:
        raise SchemaMismatch(f"table lacks model attributes {missing}")
    rules = model.rules

    records = []
    for position, row in enumerate(frame.to_dict('records')):
        values = {name: str(row[name]) for name in model.attribute_names}
        match = classify_with_rules(rules, values, fallback)
        records.append({
            ACCOUNT_COLUMN: row.get(ACCOUNT_COLUMN, str(position + 1)),
            CLASS_COLUMN: match.label,
            'rule_index': '' if match.rule_index is None else match.rule_index,
            'fallback': 'true' if match.fallback else 'false',
        })
    fallbacks = sum(1 for r in records if r['fallback'] == 'true')
    if fallbacks:
        logger.warning(f"{fallbacks} rows matched no rule and received the fallback class.")
    return pd.DataFrame(records, columns=PREDICTION_COLUMNS)


# --- evaluate ---
@dataclass(frozen=True)
class Evaluation:
    report: EvaluationReport
    ranking: SectorRanking | None


def evaluate(frame: pd.DataFrame, config: PipelineConfig, holdout: pd.DataFrame | None = None, holdout_source: str = '') -> Evaluation:
    data = training_dataset(frame)
    report = cross_validate(data, config.folds, config.seed, config.tree, config.prune, config.workers)

    if holdout is not None:
        holdout_data = training_dataset(holdout)
        result = evaluate_holdout(report.tree, holdout_data, data.classes, config.tree.unseen_value, holdout_source)
        report = report.with_holdout(result)

    ranking = None
    if SECTOR_COLUMN in frame.columns:
        ranking = rank_sectors(frame, config.sector_score)
    else:
        logger.warning(f"Table has no {SECTOR_COLUMN} column; skipping the sector ranking.")
    return Evaluation(report, ranking)
