"""
Per-account feature engineering.

Aggregates filtered transactions into the numeric feature row, drops
degenerate columns, normalises amounts by turnover (percentage of the
sanction limit), discretises every feature into its bin scheme and assigns
the five-level class label from a 0..100 score.
"""
import logging
import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Iterable, Mapping, Sequence

import pandas as pd

from mining.errors import (
    ConfigError,
    EmptyDataset,
    InvalidWeights,
    NonFiniteValue,
    NonPositiveSanction,
    OutOfRange,
    UnknownAccount,
)
from mining.ingest import DEFAULT_WINDOW_MONTHS, AccountProfile, Side, TransactionRecord

logger = logging.getLogger(__name__)

# --- Table column names (discretized table) ---
ACCOUNT_COLUMN = 'AccountNo'
SECTOR_COLUMN = 'Sector'
AUTHORITY_COLUMN = 'SanctionAuthority'
CLASS_COLUMN = 'Class_Label'

WEIGHT_TOLERANCE = 1e-9


class ClassLabel(str, Enum):
    EXCELLENT = 'Excellent'
    VERY_GOOD = 'Very Good'
    GOOD = 'Good'
    MARGINAL = 'Marginal'
    BAD = 'Bad'

    @property
    def rank(self) -> int:
        """Ordinal rank, Excellent=5 down to Bad=1."""
        return _RANKS[self]

    @classmethod
    def parse(cls, text: str) -> 'ClassLabel':
        key = ''.join(str(text).split()).lower()
        for label in cls:
            if ''.join(label.value.split()).lower() == key:
                return label
        raise ValueError(f"unknown class label {text!r}")

    def __str__(self) -> str:
        return self.value


_RANKS = {
    ClassLabel.EXCELLENT: 5,
    ClassLabel.VERY_GOOD: 4,
    ClassLabel.GOOD: 3,
    ClassLabel.MARGINAL: 2,
    ClassLabel.BAD: 1,
}

# Descending thresholds for assign_class_label.
CLASS_THRESHOLDS = (
    (90.0, ClassLabel.EXCELLENT),
    (80.0, ClassLabel.VERY_GOOD),
    (70.0, ClassLabel.GOOD),
    (60.0, ClassLabel.MARGINAL),
)


@dataclass(frozen=True)
class BinScheme:
    """
    Ordered (upper_bound, label) bins; a value falls into the first bin whose
    upper bound is >= the value. The last bound must be +inf.
    """
    name: str
    bins: tuple[tuple[float, str], ...]

    def __post_init__(self):
        if not self.bins:
            raise ConfigError(self.name, 'a bin scheme needs at least one bin')
        bounds = [b for b, _ in self.bins]
        if any(b >= c for b, c in zip(bounds, bounds[1:])):
            raise ConfigError(self.name, f"upper bounds must be strictly increasing, got {bounds}")
        if bounds[-1] != math.inf:
            raise ConfigError(self.name, 'the last upper bound must be +inf')
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise ConfigError(self.name, f"labels must be unique, got {list(labels)}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for _, label in self.bins)

    @classmethod
    def from_text(cls, name: str, text: str) -> 'BinScheme':
        """Parse `25:LessEqual25,50:LessEqual50,inf:Above50`."""
        bins = []
        for part in text.split(','):
            if not part.strip():
                continue
            bound, sep, label = part.partition(':')
            if not sep or not label.strip():
                raise ConfigError(name, f"expected bound:label, got {part.strip()!r}")
            try:
                value = float(bound.strip())
            except ValueError:
                raise ConfigError(name, f"bad bound {bound.strip()!r}") from None
            bins.append((value, label.strip()))
        return cls(name, tuple(bins))

    def to_text(self) -> str:
        return ','.join(f"{'inf' if math.isinf(b) else f'{b:g}'}:{label}" for b, label in self.bins)


INF = math.inf

BUILTIN_SCHEMES = {
    'amount4': BinScheme('amount4', (
        (25.0, 'LessEqual25'), (50.0, 'LessEqual50'), (75.0, 'LessEqual75'), (INF, 'Above75'))),
    'total6': BinScheme('total6', (
        (100.0, 'LessEqual100'), (200.0, 'LessEqual200'), (300.0, 'LessEqual300'),
        (400.0, 'LessEqual400'), (500.0, 'LessEqual500'), (INF, 'Above500'))),
    'principal3': BinScheme('principal3', (
        (50.0, 'LessEqual50'), (100.0, 'Above50'), (INF, 'ExceedLimit'))),
    'voucher4': BinScheme('voucher4', (
        (3.0, 'LessEqual3'), (6.0, 'LessEqual6'), (10.0, 'LessEqual10'), (INF, 'Above10'))),
    'adjust2': BinScheme('adjust2', ((0.0, 'NoAdjusted'), (INF, 'Adjusted'))),
}


@dataclass(frozen=True)
class FeatureSpec:
    field: str          # RawFeatureRow attribute
    column: str         # discretized table column
    scheme: str         # key into the scheme mapping
    turnover: bool      # normalise by sanction limit before binning


# Discretized table column order.
FEATURES = (
    FeatureSpec('min_dr', 'minDrAmount', 'amount4', True),
    FeatureSpec('max_dr', 'maxDrAmount', 'amount4', True),
    FeatureSpec('total_dr', 'totalDrAmount', 'total6', True),
    FeatureSpec('dr_voucher_monthly_avg', 'drVoucherNo', 'voucher4', False),
    FeatureSpec('min_cr', 'minCrAmount', 'amount4', True),
    FeatureSpec('max_cr', 'maxCrAmount', 'amount4', True),
    FeatureSpec('total_cr', 'totalCrAmount', 'total6', True),
    FeatureSpec('cr_voucher_monthly_avg', 'crVoucherNo', 'voucher4', False),
    FeatureSpec('principal_amount', 'PrincipalAmount', 'principal3', True),
    FeatureSpec('adjusted', 'adjustNo', 'adjust2', False),
)
FEATURES_BY_FIELD = {spec.field: spec for spec in FEATURES}
FEATURE_FIELDS = tuple(spec.field for spec in FEATURES)


@dataclass(frozen=True)
class RawFeatureRow:
    account_no: str
    sector: str
    sanction_authority: str
    sanction_limit: float
    min_dr: float = 0.0
    max_dr: float = 0.0
    total_dr: float = 0.0
    dr_voucher_monthly_avg: float = 0.0
    min_cr: float = 0.0
    max_cr: float = 0.0
    total_cr: float = 0.0
    cr_voucher_monthly_avg: float = 0.0
    principal_amount: float = 0.0
    adjusted: bool = False
    score: float | None = None


@dataclass(frozen=True)
class DiscretizedRow:
    account_no: str
    sector: str
    sanction_authority: str
    bins: Mapping[str, str] = field(default_factory=dict)
    class_label: ClassLabel = ClassLabel.BAD

    def as_record(self) -> dict[str, str]:
        record = {ACCOUNT_COLUMN: self.account_no, SECTOR_COLUMN: self.sector, AUTHORITY_COLUMN: self.sanction_authority}
        record.update(self.bins)
        record[CLASS_COLUMN] = self.class_label.value
        return record


@dataclass(frozen=True)
class ScoreComponent:
    """One weighted [0, 100] component of the account score."""
    field: str
    weight: float
    cap: float
    higher_is_better: bool = True

    def __post_init__(self):
        if self.field not in FEATURES_BY_FIELD:
            raise ConfigError('SCORE_COMPONENTS', f"unknown feature {self.field!r}")
        if not self.cap > 0:
            raise ConfigError('SCORE_COMPONENTS', f"cap for {self.field} must be positive")

    @classmethod
    def parse_list(cls, text: str) -> tuple['ScoreComponent', ...]:
        """Parse `total_cr:0.35:500:up,principal_amount:0.2:100:down`."""
        components = []
        for part in text.split(','):
            if not part.strip():
                continue
            pieces = [p.strip() for p in part.split(':')]
            if len(pieces) not in (3, 4):
                raise ConfigError('SCORE_COMPONENTS', f"expected field:weight:cap[:up|down], got {part.strip()!r}")
            direction = pieces[3].lower() if len(pieces) == 4 else 'up'
            if direction not in ('up', 'down'):
                raise ConfigError('SCORE_COMPONENTS', f"direction must be up or down, got {direction!r}")
            try:
                weight, cap = float(pieces[1]), float(pieces[2])
            except ValueError:
                raise ConfigError('SCORE_COMPONENTS', f"bad number in {part.strip()!r}") from None
            components.append(cls(pieces[0], weight, cap, direction == 'up'))
        return tuple(components)

    def to_text(self) -> str:
        return f"{self.field}:{self.weight:g}:{self.cap:g}:{'up' if self.higher_is_better else 'down'}"


DEFAULT_SCORE_COMPONENTS = (
    ScoreComponent('total_cr', 0.35, 500.0, True),
    ScoreComponent('cr_voucher_monthly_avg', 0.15, 10.0, True),
    ScoreComponent('adjusted', 0.30, 1.0, True),
    ScoreComponent('principal_amount', 0.20, 100.0, False),
)


# --- Aggregation ---
def _side_stats(transactions: Iterable[TransactionRecord]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [(t.account_no, t.side.value, t.amount) for t in transactions],
        columns=['account_no', 'side', 'amount'],
    )
    if frame.empty:
        return pd.DataFrame(columns=['min', 'max', 'sum', 'count'])
    return frame.groupby(['account_no', 'side'])['amount'].agg(['min', 'max', 'sum', 'count'])


def _row_from_stats(stats: pd.DataFrame, profile: AccountProfile, window_months: int) -> RawFeatureRow:
    def side(s: Side) -> tuple[float, float, float, float]:
        key = (profile.account_no, s.value)
        if key not in stats.index:
            return 0.0, 0.0, 0.0, 0.0
        row = stats.loc[key]
        return float(row['min']), float(row['max']), float(row['sum']), float(row['count']) / window_months

    min_dr, max_dr, total_dr, dr_avg = side(Side.DEBIT)
    min_cr, max_cr, total_cr, cr_avg = side(Side.CREDIT)

    if profile.principal_outstanding is not None:
        principal = max(profile.principal_outstanding, 0.0)
    else:
        principal = max(total_dr - total_cr, 0.0)
    if profile.adjusted is not None:
        adjusted = profile.adjusted
    else:
        adjusted = total_dr > 0 and total_cr >= total_dr

    return RawFeatureRow(
        account_no=profile.account_no,
        sector=profile.sector,
        sanction_authority=profile.sanction_authority,
        sanction_limit=profile.sanction_limit,
        min_dr=min_dr, max_dr=max_dr, total_dr=total_dr, dr_voucher_monthly_avg=dr_avg,
        min_cr=min_cr, max_cr=max_cr, total_cr=total_cr, cr_voucher_monthly_avg=cr_avg,
        principal_amount=principal,
        adjusted=adjusted,
        score=profile.score,
    )


def _check_months(window_months: int):
    if window_months < 1:
        raise ConfigError('WINDOW_MONTHS', f"must be at least 1, got {window_months}")


def aggregate_features(
    transactions: Sequence[TransactionRecord],
    profile: AccountProfile,
    window_months: int = DEFAULT_WINDOW_MONTHS,
) -> RawFeatureRow:
    """Aggregate one account's filtered transactions into its numeric feature row."""
    _check_months(window_months)
    for t in transactions:
        if t.account_no != profile.account_no:
            raise UnknownAccount(t.account_no)
    return _row_from_stats(_side_stats(transactions), profile, window_months)


def aggregate_all(
    transactions: Sequence[TransactionRecord],
    profiles: Sequence[AccountProfile],
    window_months: int = DEFAULT_WINDOW_MONTHS,
) -> list[RawFeatureRow]:
    """Aggregate every account at once; output ordered by account_no."""
    _check_months(window_months)
    known = {p.account_no for p in profiles}
    for t in transactions:
        if t.account_no not in known:
            raise UnknownAccount(t.account_no)
    stats = _side_stats(transactions)
    ordered = sorted(profiles, key=lambda p: p.account_no)
    return [_row_from_stats(stats, p, window_months) for p in ordered]


# --- Column filtering ---
SINGLE_VALUED = 'SingleValued'
MOSTLY_NULL = 'MostlyNull'


@dataclass(frozen=True)
class FilterReport:
    retained: tuple[str, ...]
    dropped: tuple[tuple[str, str, str], ...]   # (field, reason, detail)
    row_count: int

    @property
    def degenerate(self) -> bool:
        return self.row_count < 2 or not self.retained

    def render(self) -> str:
        lines = [f"Statistical filter over {self.row_count} rows: "
                 f"{len(self.retained)} retained, {len(self.dropped)} dropped"]
        for name, reason, detail in self.dropped:
            lines.append(f"  dropped {name}: {reason} ({detail})")
        if self.degenerate:
            lines.append('  WARNING: degenerate input, no informative feature columns remain')
        return '\n'.join(lines) + '\n'


def raw_frame(rows: Sequence[RawFeatureRow]) -> pd.DataFrame:
    """Numeric feature table, one row per account."""
    columns = [f.name for f in fields(RawFeatureRow)]
    return pd.DataFrame([[getattr(r, c) for c in columns] for r in rows], columns=columns)


def statistical_filter(
    rows: Sequence[RawFeatureRow] | pd.DataFrame,
    null_fraction_threshold: float = 0.09,
) -> tuple[list[str], FilterReport]:
    """
    Drop feature columns whose missing fraction reaches the threshold, then
    columns that hold a single distinct value across all rows.
    """
    if not 0 < null_fraction_threshold <= 1:
        raise ConfigError('NULL_FRACTION_THRESHOLD', f"must be in (0, 1], got {null_fraction_threshold}")
    frame = rows if isinstance(rows, pd.DataFrame) else raw_frame(rows)
    if frame.empty:
        raise EmptyDataset('statistical_filter needs at least one row')

    retained: list[str] = []
    dropped: list[tuple[str, str, str]] = []
    for name in FEATURE_FIELDS:
        if name not in frame.columns:
            continue
        column = frame[name]
        null_fraction = float(column.isna().mean())
        if null_fraction >= null_fraction_threshold:
            dropped.append((name, MOSTLY_NULL, f"{null_fraction:.1%} missing"))
        elif column.nunique(dropna=True) <= 1:
            value = column.dropna().iloc[0] if column.notna().any() else None
            dropped.append((name, SINGLE_VALUED, f"every row is {value!r}"))
        else:
            retained.append(name)

    report = FilterReport(tuple(retained), tuple(dropped), len(frame))
    if report.degenerate:
        logger.warning(f"Statistical filter found degenerate input ({len(frame)} rows, {len(retained)} columns kept).")
    return retained, report


# --- Normalisation, binning, scoring ---
def turnover(attribute_value: float, sanction_amount: float) -> float:
    """Attribute as a percentage of the sanction amount."""
    if not sanction_amount > 0:
        raise NonPositiveSanction(f"sanction amount must be positive, got {sanction_amount}")
    if attribute_value < 0:
        raise OutOfRange(f"attribute value must be non-negative, got {attribute_value}")
    return attribute_value / sanction_amount * 100


def discretize(value: float | bool, scheme: BinScheme) -> str:
    number = float(value)
    if not math.isfinite(number):
        raise NonFiniteValue(f"cannot bin {value!r} with scheme {scheme.name}")
    for bound, label in scheme.bins:
        if number <= bound:
            return label
    return scheme.bins[-1][1]


def feature_value(row: RawFeatureRow, spec: FeatureSpec) -> float:
    value = getattr(row, spec.field)
    if spec.turnover:
        return turnover(value, row.sanction_limit)
    return float(value)


def component_scores(row: RawFeatureRow, components: Sequence[ScoreComponent]) -> dict[str, float]:
    """Scale each configured feature to [0, 100] by its cap, inverting 'down' components."""
    scores = {}
    for component in components:
        value = feature_value(row, FEATURES_BY_FIELD[component.field])
        scaled = min(max(value / component.cap, 0.0), 1.0) * 100
        scores[component.field] = scaled if component.higher_is_better else 100 - scaled
    return scores


def compute_score(components: Mapping[str, float], weights: Mapping[str, float]) -> float:
    """Weighted sum of [0, 100] component scores, clamped to [0, 100]."""
    if not weights:
        raise InvalidWeights('no score weights configured')
    if any(w < 0 or not math.isfinite(w) for w in weights.values()):
        raise InvalidWeights(f"weights must be finite and non-negative, got {dict(weights)}")
    total = sum(weights.values())
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise InvalidWeights(f"weights must sum to 1, got {total:g}")
    missing = [name for name in weights if name not in components]
    if missing:
        raise InvalidWeights(f"weights name components without a score: {missing}")

    score = 0.0
    for name, weight in weights.items():
        value = components[name]
        if not 0 <= value <= 100:
            raise OutOfRange(f"component {name} score {value} is outside [0, 100]")
        score += weight * value
    return min(max(score, 0.0), 100.0)


def assign_class_label(score: float) -> ClassLabel:
    if not (0 <= score <= 100):
        raise OutOfRange(f"score {score} is outside [0, 100]")
    for threshold, label in CLASS_THRESHOLDS:
        if score >= threshold:
            return label
    return ClassLabel.BAD


def account_score(row: RawFeatureRow, components: Sequence[ScoreComponent] = DEFAULT_SCORE_COMPONENTS) -> float:
    """Precomputed expert score when the accounts table supplies one, else the weighted composite."""
    if row.score is not None:
        return row.score
    weights = {c.field: c.weight for c in components}
    return compute_score(component_scores(row, components), weights)


def discretize_row(
    row: RawFeatureRow,
    retained: Iterable[str] = FEATURE_FIELDS,
    schemes: Mapping[str, BinScheme] = BUILTIN_SCHEMES,
    components: Sequence[ScoreComponent] = DEFAULT_SCORE_COMPONENTS,
) -> DiscretizedRow:
    keep = set(retained)
    bins = {
        spec.column: discretize(feature_value(row, spec), schemes[spec.scheme])
        for spec in FEATURES if spec.field in keep
    }
    return DiscretizedRow(
        account_no=row.account_no,
        sector=row.sector,
        sanction_authority=row.sanction_authority,
        bins=bins,
        class_label=assign_class_label(account_score(row, components)),
    )


def discretized_columns(retained: Iterable[str] = FEATURE_FIELDS) -> list[str]:
    keep = set(retained)
    feature_columns = [spec.column for spec in FEATURES if spec.field in keep]
    return [ACCOUNT_COLUMN, SECTOR_COLUMN, AUTHORITY_COLUMN, *feature_columns, CLASS_COLUMN]


def discretized_frame(rows: Sequence[DiscretizedRow], retained: Iterable[str] = FEATURE_FIELDS) -> pd.DataFrame:
    """Discretized table ordered by account number."""
    columns = discretized_columns(retained)
    records = [r.as_record() for r in sorted(rows, key=lambda r: r.account_no)]
    return pd.DataFrame(records, columns=columns)
