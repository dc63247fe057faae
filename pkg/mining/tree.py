"""
Decision-tree induction over categorical attributes.

Every node is created with the arc label that leads to it (None at the root), attributes are
chosen by gain ratio (plain information gain on request), and recursion stops
on pure nodes, exhausted attributes, or when no candidate split is usable.
Attribute and class values keep their declared order, which fixes both the
arc order in rendered trees and the tie-breaking of majority votes.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

import pandas as pd
from scipy.stats import entropy as scipy_entropy

from mining.errors import (
    ConfigError,
    EmptyDataset,
    EmptyDistribution,
    MissingAttributeValue,
    SchemaMismatch,
    UnknownAttribute,
    UnseenValue,
)

logger = logging.getLogger(__name__)

# --- Constants ---
TIE_TOLERANCE = 1e-12

GAIN_RATIO = 'gain-ratio'
INFO_GAIN = 'info-gain'
CRITERIA = (GAIN_RATIO, INFO_GAIN)

TWO_BRANCHES = 'two-branches'   # at least two branches reach min_leaf_count
STRICT = 'strict'               # every non-empty branch reaches min_leaf_count
MIN_LEAF_RULES = (TWO_BRANCHES, STRICT)

UNSEEN_MAJORITY = 'majority'
UNSEEN_ERROR = 'error'
UNSEEN_RULES = (UNSEEN_MAJORITY, UNSEEN_ERROR)

Distribution = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class TreeConfig:
    criterion: str = GAIN_RATIO
    min_leaf_count: int = 2
    min_leaf_rule: str = TWO_BRANCHES
    mean_gain_filter: bool = True
    unseen_value: str = UNSEEN_MAJORITY
    # When off, unpruned trees fit every conflict-free table exactly.
    require_gain: bool = False

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ConfigError('CRITERION', f"expected one of {CRITERIA}, got {self.criterion!r}")
        if self.min_leaf_count < 1:
            raise ConfigError('MIN_LEAF', f"must be at least 1, got {self.min_leaf_count}")
        if self.min_leaf_rule not in MIN_LEAF_RULES:
            raise ConfigError('MIN_LEAF_RULE', f"expected one of {MIN_LEAF_RULES}, got {self.min_leaf_rule!r}")
        if self.unseen_value not in UNSEEN_RULES:
            raise ConfigError('UNSEEN_VALUE', f"expected one of {UNSEEN_RULES}, got {self.unseen_value!r}")

    def to_dict(self) -> dict:
        return {
            'criterion': self.criterion,
            'min_leaf_count': self.min_leaf_count,
            'min_leaf_rule': self.min_leaf_rule,
            'mean_gain_filter': self.mean_gain_filter,
            'unseen_value': self.unseen_value,
            'require_gain': self.require_gain,
        }


# --- Dataset ---
@dataclass(frozen=True)
class Attribute:
    name: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class Dataset:
    """
    Categorical training data. Use Dataset.build (or from_records/from_frame),
    which validates that every value belongs to its declared value set.
    """
    attributes: tuple[Attribute, ...]
    classes: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    labels: tuple[str, ...]

    @classmethod
    def build(
        cls,
        attributes: Sequence[Attribute],
        rows: Sequence[Sequence[str]],
        labels: Sequence[str],
        classes: Sequence[str] | None = None,
    ) -> 'Dataset':
        attributes = tuple(attributes)
        rows = tuple(tuple(r) for r in rows)
        labels = tuple(labels)
        if classes is None:
            classes = tuple(dict.fromkeys(labels))
        classes = tuple(classes)

        names = [a.name for a in attributes]
        if len(set(names)) != len(names):
            raise SchemaMismatch(f"attribute names must be unique, got {names}")
        if len(rows) != len(labels):
            raise SchemaMismatch(f"{len(rows)} rows but {len(labels)} class labels")
        declared = [set(a.values) for a in attributes]
        known_classes = set(classes)
        for i, (row, label) in enumerate(zip(rows, labels)):
            if len(row) != len(attributes):
                raise SchemaMismatch(f"row {i} has {len(row)} values for {len(attributes)} attributes")
            for value, allowed, attribute in zip(row, declared, attributes):
                if value not in allowed:
                    raise SchemaMismatch(f"row {i}: value {value!r} is not declared for {attribute.name}")
            if label not in known_classes:
                raise SchemaMismatch(f"row {i}: class {label!r} is not declared")
        return cls(attributes, classes, rows, labels)

    @classmethod
    def from_records(
        cls,
        records: Sequence[Mapping[str, str]],
        labels: Sequence[str],
        declared: Mapping[str, Sequence[str]] | None = None,
        classes: Sequence[str] | None = None,
    ) -> 'Dataset':
        """Values are declared in order of first appearance unless `declared` lists them."""
        if declared is not None:
            names = list(declared)
        else:
            names = list(records[0]) if records else []
        attributes = []
        for name in names:
            if declared is not None:
                values = tuple(declared[name])
            else:
                values = tuple(dict.fromkeys(r[name] for r in records))
            attributes.append(Attribute(name, values))
        rows = [tuple(r[name] for name in names) for r in records]
        return cls.build(attributes, rows, labels, classes)

    @classmethod
    def from_frame(
        cls,
        frame: pd.DataFrame,
        class_column: str,
        id_columns: Sequence[str] = (),
        normalize: Callable[[str], str] | None = None,
    ) -> 'Dataset':
        if class_column not in frame.columns:
            raise SchemaMismatch(f"table has no {class_column} column; found {list(frame.columns)}")
        names = [c for c in frame.columns if c != class_column and c not in id_columns]
        if not names:
            raise SchemaMismatch('table has no attribute columns')
        values = frame[names].astype(str)
        for name in names:
            if (values[name].str.strip() == '').any():
                raise SchemaMismatch(f"column {name} has empty values")
        labels = frame[class_column].astype(str)
        if normalize is not None:
            try:
                labels = labels.map(normalize)
            except ValueError as e:
                raise SchemaMismatch(str(e)) from e
        attributes = [Attribute(n, tuple(pd.unique(values[n]))) for n in names]
        rows = list(values.itertuples(index=False, name=None))
        return cls.build(attributes, rows, list(labels), tuple(pd.unique(labels)))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def index_of(self, name: str) -> int:
        for i, attribute in enumerate(self.attributes):
            if attribute.name == name:
                return i
        raise UnknownAttribute(name)

    def attribute(self, name: str) -> Attribute:
        return self.attributes[self.index_of(name)]

    def row_dict(self, i: int) -> dict[str, str]:
        return dict(zip(self.attribute_names, self.rows[i]))

    def class_distribution(self) -> Distribution:
        counts = Counter(self.labels)
        return tuple((c, counts.get(c, 0)) for c in self.classes)

    def subset(self, indices: Sequence[int]) -> 'Dataset':
        # Same metadata, so no re-validation.
        return Dataset(
            self.attributes,
            self.classes,
            tuple(self.rows[i] for i in indices),
            tuple(self.labels[i] for i in indices),
        )

    def partition(self, name: str) -> list[tuple[str, 'Dataset']]:
        """One subset per declared value (possibly empty), in declared order."""
        column = self.index_of(name)
        groups: dict[str, list[int]] = {v: [] for v in self.attributes[column].values}
        for i, row in enumerate(self.rows):
            groups[row[column]].append(i)
        return [(value, self.subset(indices)) for value, indices in groups.items()]


def majority(distribution: Distribution, default: str | None = None) -> str | None:
    """Most frequent class; ties go to the earlier class in declared order."""
    best, best_count = default, 0
    for label, count in distribution:
        if count > best_count:
            best, best_count = label, count
    return best


# --- Split statistics ---
@dataclass(frozen=True)
class SplitStats:
    attribute: str
    info_gain: float
    split_info: float
    gain_ratio: float | None
    branch_sizes: tuple[int, ...] = ()

    @property
    def usable(self) -> bool:
        return self.gain_ratio is not None


def entropy(class_counts: Mapping[str, int] | Sequence[int]) -> float:
    """Shannon entropy in bits; zero counts contribute nothing."""
    counts = list(class_counts.values()) if isinstance(class_counts, Mapping) else list(class_counts)
    if any(c < 0 for c in counts):
        raise EmptyDistribution(f"negative class count in {counts}")
    positive = [c for c in counts if c > 0]
    if sum(positive) < 1:
        raise EmptyDistribution('entropy needs at least one counted row')
    return float(scipy_entropy(positive, base=2))


def gain_ratio(data: Dataset, attribute: str) -> SplitStats:
    column = data.index_of(attribute)
    if len(data) == 0:
        raise EmptyDistribution('cannot score a split of an empty dataset')

    branches: dict[str, Counter] = {}
    for row, label in zip(data.rows, data.labels):
        branches.setdefault(row[column], Counter())[label] += 1

    total = len(data)
    sizes = tuple(sum(c.values()) for c in branches.values())
    remainder = sum(size / total * entropy(c) for size, c in zip(sizes, branches.values()))
    info_gain = max(entropy(Counter(data.labels)) - remainder, 0.0)
    split_info = entropy(sizes)

    if split_info <= TIE_TOLERANCE:
        return SplitStats(attribute, info_gain, split_info, None, sizes)
    return SplitStats(attribute, info_gain, split_info, info_gain / split_info, sizes)


def _passes_min_leaf(sizes: Sequence[int], min_leaf_count: int, rule: str) -> bool:
    if rule == STRICT:
        return len(sizes) >= 2 and all(s >= min_leaf_count for s in sizes)
    return sum(1 for s in sizes if s >= min_leaf_count) >= 2


def choose_attribute(
    data: Dataset,
    candidates: Sequence[str],
    *,
    criterion: str = GAIN_RATIO,
    mean_gain_filter: bool = True,
    min_leaf_count: int = 1,
    min_leaf_rule: str = TWO_BRANCHES,
    require_gain: bool = False,
) -> str | None:
    """
    Best usable candidate, or None. With gain ratio and the mean-gain filter,
    only candidates whose information gain reaches the mean gain of the usable
    candidates compete. Ties within TIE_TOLERANCE go to the earlier candidate.
    With `require_gain`, a split that leaves the class distribution unchanged
    is never made.
    """
    if len(data) == 0:
        return None
    usable = []
    for name in candidates:
        stats = gain_ratio(data, name)
        if stats.usable and _passes_min_leaf(stats.branch_sizes, min_leaf_count, min_leaf_rule):
            usable.append(stats)
    if not usable:
        return None

    if criterion == INFO_GAIN:
        eligible = usable
        score = lambda s: s.info_gain  # noqa: E731
    else:
        eligible = usable
        if mean_gain_filter:
            mean_gain = sum(s.info_gain for s in usable) / len(usable)
            eligible = [s for s in usable if s.info_gain >= mean_gain - TIE_TOLERANCE]
        score = lambda s: s.gain_ratio  # noqa: E731

    if require_gain:
        eligible = [s for s in eligible if s.info_gain > TIE_TOLERANCE]
        if not eligible:
            return None
    best = eligible[0]
    for stats in eligible[1:]:
        if score(stats) > score(best) + TIE_TOLERANCE:
            best = stats
    return best.attribute


# --- Nodes ---
@dataclass(frozen=True)
class Leaf:
    label: str
    distribution: Distribution
    arc: str | None = None

    @property
    def coverage(self) -> int:
        return sum(count for _, count in self.distribution)

    @property
    def misclassified(self) -> int:
        return self.coverage - dict(self.distribution).get(self.label, 0)


@dataclass(frozen=True)
class Internal:
    attribute: str
    children: tuple['Leaf | Internal', ...]
    label: str                  # majority of the training rows reaching this node
    distribution: Distribution
    arc: str | None = None

    @property
    def coverage(self) -> int:
        return sum(count for _, count in self.distribution)

    def child(self, value: str) -> 'Leaf | Internal | None':
        for node in self.children:
            if node.arc == value:
                return node
        return None


DecisionNode = Leaf | Internal


def build_tree(
    data: Dataset,
    attributes: Sequence[str] | None = None,
    parent_arc: str | None = None,
    config: TreeConfig | None = None,
) -> DecisionNode:
    """Induce a tree top-down; `attributes` defaults to every attribute of `data`."""
    config = config or TreeConfig()
    if len(data) == 0:
        raise EmptyDataset('cannot induce a tree from an empty dataset')
    attribute_list = list(data.attribute_names if attributes is None else attributes)
    for name in attribute_list:
        data.index_of(name)

    tree = _generate(data, attribute_list, parent_arc, config, None)
    logger.debug(f"Induced tree with {leaf_count(tree)} leaves over {len(data)} rows.")
    return tree


def _generate(data: Dataset, attribute_list: list[str], arc: str | None, config: TreeConfig, parent_label: str | None) -> DecisionNode:
    distribution = data.class_distribution()
    if len(data) == 0:
        return Leaf(parent_label, distribution, arc)

    label = majority(distribution)
    if sum(1 for _, count in distribution if count) == 1 or not attribute_list:
        return Leaf(label, distribution, arc)

    best = choose_attribute(
        data,
        attribute_list,
        criterion=config.criterion,
        mean_gain_filter=config.mean_gain_filter,
        min_leaf_count=config.min_leaf_count,
        min_leaf_rule=config.min_leaf_rule,
        require_gain=config.require_gain,
    )
    if best is None:
        return Leaf(label, distribution, arc)

    remaining = [a for a in attribute_list if a != best]
    children = tuple(
        _generate(part, remaining, value, config, label)
        for value, part in data.partition(best)
    )
    return Internal(best, children, label, distribution, arc)


# --- Classification ---
def classify(
    tree: DecisionNode,
    row: Mapping[str, str],
    unseen_value: str = UNSEEN_MAJORITY,
) -> tuple[str, tuple[tuple[str, str], ...]]:
    """Descend by arc values; returns the class and the (attribute, value) arcs followed."""
    node = tree
    path: list[tuple[str, str]] = []
    while isinstance(node, Internal):
        if node.attribute not in row:
            raise MissingAttributeValue(node.attribute)
        value = row[node.attribute]
        child = node.child(value)
        if child is None:
            if unseen_value == UNSEEN_ERROR:
                raise UnseenValue(node.attribute, value)
            return node.label, tuple(path)
        path.append((node.attribute, value))
        node = child
    return node.label, tuple(path)


# --- Structure ---
def iter_leaves(tree: DecisionNode, path: tuple[tuple[str, str], ...] = ()) -> Iterator[tuple[tuple[tuple[str, str], ...], Leaf]]:
    """Leaves left to right with their root-to-leaf arcs."""
    if isinstance(tree, Leaf):
        yield path, tree
        return
    for child in tree.children:
        yield from iter_leaves(child, path + ((tree.attribute, child.arc),))


def leaf_count(tree: DecisionNode) -> int:
    return sum(1 for _ in iter_leaves(tree))


def depth(tree: DecisionNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(child) for child in tree.children)


def node_count(tree: DecisionNode) -> int:
    if isinstance(tree, Leaf):
        return 1
    return 1 + sum(node_count(child) for child in tree.children)


# --- Rendering ---
def abbreviate(name: str) -> str:
    """Capital letters of the attribute, keeping a leading max/min prefix (maxCrAmount -> maxCA)."""
    prefix = next((p for p in ('max', 'min') if name.startswith(p)), '')
    capitals = ''.join(ch for ch in name[len(prefix):] if ch.isupper())
    return prefix + capitals if capitals else name


_abbreviate = abbreviate


def _leaf_counts(leaf: Leaf) -> str:
    if leaf.misclassified:
        return f"({leaf.coverage:.1f}/{leaf.misclassified:.1f})"
    return f"({leaf.coverage:.1f})"


def render_tree(tree: DecisionNode, abbreviate: bool = False) -> str:
    """Indented text: one line per arc, "| " per level, leaf counts as (n.0/m.0)."""
    name = _abbreviate if abbreviate else (lambda n: n)
    lines: list[str] = []

    def walk(node: Internal, level: int):
        for child in node.children:
            prefix = '| ' * level + f"{name(node.attribute)} = {child.arc}"
            if isinstance(child, Leaf):
                lines.append(f"{prefix}: {child.label} {_leaf_counts(child)}")
            else:
                lines.append(prefix)
                walk(child, level + 1)

    if isinstance(tree, Leaf):
        lines.append(f": {tree.label} {_leaf_counts(tree)}")
    else:
        walk(tree, 0)
    return '\n'.join(lines) + f"\n\nNumber of Leaves : {leaf_count(tree)}\n"


# --- Structured export ---
def tree_to_dict(node: DecisionNode) -> dict:
    record = {
        'arc': node.arc,
        'label': node.label,
        'distribution': [[label, count] for label, count in node.distribution],
    }
    if isinstance(node, Leaf):
        record.update(type='leaf', coverage=node.coverage, misclassified=node.misclassified)
    else:
        record.update(type='internal', attribute=node.attribute,
                      children=[tree_to_dict(child) for child in node.children])
    return record


def tree_from_dict(record: Mapping) -> DecisionNode:
    try:
        distribution = tuple((str(label), int(count)) for label, count in record['distribution'])
        if record['type'] == 'leaf':
            return Leaf(record['label'], distribution, record.get('arc'))
        children = tuple(tree_from_dict(child) for child in record['children'])
        return Internal(record['attribute'], children, record['label'], distribution, record.get('arc'))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaMismatch(f"malformed tree record: {e}") from e
