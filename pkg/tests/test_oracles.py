"""
Property checks of the tree learner against brute-force recomputation over
many small random datasets.
"""
import itertools
import math
from collections import Counter, defaultdict

import numpy as np
import pytest

from conftest import random_dataset
from mining.evaluation import cross_validate, rank_sectors
from mining.features import ClassLabel, DiscretizedRow
from mining.prune import PruneConfig, pessimistic_error, prune_tree
from mining.rules import classify_with_rules, extract_rules
from mining.tree import Dataset, TreeConfig, build_tree, choose_attribute, classify, iter_leaves, leaf_count

TOLERANCE = 1e-12
VALUE_SPACE_CAP = 10_000


def _bits(counts) -> float:
    total = sum(counts)
    return -sum(c / total * math.log2(c / total) for c in counts if c)


def oracle_choice(data: Dataset, candidates, require_gain: bool = False) -> str | None:
    """Gain ratio from first principles: mean-gain prefilter, first candidate wins ties."""
    n = len(data)
    base = _bits(Counter(data.labels).values())
    scored = []
    for name in candidates:
        column = data.attribute_names.index(name)
        groups = defaultdict(list)
        for row, label in zip(data.rows, data.labels):
            groups[row[column]].append(label)
        sizes = [len(g) for g in groups.values()]
        remainder = sum(len(g) / n * _bits(Counter(g).values()) for g in groups.values())
        gain = max(base - remainder, 0.0)
        split = _bits(sizes)
        if split <= TOLERANCE or len(sizes) < 2:
            continue
        scored.append((name, gain, gain / split))
    if not scored:
        return None
    mean_gain = sum(gain for _, gain, _ in scored) / len(scored)
    eligible = [s for s in scored if s[1] >= mean_gain - TOLERANCE]
    if require_gain:
        eligible = [s for s in eligible if s[1] > TOLERANCE]
    if not eligible:
        return None
    best = eligible[0]
    for candidate in eligible[1:]:
        if candidate[2] > best[2] + TOLERANCE:
            best = candidate
    return best[0]


def _value_space(data: Dataset):
    names = data.attribute_names
    rows = itertools.product(*(a.values for a in data.attributes))
    for values in itertools.islice(rows, VALUE_SPACE_CAP):
        yield dict(zip(names, values))


def _random_trees(rng, count: int):
    for _ in range(count):
        data = random_dataset(rng)
        config = TreeConfig(min_leaf_count=int(rng.integers(1, 3)))
        yield data, build_tree(data, config=config)


@pytest.mark.parametrize('require_gain', [False, True])
def test_choose_attribute_matches_brute_force(rng, require_gain):
    for _ in range(10_000):
        data = random_dataset(rng)
        candidates = list(data.attribute_names)
        rng.shuffle(candidates)
        expected = oracle_choice(data, candidates, require_gain)
        assert choose_attribute(data, candidates, require_gain=require_gain) == expected


def test_unpruned_trees_fit_conflict_free_data(rng):
    config = TreeConfig(min_leaf_count=1)
    for _ in range(1_000):
        data = random_dataset(rng, conflict_free=True)
        tree = prune_tree(build_tree(data, config=config), PruneConfig(enabled=False))
        for i in range(len(data)):
            assert classify(tree, data.row_dict(i))[0] == data.labels[i]


def test_trees_requiring_gain_stop_only_where_no_split_gains(rng):
    config = TreeConfig(min_leaf_count=1, require_gain=True)
    for _ in range(1_000):
        data = random_dataset(rng, conflict_free=True)
        tree = build_tree(data, config=config)
        for path, leaf in iter_leaves(tree):
            if not leaf.misclassified:
                continue
            conditions = dict(path)
            rows = [i for i in range(len(data)) if all(data.row_dict(i)[a] == v for a, v in conditions.items())]
            remaining = [name for name in data.attribute_names if name not in conditions]
            assert oracle_choice(data.subset(rows), remaining, require_gain=True) is None


def test_rules_agree_with_tree_on_every_value_combination(rng):
    for data, tree in _random_trees(rng, 1_000):
        for t in (tree, prune_tree(tree)):
            rules = extract_rules(t)
            for row in _value_space(data):
                assert classify_with_rules(rules, row, fallback=False).label == classify(t, row)[0]


def test_pruning_properties(rng):
    for _, tree in _random_trees(rng, 1_000):
        pruned = prune_tree(tree)
        assert leaf_count(pruned) <= leaf_count(tree)
        assert prune_tree(pruned) == pruned
        assert pruned.coverage == tree.coverage
        for _, leaf in iter_leaves(tree):
            if leaf.coverage and not leaf.misclassified:
                closed_form = leaf.coverage * (1 - 0.25 ** (1 / leaf.coverage))
                assert abs(pessimistic_error(leaf.coverage, 0) - closed_form) <= 1e-9


def test_cross_validation_on_separable_data():
    records = [{'A': f"a{i % 5}", 'B': f"b{i % 7}"} for i in range(100)]
    labels = [label.value for label in ClassLabel]
    data = Dataset.from_records(records, [labels[i % 5] for i in range(100)])
    report = cross_validate(data, k=10, seed=1)
    assert report.mean_accuracy == pytest.approx(1.0)


def test_cross_validation_on_shuffled_labels_is_near_chance():
    rng = np.random.default_rng(11)
    n = 2_000
    classes = [label.value for label in ClassLabel]
    labels = rng.permutation(np.repeat(classes, n // len(classes))).tolist()
    records = [{f"A{j}": f"v{int(rng.integers(0, 3))}" for j in range(4)} for _ in range(n)]
    report = cross_validate(Dataset.from_records(records, labels), k=10, seed=1)
    assert 0.15 <= report.mean_accuracy <= 0.25


def test_best_sector_ranks_first():
    mix = {
        'RiceandFlowerMills': [ClassLabel.EXCELLENT] * 6 + [ClassLabel.VERY_GOOD] * 2,
        'WholeSeller': [ClassLabel.VERY_GOOD] * 5 + [ClassLabel.GOOD] * 3,
        'RetailTraders': [ClassLabel.GOOD] * 5 + [ClassLabel.MARGINAL] * 3,
        'Other': [ClassLabel.MARGINAL] * 4 + [ClassLabel.BAD] * 4,
    }
    rows = [
        DiscretizedRow(f"{sector}-{i}", sector, 'Branch', {}, label)
        for sector, labels in mix.items()
        for i, label in enumerate(labels)
    ]
    rows = [rows[i] for i in np.random.default_rng(3).permutation(len(rows))]
    for method in ('mean-rank', 'good-share'):
        assert rank_sectors(rows, method).sectors[0] == 'RiceandFlowerMills'
    assert rank_sectors(rows).sectors == ['RiceandFlowerMills', 'WholeSeller', 'RetailTraders', 'Other']
