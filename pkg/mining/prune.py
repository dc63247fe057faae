"""
Confidence-based post-pruning with subtree replacement.

Children are pruned first. A subtree is then replaced by a single leaf when the
pessimistic error of that leaf is within `slack` of the summed pessimistic
errors of the subtree's leaves. Subtree raising is not performed.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable

from scipy.stats import norm

from mining.errors import ConfigError, InvalidCounts
from mining.tree import DecisionNode, Internal, Leaf, iter_leaves, leaf_count

logger = logging.getLogger(__name__)

DEFAULT_CONFIDENCE = 0.25
DEFAULT_SLACK = 0.1


@dataclass(frozen=True)
class PruneConfig:
    confidence: float = DEFAULT_CONFIDENCE
    enabled: bool = True
    slack: float = DEFAULT_SLACK

    def __post_init__(self):
        if not 0 < self.confidence <= 0.5:
            raise ConfigError('CONFIDENCE', f"must be in (0, 0.5], got {self.confidence}")
        if not self.slack >= 0:
            raise ConfigError('PRUNE_SLACK', f"must be non-negative, got {self.slack}")

    def to_dict(self) -> dict:
        return {'confidence': self.confidence, 'enabled': self.enabled, 'slack': self.slack}


def pessimistic_error(coverage: int, misclassified: int, confidence: float = DEFAULT_CONFIDENCE) -> float:
    """
    Upper confidence bound on the number of errors a leaf makes.

    Zero observed errors use the exact binomial bound n(1 - c^(1/n)); otherwise
    the normal approximation with z = isf(c) is applied to f = m/n.
    """
    if coverage < 1 or misclassified < 0 or misclassified > coverage:
        raise InvalidCounts(f"need coverage >= 1 and 0 <= misclassified <= coverage, got ({coverage}, {misclassified})")
    if not 0 < confidence <= 0.5:
        raise ConfigError('CONFIDENCE', f"must be in (0, 0.5], got {confidence}")

    n = float(coverage)
    m = float(misclassified)
    if misclassified == 0:
        return n * (1.0 - confidence ** (1.0 / n))
    if misclassified == coverage:
        return n

    z = float(norm.isf(confidence))
    f = m / n
    bound = (
        f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))
    ) / (1 + z * z / n)
    return min(max(n * bound, m), n)


def subtree_error(tree: DecisionNode, confidence: float = DEFAULT_CONFIDENCE) -> float:
    """Summed pessimistic error of the leaves; leaves that saw no rows add nothing."""
    return sum(
        pessimistic_error(leaf.coverage, leaf.misclassified, confidence)
        for _, leaf in iter_leaves(tree)
        if leaf.coverage > 0
    )


def _describe(path: tuple[tuple[str, str], ...]) -> str:
    if not path:
        return '<root>'
    return ' > '.join(f"{attribute}={value}" for attribute, value in path)


def prune_tree(
    tree: DecisionNode,
    config: PruneConfig | None = None,
    audit: Callable[[str], None] | None = None,
) -> DecisionNode:
    """
    Returns a pruned copy; the input tree is left untouched. When `audit` is
    given it receives one line per internal node describing the decision.
    """
    config = config or PruneConfig()
    if not config.enabled:
        return tree

    pruned = _prune(tree, config, audit, ())
    before, after = leaf_count(tree), leaf_count(pruned)
    if before != after:
        logger.info(f"Pruning reduced the tree from {before} to {after} leaves.")
    return pruned


def _prune(node: DecisionNode, config: PruneConfig, audit, path) -> DecisionNode:
    if isinstance(node, Leaf):
        return node

    children = tuple(
        _prune(child, config, audit, path + ((node.attribute, child.arc),))
        for child in node.children
    )
    candidate: Internal = replace(node, children=children)
    replacement = Leaf(node.label, node.distribution, node.arc)

    if replacement.coverage == 0:
        if audit:
            audit(f"{_describe(path)}: no training rows -> replaced")
        return replacement

    leaf_err = pessimistic_error(replacement.coverage, replacement.misclassified, config.confidence)
    branch_err = subtree_error(candidate, config.confidence)
    collapse = leaf_err <= branch_err + config.slack

    if audit:
        outcome = f"replaced by {replacement.label}" if collapse else 'kept'
        audit(f"{_describe(path)}: split on {node.attribute} leaf={leaf_err:.4f} subtree={branch_err:.4f} -> {outcome}")
    return replacement if collapse else candidate
