"""
IF-THEN rules read off a decision tree, one per root-to-leaf path.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import pandas as pd

from mining.errors import NoMatch
from mining.tree import DecisionNode, iter_leaves

logger = logging.getLogger(__name__)

CLASS_COLUMN = 'Class_Label'
RULE_COLUMNS = ['rule_index', 'antecedent', 'consequent', 'coverage', 'misclassified', 'length']


@dataclass(frozen=True)
class Rule:
    antecedents: tuple[tuple[str, str], ...]
    consequent: str
    coverage: int
    misclassified: int

    def matches(self, row: Mapping[str, str]) -> bool:
        return all(row.get(attribute) == value for attribute, value in self.antecedents)

    def condition(self) -> str:
        if not self.antecedents:
            return 'true'
        return ' AND '.join(f"{attribute} = {value}" for attribute, value in self.antecedents)

    def render(self, class_column: str = CLASS_COLUMN) -> str:
        return f"IF {self.condition()} THEN {class_column} = {self.consequent} ({self.coverage}/{self.misclassified})"


@dataclass(frozen=True)
class RuleMatch:
    label: str
    rule_index: int | None
    fallback: bool = False


def extract_rules(tree: DecisionNode) -> list[Rule]:
    """Rules in left-to-right leaf order, antecedents in root-to-leaf order."""
    return [
        Rule(path, leaf.label, leaf.coverage, leaf.misclassified)
        for path, leaf in iter_leaves(tree)
    ]


def fallback_label(rules: Sequence[Rule]) -> str:
    """Consequent with the largest total coverage; ties go to the earlier rule."""
    if not rules:
        raise NoMatch('no rules to fall back on')
    weight = Counter()
    for rule in rules:
        weight[rule.consequent] += rule.coverage
    best = rules[0].consequent
    for rule in rules:
        if weight[rule.consequent] > weight[best]:
            best = rule.consequent
    return best


def classify_with_rules(rules: Sequence[Rule], row: Mapping[str, str], fallback: bool = True) -> RuleMatch:
    for index, rule in enumerate(rules):
        if rule.matches(row):
            return RuleMatch(rule.consequent, index)
    if not fallback:
        raise NoMatch(f"no rule matches row {dict(row)}")
    return RuleMatch(fallback_label(rules), None, True)


def render_rules(rules: Sequence[Rule], class_column: str = CLASS_COLUMN) -> str:
    if not rules:
        return ''
    return '\n'.join(rule.render(class_column) for rule in rules) + '\n'


def rules_frame(rules: Sequence[Rule]) -> pd.DataFrame:
    records = [
        {
            'rule_index': i,
            'antecedent': rule.condition(),
            'consequent': rule.consequent,
            'coverage': rule.coverage,
            'misclassified': rule.misclassified,
            'length': len(rule.antecedents),
        }
        for i, rule in enumerate(rules)
    ]
    return pd.DataFrame(records, columns=RULE_COLUMNS)


def rules_by_coverage(rules: Sequence[Rule]) -> pd.DataFrame:
    """Rule table ordered by coverage, largest first; equal coverage keeps tree order."""
    frame = rules_frame(rules)
    return frame.sort_values('coverage', ascending=False, kind='stable').reset_index(drop=True)
