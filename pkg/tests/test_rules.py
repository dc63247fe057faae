import pytest

from conftest import read_golden
from mining.errors import NoMatch
from mining.prune import prune_tree
from mining.rules import (
    RULE_COLUMNS,
    Rule,
    classify_with_rules,
    extract_rules,
    fallback_label,
    render_rules,
    rules_by_coverage,
    rules_frame,
)
from mining.tree import Leaf, build_tree


@pytest.fixture
def reference_rules(reference_data):
    return extract_rules(prune_tree(build_tree(reference_data)))


def test_reference_rules_golden_text(reference_rules):
    assert render_rules(reference_rules) == read_golden('reference_rules.txt')


def test_one_rule_per_leaf(reference_rules):
    assert len(reference_rules) == 15
    assert reference_rules[2] == Rule(
        (('maxCrAmount', 'Above75'), ('Sector', 'RetailTraders')), 'Very Good', 1, 0,
    )


def test_single_leaf_gives_unconditional_rule():
    (rule,) = extract_rules(Leaf('Good', (('Good', 4),)))
    assert rule.matches({})
    assert rule.render() == 'IF true THEN Class_Label = Good (4/0)'


def test_render_no_rules():
    assert render_rules([]) == ''


def test_classify_with_rules_first_match(reference_rules):
    match = classify_with_rules(reference_rules, {'maxCrAmount': 'LessEqual75', 'Sector': 'Other'})
    assert (match.label, match.rule_index, match.fallback) == ('Excellent', 5, False)


def test_classify_with_rules_fallback(reference_rules):
    row = {'maxCrAmount': 'Above75', 'Sector': 'Textiles'}
    # Excellent consequents cover 16 training rows, more than any other class.
    assert fallback_label(reference_rules) == 'Excellent'
    match = classify_with_rules(reference_rules, row)
    assert (match.label, match.rule_index, match.fallback) == ('Excellent', None, True)
    with pytest.raises(NoMatch):
        classify_with_rules(reference_rules, row, fallback=False)


def test_fallback_ties_go_to_earlier_rule():
    rules = [Rule((('A', 'x'),), 'Neg', 2, 0), Rule((('A', 'y'),), 'Pos', 2, 0)]
    assert fallback_label(rules) == 'Neg'
    with pytest.raises(NoMatch):
        fallback_label([])


def test_rules_frame(reference_rules):
    frame = rules_frame(reference_rules)
    assert list(frame.columns) == RULE_COLUMNS
    assert list(frame['rule_index']) == list(range(15))
    assert frame.loc[5, 'antecedent'] == 'maxCrAmount = LessEqual75'
    assert frame.loc[5, 'length'] == 1


def test_rules_by_coverage_is_stable(reference_rules):
    frame = rules_by_coverage(reference_rules)
    assert list(frame['rule_index'][:3]) == [5, 1, 7]
    assert list(frame['coverage']) == sorted(frame['coverage'], reverse=True)
