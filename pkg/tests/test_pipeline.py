from dataclasses import replace
from datetime import date

import pytest

from mining.ingest import AccountProfile, Side, TransactionRecord
from mining.pipeline import featurize
from utils.time_utils import add_months


def _account(account_no: str, disbursed: date, **overrides) -> AccountProfile:
    values = dict(
        account_no=account_no, title='', sector='Other', sanction_authority='Branch',
        sanction_limit=100000.0, disburse_date=disbursed, status='Active',
    )
    values.update(overrides)
    return AccountProfile(**values)


def _three_credits_a_month(account: AccountProfile, months: int = 6) -> list[TransactionRecord]:
    records = []
    for month in range(months):
        first = add_months(account.anchor_date, month)
        for day in (2, 9, 16):
            records.append(TransactionRecord(
                account.account_no, first.replace(day=day), 1, Side.CREDIT, 1000.0, False,
            ))
    return records


def test_featurize_drops_accounts_anchored_after_the_cutoff(default_config):
    early = _account('A', date(2013, 3, 1))
    late = _account('B', date(2014, 5, 1))
    transactions = _three_credits_a_month(early) + _three_credits_a_month(late)

    result = featurize([early, late], transactions, default_config)
    assert [r.account_no for r in result.raw] == ['A']
    assert result.raw[0].cr_voucher_monthly_avg == pytest.approx(3.0)


def test_featurize_drops_truncated_windows_even_with_a_late_cutoff(default_config):
    config = replace(default_config, anchor_to=date(2014, 6, 30))
    early = _account('A', date(2013, 3, 1))
    late = _account('B', date(2014, 5, 1))
    transactions = _three_credits_a_month(early) + _three_credits_a_month(late)

    result = featurize([early, late], transactions, config)
    assert [r.account_no for r in result.raw] == ['A']


def test_featurize_selects_on_reschedule_date(default_config):
    rescheduled = _account('R', date(2012, 10, 1), reschedule_date=date(2013, 2, 1))
    result = featurize([rescheduled], _three_credits_a_month(rescheduled), default_config)
    assert [r.account_no for r in result.raw] == ['R']
    assert result.raw[0].cr_voucher_monthly_avg == pytest.approx(3.0)


def test_featurize_with_no_complete_window_writes_empty_tables(default_config):
    late = _account('B', date(2014, 5, 1))
    result = featurize([late], _three_credits_a_month(late), default_config)
    assert result.raw == [] and result.rows == []
