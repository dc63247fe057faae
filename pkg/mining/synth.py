"""
Synthetic accounts and transactions standing in for confidential bank data.

Sector profiles are illustrative only: they make repayment behaviour differ by
sector so the rest of the pipeline has something to find, and say nothing about
any real borrower population. Output is fully determined by the seed.
"""
import logging
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from mining.errors import ConfigError, InvalidProfile
from mining.ingest import (
    ACCOUNT_COLUMNS,
    ACTIVE_STATUS,
    DEFAULT_ALLOWED_CODES,
    DEFAULT_ANCHOR_TO,
    DEFAULT_WINDOW,
    DEFAULT_WINDOW_MONTHS,
    SYSTEM_NARRATIVES,
    TRANSACTION_COLUMNS,
    AccountProfile,
    Side,
    TransactionRecord,
)
from utils.time_utils import observation_end

logger = logging.getLogger(__name__)

# --- Constants ---
SANCTION_LIMITS = (50_000.0, 100_000.0, 200_000.0, 500_000.0, 1_000_000.0)
AUTHORITIES = ('Branch', 'Zonal', 'HeadOffice')
DISALLOWED_CODE = 40
ACCOUNT_BASE = 2013000001

# Probabilities for records the ingest filters are expected to drop.
CLOSED_SHARE = 0.05
SYSTEM_SHARE = 0.05
DISALLOWED_SHARE = 0.03


@dataclass(frozen=True)
class SectorProfile:
    """Behaviour of one sector's borrowers over the observation window."""
    sector: str
    share: float             # weight in the default sector mix
    repay_ratio: float       # expected credit volume per unit of debit volume
    monthly_vouchers: float  # mean postings per month
    drawdown: float          # expected total debit as a share of the sanction limit

    def __post_init__(self):
        if not self.sector.strip():
            raise InvalidProfile('sector name is empty')
        if self.share < 0:
            raise InvalidProfile(f"{self.sector}: share must be non-negative, got {self.share}")
        if not self.repay_ratio > 0:
            raise InvalidProfile(f"{self.sector}: repay_ratio must be positive, got {self.repay_ratio}")
        if self.monthly_vouchers < 0:
            raise InvalidProfile(f"{self.sector}: monthly_vouchers must be non-negative, got {self.monthly_vouchers}")
        if not 0 < self.drawdown <= 2:
            raise InvalidProfile(f"{self.sector}: drawdown must be in (0, 2], got {self.drawdown}")


DEFAULT_PROFILES = (
    SectorProfile('Other', 0.45, 0.70, 2.0, 0.70),
    SectorProfile('RiceandFlowerMills', 0.15, 1.40, 6.0, 0.60),
    SectorProfile('RetailTraders', 0.15, 1.05, 4.0, 0.60),
    SectorProfile('WholeSeller', 0.15, 1.15, 5.0, 0.60),
    SectorProfile('BusinessmanIndustrialist', 0.10, 0.90, 3.0, 0.60),
)


def parse_sector_mix(text: str) -> dict[str, float]:
    """Parse `RiceandFlowerMills:1,Other:0` into sector weights."""
    mix = {}
    for part in text.split(','):
        if not part.strip():
            continue
        name, _, weight = part.partition(':')
        try:
            mix[name.strip()] = float(weight)
        except ValueError:
            raise ConfigError('SYNTH_SECTOR_MIX', f"expected sector:weight, got {part.strip()!r}") from None
    return mix


def _weights(profiles: Sequence[SectorProfile], mix: Mapping[str, float] | None) -> np.ndarray:
    names = [p.sector for p in profiles]
    if mix:
        unknown = [name for name in mix if name not in names]
        if unknown:
            raise InvalidProfile(f"sector mix names unknown sectors {unknown}; known: {names}")
        weights = np.array([float(mix.get(name, 0.0)) for name in names])
    else:
        weights = np.array([p.share for p in profiles], dtype=float)
    if (weights < 0).any() or not weights.sum() > 0:
        raise InvalidProfile(f"sector weights must be non-negative with a positive total, got {weights.tolist()}")
    return weights / weights.sum()


def _transactions(rng: np.random.Generator, account: AccountProfile, profile: SectorProfile) -> list[TransactionRecord]:
    start = account.disburse_date
    span = (observation_end(start, DEFAULT_WINDOW_MONTHS) - start).days
    count = int(rng.poisson(profile.monthly_vouchers * DEFAULT_WINDOW_MONTHS))
    if count == 0:
        return []

    credit_probability = profile.repay_ratio / (1 + profile.repay_ratio)
    # Mean debit posting sized so total debits approach drawdown * limit.
    mean_debit = account.sanction_limit * profile.drawdown / max(count * (1 - credit_probability), 1.0)
    allowed = sorted(DEFAULT_ALLOWED_CODES)

    records = []
    for _ in range(count):
        side = Side.CREDIT if rng.random() < credit_probability else Side.DEBIT
        amount = round(float(rng.gamma(2.0, mean_debit / 2.0)), 2)
        code = DISALLOWED_CODE if rng.random() < DISALLOWED_SHARE else int(rng.choice(allowed))
        system = bool(rng.random() < SYSTEM_SHARE)
        narrative = str(rng.choice(SYSTEM_NARRATIVES)) if system else ''
        records.append(TransactionRecord(
            account_no=account.account_no,
            tx_date=start + timedelta(days=int(rng.integers(0, span + 1))),
            tx_type_code=code,
            side=side,
            amount=amount,
            system_generated=system,
            narrative=narrative,
        ))
    return sorted(records, key=lambda r: r.tx_date)


def generate(
    n: int,
    seed: int,
    profiles: Sequence[SectorProfile] = DEFAULT_PROFILES,
    mix: Mapping[str, float] | None = None,
    start: date = DEFAULT_WINDOW.from_date,
    end: date = DEFAULT_ANCHOR_TO,
) -> tuple[list[AccountProfile], list[TransactionRecord]]:
    """`n` accounts disbursed between `start` and `end`, with their postings."""
    if n < 1:
        raise ConfigError('SYNTH_N', f"must be at least 1, got {n}")
    if start > end:
        raise ConfigError('SYNTH_START', f"{start} is after SYNTH_END {end}")
    if not profiles:
        raise InvalidProfile('no sector profiles configured')

    rng = np.random.default_rng(seed)
    weights = _weights(profiles, mix)
    span = (end - start).days

    accounts: list[AccountProfile] = []
    transactions: list[TransactionRecord] = []
    for i in range(n):
        profile = profiles[int(rng.choice(len(profiles), p=weights))]
        account = AccountProfile(
            account_no=str(ACCOUNT_BASE + i),
            title=f"{profile.sector} borrower {i + 1}",
            sector=profile.sector,
            sanction_authority=str(rng.choice(AUTHORITIES)),
            sanction_limit=float(rng.choice(SANCTION_LIMITS)),
            disburse_date=start + timedelta(days=int(rng.integers(0, span + 1))),
            status='Closed' if rng.random() < CLOSED_SHARE else ACTIVE_STATUS,
        )
        accounts.append(account)
        transactions.extend(_transactions(rng, account, profile))

    logger.info(f"Generated {len(accounts)} accounts and {len(transactions)} transactions (seed {seed}).")
    return accounts, transactions


def accounts_frame(accounts: Sequence[AccountProfile]) -> pd.DataFrame:
    records = [
        {
            'account_no': a.account_no,
            'title': a.title,
            'sector': a.sector,
            'sanction_authority': a.sanction_authority,
            'sanction_limit': f"{a.sanction_limit:.2f}",
            'disburse_date': a.disburse_date.isoformat(),
            'status': a.status,
        }
        for a in accounts
    ]
    return pd.DataFrame(records, columns=list(ACCOUNT_COLUMNS))


def transactions_frame(transactions: Sequence[TransactionRecord]) -> pd.DataFrame:
    records = [
        {
            'account_no': t.account_no,
            'tx_date': t.tx_date.isoformat(),
            'tx_type_code': t.tx_type_code,
            'side': t.side.value,
            'amount': f"{t.amount:.2f}",
            'system_generated': 'true' if t.system_generated else 'false',
            'narrative': t.narrative,
        }
        for t in transactions
    ]
    return pd.DataFrame(records, columns=[*TRANSACTION_COLUMNS, 'narrative'])
