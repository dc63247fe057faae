"""
Account and transaction table ingest.

Parses the two delimited input tables into immutable records and applies the
selection filters: active accounts whose six-month observation window starts
by the anchor cutoff and ends inside the study window, allowed
transaction-type codes, and exclusion of system-generated postings. Missing
amounts become zero during parsing.
"""
import csv
import logging
import math
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from mining.errors import ConfigError, DuplicateAccount, MalformedRow, SchemaMismatch
from utils.time_utils import observation_end

logger = logging.getLogger(__name__)

# --- Constants ---
ACCOUNT_COLUMNS = (
    'account_no', 'title', 'sector', 'sanction_authority',
    'sanction_limit', 'disburse_date', 'status',
)
OPTIONAL_ACCOUNT_COLUMNS = ('reschedule_date', 'principal_outstanding', 'adjusted', 'score')
TRANSACTION_COLUMNS = ('account_no', 'tx_date', 'tx_type_code', 'side', 'amount', 'system_generated')
OPTIONAL_TRANSACTION_COLUMNS = ('narrative',)

ACTIVE_STATUS = 'Active'
DEFAULT_WINDOW_MONTHS = 6

DEFAULT_ALLOWED_CODES = frozenset({1, 2, 3, 4, 11, 12, 13, 18, 21, 22, 23, 24, 25, 26, 27, 29, 30})

# Only these codes are named by the source bank; the rest of the set is opaque.
TX_TYPE_NAMES = {
    1: 'CASH',
    2: 'CLEARING',
    11: 'PAY ORDER',
    29: 'ALL OTHER CREDIT TRANSACTIONS',
    30: 'ALL OTHER DEBIT TRANSACTIONS',
}
_CODES_BY_NAME = {name: code for code, name in TX_TYPE_NAMES.items()}

SYSTEM_NARRATIVES = (
    'Incidental Charges', 'Closing Charges', 'Service Charges', 'Interest',
    'Source Taxes on Interest', 'Postage', 'Inspection Charges', 'Other Charges',
    'Value Added Tax', 'Commission', 'Insurance premium', 'Error Correction',
    'Miscellaneous Adjustment',
)

_TRUE = {'true', 't', 'yes', 'y', '1'}
_FALSE = {'false', 'f', 'no', 'n', '0', ''}


class Side(str, Enum):
    DEBIT = 'debit'
    CREDIT = 'credit'

    @classmethod
    def parse(cls, text: str) -> 'Side':
        key = text.strip().lower()
        aliases = {'dr': cls.DEBIT, 'd': cls.DEBIT, 'cr': cls.CREDIT, 'c': cls.CREDIT}
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class AccountProfile:
    """Static account facts (one row of the accounts table)."""
    account_no: str
    title: str
    sector: str
    sanction_authority: str
    sanction_limit: float
    disburse_date: date
    status: str
    reschedule_date: date | None = None
    principal_outstanding: float | None = None
    adjusted: bool | None = None
    score: float | None = None

    @property
    def is_active(self) -> bool:
        return self.status.strip().lower() == ACTIVE_STATUS.lower()

    @property
    def anchor_date(self) -> date:
        """Start of the observation window: reschedule date when known, else disbursement."""
        return self.reschedule_date or self.disburse_date


@dataclass(frozen=True)
class TransactionRecord:
    account_no: str
    tx_date: date
    tx_type_code: int
    side: Side
    amount: float
    system_generated: bool
    narrative: str = ''


@dataclass(frozen=True)
class WindowSpec:
    """Inclusive calendar-date window."""
    from_date: date
    to_date: date

    def __post_init__(self):
        if self.from_date > self.to_date:
            raise ConfigError('WINDOW', f"from_date {self.from_date} is after to_date {self.to_date}")

    def contains(self, day: date) -> bool:
        return self.from_date <= day <= self.to_date

    def intersect(self, other: 'WindowSpec') -> 'WindowSpec | None':
        start = max(self.from_date, other.from_date)
        end = min(self.to_date, other.to_date)
        if start > end:
            return None
        return WindowSpec(start, end)


DEFAULT_WINDOW = WindowSpec(date(2013, 1, 1), date(2014, 6, 30))
# Latest window start that still leaves six full months before DEFAULT_WINDOW ends.
DEFAULT_ANCHOR_TO = date(2013, 12, 31)
DEFAULT_SELECTION_WINDOW = WindowSpec(DEFAULT_WINDOW.from_date, DEFAULT_ANCHOR_TO)


def account_window(profile: AccountProfile, months: int = DEFAULT_WINDOW_MONTHS) -> WindowSpec:
    """Per-account observation window: `months` calendar months from the anchor date, end inclusive."""
    if months < 1:
        raise ConfigError('WINDOW_MONTHS', f"must be at least 1, got {months}")
    start = profile.anchor_date
    return WindowSpec(start, observation_end(start, months))


# --- Field parsers (raise ValueError, wrapped into MalformedRow by the row parsers) ---
def _parse_date(text: str) -> date:
    return date.fromisoformat(text.strip())


def _parse_optional_date(text: str | None) -> date | None:
    if text is None or not text.strip():
        return None
    return _parse_date(text)


def _parse_money(text: str | None, *, blank_as_zero: bool) -> float | None:
    cleaned = (text or '').strip().replace(',', '')
    if not cleaned or cleaned.lower() in {'null', 'none', 'nan'}:
        return 0.0 if blank_as_zero else None
    value = float(cleaned)
    if not math.isfinite(value):
        raise ValueError(f"amount {text!r} is not finite")
    return value


def parse_bool(text: str | None) -> bool:
    key = (text or '').strip().lower()
    if key in _TRUE:
        return True
    if key in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_bool(text: str | None) -> bool | None:
    if text is None or not text.strip():
        return None
    return parse_bool(text)


def _parse_code(text: str | None) -> int:
    """Integer type code, or one of the named codes (case-insensitive)."""
    cleaned = (text or '').strip()
    try:
        return int(cleaned)
    except ValueError:
        pass
    code = _CODES_BY_NAME.get(cleaned.upper())
    if code is None:
        raise ValueError(f"unknown transaction type code {text!r}")
    return code


def _reader(
    source: TextIO | Iterable[str],
    delimiter: str,
    required: Sequence[str],
    known: Sequence[str],
    what: str,
):
    reader = csv.DictReader(source, delimiter=delimiter, skipinitialspace=True)
    headers = tuple((h or '').strip() for h in (reader.fieldnames or []))
    missing = [c for c in required if c not in headers]
    if missing:
        raise SchemaMismatch(f"{what} table is missing columns {missing}; found {list(headers)}")
    extra = [h for h in headers if h not in known]
    if extra:
        logger.info(f"Ignoring unrecognised {what} columns {extra}.")
    reader.fieldnames = list(headers)
    return reader


def _is_blank(row: Mapping[str, str | None]) -> bool:
    return all((v or '').strip() == '' for k, v in row.items() if k is not None)


# --- Operations ---
def parse_accounts(source: TextIO | Iterable[str], delimiter: str = ',', source_name: str = '') -> list[AccountProfile]:
    """
    Parse the accounts table. Rows with an empty account_no or a malformed or
    non-positive sanction_limit are rejected with MalformedRow; repeated
    account numbers raise DuplicateAccount.
    """
    required = [c for c in ACCOUNT_COLUMNS if c != 'title']
    reader = _reader(source, delimiter, required, (*ACCOUNT_COLUMNS, *OPTIONAL_ACCOUNT_COLUMNS), 'accounts')
    accounts: list[AccountProfile] = []
    seen: set[str] = set()

    for line_no, row in enumerate(reader, start=2):
        if _is_blank(row):
            continue
        account_no = (row.get('account_no') or '').strip()
        if not account_no:
            raise MalformedRow(line_no, 'account_no is empty', source_name)
        try:
            limit = _parse_money(row.get('sanction_limit'), blank_as_zero=False)
            if limit is None or limit <= 0:
                raise ValueError(f"sanction_limit must be positive, got {row.get('sanction_limit')!r}")
            profile = AccountProfile(
                account_no=account_no,
                title=(row.get('title') or '').strip(),
                sector=(row.get('sector') or '').strip(),
                sanction_authority=(row.get('sanction_authority') or '').strip(),
                sanction_limit=limit,
                disburse_date=_parse_date(row.get('disburse_date') or ''),
                status=(row.get('status') or '').strip(),
                reschedule_date=_parse_optional_date(row.get('reschedule_date')),
                principal_outstanding=_parse_money(row.get('principal_outstanding'), blank_as_zero=False),
                adjusted=_parse_optional_bool(row.get('adjusted')),
                score=_parse_money(row.get('score'), blank_as_zero=False),
            )
        except ValueError as e:
            raise MalformedRow(line_no, str(e), source_name) from e

        if account_no in seen:
            raise DuplicateAccount(account_no, line_no)
        seen.add(account_no)
        accounts.append(profile)

    logger.info(f"Parsed {len(accounts)} accounts{' from ' + source_name if source_name else ''}.")
    return accounts


def parse_transactions(source: TextIO | Iterable[str], delimiter: str = ',', source_name: str = '') -> list[TransactionRecord]:
    """
    Parse the transactions table in file order. Empty or null amounts become 0.
    Type codes are integers or one of the named codes (CASH, CLEARING, ...).
    Unparseable dates, codes, sides or flags and negative amounts raise MalformedRow.
    """
    reader = _reader(
        source, delimiter, TRANSACTION_COLUMNS, (*TRANSACTION_COLUMNS, *OPTIONAL_TRANSACTION_COLUMNS), 'transactions',
    )
    records: list[TransactionRecord] = []
    blank_amounts = 0

    for line_no, row in enumerate(reader, start=2):
        if _is_blank(row):
            continue
        account_no = (row.get('account_no') or '').strip()
        if not account_no:
            raise MalformedRow(line_no, 'account_no is empty', source_name)
        try:
            raw_amount = row.get('amount')
            if not (raw_amount or '').strip():
                blank_amounts += 1
            amount = _parse_money(raw_amount, blank_as_zero=True)
            if amount < 0:
                raise ValueError(f"amount must be non-negative, got {raw_amount!r}")
            record = TransactionRecord(
                account_no=account_no,
                tx_date=_parse_date(row.get('tx_date') or ''),
                tx_type_code=_parse_code(row.get('tx_type_code')),
                side=Side.parse(row.get('side') or ''),
                amount=amount,
                system_generated=parse_bool(row.get('system_generated')),
                narrative=(row.get('narrative') or '').strip(),
            )
        except ValueError as e:
            raise MalformedRow(line_no, str(e), source_name) from e
        records.append(record)

    if blank_amounts:
        logger.info(f"Replaced {blank_amounts} empty transaction amounts with zero.")
    logger.info(f"Parsed {len(records)} transactions{' from ' + source_name if source_name else ''}.")
    return records


def load_accounts(path: Path | str, delimiter: str = ',') -> list[AccountProfile]:
    path = Path(path)
    with path.open('r', newline='', encoding='utf-8') as f:
        return parse_accounts(f, delimiter, source_name=str(path))


def load_transactions(path: Path | str, delimiter: str = ',') -> list[TransactionRecord]:
    path = Path(path)
    with path.open('r', newline='', encoding='utf-8') as f:
        return parse_transactions(f, delimiter, source_name=str(path))


def select_active_window(accounts: Sequence[AccountProfile], window: WindowSpec) -> list[AccountProfile]:
    """
    Active accounts whose observation window starts inside `window`, input
    order kept. The start is the reschedule date when known, else disbursement.
    """
    selected = [a for a in accounts if a.is_active and window.contains(a.anchor_date)]
    dropped = len(accounts) - len(selected)
    if dropped:
        logger.info(f"Dropped {dropped} accounts that are inactive or anchored outside {window.from_date}..{window.to_date}.")
    return selected


def select_complete_windows(
    accounts: Sequence[AccountProfile],
    window: WindowSpec,
    months: int = DEFAULT_WINDOW_MONTHS,
) -> list[AccountProfile]:
    """Accounts whose whole `months`-month observation window lies inside the transaction window."""
    selected = []
    for account in accounts:
        own = account_window(account, months)
        if window.contains(own.from_date) and window.contains(own.to_date):
            selected.append(account)
    dropped = len(accounts) - len(selected)
    if dropped:
        logger.warning(f"Dropped {dropped} accounts whose {months}-month window is cut off by {window.to_date}.")
    return selected


def is_system_narrative(narrative: str, blocklist: Iterable[str]) -> bool:
    text = narrative.strip().lower()
    if not text:
        return False
    return any(text == entry.strip().lower() for entry in blocklist)


def filter_transactions(
    records: Sequence[TransactionRecord],
    allowed_codes: Iterable[int],
    window: WindowSpec,
    narrative_blocklist: Iterable[str] = (),
) -> list[TransactionRecord]:
    """
    Keep records with an allowed type code, a date inside the window, and no
    system-generated flag (explicit column, or a narrative on the blocklist).
    """
    allowed = frozenset(allowed_codes)
    if not allowed:
        raise ConfigError('ALLOWED_CODES', 'at least one transaction type code is required')
    blocklist = tuple(narrative_blocklist)

    kept = [
        r for r in records
        if r.tx_type_code in allowed
        and window.contains(r.tx_date)
        and not r.system_generated
        and not is_system_narrative(r.narrative, blocklist)
    ]
    logger.debug(f"filter_transactions kept {len(kept)} of {len(records)} records.")
    return kept
