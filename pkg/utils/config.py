"""
Pipeline configuration: one key=value file plus command-line overrides.

The file path comes from --config, else the LENDING_CONFIG environment
variable, else the built-in defaults below are used on their own.
"""
import logging
import os
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Mapping

from dotenv import dotenv_values

from mining.errors import ConfigError
from mining.evaluation import SECTOR_SCORE_METHODS
from mining.features import BUILTIN_SCHEMES, DEFAULT_SCORE_COMPONENTS, BinScheme, ScoreComponent
from mining.ingest import DEFAULT_ALLOWED_CODES, DEFAULT_ANCHOR_TO, DEFAULT_WINDOW, SYSTEM_NARRATIVES, WindowSpec
from mining.prune import PruneConfig
from mining.synth import parse_sector_mix
from mining.tree import TreeConfig
from utils.time_utils import DEFAULT_TIMEZONE

logger = logging.getLogger(__name__)

CONFIG_ENV = 'LENDING_CONFIG'

# Config key -> bin scheme it overrides.
SCHEME_KEYS = {
    'BINS_AMOUNT4': 'amount4',
    'BINS_TOTAL6': 'total6',
    'BINS_PRINCIPAL3': 'principal3',
    'BINS_VOUCHER4': 'voucher4',
}

DEFAULTS: dict[str, str] = {
    'ACCOUNTS_FILE': '',
    'TRANSACTIONS_FILE': '',
    'OUT_DIR': 'out',
    'DELIMITER': ',',
    'WINDOW_FROM': DEFAULT_WINDOW.from_date.isoformat(),
    'WINDOW_TO': DEFAULT_WINDOW.to_date.isoformat(),
    'WINDOW_MONTHS': '6',
    'ACCOUNT_ANCHOR_TO': DEFAULT_ANCHOR_TO.isoformat(),
    'ALLOWED_CODES': ','.join(str(c) for c in sorted(DEFAULT_ALLOWED_CODES)),
    'SYSTEM_NARRATIVES': ';'.join(SYSTEM_NARRATIVES),
    'NULL_FRACTION_THRESHOLD': '0.09',
    **{key: BUILTIN_SCHEMES[name].to_text() for key, name in SCHEME_KEYS.items()},
    'SCORE_COMPONENTS': ','.join(c.to_text() for c in DEFAULT_SCORE_COMPONENTS),
    'CRITERION': 'gain-ratio',
    'MIN_LEAF': '2',
    'MIN_LEAF_RULE': 'two-branches',
    'MEAN_GAIN_FILTER': 'true',
    'UNSEEN_VALUE': 'majority',
    'REQUIRE_GAIN': 'false',
    'PRUNE': 'true',
    'CONFIDENCE': '0.25',
    'PRUNE_SLACK': '0.1',
    'PRUNE_AUDIT': 'false',
    'ABBREVIATE_TREE': 'false',
    'RULE_FALLBACK': 'true',
    'FOLDS': '10',
    'SEED': '1',
    'WORKERS': '1',
    'SECTOR_SCORE': 'mean-rank',
    'RUN_LOG': 'pipeline_activity_log.csv',
    'TIMEZONE': DEFAULT_TIMEZONE,
    'SYNTH_N': '200',
    'SYNTH_SECTOR_MIX': '',
    'SYNTH_START': DEFAULT_WINDOW.from_date.isoformat(),
    'SYNTH_END': DEFAULT_ANCHOR_TO.isoformat(),
}


@dataclass(frozen=True)
class PipelineConfig:
    accounts_file: Path | None = None
    transactions_file: Path | None = None
    out_dir: Path = Path('out')
    delimiter: str = ','
    window: WindowSpec = DEFAULT_WINDOW
    window_months: int = 6
    anchor_to: date = DEFAULT_ANCHOR_TO
    allowed_codes: frozenset[int] = DEFAULT_ALLOWED_CODES
    system_narratives: tuple[str, ...] = SYSTEM_NARRATIVES
    null_fraction_threshold: float = 0.09
    schemes: Mapping[str, BinScheme] = field(default_factory=lambda: dict(BUILTIN_SCHEMES))
    score_components: tuple[ScoreComponent, ...] = DEFAULT_SCORE_COMPONENTS
    tree: TreeConfig = field(default_factory=TreeConfig)
    prune: PruneConfig = field(default_factory=PruneConfig)
    prune_audit: bool = False
    abbreviate_tree: bool = False
    rule_fallback: bool = True
    folds: int = 10
    seed: int = 1
    workers: int = 1
    sector_score: str = 'mean-rank'
    run_log: Path | None = Path('pipeline_activity_log.csv')
    timezone: str = DEFAULT_TIMEZONE
    synth_n: int = 200
    synth_sector_mix: Mapping[str, float] | None = None
    synth_start: date = DEFAULT_WINDOW.from_date
    synth_end: date = DEFAULT_ANCHOR_TO

    @property
    def selection_window(self) -> WindowSpec:
        """Dates an account's observation window may start on."""
        return WindowSpec(self.window.from_date, self.anchor_to)


# --- Value parsers ---
def _int(values: Mapping[str, str], key: str, minimum: int | None = None) -> int:
    try:
        number = int(values[key].strip())
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {values[key]!r}") from None
    if minimum is not None and number < minimum:
        raise ConfigError(key, f"must be at least {minimum}, got {number}")
    return number


def _float(values: Mapping[str, str], key: str) -> float:
    try:
        return float(values[key].strip())
    except ValueError:
        raise ConfigError(key, f"expected a number, got {values[key]!r}") from None


def _bool(values: Mapping[str, str], key: str) -> bool:
    text = values[key].strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ConfigError(key, f"expected true or false, got {values[key]!r}")


def _date(values: Mapping[str, str], key: str) -> date:
    try:
        return date.fromisoformat(values[key].strip())
    except ValueError:
        raise ConfigError(key, f"expected an ISO date, got {values[key]!r}") from None


def _path(values: Mapping[str, str], key: str) -> Path | None:
    text = values[key].strip()
    return Path(text) if text else None


def _codes(values: Mapping[str, str]) -> frozenset[int]:
    try:
        codes = frozenset(int(c) for c in values['ALLOWED_CODES'].split(',') if c.strip())
    except ValueError:
        raise ConfigError('ALLOWED_CODES', f"expected comma-separated integers, got {values['ALLOWED_CODES']!r}") from None
    if not codes:
        raise ConfigError('ALLOWED_CODES', 'at least one transaction type code is required')
    return codes


def _delimiter(values: Mapping[str, str]) -> str:
    text = values['DELIMITER']
    text = '\t' if text in ('\\t', 'tab', 'TAB') else text
    if len(text) != 1:
        raise ConfigError('DELIMITER', f"must be a single character, got {text!r}")
    return text


def _schemes(values: Mapping[str, str]) -> dict[str, BinScheme]:
    schemes = dict(BUILTIN_SCHEMES)
    for key, name in SCHEME_KEYS.items():
        parsed = BinScheme.from_text(key, values[key])
        schemes[name] = BinScheme(name, parsed.bins)
    return schemes


def _score_components(values: Mapping[str, str]) -> tuple[ScoreComponent, ...]:
    components = ScoreComponent.parse_list(values['SCORE_COMPONENTS'])
    if not components:
        raise ConfigError('SCORE_COMPONENTS', 'at least one score component is required')
    total = sum(c.weight for c in components)
    if any(c.weight < 0 for c in components) or abs(total - 1.0) > 1e-9:
        raise ConfigError('SCORE_COMPONENTS', f"weights must be non-negative and sum to 1, got {total:g}")
    return components


def _sector_mix(values: Mapping[str, str]) -> dict[str, float] | None:
    text = values['SYNTH_SECTOR_MIX'].strip()
    return parse_sector_mix(text) if text else None


def build_config(values: Mapping[str, str]) -> PipelineConfig:
    """Validate raw key=value settings (every DEFAULTS key present) into a PipelineConfig."""
    window_from, window_to = _date(values, 'WINDOW_FROM'), _date(values, 'WINDOW_TO')
    if window_from > window_to:
        raise ConfigError('WINDOW_FROM', f"{window_from} is after WINDOW_TO {window_to}")
    window = WindowSpec(window_from, window_to)
    anchor_to = _date(values, 'ACCOUNT_ANCHOR_TO')
    if not window.contains(anchor_to):
        raise ConfigError('ACCOUNT_ANCHOR_TO', f"{anchor_to} is outside {window_from}..{window_to}")

    sector_score = values['SECTOR_SCORE'].strip()
    if sector_score not in SECTOR_SCORE_METHODS:
        raise ConfigError('SECTOR_SCORE', f"expected one of {SECTOR_SCORE_METHODS}, got {sector_score!r}")

    threshold = _float(values, 'NULL_FRACTION_THRESHOLD')
    if not 0 < threshold <= 1:
        raise ConfigError('NULL_FRACTION_THRESHOLD', f"must be in (0, 1], got {threshold}")

    synth_start, synth_end = _date(values, 'SYNTH_START'), _date(values, 'SYNTH_END')
    if synth_start > synth_end:
        raise ConfigError('SYNTH_START', f"{synth_start} is after SYNTH_END {synth_end}")

    return PipelineConfig(
        accounts_file=_path(values, 'ACCOUNTS_FILE'),
        transactions_file=_path(values, 'TRANSACTIONS_FILE'),
        out_dir=_path(values, 'OUT_DIR') or Path('.'),
        delimiter=_delimiter(values),
        window=window,
        window_months=_int(values, 'WINDOW_MONTHS', minimum=1),
        anchor_to=anchor_to,
        allowed_codes=_codes(values),
        system_narratives=tuple(n.strip() for n in values['SYSTEM_NARRATIVES'].split(';') if n.strip()),
        null_fraction_threshold=threshold,
        schemes=_schemes(values),
        score_components=_score_components(values),
        tree=TreeConfig(
            criterion=values['CRITERION'].strip(),
            min_leaf_count=_int(values, 'MIN_LEAF'),
            min_leaf_rule=values['MIN_LEAF_RULE'].strip(),
            mean_gain_filter=_bool(values, 'MEAN_GAIN_FILTER'),
            unseen_value=values['UNSEEN_VALUE'].strip(),
            require_gain=_bool(values, 'REQUIRE_GAIN'),
        ),
        prune=PruneConfig(
            confidence=_float(values, 'CONFIDENCE'),
            enabled=_bool(values, 'PRUNE'),
            slack=_float(values, 'PRUNE_SLACK'),
        ),
        prune_audit=_bool(values, 'PRUNE_AUDIT'),
        abbreviate_tree=_bool(values, 'ABBREVIATE_TREE'),
        rule_fallback=_bool(values, 'RULE_FALLBACK'),
        folds=_int(values, 'FOLDS', minimum=2),
        seed=_int(values, 'SEED'),
        workers=_int(values, 'WORKERS', minimum=1),
        sector_score=sector_score,
        run_log=_path(values, 'RUN_LOG'),
        timezone=values['TIMEZONE'].strip(),
        synth_n=_int(values, 'SYNTH_N', minimum=1),
        synth_sector_mix=_sector_mix(values),
        synth_start=synth_start,
        synth_end=synth_end,
    )


def load_config(path: Path | str | None = None, overrides: Mapping[str, object] | None = None) -> PipelineConfig:
    """
    Defaults, then the config file, then `overrides` (command-line values;
    None means "not given").
    """
    values = dict(DEFAULTS)

    path = path or os.getenv(CONFIG_ENV)
    if path:
        path = Path(path)
        if not path.is_file():
            raise ConfigError('CONFIG', f"config file {path} does not exist")
        file_values = dotenv_values(path)
        unknown = sorted(set(file_values) - set(DEFAULTS))
        if unknown:
            logger.warning(f"Ignoring unknown config keys in {path}: {unknown}")
        values.update({k: v for k, v in file_values.items() if k in DEFAULTS and v is not None})
        logger.info(f"Loaded configuration from {path}.")
    else:
        logger.info(f"No config file given and {CONFIG_ENV} is not set; using built-in defaults.")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in DEFAULTS:
            raise ConfigError(key, 'unknown setting')
        values[key] = str(value)

    return build_config(values)
