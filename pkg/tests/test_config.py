from datetime import date
from pathlib import Path

import pytest

from mining.errors import ConfigError
from utils.config import CONFIG_ENV, load_config

CONF_FILE = Path(__file__).parent.parent / 'config' / 'pipeline.conf'


@pytest.fixture(autouse=True)
def no_config_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def _conf(tmp_path, text: str) -> Path:
    path = tmp_path / 'pipeline.conf'
    path.write_text(text, encoding='utf-8')
    return path


def test_defaults():
    config = load_config()
    assert config.folds == 10
    assert config.seed == 1
    assert config.tree.min_leaf_count == 2
    assert config.prune.confidence == 0.25
    assert config.prune.enabled
    assert config.run_log == Path('pipeline_activity_log.csv')
    assert 'Interest' in config.system_narratives
    assert config.selection_window.to_date == date(2013, 12, 31)
    assert config.synth_end == date(2013, 12, 31)


def test_shipped_config_matches_defaults():
    assert load_config(CONF_FILE) == load_config()


def test_config_file_values(tmp_path):
    path = _conf(tmp_path, 'FOLDS=5\nSEED=9\nSYSTEM_NARRATIVES="Interest;Postage"\nDELIMITER=tab\nBOGUS=1\n')
    config = load_config(path)
    assert (config.folds, config.seed) == (5, 9)
    assert config.system_narratives == ('Interest', 'Postage')
    assert config.delimiter == '\t'


def test_config_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(CONFIG_ENV, str(_conf(tmp_path, 'WORKERS=4\n')))
    assert load_config().workers == 4


def test_overrides_win_and_none_is_ignored(tmp_path):
    path = _conf(tmp_path, 'FOLDS=5\n')
    config = load_config(path, {'FOLDS': 3, 'SEED': None, 'PRUNE': 'false'})
    assert config.folds == 3
    assert config.seed == 1
    assert not config.prune.enabled


def test_require_gain_setting():
    assert not load_config().tree.require_gain
    assert load_config(overrides={'REQUIRE_GAIN': 'true'}).tree.require_gain


def test_bin_scheme_override():
    config = load_config(overrides={'BINS_AMOUNT4': '10:Low,inf:High'})
    scheme = config.schemes['amount4']
    assert scheme.name == 'amount4'
    assert scheme.labels == ('Low', 'High')


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(tmp_path / 'absent.conf')
    assert err.value.key == 'CONFIG'


@pytest.mark.parametrize('key, value', [
    ('FOLDS', '1'),
    ('FOLDS', 'ten'),
    ('CONFIDENCE', '0.7'),
    ('MIN_LEAF', '0'),
    ('CRITERION', 'gini'),
    ('PRUNE', 'maybe'),
    ('DELIMITER', '||'),
    ('SECTOR_SCORE', 'median'),
    ('WINDOW_TO', '2014-13-01'),
    ('ALLOWED_CODES', ''),
    ('SCORE_COMPONENTS', 'total_cr:0.5:500:up'),
    ('NULL_FRACTION_THRESHOLD', '0'),
    ('WORKERS', '0'),
    ('ACCOUNT_ANCHOR_TO', '2015-01-01'),
    ('ACCOUNT_ANCHOR_TO', 'soon'),
    ('REQUIRE_GAIN', 'sometimes'),
])
def test_invalid_values_name_their_key(key, value):
    with pytest.raises(ConfigError) as err:
        load_config(overrides={key: value})
    assert err.value.key == key


def test_reversed_window():
    with pytest.raises(ConfigError) as err:
        load_config(overrides={'WINDOW_FROM': '2014-01-01', 'WINDOW_TO': '2013-01-01'})
    assert err.value.key == 'WINDOW_FROM'


def test_unknown_override_key():
    with pytest.raises(ConfigError):
        load_config(overrides={'NOT_A_KEY': '1'})
