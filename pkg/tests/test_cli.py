import csv

import pytest

import main
from conftest import FILES, read_golden
from utils.config import CONFIG_ENV

REFERENCE = str(FILES / 'reference_discretized.csv')


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    # The activity log defaults to the working directory.
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    return tmp_path


def test_full_pipeline_on_synthetic_data(workdir):
    out = str(workdir / 'out')
    assert main.main(['synth', '--n', '120', '--seed', '3', '--out-dir', out]) == 0
    assert main.main([
        'featurize', '--accounts', f"{out}/accounts.csv", '--transactions', f"{out}/transactions.csv",
        '--out-dir', out,
    ]) == 0
    table = f"{out}/discretized.csv"
    with open(table, newline='', encoding='utf-8') as f:
        rows = list(csv.DictReader(f))
    assert rows and 'Class_Label' in rows[0]

    assert main.main(['train', table, '--out-dir', out]) == 0
    assert main.main(['predict', table, '--out-dir', out]) == 0
    with open(f"{out}/predictions.csv", newline='', encoding='utf-8') as f:
        predictions = list(csv.DictReader(f))
    assert len(predictions) == len(rows)
    assert [p['AccountNo'] for p in predictions] == [r['AccountNo'] for r in rows]

    assert main.main(['evaluate', table, '--out-dir', out, '--folds', '5']) == 0
    for name in ('evaluation.txt', 'metrics.csv', 'rules_by_coverage.csv', 'sector_ranking.csv'):
        assert (workdir / 'out' / name).is_file()

    log = (workdir / 'pipeline_activity_log.csv').read_text(encoding='utf-8').splitlines()
    assert log[0] == 'timestamp,command,event,details,run_date'
    assert [line.split(',')[1] for line in log[1:]] == ['synth', 'featurize', 'train', 'predict', 'evaluate']


def test_train_reference_table(workdir, capsys):
    assert main.main(['train', REFERENCE, '--out-dir', str(workdir), '--prune-audit']) == 0
    assert 'Number of Leaves : 15' in capsys.readouterr().out
    assert (workdir / 'tree.txt').read_text(encoding='utf-8') == read_golden('reference_tree.txt')
    assert (workdir / 'rules.txt').read_text(encoding='utf-8') == read_golden('reference_rules.txt')
    assert len((workdir / 'prune.txt').read_text(encoding='utf-8').splitlines()) == 4


def test_train_abbreviated_tree(workdir):
    assert main.main(['train', REFERENCE, '--out-dir', str(workdir), '--abbreviate']) == 0
    text = (workdir / 'tree.txt').read_text(encoding='utf-8')
    assert text.splitlines()[0] == 'maxCA = Above75'
    assert (workdir / 'rules.txt').read_text(encoding='utf-8') == read_golden('reference_rules.txt')


def test_predict_without_fallback_fails_on_unmatched_rows(workdir):
    assert main.main(['train', REFERENCE, '--out-dir', str(workdir)]) == 0
    table = workdir / 'new.csv'
    table.write_text(
        'AccountNo,Sector,totalDrAmount,maxCrAmount,PrincipalAmount\n'
        '1,Textiles,LessEqual100,Above75,LessEqual50\n',
        encoding='utf-8',
    )
    assert main.main(['predict', str(table), '--out-dir', str(workdir)]) == 0
    assert 'true' in (workdir / 'predictions.csv').read_text(encoding='utf-8')
    assert main.main(['predict', str(table), '--out-dir', str(workdir), '--no-fallback']) == 2


def test_evaluate_is_reproducible(workdir):
    for name in ('a', 'b'):
        assert main.main(['evaluate', REFERENCE, '--out-dir', str(workdir / name), '--seed', '7']) == 0
    for output in ('evaluation.txt', 'metrics.csv', 'sector_ranking.csv', 'rules_by_coverage.csv'):
        assert (workdir / 'a' / output).read_bytes() == (workdir / 'b' / output).read_bytes()


def test_evaluate_with_holdout(workdir):
    assert main.main(['evaluate', REFERENCE, '--holdout', REFERENCE, '--out-dir', str(workdir)]) == 0
    assert '=== Holdout evaluation' in (workdir / 'evaluation.txt').read_text(encoding='utf-8')


def test_missing_class_column_is_a_data_error(workdir, capsys):
    table = workdir / 'unlabelled.csv'
    table.write_text('AccountNo,Sector\n1,Other\n2,WholeSeller\n', encoding='utf-8')
    assert main.main(['train', str(table), '--out-dir', str(workdir)]) == 2
    assert 'train: error:' in capsys.readouterr().err
    log = (workdir / 'pipeline_activity_log.csv').read_text(encoding='utf-8')
    assert 'train,failed' in log


def test_missing_input_file(workdir):
    assert main.main(['train', str(workdir / 'absent.csv'), '--out-dir', str(workdir)]) == 2


def test_more_folds_than_rows(workdir):
    assert main.main(['evaluate', REFERENCE, '--folds', '41', '--out-dir', str(workdir)]) == 2


@pytest.mark.parametrize('argv', [
    [],
    ['bogus'],
    ['train'],
    ['evaluate', REFERENCE, '--workers', 'many'],
])
def test_usage_errors(argv):
    assert main.main(argv) == 1


def test_configuration_errors(workdir):
    assert main.main(['train', REFERENCE, '--confidence', '0.9']) == 1
    assert main.main(['train', REFERENCE, '--config', str(workdir / 'absent.conf')]) == 1


def test_featurize_needs_inputs(workdir):
    assert main.main(['featurize', '--out-dir', str(workdir)]) == 1
