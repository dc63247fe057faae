"""
Handler for the evaluate command: cross-validation report, metrics and sector ranking.
"""
import logging
import time

from mining.pipeline import evaluate
from mining.rules import rules_by_coverage
from utils.guards import exit_on_error
from utils.logger import log_activity
from utils.tables import read_table, write_frame, write_text
from utils.time_utils import format_duration

logger = logging.getLogger(__name__)

# --- Output files ---
REPORT_FILE = 'evaluation.txt'
METRICS_FILE = 'metrics.csv'
RANKING_FILE = 'sector_ranking.csv'
RULES_BY_COVERAGE_FILE = 'rules_by_coverage.csv'


@exit_on_error('evaluate')
def run(args, config) -> int:
    started = time.monotonic()
    frame = read_table(args.table, config.delimiter)
    holdout = read_table(args.holdout, config.delimiter) if args.holdout else None

    result = evaluate(frame, config, holdout, str(args.holdout or ''))
    report = result.report

    out = config.out_dir
    write_text(out / REPORT_FILE, report.render_text())
    write_frame(report.metrics_frame(), out / METRICS_FILE, config.delimiter)
    write_frame(rules_by_coverage(report.rules), out / RULES_BY_COVERAGE_FILE, config.delimiter)
    if result.ranking is not None:
        write_frame(result.ranking.to_frame(), out / RANKING_FILE, config.delimiter)

    details = f"{config.folds}-fold mean accuracy {report.mean_accuracy:.4f} over {report.rows} rows"
    details += f" in {format_duration(time.monotonic() - started)}"
    log_activity(config.run_log, 'evaluate', 'completed', details, config.timezone)
    print(f"Mean accuracy: {report.mean_accuracy:.4f}")
    return 0
