"""
Handler for the featurize command: accounts + transactions -> discretized table.
"""
import logging

from mining.errors import ConfigError
from mining.ingest import load_accounts, load_transactions
from mining.pipeline import featurize
from utils.guards import exit_on_error
from utils.logger import log_activity
from utils.tables import write_frame

logger = logging.getLogger(__name__)

# --- Output files ---
RAW_FILE = 'features_raw.csv'
DISCRETIZED_FILE = 'discretized.csv'


@exit_on_error('featurize')
def run(args, config) -> int:
    if config.accounts_file is None:
        raise ConfigError('ACCOUNTS_FILE', 'no accounts table given (--accounts or ACCOUNTS_FILE)')
    if config.transactions_file is None:
        raise ConfigError('TRANSACTIONS_FILE', 'no transactions table given (--transactions or TRANSACTIONS_FILE)')

    accounts = load_accounts(config.accounts_file, config.delimiter)
    transactions = load_transactions(config.transactions_file, config.delimiter)
    result = featurize(accounts, transactions, config)

    write_frame(result.raw_frame(), config.out_dir / RAW_FILE, config.delimiter)
    write_frame(result.discretized_frame(), config.out_dir / DISCRETIZED_FILE, config.delimiter)

    log_activity(config.run_log, 'featurize', 'completed',
                 f"{len(result.rows)} accounts, columns kept: {', '.join(result.retained)}", config.timezone)
    print(result.report.render(), end='')
    return 0
