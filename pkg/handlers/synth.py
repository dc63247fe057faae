"""
Handler for the synth command: writes a synthetic accounts/transactions pair.
"""
import logging

from mining.synth import accounts_frame, generate, transactions_frame
from utils.guards import exit_on_error
from utils.logger import log_activity
from utils.tables import write_frame

logger = logging.getLogger(__name__)

# --- Output files ---
ACCOUNTS_FILE = 'accounts.csv'
TRANSACTIONS_FILE = 'transactions.csv'


@exit_on_error('synth')
def run(args, config) -> int:
    accounts, transactions = generate(
        config.synth_n,
        config.seed,
        mix=config.synth_sector_mix,
        start=config.synth_start,
        end=config.synth_end,
    )
    write_frame(accounts_frame(accounts), config.out_dir / ACCOUNTS_FILE, config.delimiter)
    write_frame(transactions_frame(transactions), config.out_dir / TRANSACTIONS_FILE, config.delimiter)

    details = f"{len(accounts)} accounts, {len(transactions)} transactions, seed {config.seed}"
    log_activity(config.run_log, 'synth', 'completed', details, config.timezone)
    print(f"Wrote {details} to {config.out_dir}")
    return 0
