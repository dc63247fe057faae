import csv
import logging
from pathlib import Path

from utils.time_utils import DEFAULT_TIMEZONE, get_current_time, get_run_date

logger = logging.getLogger(__name__)

# --- Constants ---
LOG_HEADER = ['timestamp', 'command', 'event', 'details', 'run_date']


def log_activity(log_path: Path | str | None, command: str, event: str, details: str, tz_name: str = DEFAULT_TIMEZONE):
    """Appends one pipeline event to the CSV activity log, creating it with a header on first use."""
    if not log_path:
        return
    path = Path(log_path)
    try:
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open('w', newline='', encoding='utf-8') as f:
                csv.writer(f).writerow(LOG_HEADER)

        now = get_current_time(tz_name)
        run_date_str = get_run_date(tz_name).strftime('%Y-%m-%d')
        log_entry = [now.isoformat(), command, event, details, run_date_str]

        with path.open('a', newline='', encoding='utf-8') as f:
            csv.writer(f).writerow(log_entry)
    except Exception as e:
        logger.error(f"Error writing to activity log {path}: {e}")
