from datetime import date, datetime, timedelta

import pandas as pd
import pytz

# --- Constants ---
DEFAULT_TIMEZONE = 'Asia/Dhaka'


def get_current_time(tz_name: str = DEFAULT_TIMEZONE) -> datetime:
    """Returns the current time in the given timezone."""
    return datetime.now(pytz.timezone(tz_name))


def get_run_date(tz_name: str = DEFAULT_TIMEZONE) -> date:
    """Calendar date of the current run in the given timezone."""
    return get_current_time(tz_name).date()


def add_months(start: date, months: int) -> date:
    """
    Calendar-month arithmetic: 2013-01-31 + 1 month is 2013-02-28.
    """
    return (pd.Timestamp(start) + pd.DateOffset(months=months)).date()


def observation_end(start: date, months: int) -> date:
    """Last day (inclusive) of a window of `months` calendar months starting at `start`."""
    return add_months(start, months) - timedelta(days=1)


def format_duration(seconds: float) -> str:
    """Formats a duration in seconds into HH:MM:SS format."""
    if seconds < 0:
        seconds = 0
    total_seconds = int(seconds)
    hours, remainder = divmod(total_seconds, 3600)
    minutes, seconds = divmod(remainder, 60)
    return f"{hours:02}:{minutes:02}:{seconds:02}"
