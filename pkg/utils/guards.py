"""
Decorator that turns pipeline failures into process exit codes for the command handlers.
"""
import logging
import sys
from functools import wraps

from mining.errors import DataError, PipelineError
from utils.logger import log_activity
from utils.time_utils import DEFAULT_TIMEZONE

logger = logging.getLogger(__name__)


def _log_failure(args: tuple, command: str, message: str):
    # Handlers are called as run(args, config); the config names the activity log.
    config = args[1] if len(args) > 1 else None
    run_log = getattr(config, 'run_log', None)
    if run_log:
        log_activity(run_log, command, 'failed', message, getattr(config, 'timezone', DEFAULT_TIMEZONE))


def exit_on_error(command: str):
    """Run a handler and return its exit code: 0 on success, the error's exit code otherwise."""
    def decorator(func):
        @wraps(func)
        def wrapped(*args, **kwargs) -> int:
            try:
                result = func(*args, **kwargs)
                return 0 if result is None else result
            except PipelineError as e:
                logger.error(f"{command} failed: {e}")
                print(f"{command}: error: {e}", file=sys.stderr)
                _log_failure(args, command, str(e))
                return e.exit_code
            except FileNotFoundError as e:
                message = f"input file not found: {e.filename or e}"
                logger.error(f"{command} failed: {message}")
                print(f"{command}: error: {message}", file=sys.stderr)
                _log_failure(args, command, message)
                return DataError.exit_code
            except Exception as e:
                logger.exception(f"{command} failed with an unexpected error.")
                print(f"{command}: internal error: {e}", file=sys.stderr)
                _log_failure(args, command, repr(e))
                return PipelineError.exit_code
        return wrapped
    return decorator
