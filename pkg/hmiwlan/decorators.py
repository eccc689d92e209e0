import logging
import time
from functools import wraps

import click

from hmiwlan.errors import ToolkitError

logger = logging.getLogger(__name__)


def exit_codes():
    """Maps a command's outcome onto the process exit codes 0, 1 and 2."""
    def _exit_codes(f):
        @wraps(f)
        def __exit_codes(*args, **kwargs):
            started = time.perf_counter()
            try:
                f(*args, **kwargs)
            except ToolkitError as e:
                logger.error("%s: %s", type(e).__name__, e)
                raise click.exceptions.Exit(e.exit_code)
            logger.info("%s finished in %.2f s", f.__name__, time.perf_counter() - started)
            return 0
        return __exit_codes
    return _exit_codes


def timed(kind):
    """Logs one line per simulation run with its wall time."""
    def _timed(f):
        @wraps(f)
        def __timed(*args, **kwargs):
            started = time.perf_counter()
            result = f(*args, **kwargs)
            logging.getLogger(f.__module__).debug(
                "%s run took %.3f s", kind, time.perf_counter() - started)
            return result
        return __timed
    return _timed
