import time

from ..errors import CellTimeout


def check_deadline(deadline, what):
    if deadline is not None and time.monotonic() > deadline:
        raise CellTimeout(f"time budget exhausted during {what}")
