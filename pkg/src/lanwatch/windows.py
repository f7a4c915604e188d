"""Sliding and expanding time windows over an event stream.

Sliding windows are half-open ``[t_start, t_end)`` so adjacent windows
partition the stream when the step equals the width. Expanding slices
keep the closed upper bound ``t <= t_e``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List

import numpy as np

from .errors import NoFullWindowError
from .ingest import EventStream

DEFAULT_WIDTH = 7 * 24 * 3600     # one week
DEFAULT_STEP = 3600               # hourly output


class WindowKind(str, Enum):
    SLIDING = "sliding"
    EXPANDING = "expanding"


@dataclass(frozen=True)
class Window:
    index: int
    t_start: int
    t_end: int
    kind: WindowKind = WindowKind.SLIDING


def sliding_windows(t0: int, t1: int, width: int = DEFAULT_WIDTH,
                    step: int = DEFAULT_STEP) -> List[Window]:
    """All windows [t0 + i*step, t0 + i*step + width) with t_end <= t1."""
    if width <= 0 or step <= 0:
        raise ValueError("window width and step must be positive")
    if t1 < t0 + width:
        raise NoFullWindowError(
            f"span [{t0}, {t1}] is shorter than one window of {width}s"
        )
    out = []
    i = 0
    while t0 + i * step + width <= t1:
        start = t0 + i * step
        out.append(Window(index=i, t_start=start, t_end=start + width))
        i += 1
    return out


def window_slice(stream: EventStream, w: Window) -> EventStream:
    """Records with t_start <= timestamp < t_end, order preserved."""
    if not stream.records:
        return EventStream(())
    ts = stream.timestamps
    lo = int(np.searchsorted(ts, w.t_start, side="left"))
    hi = int(np.searchsorted(ts, w.t_end, side="left"))
    return EventStream(stream.records[lo:hi])


def expanding_slice(stream: EventStream, t_e: int) -> EventStream:
    """Records with timestamp <= t_e."""
    if not stream.records:
        return EventStream(())
    hi = int(np.searchsorted(stream.timestamps, t_e, side="right"))
    return EventStream(stream.records[:hi])


def floor_hour(t: int) -> int:
    return (t // 3600) * 3600


def ceil_hour(t: int) -> int:
    return -((-t) // 3600) * 3600
