"""Early-detection and false-positive statistics over a report series."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence

from .pipeline import WindowReport


class DetectionStatus(str, Enum):
    EARLY = "Early"
    SAME_WINDOW = "SameWindow"
    LATE = "Late"
    NEVER = "NeverDetected"


@dataclass
class EarlyDetectionRow:
    node: str
    earliest_honeypot_time: int
    earliest_detection_time: Optional[int]
    status: DetectionStatus
    time_difference: Optional[int]     # honeypot - detection; positive = early


@dataclass
class FprPoint:
    window: int
    false_positives: int
    negatives: int
    rate: Optional[float]              # None when there are no negatives


@dataclass
class NodeScoreTotals:
    node: str
    horizontal_total: float
    vertical_total: float
    total: float
    n_windows: int
    mean_per_window: float


def classify_diff(diff: int, step: int) -> DetectionStatus:
    """Early at diff >= 0, SameWindow within (-step, 0), Late below."""
    if diff >= 0:
        return DetectionStatus.EARLY
    if diff >= -step:
        return DetectionStatus.SAME_WINDOW
    return DetectionStatus.LATE


def early_detection(reports: Sequence[WindowReport],
                    positives: Mapping[str, int],
                    step: int = 3600) -> List[EarlyDetectionRow]:
    """One row per honeypot-contacting node.

    Detection time is the end of the first window flagging the node by
    either approach.
    """
    first_flag: Dict[str, int] = {}
    for rep in reports:
        for entry in rep.entries:
            first_flag.setdefault(entry.node, rep.t_end)
    rows = []
    for node in sorted(positives):
        hp_time = positives[node]
        det_time = first_flag.get(node)
        if det_time is None:
            rows.append(EarlyDetectionRow(node, hp_time, None,
                                          DetectionStatus.NEVER, None))
            continue
        diff = hp_time - det_time
        rows.append(EarlyDetectionRow(node, hp_time, det_time,
                                      classify_diff(diff, step), diff))
    return rows


def fpr_series(reports: Sequence[WindowReport],
               positives: Mapping[str, int]) -> List[FprPoint]:
    """Per-window false-positive counts and rates.

    Positivity is dataset-global: a negative is a node active in the
    window that never contacts the honeypot over the whole dataset.
    """
    points = []
    for rep in reports:
        negatives = [n for n in rep.active_nodes if n not in positives]
        fp = [n for n in rep.flagged_nodes() if n not in positives]
        rate = len(fp) / len(negatives) if negatives else None
        points.append(FprPoint(window=rep.index, false_positives=len(fp),
                               negatives=len(negatives), rate=rate))
    return points


def score_totals(reports: Sequence[WindowReport]) -> List[NodeScoreTotals]:
    """Per-node score sums over all windows, sorted by descending total."""
    h: Dict[str, float] = {}
    v: Dict[str, float] = {}
    n: Dict[str, int] = {}
    for rep in reports:
        for entry in rep.entries:
            h[entry.node] = h.get(entry.node, 0.0) + (entry.horizontal_score or 0.0)
            v[entry.node] = v.get(entry.node, 0.0) + (entry.vertical_score or 0.0)
            n[entry.node] = n.get(entry.node, 0) + 1
    rows = []
    for node in n:
        total = h[node] + v[node]
        rows.append(NodeScoreTotals(node=node, horizontal_total=h[node],
                                    vertical_total=v[node], total=total,
                                    n_windows=n[node],
                                    mean_per_window=total / n[node]))
    rows.sort(key=lambda r: (-r.total, r.node))
    return rows


# ---------------------------------------------------------------------------
# CSV outputs

def write_early_detection_csv(path, rows: Sequence[EarlyDetectionRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "honeypot_time", "detect_time", "status", "diff"])
        for r in rows:
            writer.writerow([
                r.node, r.earliest_honeypot_time,
                "" if r.earliest_detection_time is None else r.earliest_detection_time,
                r.status.value,
                "" if r.time_difference is None else r.time_difference,
            ])


def write_fpr_csv(path, series: Mapping[str, Sequence[FprPoint]]) -> None:
    """Fig-6-style data; windows with no negatives are dropped."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "fp", "negatives", "rate", "detector"])
        for detector in sorted(series):
            for p in series[detector]:
                if p.rate is None:
                    continue
                writer.writerow([p.window, p.false_positives, p.negatives,
                                 repr(p.rate), detector])


def write_score_totals_csv(path, rows: Sequence[NodeScoreTotals]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "h_total", "v_total", "total", "n_windows", "mean"])
        for r in rows:
            writer.writerow([r.node, repr(r.horizontal_total), repr(r.vertical_total),
                             repr(r.total), r.n_windows, repr(r.mean_per_window)])
