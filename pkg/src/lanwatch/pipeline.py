"""Per-window orchestration of the horizontal and vertical detectors.

The horizontal pass runs a detector over the 2D PCA projection of the
per-node signature vectors in each sliding window. The vertical pass
runs it over per-call points in each protocol's own 2D space (sliding
for ARP, expanding for TCP/UDP) and sums the flagged call scores per
node. Both are amalgamated into one report per window.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import evt, ocsvm
from .features import fit_pca2, project_pca2, signature_matrix, window_signatures
from .ingest import EventStream, Protocol
from .windows import (DEFAULT_STEP, DEFAULT_WIDTH, Window, ceil_hour,
                      expanding_slice, floor_hour, sliding_windows, window_slice)

OCSVM_NOMINAL_SCORE = 10.0


class Approach(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL_ARP = "vertical-arp"
    VERTICAL_TCP = "vertical-tcp"
    VERTICAL_UDP = "vertical-udp"


VERTICAL_APPROACHES = (Approach.VERTICAL_ARP, Approach.VERTICAL_TCP,
                       Approach.VERTICAL_UDP)


@dataclass
class Verdict:
    node: str
    window_index: int
    approach: Approach
    probability: Optional[float]
    score: float


@dataclass
class ReportEntry:
    node: str
    horizontal_flag: bool
    vertical_flag: bool
    horizontal_score: Optional[float]
    vertical_score: Optional[float]
    history: Tuple[int, ...]          # prior flagged windows, most recent first


@dataclass
class WindowReport:
    index: int
    t_start: int
    t_end: int
    entries: List[ReportEntry] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    active_nodes: Tuple[str, ...] = ()

    def flagged_nodes(self) -> List[str]:
        return [e.node for e in self.entries]


@dataclass
class PipelineConfig:
    width: int = DEFAULT_WIDTH
    step: int = DEFAULT_STEP
    alpha: float = 0.1
    detectors: Tuple[str, ...] = ("lookout",)
    bw_quantile: float = 0.9
    pot_quantile: float = 0.9
    nu: float = 0.1
    gamma: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.width <= self.step or self.step <= 0:
            raise ValueError("require width > step > 0")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        for d in self.detectors:
            if d not in ("lookout", "ocsvm"):
                raise ValueError(f"unknown detector {d!r}")

    def to_dict(self) -> dict:
        return {
            "width": self.width, "step": self.step, "alpha": self.alpha,
            "detectors": list(self.detectors), "bw_quantile": self.bw_quantile,
            "pot_quantile": self.pot_quantile, "nu": self.nu,
            "gamma": self.gamma, "seed": self.seed,
        }


class _ProtocolArrays:
    """Per-protocol numpy views of a stream, built once per run."""

    def __init__(self, stream: EventStream):
        arp_ts, arp_pts, arp_nodes = [], [], []
        tcp_ts, tcp_x, tcp_nodes = [], [], []
        udp_ts, udp_x, udp_nodes = [], [], []
        for rec in stream:
            if rec.protocol is Protocol.ARP:
                arp_ts.append(rec.timestamp)
                arp_pts.append((rec.arp.count, rec.arp.degree))
                arp_nodes.append(rec.node)
            elif rec.protocol is Protocol.TCP:
                tcp_ts.append(rec.timestamp)
                tcp_x.append(rec.tcp.numeric())
                tcp_nodes.append(rec.node)
            else:
                udp_ts.append(rec.timestamp)
                udp_x.append(rec.udp.numeric())
                udp_nodes.append(rec.node)
        self.arp_ts = np.array(arp_ts, dtype=np.int64)
        self.arp_pts = np.array(arp_pts, dtype=float).reshape(-1, 2)
        self.arp_nodes = np.array(arp_nodes, dtype=object)
        self.tcp_ts = np.array(tcp_ts, dtype=np.int64)
        self.tcp_x = np.array(tcp_x, dtype=float).reshape(-1, 11)
        self.tcp_nodes = np.array(tcp_nodes, dtype=object)
        self.udp_ts = np.array(udp_ts, dtype=np.int64)
        self.udp_x = np.array(udp_x, dtype=float).reshape(-1, 3)
        self.udp_nodes = np.array(udp_nodes, dtype=object)


def _run_point_detector(points: np.ndarray, detector: str,
                        cfg: PipelineConfig) -> Tuple[List[Tuple[int, Optional[float], float]], List[str]]:
    """Flagged (index, probability, score) triples for one point cloud."""
    if detector == "lookout":
        res = evt.lookout(points, cfg.alpha, bw_quantile=cfg.bw_quantile,
                          pot_quantile=cfg.pot_quantile)
        return ([(d.index, d.probability, d.score) for d in res.detections],
                list(res.warnings))
    model = ocsvm.ocsvm_fit(points, nu=cfg.nu, gamma=cfg.gamma)
    flagged = ocsvm.ocsvm_flag(model, points)
    return [(i, None, OCSVM_NOMINAL_SCORE) for i in flagged], []


def horizontal_detect(stream: EventStream, w: Window, detector: str = "lookout",
                      alpha: float = 0.1, cfg: Optional[PipelineConfig] = None,
                      slice_: Optional[EventStream] = None
                      ) -> Tuple[List[Verdict], List[str]]:
    """One verdict per flagged node from the window's signature cloud."""
    cfg = cfg or PipelineConfig(alpha=alpha, detectors=(detector,))
    sl = slice_ if slice_ is not None else window_slice(stream, w)
    sigs = window_signatures(sl, w)
    if len(sigs) < 3:
        return [], [f"horizontal: only {len(sigs)} nodes in window {w.index}, skipped"]
    nodes, mat = signature_matrix(sigs)
    pts = project_pca2(fit_pca2(mat), mat)
    flagged, warns = _run_point_detector(pts, detector, cfg)
    verdicts = [Verdict(node=nodes[i], window_index=w.index,
                        approach=Approach.HORIZONTAL, probability=p, score=s)
                for i, p, s in flagged]
    return verdicts, [f"horizontal: {m}" for m in warns]


def vertical_detect(stream: EventStream, w: Window, detector: str = "lookout",
                    alpha: float = 0.1, cfg: Optional[PipelineConfig] = None,
                    arrays: Optional[_ProtocolArrays] = None
                    ) -> Tuple[List[Verdict], List[str]]:
    """Per-node verdicts from each protocol's 2D call space.

    ARP uses the sliding slice; TCP and UDP use the expanding slice up to
    the window end. A node flagged on several calls in one space gets the
    sum of the call scores.
    """
    cfg = cfg or PipelineConfig(alpha=alpha, detectors=(detector,))
    arrays = arrays if arrays is not None else _ProtocolArrays(stream)
    verdicts: List[Verdict] = []
    warnings: List[str] = []
    for approach, pts, nodes in _vertical_spaces(arrays, w):
        if len(pts) < 3:
            warnings.append(
                f"{approach.value}: only {len(pts)} points in window {w.index}, skipped"
            )
            continue
        flagged, warns = _run_point_detector(pts, detector, cfg)
        warnings.extend(f"{approach.value}: {m}" for m in warns)
        per_node: Dict[str, List[Tuple[Optional[float], float]]] = {}
        for i, p, s in flagged:
            per_node.setdefault(nodes[i], []).append((p, s))
        for node in sorted(per_node):
            calls = per_node[node]
            probs = [p for p, _ in calls if p is not None]
            verdicts.append(Verdict(
                node=node, window_index=w.index, approach=approach,
                probability=min(probs) if probs else None,
                score=float(sum(s for _, s in calls)),
            ))
    return verdicts, warnings


def _vertical_spaces(arrays: _ProtocolArrays, w: Window):
    lo = int(np.searchsorted(arrays.arp_ts, w.t_start, side="left"))
    hi = int(np.searchsorted(arrays.arp_ts, w.t_end, side="left"))
    yield Approach.VERTICAL_ARP, arrays.arp_pts[lo:hi], arrays.arp_nodes[lo:hi]
    for approach, ts, x, nodes in (
        (Approach.VERTICAL_TCP, arrays.tcp_ts, arrays.tcp_x, arrays.tcp_nodes),
        (Approach.VERTICAL_UDP, arrays.udp_ts, arrays.udp_x, arrays.udp_nodes),
    ):
        hi = int(np.searchsorted(ts, w.t_end, side="right"))
        x_slice = x[:hi]
        if len(x_slice) >= 1:
            pts = project_pca2(fit_pca2(x_slice), x_slice)
        else:
            pts = np.zeros((0, 2))
        yield approach, pts, nodes[:hi]


def amalgamate(horizontal: Sequence[Verdict], vertical: Sequence[Verdict],
               prior_reports: Sequence[WindowReport],
               window: Optional[Window] = None) -> WindowReport:
    """Combine both approaches' verdicts into one per-window report."""
    all_verdicts = list(horizontal) + list(vertical)
    if window is not None:
        index, t_start, t_end = window.index, window.t_start, window.t_end
    elif all_verdicts:
        index = all_verdicts[0].window_index
        t_start = t_end = 0
    else:
        index = t_start = t_end = 0
    prior: Dict[str, List[int]] = {}
    for rep in prior_reports:
        for entry in rep.entries:
            prior.setdefault(entry.node, []).append(rep.index)
    h_scores = {v.node: v.score for v in horizontal}
    v_scores: Dict[str, float] = {}
    for v in vertical:
        v_scores[v.node] = v_scores.get(v.node, 0.0) + v.score
    entries = []
    for node in sorted(set(h_scores) | set(v_scores)):
        history = tuple(sorted(prior.get(node, []), reverse=True))
        entries.append(ReportEntry(
            node=node,
            horizontal_flag=node in h_scores,
            vertical_flag=node in v_scores,
            horizontal_score=h_scores.get(node),
            vertical_score=v_scores.get(node),
            history=history,
        ))
    return WindowReport(index=index, t_start=t_start, t_end=t_end, entries=entries)


def run(config: PipelineConfig, stream: EventStream) -> Dict[str, List[WindowReport]]:
    """One report series per configured detector, in window order."""
    t0 = floor_hour(stream.t_min)
    t1 = ceil_hour(stream.t_max + 1)
    windows = sliding_windows(t0, t1, config.width, config.step)
    arrays = _ProtocolArrays(stream)
    series: Dict[str, List[WindowReport]] = {d: [] for d in config.detectors}
    for w in windows:
        sl = window_slice(stream, w)
        active = tuple(sorted({r.node for r in sl}))
        for detector in config.detectors:
            hv, hw = horizontal_detect(stream, w, detector, cfg=config, slice_=sl)
            vv, vw = vertical_detect(stream, w, detector, cfg=config, arrays=arrays)
            report = amalgamate(hv, vv, series[detector], window=w)
            report.warnings = hw + vw
            report.active_nodes = active
            series[detector].append(report)
    return series


# ---------------------------------------------------------------------------
# Serialization

def report_to_dict(series: Dict[str, List[WindowReport]],
                   config: Optional[PipelineConfig] = None) -> dict:
    detectors = sorted(series)
    windows = []
    if detectors:
        n_windows = len(series[detectors[0]])
        for k in range(n_windows):
            ref = series[detectors[0]][k]
            entries = []
            warnings = []
            for det in detectors:
                rep = series[det][k]
                for e in rep.entries:
                    entries.append({
                        "detector": det, "node": e.node,
                        "h_flag": e.horizontal_flag, "v_flag": e.vertical_flag,
                        "h_score": e.horizontal_score, "v_score": e.vertical_score,
                        "history": list(e.history),
                    })
                warnings.extend({"detector": det, "message": m} for m in rep.warnings)
            windows.append({
                "index": ref.index, "t_start": ref.t_start, "t_end": ref.t_end,
                "active_nodes": list(ref.active_nodes),
                "entries": entries, "warnings": warnings,
            })
    doc = {"detectors": detectors, "windows": windows}
    if config is not None:
        doc["config"] = config.to_dict()
    return doc


def write_report_json(path, series: Dict[str, List[WindowReport]],
                      config: Optional[PipelineConfig] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(series, config), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_report_json(path) -> Tuple[dict, Dict[str, List[WindowReport]]]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    series: Dict[str, List[WindowReport]] = {d: [] for d in doc["detectors"]}
    for wdoc in doc["windows"]:
        per_det: Dict[str, WindowReport] = {
            d: WindowReport(index=wdoc["index"], t_start=wdoc["t_start"],
                            t_end=wdoc["t_end"],
                            active_nodes=tuple(wdoc["active_nodes"]))
            for d in series
        }
        for e in wdoc["entries"]:
            per_det[e["detector"]].entries.append(ReportEntry(
                node=e["node"], horizontal_flag=e["h_flag"],
                vertical_flag=e["v_flag"], horizontal_score=e["h_score"],
                vertical_score=e["v_score"], history=tuple(e["history"]),
            ))
        for wmsg in wdoc["warnings"]:
            per_det[wmsg["detector"]].warnings.append(wmsg["message"])
        for d in series:
            series[d].append(per_det[d])
    return doc.get("config", {}), series


def write_report_csv(path, reports: Sequence[WindowReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "node", "h_flag", "v_flag", "h_score", "v_score"])
        for rep in reports:
            for e in rep.entries:
                writer.writerow([
                    rep.index, e.node,
                    int(e.horizontal_flag), int(e.vertical_flag),
                    "" if e.horizontal_score is None else repr(e.horizontal_score),
                    "" if e.vertical_score is None else repr(e.vertical_score),
                ])
