"""Homogenization, node behavior signatures and 2-component PCA.

A node's varying-dimensional record sequence is reshaped into fixed
8-column rows (timestamp, node, protocol, ARP count/degree, TCP PC1/PC2,
UDP PC1/PC2), then summarized into a 17-feature vector describing its
trajectory within one window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ingest import EventStream, Protocol, ProtocolRecord
from .windows import Window

SIGNATURE_NAMES = (
    "time_span", "n_protocols", "n_tcp", "n_udp",
    "path_len_r6",
    "path_len_arp", "arp_slope", "arp_intercept", "arp_sse",
    "path_len_tcp", "tcp_slope", "tcp_intercept", "tcp_sse",
    "path_len_udp", "udp_slope", "udp_intercept", "udp_sse",
)


@dataclass
class PcaModel:
    """Standardizing 2-component PCA. Degenerate models project to (0,0)."""

    mean: np.ndarray
    scale: np.ndarray
    components: np.ndarray     # 2 x d, orthonormal rows
    input_dim: int
    degenerate: bool = False


@dataclass(frozen=True)
class HomogenizedRow:
    timestamp: int
    node: str
    protocol: Protocol
    arp_count: float = 0.0
    arp_degree: float = 0.0
    tcp_pc1: float = 0.0
    tcp_pc2: float = 0.0
    udp_pc1: float = 0.0
    udp_pc2: float = 0.0

    def r6(self) -> Tuple[float, ...]:
        return (self.arp_count, self.arp_degree, self.tcp_pc1,
                self.tcp_pc2, self.udp_pc1, self.udp_pc2)


@dataclass
class NodeSignature:
    node: str
    window: Window
    f: np.ndarray = field(default_factory=lambda: np.zeros(17))

    def named(self) -> Dict[str, float]:
        return dict(zip(SIGNATURE_NAMES, self.f.tolist()))


def fit_pca2(points: np.ndarray) -> PcaModel:
    """Top-2 PCA of column-standardized data with a deterministic sign.

    Zero-variance columns get unit scale so they contribute nothing after
    centering. With fewer than 2 samples, or no varying column at all,
    the model is degenerate and projects everything to the origin.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("need an n x d matrix with d >= 2")
    n, d = x.shape
    if n < 1:
        raise ValueError("need at least one point")
    mean = x.mean(axis=0)
    if n < 2:
        return PcaModel(mean, np.ones(d), np.zeros((2, d)), d, degenerate=True)
    scale = x.std(axis=0, ddof=1)
    varying = scale > 0
    scale = np.where(varying, scale, 1.0)
    if not varying.any():
        return PcaModel(mean, scale, np.zeros((2, d)), d, degenerate=True)
    z = (x - mean) / scale
    cov = (z.T @ z) / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:2]
    comps = evecs[:, order].T.copy()
    for row in comps:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1
    return PcaModel(mean, scale, comps, d)


def project_pca2(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """PC scores for one d-vector or an n x d batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != model.input_dim:
        raise ValueError(f"expected dimension {model.input_dim}, got {pts.shape[1]}")
    if model.degenerate:
        out = np.zeros((pts.shape[0], 2))
    else:
        out = ((pts - model.mean) / model.scale) @ model.components.T
    return out[0] if single else out


def homogenize(stream: EventStream, tcp_model: PcaModel,
               udp_model: PcaModel) -> Dict[str, List[HomogenizedRow]]:
    """Reshape records into per-node 8-column rows, grouped and time-sorted.

    Exactly one protocol block per row is populated; the other two stay
    zero. ARP keeps its raw count/degree, TCP and UDP carry PC scores.
    """
    rows: Dict[str, List[HomogenizedRow]] = {}
    for rec in stream:
        if rec.protocol is Protocol.ARP:
            row = HomogenizedRow(rec.timestamp, rec.node, rec.protocol,
                                 arp_count=float(rec.arp.count),
                                 arp_degree=float(rec.arp.degree))
        elif rec.protocol is Protocol.TCP:
            pc = project_pca2(tcp_model, np.array(rec.tcp.numeric()))
            row = HomogenizedRow(rec.timestamp, rec.node, rec.protocol,
                                 tcp_pc1=float(pc[0]), tcp_pc2=float(pc[1]))
        else:
            pc = project_pca2(udp_model, np.array(rec.udp.numeric()))
            row = HomogenizedRow(rec.timestamp, rec.node, rec.protocol,
                                 udp_pc1=float(pc[0]), udp_pc2=float(pc[1]))
        rows.setdefault(rec.node, []).append(row)
    # The stream is already time-sorted, so each per-node list is too.
    return rows


def path_length(points: Sequence[Sequence[float]]) -> float:
    """Total Euclidean length of the segments joining successive points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim < 2 or pts.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def fit_line(points: Sequence[Tuple[float, float]]) -> Tuple[float, float, float]:
    """Least-squares line y = m*x + c and its SSE.

    Fewer than 2 points gives (0, 0, 0). If all x coincide the slope is
    forced to 0 with c = mean(y).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim < 2 or pts.shape[0] < 2:
        return 0.0, 0.0, 0.0
    x = pts[:, 0]
    y = pts[:, 1]
    n = len(x)
    denom = n * np.sum(x * x) - np.sum(x) ** 2
    if denom <= 0:
        c = float(np.mean(y))
        return 0.0, c, float(np.sum((y - c) ** 2))
    m = (n * np.sum(x * y) - np.sum(x) * np.sum(y)) / denom
    c = (np.sum(y) - m * np.sum(x)) / n
    sse = float(np.sum((m * x + c - y) ** 2))
    return float(m), float(c), sse


def metamorphose(rows: Sequence[HomogenizedRow], w: Window) -> NodeSignature:
    """Collapse one node's windowed rows into its 17-feature signature."""
    if not rows:
        raise ValueError("cannot summarize an empty row sequence")
    node = rows[0].node
    ts = np.array([r.timestamp for r in rows], dtype=float)
    f = np.zeros(17)
    f[0] = ts.max() - ts.min()
    f[1] = len({r.protocol for r in rows})
    f[2] = sum(1 for r in rows if r.protocol is Protocol.TCP)
    f[3] = sum(1 for r in rows if r.protocol is Protocol.UDP)
    f[4] = path_length([r.r6() for r in rows])
    for base, proto, cols in (
        (5, Protocol.ARP, ("arp_count", "arp_degree")),
        (9, Protocol.TCP, ("tcp_pc1", "tcp_pc2")),
        (13, Protocol.UDP, ("udp_pc1", "udp_pc2")),
    ):
        pts = [(getattr(r, cols[0]), getattr(r, cols[1]))
               for r in rows if r.protocol is proto]
        if not pts:
            continue
        f[base] = path_length(pts)
        f[base + 1], f[base + 2], f[base + 3] = fit_line(pts)
    return NodeSignature(node=node, window=w, f=f)


def window_signatures(stream: EventStream, w: Window) -> Dict[str, NodeSignature]:
    """Signatures for every node present in the slice.

    The TCP/UDP PCA models are fit on this slice alone; a window never
    sees data outside itself.
    """
    if not stream.records:
        return {}
    tcp_pts = [r.tcp.numeric() for r in stream if r.protocol is Protocol.TCP]
    udp_pts = [r.udp.numeric() for r in stream if r.protocol is Protocol.UDP]
    tcp_model = fit_pca2(np.array(tcp_pts)) if tcp_pts else _degenerate_model(11)
    udp_model = fit_pca2(np.array(udp_pts)) if udp_pts else _degenerate_model(3)
    grouped = homogenize(stream, tcp_model, udp_model)
    return {node: metamorphose(rows, w) for node, rows in grouped.items()}


def _degenerate_model(dim: int) -> PcaModel:
    return PcaModel(np.zeros(dim), np.ones(dim), np.zeros((2, dim)), dim,
                    degenerate=True)


def signature_matrix(signatures: Dict[str, NodeSignature]) -> Tuple[List[str], np.ndarray]:
    """Stack signatures into (sorted node list, n x 17 matrix)."""
    nodes = sorted(signatures)
    if not nodes:
        return [], np.zeros((0, 17))
    return nodes, np.vstack([signatures[n].f for n in nodes])
