"""Parsing and merging of per-protocol feature logs.

Each protocol file is a UTF-8 CSV with a fixed header. Records from all
files are merged into a single time-ordered :class:`EventStream`, from
which honeypot-access ground truth can be derived: TCP/UDP records exist
only for traffic aimed at the honeypot, so any node with such a record
is a known positive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyStreamError, ParseError, SchemaError, ValidationError


class Protocol(str, Enum):
    ARP = "ARP"
    TCP = "TCP"
    UDP = "UDP"


ARP_COLUMNS = ["timestamp", "node", "count", "degree"]
TCP_COLUMNS = [
    "timestamp", "node", "num_ports", "count", "avg_len",
    "count_fin", "count_syn", "count_rst", "count_psh",
    "count_ack", "count_urg", "count_ece", "count_cwr",
]
UDP_COLUMNS = ["timestamp", "node", "num_ports", "count", "avg_len"]

_COLUMNS = {Protocol.ARP: ARP_COLUMNS, Protocol.TCP: TCP_COLUMNS, Protocol.UDP: UDP_COLUMNS}

# Order of the numeric attribute vectors handed to PCA.
TCP_NUMERIC_FIELDS = TCP_COLUMNS[2:]
UDP_NUMERIC_FIELDS = UDP_COLUMNS[2:]


@dataclass(frozen=True)
class ArpFeatures:
    count: int
    degree: int


@dataclass(frozen=True)
class TcpFeatures:
    num_ports: int
    count: int
    avg_len: float
    count_fin: int
    count_syn: int
    count_rst: int
    count_psh: int
    count_ack: int
    count_urg: int
    count_ece: int
    count_cwr: int

    def numeric(self) -> Tuple[float, ...]:
        return (self.num_ports, self.count, self.avg_len,
                self.count_fin, self.count_syn, self.count_rst,
                self.count_psh, self.count_ack, self.count_urg,
                self.count_ece, self.count_cwr)


@dataclass(frozen=True)
class UdpFeatures:
    num_ports: int
    count: int
    avg_len: float

    def numeric(self) -> Tuple[float, ...]:
        return (self.num_ports, self.count, self.avg_len)


@dataclass(frozen=True)
class ProtocolRecord:
    """One timestamped observation from one node under one protocol."""

    timestamp: int
    node: str
    protocol: Protocol
    arp: Optional[ArpFeatures] = None
    tcp: Optional[TcpFeatures] = None
    udp: Optional[UdpFeatures] = None

    def __post_init__(self):
        blocks = {Protocol.ARP: self.arp, Protocol.TCP: self.tcp, Protocol.UDP: self.udp}
        present = [p for p, b in blocks.items() if b is not None]
        if present != [self.protocol]:
            raise ValidationError(
                f"record must carry exactly the {self.protocol.value} feature block"
            )
        block = blocks[self.protocol]
        for name, value in vars(block).items():
            if value < 0:
                raise ValidationError(f"{name} must be non-negative, got {value}")
        if self.arp is not None and self.arp.degree > self.arp.count:
            raise ValidationError(
                f"degree {self.arp.degree} exceeds count {self.arp.count}"
            )

    def sort_key(self) -> Tuple[int, str, str]:
        return (self.timestamp, self.node, self.protocol.value)


class EventStream:
    """Immutable, time-ordered sequence of protocol records.

    Records are sorted by (timestamp, node, protocol). Numpy views of the
    timestamps are cached so window slicing stays cheap.
    """

    def __init__(self, records: Sequence[ProtocolRecord]):
        self.records: Tuple[ProtocolRecord, ...] = tuple(records)
        self._timestamps: Optional[np.ndarray] = None
        if self.records:
            self.t_min = self.records[0].timestamp
            self.t_max = self.records[-1].timestamp
        else:
            self.t_min = None
            self.t_max = None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other):
        return isinstance(other, EventStream) and self.records == other.records

    @property
    def timestamps(self) -> np.ndarray:
        if self._timestamps is None:
            self._timestamps = np.array([r.timestamp for r in self.records], dtype=np.int64)
        return self._timestamps

    def nodes(self) -> List[str]:
        return sorted({r.node for r in self.records})


def _parse_int(value: str, column: str, row: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise ParseError(f"row {row}: column {column!r}: not an integer: {value!r}", row=row)


def _parse_float(value: str, column: str, row: int) -> float:
    try:
        return float(value.strip())
    except ValueError:
        raise ParseError(f"row {row}: column {column!r}: not a number: {value!r}", row=row)


def parse_protocol_csv(path, protocol: Protocol) -> List[ProtocolRecord]:
    """Parse one protocol CSV into validated records, preserving row order."""
    expected = _COLUMNS[protocol]
    records: List[ProtocolRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {','.join(expected)}")
        header = [h.strip() for h in header]
        if header != expected:
            missing = [c for c in expected if c not in header]
            extra = [c for c in header if c not in expected]
            detail = []
            if missing:
                detail.append(f"missing column(s) {missing}")
            if extra:
                detail.append(f"unexpected column(s) {extra}")
            if not detail:
                detail.append(f"column order must be {expected}")
            raise SchemaError(f"{path}: {'; '.join(detail)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(expected):
                raise SchemaError(
                    f"{path}: row {lineno}: expected {len(expected)} fields, got {len(row)}"
                )
            ts = _parse_int(row[0], "timestamp", lineno)
            node = row[1].strip()
            try:
                records.append(_build_record(ts, node, protocol, row, lineno))
            except ValidationError as exc:
                raise ValidationError(f"{path}: row {lineno}: {exc}", row=lineno) from exc
    return records


def _build_record(ts: int, node: str, protocol: Protocol,
                  row: Sequence[str], lineno: int) -> ProtocolRecord:
    if protocol is Protocol.ARP:
        arp = ArpFeatures(
            count=_parse_int(row[2], "count", lineno),
            degree=_parse_int(row[3], "degree", lineno),
        )
        return ProtocolRecord(ts, node, protocol, arp=arp)
    if protocol is Protocol.TCP:
        ints = {c: _parse_int(v, c, lineno)
                for c, v in zip(TCP_COLUMNS[2:], row[2:]) if c != "avg_len"}
        tcp = TcpFeatures(avg_len=_parse_float(row[4], "avg_len", lineno), **ints)
        return ProtocolRecord(ts, node, protocol, tcp=tcp)
    udp = UdpFeatures(
        num_ports=_parse_int(row[2], "num_ports", lineno),
        count=_parse_int(row[3], "count", lineno),
        avg_len=_parse_float(row[4], "avg_len", lineno),
    )
    return ProtocolRecord(ts, node, protocol, udp=udp)


def merge_streams(parts: Iterable[Sequence[ProtocolRecord]]) -> EventStream:
    """Merge per-protocol record lists into one sorted stream.

    Sorting is stable, so duplicate (timestamp, node, protocol) keys keep
    their input order.
    """
    merged: List[ProtocolRecord] = []
    for part in parts:
        merged.extend(part)
    if not merged:
        raise EmptyStreamError("no records to merge")
    merged.sort(key=ProtocolRecord.sort_key)
    return EventStream(merged)


def honeypot_positives(stream: EventStream) -> Dict[str, int]:
    """Earliest honeypot-contact time per node.

    TCP/UDP records are captured only when directed at the honeypot, so
    the nodes holding at least one such record are exactly the positives.
    """
    earliest: Dict[str, int] = {}
    for rec in stream:
        if rec.protocol is Protocol.ARP:
            continue
        prev = earliest.get(rec.node)
        if prev is None or rec.timestamp < prev:
            earliest[rec.node] = rec.timestamp
    return earliest


def serialize_record(rec: ProtocolRecord) -> List[str]:
    """Render a record back to its CSV field list."""
    if rec.protocol is Protocol.ARP:
        return [str(rec.timestamp), rec.node, str(rec.arp.count), str(rec.arp.degree)]
    if rec.protocol is Protocol.TCP:
        t = rec.tcp
        return [str(rec.timestamp), rec.node, str(t.num_ports), str(t.count),
                repr(t.avg_len), str(t.count_fin), str(t.count_syn), str(t.count_rst),
                str(t.count_psh), str(t.count_ack), str(t.count_urg),
                str(t.count_ece), str(t.count_cwr)]
    u = rec.udp
    return [str(rec.timestamp), rec.node, str(u.num_ports), str(u.count), repr(u.avg_len)]


def write_protocol_csv(path, protocol: Protocol, records: Sequence[ProtocolRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COLUMNS[protocol])
        for rec in records:
            if rec.protocol is protocol:
                writer.writerow(serialize_record(rec))
