"""Deterministic synthetic LAN-trace generator with labeled anomalies.

Benign nodes emit only small ARP broadcasts (they never touch the
honeypot, so they have no TCP/UDP records). Injected archetypes mirror
observed suspicious behaviors: an ARP scan burst followed by honeypot
contact, a multi-port probe raising PSH/URG flags, a node chattering
tiny ARP requests constantly, and a node sustaining high ARP counts.
"""

from __future__ import annotations

import configparser
import zlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ScenarioError
from .ingest import (ArpFeatures, EventStream, Protocol, ProtocolRecord,
                     TcpFeatures, UdpFeatures, merge_streams,
                     write_protocol_csv)


class Archetype(str, Enum):
    SCAN_BURST = "scan_burst"
    MULTI_PORT_PROBE = "multi_port_probe"
    CHATTY_NODE = "chatty_node"
    SUSTAINED_COUNT = "sustained_count"


@dataclass
class Injection:
    archetype: Archetype
    node: str
    start: int
    params: Dict[str, float] = field(default_factory=dict)


@dataclass
class ScenarioSpec:
    seed: int = 0
    duration: int = 30 * 86400
    n_benign: int = 50
    benign_interarrival: int = 21600
    injections: List[Injection] = field(default_factory=list)

    def __post_init__(self):
        for inj in self.injections:
            if not 0 <= inj.start < self.duration:
                raise ScenarioError(
                    f"injection {inj.node}: start {inj.start} outside duration"
                )


@dataclass
class Label:
    node: str
    archetype: Archetype
    first_contact: Optional[int]      # None when the node never contacts


def _arp(t: int, node: str, count: int, degree: int) -> ProtocolRecord:
    return ProtocolRecord(int(t), node, Protocol.ARP,
                          arp=ArpFeatures(count=int(count), degree=int(degree)))


def gen_benign(spec: ScenarioSpec) -> EventStream:
    """Jittered-Poisson ARP chatter for every benign node, seeded per node."""
    records: List[ProtocolRecord] = []
    for i in range(spec.n_benign):
        rng = np.random.default_rng([spec.seed, i])
        node = f"B{i:03d}"
        t = float(rng.exponential(spec.benign_interarrival))
        while t < spec.duration:
            count = int(rng.integers(1, 6))
            degree = int(rng.integers(1, count + 1))
            records.append(_arp(int(t), node, count, degree))
            hour = (int(t) // 3600) % 24
            slowdown = 1.0 if 8 <= hour < 20 else 2.5   # quieter nights
            t += rng.exponential(spec.benign_interarrival * slowdown)
    if not records:
        return EventStream(())
    return merge_streams([records])


def _innocuous_arp(node: str, start: int, minutes: int, rng) -> List[ProtocolRecord]:
    out = []
    for k in range(minutes):
        count = int(rng.integers(1, 4))
        out.append(_arp(start + 60 * k, node, count, int(rng.integers(1, count + 1))))
    return out


def _gen_scan_burst(node: str, start: int, rng, p: Dict) -> Tuple[List[ProtocolRecord], Optional[int]]:
    count = int(p.get("count", 6760))
    degree = int(p.get("degree", 3384))
    udp_ports = int(p.get("udp_ports", 32))
    tcp_ports = int(p.get("tcp_ports", 999))
    minutes = int(p.get("innocuous_minutes", 9))
    recs = _innocuous_arp(node, start, minutes, rng)
    t_spike = start + 60 * minutes
    recs.append(_arp(t_spike, node, count, degree))
    t_contact = t_spike + 5
    recs.append(ProtocolRecord(t_contact, node, Protocol.UDP,
                               udp=UdpFeatures(num_ports=udp_ports,
                                               count=udp_ports * 2,
                                               avg_len=120.0)))
    recs.append(ProtocolRecord(t_contact + 3600, node, Protocol.TCP,
                               tcp=TcpFeatures(num_ports=tcp_ports,
                                               count=tcp_ports + 200,
                                               avg_len=60.0,
                                               count_fin=0, count_syn=tcp_ports,
                                               count_rst=0, count_psh=0,
                                               count_ack=5, count_urg=0,
                                               count_ece=0, count_cwr=0)))
    return recs, t_contact


def _gen_multi_port_probe(node: str, start: int, rng, p: Dict) -> Tuple[List[ProtocolRecord], Optional[int]]:
    arp_count = int(p.get("arp_count", 22558))
    arp_degree = int(p.get("arp_degree", 4416))
    tcp_ports = int(p.get("tcp_ports", 500))
    n_spikes = int(p.get("n_spikes", 5))
    recs = _innocuous_arp(node, start, 5, rng)
    t = start + 300
    for _ in range(n_spikes):
        c = int(arp_count * rng.uniform(0.8, 1.0))
        d = min(int(arp_degree * rng.uniform(0.8, 1.0)), c)
        recs.append(_arp(t, node, c, d))
        t += 60
    t_contact = t + 5
    for k in range(3):
        recs.append(ProtocolRecord(t_contact + 5 * k, node, Protocol.TCP,
                                   tcp=TcpFeatures(num_ports=tcp_ports,
                                                   count=tcp_ports * 2,
                                                   avg_len=80.0,
                                                   count_fin=0, count_syn=tcp_ports,
                                                   count_rst=0,
                                                   count_psh=tcp_ports,
                                                   count_ack=10,
                                                   count_urg=tcp_ports // 2,
                                                   count_ece=0, count_cwr=0)))
    recs.append(ProtocolRecord(t_contact + 20, node, Protocol.UDP,
                               udp=UdpFeatures(num_ports=tcp_ports // 10,
                                               count=tcp_ports // 5,
                                               avg_len=200.0)))
    return recs, t_contact


def _gen_chatty(node: str, start: int, rng, p: Dict) -> Tuple[List[ProtocolRecord], Optional[int]]:
    cadence = int(p.get("cadence", 600))
    span = int(p.get("span", 7 * 86400))
    recs = []
    n = span // cadence
    jitter = max(1, cadence // 5)
    for k in range(n):
        t = start + k * cadence + int(rng.integers(0, jitter))
        count = int(rng.integers(1, 4))
        recs.append(_arp(t, node, count, int(rng.integers(1, count + 1))))
    return recs, None


def _gen_sustained(node: str, start: int, rng, p: Dict) -> Tuple[List[ProtocolRecord], Optional[int]]:
    cadence = int(p.get("cadence", 60))
    span = int(p.get("span", 21600))
    base_count = int(p.get("count", 110))
    recs = []
    for k in range(span // cadence):
        count = base_count + int(rng.integers(0, 21))
        recs.append(_arp(start + k * cadence, node, count, int(rng.integers(1, 6))))
    return recs, None


_GENERATORS = {
    Archetype.SCAN_BURST: _gen_scan_burst,
    Archetype.MULTI_PORT_PROBE: _gen_multi_port_probe,
    Archetype.CHATTY_NODE: _gen_chatty,
    Archetype.SUSTAINED_COUNT: _gen_sustained,
}


def inject(stream: EventStream, archetype: Archetype, params: Dict,
           seed: int, node: str = "X001", start: int = 0
           ) -> Tuple[EventStream, Dict[str, Label]]:
    """Add one anomalous node to a stream; returns the new stream and label."""
    if archetype not in _GENERATORS:
        raise ScenarioError(f"unknown archetype {archetype!r}")
    rng = np.random.default_rng([seed, zlib.crc32(node.encode("utf-8"))])
    recs, first_contact = _GENERATORS[archetype](node, start, rng, params)
    merged = merge_streams([list(stream.records), recs])
    return merged, {node: Label(node=node, archetype=archetype,
                                first_contact=first_contact)}


def build_scenario(spec: ScenarioSpec) -> Tuple[EventStream, Dict[str, Label]]:
    """Benign background plus every configured injection."""
    stream = gen_benign(spec)
    labels: Dict[str, Label] = {}
    for inj in spec.injections:
        stream, lab = inject(stream, inj.archetype, inj.params, spec.seed,
                             node=inj.node, start=inj.start)
        labels.update(lab)
    return stream, labels


# ---------------------------------------------------------------------------
# Scenario files (INI: one [scenario] section plus [injection:<name>] sections)

_SCENARIO_KEYS = {"seed", "duration", "n_benign", "benign_interarrival"}


def parse_scenario(text: str, seed_override: Optional[int] = None) -> ScenarioSpec:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    if "scenario" not in parser:
        raise ScenarioError("missing [scenario] section")
    sc = parser["scenario"]
    try:
        spec_kwargs = {k: sc.getint(k) for k in _SCENARIO_KEYS if k in sc}
    except ValueError as exc:
        raise ScenarioError(f"[scenario]: {exc}") from exc
    injections = []
    for section in parser.sections():
        if not section.startswith("injection:"):
            if section != "scenario":
                raise ScenarioError(f"unexpected section [{section}]")
            continue
        body = parser[section]
        try:
            archetype = Archetype(body.get("archetype", ""))
        except ValueError:
            raise ScenarioError(
                f"[{section}]: unknown archetype {body.get('archetype')!r}"
            )
        node = body.get("node")
        if not node:
            raise ScenarioError(f"[{section}]: missing node")
        try:
            start = body.getint("start")
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"[{section}]: bad start: {exc}") from exc
        if start is None:
            raise ScenarioError(f"[{section}]: missing start")
        params = {}
        for key in body:
            if key in ("archetype", "node", "start"):
                continue
            try:
                params[key] = float(body[key])
            except ValueError as exc:
                raise ScenarioError(f"[{section}]: bad value for {key}") from exc
        injections.append(Injection(archetype=archetype, node=node,
                                    start=start, params=params))
    spec_kwargs["injections"] = injections
    if seed_override is not None:
        spec_kwargs["seed"] = seed_override
    return ScenarioSpec(**spec_kwargs)


def load_scenario(path, seed_override: Optional[int] = None) -> ScenarioSpec:
    name = str(path)
    if name == "paper-archetypes":
        from importlib import resources
        text = (resources.files("lanwatch") / "scenarios" /
                "paper-archetypes.ini").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_scenario(text, seed_override)


def write_scenario_outputs(outdir, stream: EventStream,
                           labels: Dict[str, Label]) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for protocol, fname in ((Protocol.ARP, "arp.csv"), (Protocol.TCP, "tcp.csv"),
                            (Protocol.UDP, "udp.csv")):
        write_protocol_csv(outdir / fname, protocol, stream.records)
    with open(outdir / "labels.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("node,archetype,first_contact\n")
        for node in sorted(labels):
            lab = labels[node]
            fc = "" if lab.first_contact is None else str(lab.first_contact)
            fh.write(f"{node},{lab.archetype.value},{fc}\n")


def load_labels(path) -> Dict[str, Label]:
    labels: Dict[str, Label] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "node,archetype,first_contact":
            raise ScenarioError(f"{path}: unexpected labels header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            node, archetype, fc = line.split(",")
            labels[node] = Label(node=node, archetype=Archetype(archetype),
                                 first_contact=int(fc) if fc else None)
    return labels
