import numpy as np
import pytest

from lanwatch.ingest import (ArpFeatures, EventStream, Protocol,
                             ProtocolRecord, TcpFeatures, UdpFeatures,
                             merge_streams)


def arp(t, node, count, degree):
    return ProtocolRecord(t, node, Protocol.ARP,
                          arp=ArpFeatures(count=count, degree=degree))


def tcp(t, node, num_ports=80, count=2, avg_len=6.0,
        flags=(0, 2, 0, 0, 0, 0, 1, 1)):
    fin, syn, rst, psh, ack, urg, ece, cwr = flags
    return ProtocolRecord(t, node, Protocol.TCP,
                          tcp=TcpFeatures(num_ports=num_ports, count=count,
                                          avg_len=avg_len, count_fin=fin,
                                          count_syn=syn, count_rst=rst,
                                          count_psh=psh, count_ack=ack,
                                          count_urg=urg, count_ece=ece,
                                          count_cwr=cwr))


def udp(t, node, num_ports=3702, count=2, avg_len=652.0):
    return ProtocolRecord(t, node, Protocol.UDP,
                          udp=UdpFeatures(num_ports=num_ports, count=count,
                                          avg_len=avg_len))


def stream_of(*records) -> EventStream:
    return merge_streams([list(records)])


@pytest.fixture
def rng():
    return np.random.default_rng(42)


SMALL_SCENARIO = """\
[scenario]
seed = 11
duration = 345600
n_benign = 10
benign_interarrival = 7200

[injection:scan]
archetype = scan_burst
node = X159
start = 180000
"""


@pytest.fixture
def small_scenario_file(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL_SCENARIO, encoding="utf-8")
    return path
