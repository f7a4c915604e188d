import pytest

from lanwatch import synth
from lanwatch.errors import ScenarioError
from lanwatch.ingest import Protocol, honeypot_positives


def small_spec(**kw):
    defaults = dict(seed=5, duration=3 * 86400, n_benign=6,
                    benign_interarrival=7200)
    defaults.update(kw)
    return synth.ScenarioSpec(**defaults)


def test_benign_is_arp_only_and_valid():
    stream = synth.gen_benign(small_spec())
    assert len(stream) > 0
    for rec in stream:
        assert rec.protocol is Protocol.ARP
        assert 1 <= rec.arp.count <= 5
        assert 1 <= rec.arp.degree <= rec.arp.count
        assert 0 <= rec.timestamp < 3 * 86400
    assert honeypot_positives(stream) == {}


def test_benign_deterministic():
    a = synth.gen_benign(small_spec())
    b = synth.gen_benign(small_spec())
    assert a == b


def test_benign_seed_changes_output():
    a = synth.gen_benign(small_spec(seed=5))
    b = synth.gen_benign(small_spec(seed=6))
    assert a != b


def test_scan_burst_contact_time():
    base = synth.gen_benign(small_spec())
    stream, labels = synth.inject(base, synth.Archetype.SCAN_BURST, {},
                                  seed=5, node="X1", start=1000)
    lab = labels["X1"]
    spike = 1000 + 9 * 60
    assert lab.first_contact == spike + 5
    assert honeypot_positives(stream)["X1"] == lab.first_contact
    spikes = [r for r in stream if r.node == "X1" and r.protocol is Protocol.ARP
              and r.arp.count > 1000]
    assert len(spikes) == 1
    assert (spikes[0].arp.count, spikes[0].arp.degree) == (6760, 3384)


def test_multi_port_probe_flags():
    base = synth.gen_benign(small_spec())
    stream, labels = synth.inject(base, synth.Archetype.MULTI_PORT_PROBE, {},
                                  seed=5, node="X2", start=2000)
    tcp_recs = [r for r in stream if r.node == "X2" and r.protocol is Protocol.TCP]
    assert len(tcp_recs) == 3
    for r in tcp_recs:
        assert r.tcp.count_psh > 0 and r.tcp.count_urg > 0
    assert labels["X2"].first_contact is not None


def test_quiet_archetypes_never_contact():
    base = synth.gen_benign(small_spec())
    for arch in (synth.Archetype.CHATTY_NODE, synth.Archetype.SUSTAINED_COUNT):
        stream, labels = synth.inject(base, arch, {"span": 7200}, seed=5,
                                      node="X3", start=0)
        assert labels["X3"].first_contact is None
        assert all(r.protocol is Protocol.ARP
                   for r in stream if r.node == "X3")


def test_chatty_record_count():
    base = synth.gen_benign(small_spec())
    stream, _ = synth.inject(base, synth.Archetype.CHATTY_NODE,
                             {"cadence": 600, "span": 86400}, seed=5,
                             node="X4", start=0)
    n = sum(1 for r in stream if r.node == "X4")
    assert n == 86400 // 600


def test_sustained_counts_high():
    base = synth.gen_benign(small_spec())
    stream, _ = synth.inject(base, synth.Archetype.SUSTAINED_COUNT,
                             {"cadence": 60, "span": 3600}, seed=5,
                             node="X5", start=100)
    counts = [r.arp.count for r in stream if r.node == "X5"]
    assert len(counts) == 60
    assert all(110 <= c <= 130 for c in counts)


def test_injection_outside_duration_rejected():
    with pytest.raises(ScenarioError):
        small_spec(injections=[synth.Injection(
            synth.Archetype.CHATTY_NODE, "X", 10 * 86400)])


def test_parse_scenario_and_overrides():
    text = ("[scenario]\nseed = 3\nduration = 86400\nn_benign = 2\n"
            "[injection:a]\narchetype = chatty_node\nnode = X9\nstart = 0\n"
            "cadence = 300\nspan = 3600\n")
    spec = synth.parse_scenario(text)
    assert (spec.seed, spec.n_benign) == (3, 2)
    (inj,) = spec.injections
    assert inj.params == {"cadence": 300.0, "span": 3600.0}
    assert synth.parse_scenario(text, seed_override=99).seed == 99


@pytest.mark.parametrize("text,msg", [
    ("[injection:a]\narchetype = chatty_node\nnode = X\nstart = 0\n",
     "scenario"),
    ("[scenario]\nseed = 1\n[injection:a]\narchetype = wormhole\nnode = X\n"
     "start = 0\n", "archetype"),
    ("[scenario]\nseed = 1\n[injection:a]\narchetype = chatty_node\n"
     "start = 0\n", "node"),
    ("[scenario]\nseed = 1\n[extras]\nfoo = 1\n", "section"),
])
def test_parse_scenario_errors(text, msg):
    with pytest.raises(ScenarioError, match=msg):
        synth.parse_scenario(text)


def test_bundled_scenario_loads():
    spec = synth.load_scenario("paper-archetypes")
    assert spec.n_benign == 50
    assert spec.duration == 30 * 86400
    assert {i.archetype for i in spec.injections} == set(synth.Archetype)


def test_outputs_and_labels_round_trip(tmp_path):
    spec = small_spec(injections=[synth.Injection(
        synth.Archetype.SCAN_BURST, "X1", 1000)])
    stream, labels = synth.build_scenario(spec)
    synth.write_scenario_outputs(tmp_path, stream, labels)
    for name in ("arp.csv", "tcp.csv", "udp.csv", "labels.csv"):
        assert (tmp_path / name).exists()
    back = synth.load_labels(tmp_path / "labels.csv")
    assert back == labels
