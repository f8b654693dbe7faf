import pytest

from wbancast.errors import ConfigError
from wbancast.topology import BODY_LABELS, load_topology


def test_default_body():
    t = load_topology()
    assert t.node_ids == list(range(7))
    assert t.sink == 0
    assert t.sources == frozenset(range(1, 7))
    assert t.label(4) == BODY_LABELS[4] == "ankle"


def test_sink_moves_sources():
    t = load_topology({"sink": 1})
    assert t.sources == frozenset({0, 2, 3, 4, 5, 6})


def test_out_of_range_node():
    with pytest.raises(ConfigError, match="outside declared range"):
        load_topology({"nodes": [0, 1, 2, 3, 4, 5, 7], "size": 7})


@pytest.mark.parametrize("cfg, msg", [
    ({"sink": 9}, "sink 9"),
    ({"nodes": {0: "a", 1: "a"}}, "duplicate node labels"),
    ({"sources": [8]}, "not topology nodes"),
    ({"sources": [0, 1]}, "sink cannot"),
])
def test_rejects(cfg, msg):
    with pytest.raises(ConfigError, match=msg):
        load_topology(cfg)


def test_explicit_sources_and_purity():
    cfg = {"nodes": [0, 1, 2], "sink": 2, "sources": [0]}
    assert load_topology(cfg) == load_topology(dict(cfg))
    assert load_topology(cfg).sources == frozenset({0})
