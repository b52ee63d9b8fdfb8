import math

import pytest

from sodfeeder.corridor import CorridorSpec, Segment, build_corridor

from oracles import bellman_ford_time


def test_default_node_count(net):
    # mainline: terminus + 28 nodes at 200 m spacing up to 5600 m
    assert len(net.mainline_nodes) == 29
    # each non-terminus mainline node gets a stub: 300 m deep, nodes at
    # 150 m and 300 m
    assert net.n_nodes == 29 + 28 * 2


def test_segment_labels(net):
    for nid in range(net.n_nodes):
        x = net.coords[nid][0]
        if x <= 1200:
            assert net.labels[nid] == Segment.FIXED
        elif x <= 3400:
            assert net.labels[nid] == Segment.ZONE1
        else:
            assert net.labels[nid] == Segment.ZONE2


def test_terminus_is_node_zero(net):
    assert net.terminus == 0
    assert net.coords[0] == (0.0, 0.0)


def test_mainline_travel_time_hand_check(net):
    # 5600 m of mainline at 9 m/s
    end = net.nearest_mainline_node(5600)
    assert net.travel_time(0, end) == pytest.approx(5600 / 9.0)
    assert net.travel_distance(0, end) == pytest.approx(5600.0)


def test_side_street_travel_time_hand_check(net):
    # deepest node of the first stub: 200 m mainline + 300 m side street
    base = net.nearest_mainline_node(200)
    stub = [n for n in range(net.n_nodes)
            if net.coords[n][0] == 200.0 and net.coords[n][1] == 300.0]
    assert len(stub) == 1
    expect = 200 / 9.0 + 300 / 5.0
    assert net.travel_time(0, stub[0]) == pytest.approx(expect)


def test_times_match_bellman_ford(net):
    for src in [0, 7, net.n_nodes - 1, 40]:
        oracle = bellman_ford_time(net, src)
        for dst in range(net.n_nodes):
            assert net.travel_time(src, dst) == pytest.approx(
                oracle[dst], abs=1e-9)


def test_travel_time_symmetric(net):
    for a, b in [(0, 30), (12, 60), (5, 84)]:
        assert net.travel_time(a, b) == pytest.approx(net.travel_time(b, a))


def test_shortest_path_endpoints_and_consistency(net):
    res = net.shortest_path(0, 50)
    assert res.nodes[0] == 0 and res.nodes[-1] == 50
    # recompute time/distance along the returned node sequence
    t = d = 0.0
    for u, v in zip(res.nodes, res.nodes[1:]):
        edge = {w: (et, el) for w, et, el in net.adj[u]}[v]
        t += edge[0]
        d += edge[1]
    assert t == pytest.approx(res.time)
    assert d == pytest.approx(res.distance)


def test_deterministic_rebuild(net):
    other = build_corridor()
    assert other.coords == net.coords
    assert other.labels == net.labels
    for u in range(net.n_nodes):
        assert other.adj[u] == net.adj[u]


def test_walk_time_euclidean(net):
    base = net.nearest_mainline_node(400)
    assert net.walk_time(0, base, 1.25) == pytest.approx(400 / 1.25)
    # walk time to the mainline only depends on y
    deep = [n for n in range(net.n_nodes)
            if net.coords[n][0] == 400.0 and net.coords[n][1] == 300.0][0]
    assert net.walk_time_to_mainline(deep, 1.25) == pytest.approx(300 / 1.25)
    assert net.walk_time_to_mainline(base, 1.25) == 0.0


def test_walk_time_triangle_inequality(net):
    for a, b, c in [(0, 10, 20), (3, 44, 60)]:
        ab = net.walk_time(a, b, 1.25)
        bc = net.walk_time(b, c, 1.25)
        ac = net.walk_time(a, c, 1.25)
        assert ac <= ab + bc + 1e-9


def test_nearest_mainline_node(net):
    assert net.nearest_mainline_node(0) == 0
    n = net.nearest_mainline_node(1201)
    assert net.coords[n][0] == pytest.approx(1200.0)


def test_unknown_node_raises(net):
    with pytest.raises(KeyError):
        net.travel_time(0, net.n_nodes + 5)


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        CorridorSpec(segment_lengths=(1000.0, 1000.0, 1000.0)).validate()
    with pytest.raises(ValueError):
        CorridorSpec(mainline_speed=0.0).validate()


def test_pure_linear_network():
    spec = CorridorSpec(side_depth=0.0)
    net = build_corridor(spec)
    assert net.n_nodes == len(net.mainline_nodes)


def test_dump_csv(tmp_path, net):
    nodes, edges = tmp_path / "nodes.csv", tmp_path / "edges.csv"
    net.dump_csv(nodes, edges)
    lines = nodes.read_text().strip().splitlines()
    assert len(lines) == net.n_nodes + 1
    assert lines[0] == "id,x,y,segment,is_mainline"
