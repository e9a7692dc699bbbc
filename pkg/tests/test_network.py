import math

import numpy as np
import pytest

from fundnet import (NetworkError, asset_degree, build_network, fund_degree, portfolio_weights,
                     read_edges, snapshot_stats, write_edges, write_snapshot)
from fundnet.network import build_network_arrays

from conftest import random_network


def test_build_toy(toy):
    assert (toy.n_funds, toy.n_assets, toy.n_edges) == (2, 2, 3)
    assert toy.total_value == 200
    assert toy.fund_size[toy.fund_index("F1")] == 100
    assert toy.asset_value[toy.asset_index("A2")] == 140


def test_duplicates_summed():
    net = build_network([("F1", "A1", 50), ("F1", "A1", 50)])
    assert net.n_edges == 1
    assert net.edge_weight[0] == 100


def test_zero_only_rejected():
    with pytest.raises(NetworkError):
        build_network([("F1", "A1", 0)])


def test_empty_rejected():
    with pytest.raises(NetworkError):
        build_network([])


def test_negative_value_names_record():
    with pytest.raises(NetworkError, match="F9"):
        build_network([("F1", "A1", 5), ("F9", "A3", -1)])


def test_zero_edges_dropped_and_nodes_excluded():
    net = build_network([("F1", "A1", 10), ("F1", "A2", 0), ("F2", "A2", 0)])
    assert net.n_funds == 1 and net.n_assets == 1
    assert list(net.asset_ids) == ["A1"]


def test_degrees(toy):
    assert fund_degree(toy, "F1") == 2
    assert asset_degree(toy, "A2") == 2
    single = build_network([("X", "Y", 3.0)])
    assert fund_degree(single, 0) == asset_degree(single, 0) == 1


def test_unknown_index(toy):
    with pytest.raises(IndexError):
        fund_degree(toy, 5)
    with pytest.raises(KeyError):
        asset_degree(toy, "nope")
    with pytest.raises(KeyError):
        portfolio_weights(toy, "F3")


def test_portfolio_weights(toy):
    p = portfolio_weights(toy, "F1")
    assert p.as_dict() == {toy.asset_index("A1"): 0.6, toy.asset_index("A2"): 0.4}
    single = portfolio_weights(toy, "F2")
    assert single.weights.tolist() == [1.0]
    uniform = build_network([("F", f"A{k}", 7.0) for k in range(4)])
    assert portfolio_weights(uniform, 0).weights.tolist() == [0.25] * 4


def test_stats(toy):
    s = snapshot_stats(toy)
    assert (s.n_funds, s.n_assets, s.n_edges) == (2, 2, 3)
    assert s.density == 0.75 and s.mean_degree == 1.5 and s.total_value == 200
    full = build_network([(f, a, 1) for f in "ab" for a in "xy"])
    assert snapshot_stats(full).density == 1.0


def test_views_consistent(rng):
    net = random_network(rng, 40, 60, 0.2)
    fm = sorted(zip(net.edge_fund.tolist(), net.edge_asset.tolist(), net.edge_weight.tolist()))
    am = []
    for a in range(net.n_assets):
        lo, hi = net.asset_ptr[a], net.asset_ptr[a + 1]
        am.extend(zip(net.asset_fund[lo:hi].tolist(), [a] * (hi - lo),
                      net.asset_weight[lo:hi].tolist()))
    assert fm == sorted(am)
    assert net.fund_degrees.sum() == net.asset_degrees.sum() == net.n_edges


def test_aggregate_identities(rng):
    for _ in range(20):
        net = random_network(rng, int(rng.integers(1, 50)), int(rng.integers(1, 80)), 0.15)
        assert math.isclose(math.fsum(net.fund_size), net.total_value, rel_tol=1e-9)
        assert math.isclose(math.fsum(net.asset_value), net.total_value, rel_tol=1e-9)
        for p in net.portfolios():
            assert abs(p.weights.sum() - 1) <= 1e-9
            assert np.all(p.weights > 0) and np.all(np.diff(p.assets) > 0)


def test_immutable(toy):
    with pytest.raises(ValueError):
        toy.edge_weight[0] = 1.0


def test_roundtrip(tmp_path, rng):
    net = random_network(rng, 30, 40, 0.2, quarter="2007Q1")
    path = tmp_path / "snap.csv"
    write_snapshot(net, path)
    back = read_edges(path)
    assert back.quarter == "2007Q1"
    assert snapshot_stats(back) == snapshot_stats(net)
    assert sorted(back.records()) == sorted(net.records())


def test_edge_csv_header(tmp_path, toy):
    path = tmp_path / "e.csv"
    write_edges(toy, path)
    assert path.read_text().splitlines()[0] == "fund_id,asset_id,market_value"
    bad = tmp_path / "bad.csv"
    bad.write_text("fund,asset,value\nF,A,1\n")
    with pytest.raises(NetworkError):
        read_edges(bad)


def test_arrays_builder_matches_records():
    recs = [("F2", "A1", 3.0), ("F1", "A1", 1.0), ("F1", "A1", 2.0)]
    a = build_network(recs)
    b = build_network_arrays(*zip(*recs))
    assert a.records() == b.records() == [("F1", "A1", 3.0), ("F2", "A1", 3.0)]
