import numpy as np
import pytest

from fundnet import HoldingNetwork, build_network

ACCEPTANCE_LINES = []


def random_network(rng, n_funds, n_assets, density=0.1, quarter="test"):
    """Random bipartite network with every fund holding at least one asset."""
    fund_idx, asset_idx = [], []
    for i in range(n_funds):
        k = max(1, rng.binomial(n_assets, density))
        held = rng.choice(n_assets, size=min(k, n_assets), replace=False)
        fund_idx.extend([i] * len(held))
        asset_idx.extend(held.tolist())
    values = rng.lognormal(10.0, 2.0, size=len(fund_idx))
    fund_ids = [f"F{i}" for i in range(n_funds)]
    asset_ids = [f"A{a}" for a in range(n_assets)]
    return HoldingNetwork.from_arrays(fund_ids, asset_ids, fund_idx, asset_idx, values, quarter)


@pytest.fixture
def toy():
    return build_network([("F1", "A1", 60), ("F1", "A2", 40), ("F2", "A2", 100)], "2006Q2")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
