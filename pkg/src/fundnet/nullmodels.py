"""Randomized benchmark networks (Rnd-1, Rnd-2).

Randomness comes from numpy's PCG64 bit generator seeded through a
``SeedSequence`` built from ``(seed, model tag)``, so the two models draw
from independent sub-streams of the same user seed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .network import HoldingNetwork

MODEL_TAGS = {"rnd1": 1, "rnd2": 2}


@dataclass(frozen=True)
class RandomizationSpec:
    model: str
    seed: int

    def __post_init__(self):
        if self.model not in MODEL_TAGS:
            raise ValueError(f"unknown null model {self.model!r}; expected rnd1 or rnd2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def parse(cls, text: str) -> "RandomizationSpec":
        """Parse ``rnd1:<seed>`` or ``rnd2:<seed>``."""
        m = re.fullmatch(r"\s*rnd-?([12])\s*:\s*(\d+)\s*", text, flags=re.IGNORECASE)
        if not m:
            raise ValueError(f"invalid model spec {text!r}; expected rnd1:<seed> or rnd2:<seed>")
        return cls(f"rnd{m.group(1)}", int(m.group(2)))

    def apply(self, net: HoldingNetwork) -> HoldingNetwork:
        return randomize(net, self.model, self.seed)

    def __str__(self) -> str:
        return f"{self.model}:{self.seed}"


def substream(seed: int, model: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, MODEL_TAGS[model]])))


def rnd1(net: HoldingNetwork, seed: int) -> HoldingNetwork:
    """Scatter the E edge weights over E distinct uniformly drawn fund-asset pairs.

    Weights are shuffled independently of the drawn pairs. All funds and
    assets stay in the node tables even if they end up with no edge.
    """
    rng = substream(seed, "rnd1")
    n_f, n_a, e = net.n_funds, net.n_assets, net.n_edges
    codes = rng.choice(n_f * n_a, size=e, replace=False)
    weights = rng.permutation(net.edge_weight)
    return HoldingNetwork.from_arrays(net.fund_ids, net.asset_ids, codes // n_a, codes % n_a,
                                      weights, net.quarter)


def rnd2(net: HoldingNetwork, seed: int) -> HoldingNetwork:
    """Give each fund ``k_i`` new assets drawn uniformly without replacement.

    The fund's own market values are dealt to the new assets in random
    order, so degree, size, weight multiset and Herfindahl index of every
    fund are unchanged.
    """
    rng = substream(seed, "rnd2")
    n_a = net.n_assets
    ptr = net.fund_ptr
    assets = np.empty(net.n_edges, dtype=np.int64)
    weights = np.empty(net.n_edges)
    for i in range(net.n_funds):
        lo, hi = ptr[i], ptr[i + 1]
        assets[lo:hi] = rng.choice(n_a, size=hi - lo, replace=False)
        weights[lo:hi] = rng.permutation(net.edge_weight[lo:hi])
    return HoldingNetwork.from_arrays(net.fund_ids, net.asset_ids, net.edge_fund, assets,
                                      weights, net.quarter)


def randomize(net: HoldingNetwork, model: str, seed: int) -> HoldingNetwork:
    if model == "rnd1":
        return rnd1(net, seed)
    if model == "rnd2":
        return rnd2(net, seed)
    raise ValueError(f"unknown null model {model!r}")
