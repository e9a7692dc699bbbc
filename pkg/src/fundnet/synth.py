"""Synthetic holding networks with heavy-tailed degrees and style clustering.

Fund degrees follow a truncated power law scaled to the requested mean.
Every asset carries a heavy-tailed popularity. Each of ``styles`` groups
owns a template portfolio drawn from that popularity; a fund of style
``g`` picks its assets without replacement from the mixture

    (1 - kappa) * popularity + kappa * template_g

so ``kappa`` tunes how strongly funds of one style cluster together.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .network import HoldingNetwork


@dataclass(frozen=True)
class SynthSpec:
    n_funds: int
    n_assets: int
    mean_degree: float
    fund_exponent: float = 2.5
    # None means uniform asset popularity.
    asset_exponent: float | None = 2.2
    styles: int = 1
    kappa: float = 0.0
    weights: str = "powerlaw"
    weight_exponent: float = 3.5
    # Fund size is degree times a Pareto multiplier with this exponent.
    size_exponent: float = 2.0
    total_value: float = 1e12
    seed: int = 0
    quarter: str = "synthetic"

    def __post_init__(self):
        if self.n_funds < 1 or self.n_assets < 1 or self.styles < 1:
            raise ValueError("n_funds, n_assets and styles must be >= 1")
        if not 1 <= self.mean_degree <= self.n_assets:
            raise ValueError(f"mean_degree must lie in [1, n_assets], got {self.mean_degree}")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa}")
        for name in ("fund_exponent", "asset_exponent", "weight_exponent", "size_exponent"):
            v = getattr(self, name)
            if v is not None and not v > 1:
                raise ValueError(f"{name} must be > 1, got {v}")
        if self.weights not in ("uniform", "powerlaw"):
            raise ValueError(f"weights must be 'uniform' or 'powerlaw', got {self.weights!r}")
        if not self.total_value > 0:
            raise ValueError("total_value must be > 0")

    @property
    def template_size(self) -> int:
        return min(self.n_assets, max(1, math.ceil(2 * self.mean_degree)))

    @classmethod
    def from_json(cls, path) -> "SynthSpec":
        return cls(**json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


def _pareto_mean(lo: float, hi: float, gamma: float) -> float:
    if lo >= hi:
        return lo
    if math.isclose(gamma, 2.0):
        return math.log(hi / lo) / (1 / lo - 1 / hi)
    if math.isclose(gamma, 1.0):
        return (hi - lo) / math.log(hi / lo)
    num = (lo ** (2 - gamma) - hi ** (2 - gamma)) / (gamma - 2)
    den = (lo ** (1 - gamma) - hi ** (1 - gamma)) / (gamma - 1)
    return num / den


def truncated_pareto(rng: np.random.Generator, size: int, gamma: float,
                     lo: float, hi: float) -> np.ndarray:
    """Inverse-CDF draws from density ``~ x**-gamma`` on ``[lo, hi]``."""
    u = rng.random(size)
    if hi <= lo:
        return np.full(size, float(lo))
    a, b = lo ** (1 - gamma), hi ** (1 - gamma)
    return (a - u * (a - b)) ** (1 / (1 - gamma))


def fund_degrees(rng: np.random.Generator, spec: SynthSpec) -> np.ndarray:
    """Integer degrees in ``[1, n_assets]`` with mean close to ``spec.mean_degree``."""
    hi = float(spec.n_assets)
    target = spec.mean_degree
    if _pareto_mean(1.0, hi, spec.fund_exponent) >= target:
        lo = 1.0
    else:
        lo = brentq(lambda x: _pareto_mean(x, hi, spec.fund_exponent) - target, 1.0, hi)
    x = truncated_pareto(rng, spec.n_funds, spec.fund_exponent, lo, hi)
    return np.clip(np.rint(x), 1, spec.n_assets).astype(np.int64)


def _top_k(rng, log_p: np.ndarray, k: int) -> np.ndarray:
    # Gumbel top-k: sampling k items without replacement proportional to p.
    keys = log_p + rng.gumbel(size=len(log_p))
    if k >= len(keys):
        return np.arange(len(keys))
    return np.argpartition(-keys, k - 1)[:k]


def _sample_without_replacement(rng, p: np.ndarray, fallback_log_p: np.ndarray,
                                k: int) -> np.ndarray:
    support = np.flatnonzero(p > 0)
    if k <= len(support):
        with np.errstate(divide="ignore"):
            return _top_k(rng, np.log(p), k)
    rest = np.flatnonzero(p <= 0)
    extra = rest[_top_k(rng, fallback_log_p[rest], k - len(support))]
    return np.concatenate((support, extra))


def _raw_weights(rng, spec: SynthSpec, size: int) -> np.ndarray:
    u = 1.0 - rng.random(size)  # in (0, 1]
    if spec.weights == "uniform":
        return u
    return u ** (-1.0 / (spec.weight_exponent - 1.0))


def generate(spec: SynthSpec) -> HoldingNetwork:
    """Draw one synthetic snapshot; deterministic given ``spec.seed``.

    Fund size is the fund degree times a heavy-tailed multiplier. Assets that end up with no
    holder are dropped, as in a real snapshot.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, 0x5EED])))
    n_f, n_a = spec.n_funds, spec.n_assets

    degrees = fund_degrees(rng, spec)
    if spec.asset_exponent is None:
        popularity = np.full(n_a, 1.0 / n_a)
    else:
        popularity = truncated_pareto(rng, n_a, spec.asset_exponent, 1.0, float(n_a))
        popularity /= popularity.sum()
    log_pop = np.log(popularity)

    m = spec.template_size
    templates = []
    for _ in range(spec.styles):
        members = _top_k(rng, log_pop, m)
        tau = np.zeros(n_a)
        tau[members] = popularity[members] / popularity[members].sum()
        templates.append(tau)
    style = rng.integers(spec.styles, size=n_f)

    fund_idx, asset_idx, values = [], [], []
    sizes = degrees * truncated_pareto(rng, n_f, spec.size_exponent, 1.0, 1e6)
    sizes *= spec.total_value / sizes.sum()
    for i in range(n_f):
        p = (1.0 - spec.kappa) * popularity + spec.kappa * templates[style[i]]
        held = np.sort(_sample_without_replacement(rng, p, log_pop, int(degrees[i])))
        raw = _raw_weights(rng, spec, len(held))
        fund_idx.append(np.full(len(held), i))
        asset_idx.append(held)
        values.append(sizes[i] * raw / raw.sum())

    fund_idx = np.concatenate(fund_idx)
    asset_idx = np.concatenate(asset_idx)
    values = np.concatenate(values)

    used = np.unique(asset_idx)
    remap = np.full(n_a, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    width_f, width_a = len(str(n_f - 1)), len(str(n_a - 1))
    fund_ids = [f"F{i:0{width_f}d}" for i in range(n_f)]
    asset_ids = [f"A{a:0{width_a}d}" for a in used]
    return HoldingNetwork.from_arrays(fund_ids, asset_ids, fund_idx, remap[asset_idx],
                                      values, spec.quarter)

