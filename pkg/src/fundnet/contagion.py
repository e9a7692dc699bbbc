"""Fire-sale distress propagation on a static holding network.

One step, starting from holdings ``W`` and pending asset returns ``delta``:

1. revalue every holding, ``W *= 1 + delta[asset]``;
2. fund drop ``Delta_i = sum_a w_ia * delta_a`` with start-of-step weights;
3. redeemed fraction ``f_i = response(|Delta_i|)`` (identity, capped at 1);
4. sell volume ``V_a = sum_i f_i W_ia`` on revalued holdings;
5. liquidate, ``W *= 1 - f_i``;
6. next return ``delta_a = -min(1, c V_a / M_a)`` with ``M_a`` the
   revalued, pre-liquidation aggregate value;
7. damage ``D = (S_tot(0) - S_tot) / S_tot(0)``.

Redeemed value leaves the network and counts as loss. Assets whose
aggregate value reaches zero are frozen.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .network import HoldingNetwork


def linear_response(drop: np.ndarray) -> np.ndarray:
    return drop


@dataclass(frozen=True)
class ShockConfig:
    delta0: float = 0.5
    steps: int = 10
    impact: float = 1.0
    quantile: float = 0.999
    response: Callable[[np.ndarray], np.ndarray] = field(default=linear_response, compare=False)

    def __post_init__(self):
        # delta0 = 0 is accepted as the no-shock fixed point.
        if not 0.0 <= self.delta0 <= 1.0:
            raise ValueError(f"delta0 must lie in [0, 1], got {self.delta0}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not self.impact > 0:
            raise ValueError(f"impact coefficient must be > 0, got {self.impact}")
        if not 0.0 <= self.quantile < 1.0:
            raise ValueError(f"quantile must lie in [0, 1), got {self.quantile}")


@dataclass
class SimState:
    """Mutable simulation state; ``holdings`` is aligned with the fund-major edges."""

    holdings: np.ndarray
    price: np.ndarray
    delta: np.ndarray
    frozen: np.ndarray

    @classmethod
    def initial(cls, net: HoldingNetwork, shocked, delta0: float) -> "SimState":
        delta = np.zeros(net.n_assets)
        delta[shocked] = -delta0
        return cls(net.edge_weight.copy(), np.ones(net.n_assets), delta,
                   np.zeros(net.n_assets, dtype=bool))


@dataclass(frozen=True)
class DamageTrajectory:
    """Loss fractions after each completed step ``t = 1..T``.

    ``damage`` counts redemptions as loss; ``price_loss`` values the
    original holdings at current prices (mark-to-market only).
    """

    damage: np.ndarray
    price_loss: np.ndarray
    asset: int | None = None
    per_asset: dict[int, np.ndarray] | None = None

    @property
    def steps(self) -> int:
        return len(self.damage)

    def at(self, t: int) -> float:
        return float(self.damage[t - 1])


def step(net: HoldingNetwork, state: SimState, cfg: ShockConfig) -> None:
    """Advance ``state`` by one propagation step in place."""
    fund, asset = net.edge_fund, net.edge_asset
    n_f, n_a = net.n_funds, net.n_assets
    delta = state.delta
    w_start = state.holdings
    s_start = np.bincount(fund, weights=w_start, minlength=n_f)

    w = w_start * (1.0 + delta[asset])
    state.price *= 1.0 + delta

    with np.errstate(invalid="ignore", divide="ignore"):
        contrib = np.where(s_start[fund] > 0, w_start / s_start[fund], 0.0) * delta[asset]
    drop = np.bincount(fund, weights=contrib, minlength=n_f)
    f = np.clip(cfg.response(np.abs(drop)), 0.0, 1.0)

    sold = f[fund] * w
    volume = np.bincount(asset, weights=sold, minlength=n_a)
    m_post = np.bincount(asset, weights=w, minlength=n_a)
    state.holdings = w * (1.0 - f[fund])

    state.frozen |= m_post <= 0
    nxt = np.zeros(n_a)
    live = ~state.frozen
    nxt[live] = -np.minimum(1.0, cfg.impact * volume[live] / m_post[live])
    state.delta = nxt


def simulate(net: HoldingNetwork, shocked, cfg: ShockConfig) -> tuple[DamageTrajectory, SimState]:
    """Run ``cfg.steps`` steps after shocking asset(s) ``shocked``; returns trajectory and final state."""
    state = SimState.initial(net, shocked, cfg.delta0)
    s0 = net.total_value
    m0 = net.asset_value
    damage = np.empty(cfg.steps)
    price_loss = np.empty(cfg.steps)
    # Losses accumulate from elementwise nonnegative decrements, so both
    # trajectories are non-decreasing regardless of summation rounding.
    lost = lost_price = 0.0
    for t in range(cfg.steps):
        before, p_before = state.holdings, state.price.copy()
        step(net, state, cfg)
        lost += float(np.sum(before - state.holdings))
        lost_price += float(np.dot(m0, p_before - state.price))
        damage[t] = min(1.0, lost / s0)
        price_loss[t] = min(1.0, lost_price / s0)
    return DamageTrajectory(damage, price_loss), state


def propagate_shock(net: HoldingNetwork, asset, cfg: ShockConfig) -> DamageTrajectory:
    """Damage trajectory after an initial shock to a single asset (index or id)."""
    a = net._check_asset(asset)
    traj, _ = simulate(net, a, cfg)
    return DamageTrajectory(traj.damage, traj.price_loss, a)


def top_assets(net: HoldingNetwork, q: float = 0.999) -> np.ndarray:
    """Assets whose aggregate value strictly exceeds the ``q`` quantile (linear interpolation)."""
    if not 0.0 <= q < 1.0:
        raise ValueError(f"quantile must lie in [0, 1), got {q}")
    m = net.asset_value
    if len(m) == 0:
        raise ValueError("network has no assets")
    return np.flatnonzero(m > np.quantile(m, q))


class EmptyTopSetError(ValueError):
    pass


def systemic_damage(net: HoldingNetwork, cfg: ShockConfig, threads: int = 1,
                    assets=None) -> DamageTrajectory:
    """Average damage trajectory over independent shocks to each top asset.

    ``assets`` overrides the top-asset set.
    """
    top = top_assets(net, cfg.quantile) if assets is None else np.asarray(assets, dtype=np.int64)
    if len(top) == 0:
        raise EmptyTopSetError(
            f"no asset exceeds the {cfg.quantile} quantile of aggregate value "
            f"among {net.n_assets} assets; use a lower quantile")

    def run(a):
        return simulate(net, int(a), cfg)[0]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            runs = list(pool.map(run, top))
    else:
        runs = [run(a) for a in top]
    damage = np.mean([r.damage for r in runs], axis=0)
    price_loss = np.mean([r.price_loss for r in runs], axis=0)
    return DamageTrajectory(damage, price_loss, None,
                            {int(a): r.damage for a, r in zip(top, runs)})
