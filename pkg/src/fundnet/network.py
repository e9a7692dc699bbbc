"""Bipartite fund-asset holding network for a single quarterly snapshot."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EDGE_HEADER = ("fund_id", "asset_id", "market_value")

# Relative tolerance for aggregate-value checks (S_tot ~ 1e12 dominates absolute error).
REL_TOL = 1e-9


class NetworkError(ValueError):
    """Raised when a holding network cannot be built from the given input."""


@dataclass(frozen=True)
class PortfolioView:
    """Sparse normalized weight vector of one fund, ordered by asset index."""

    fund: int
    assets: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.assets)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.assets.tolist(), self.weights.tolist()))

    @classmethod
    def from_mapping(cls, mapping: dict[int, float], fund: int = -1) -> "PortfolioView":
        """Build a view from ``{asset index: weight}``; weights are used as given."""
        items = sorted(mapping.items())
        assets = np.array([a for a, _ in items], dtype=np.int64)
        weights = np.array([w for _, w in items], dtype=np.float64)
        return cls(fund, assets, weights)


@dataclass(frozen=True)
class SnapshotStats:
    n_funds: int
    n_assets: int
    n_edges: int
    density: float
    mean_degree: float
    total_value: float

    def to_json_dict(self, quarter: str) -> dict:
        return {
            "quarter": quarter,
            "n_funds": self.n_funds,
            "n_assets": self.n_assets,
            "e": self.n_edges,
            "rho": self.density,
            "kbar": self.mean_degree,
            "s_tot": self.total_value,
        }


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _segment_fsum(values: np.ndarray, ptr: np.ndarray) -> np.ndarray:
    # Correctly rounded per-segment sums: independent of the order of the
    # values inside each segment.
    out = np.empty(len(ptr) - 1)
    for k in range(len(out)):
        out[k] = math.fsum(values[ptr[k]:ptr[k + 1]].tolist())
    return out


class HoldingNetwork:
    """Immutable weighted bipartite graph of fund holdings.

    Edges are stored twice: fund-major (CSR, ``fund_ptr``/``edge_asset``/
    ``edge_weight``) and asset-major (CSC, ``asset_ptr``/``asset_fund``/
    ``asset_weight``). ``asset_edge`` maps each asset-major slot to its
    fund-major edge id. Funds and assets are re-indexed densely from 0;
    isolated nodes are allowed only when constructed through
    :meth:`from_arrays` with explicit node tables (null models use this).
    """

    __slots__ = (
        "quarter", "fund_ids", "asset_ids", "fund_ptr", "edge_fund", "edge_asset",
        "edge_weight", "asset_ptr", "asset_fund", "asset_weight", "asset_edge",
        "fund_size", "asset_value", "total_value", "_fund_lookup", "_asset_lookup",
    )

    def __init__(self, quarter, fund_ids, asset_ids, fund_idx, asset_idx, weights):
        n_f, n_a = len(fund_ids), len(asset_ids)
        order = np.lexsort((asset_idx, fund_idx))
        fund_idx = np.asarray(fund_idx, dtype=np.int64)[order]
        asset_idx = np.asarray(asset_idx, dtype=np.int64)[order]
        weights = np.asarray(weights, dtype=np.float64)[order]

        self.quarter = str(quarter)
        self.fund_ids = _readonly(np.asarray(fund_ids, dtype=object))
        self.asset_ids = _readonly(np.asarray(asset_ids, dtype=object))
        self.edge_fund = _readonly(fund_idx)
        self.edge_asset = _readonly(asset_idx)
        self.edge_weight = _readonly(weights)
        self.fund_ptr = _readonly(
            np.concatenate(([0], np.cumsum(np.bincount(fund_idx, minlength=n_f)))))

        csc = np.lexsort((fund_idx, asset_idx))
        self.asset_edge = _readonly(csc)
        self.asset_fund = _readonly(fund_idx[csc])
        self.asset_weight = _readonly(weights[csc])
        self.asset_ptr = _readonly(
            np.concatenate(([0], np.cumsum(np.bincount(asset_idx, minlength=n_a)))))

        self.fund_size = _readonly(_segment_fsum(weights, self.fund_ptr))
        self.asset_value = _readonly(_segment_fsum(self.asset_weight, self.asset_ptr))
        self.total_value = math.fsum(weights.tolist())
        self._fund_lookup = None
        self._asset_lookup = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_arrays(cls, fund_ids, asset_ids, fund_idx, asset_idx, weights, quarter=""):
        """Build from dense index arrays, keeping every node in the tables.

        Pairs must be unique and weights strictly positive.
        """
        fund_idx = np.asarray(fund_idx, dtype=np.int64)
        asset_idx = np.asarray(asset_idx, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        if not (len(fund_idx) == len(asset_idx) == len(weights)):
            raise NetworkError("edge arrays differ in length")
        if len(weights) == 0:
            raise NetworkError("network has no edges")
        if np.any(~np.isfinite(weights)) or np.any(weights <= 0):
            raise NetworkError("edge weights must be finite and > 0")
        if fund_idx.min() < 0 or fund_idx.max() >= len(fund_ids):
            raise NetworkError("fund index out of range")
        if asset_idx.min() < 0 or asset_idx.max() >= len(asset_ids):
            raise NetworkError("asset index out of range")
        codes = fund_idx * len(asset_ids) + asset_idx
        if len(np.unique(codes)) != len(codes):
            raise NetworkError("duplicate (fund, asset) pair")
        return cls(quarter, fund_ids, asset_ids, fund_idx, asset_idx, weights)

    # -- sizes ------------------------------------------------------------

    @property
    def n_funds(self) -> int:
        return len(self.fund_ids)

    @property
    def n_assets(self) -> int:
        return len(self.asset_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_weight)

    @property
    def fund_degrees(self) -> np.ndarray:
        return np.diff(self.fund_ptr)

    @property
    def asset_degrees(self) -> np.ndarray:
        return np.diff(self.asset_ptr)

    def __repr__(self) -> str:
        return (f"HoldingNetwork(quarter={self.quarter!r}, n_funds={self.n_funds}, "
                f"n_assets={self.n_assets}, n_edges={self.n_edges})")

    # -- lookups ----------------------------------------------------------

    def fund_index(self, fund_id: str) -> int:
        if self._fund_lookup is None:
            self._fund_lookup = {f: k for k, f in enumerate(self.fund_ids)}
        try:
            return self._fund_lookup[fund_id]
        except KeyError:
            raise KeyError(f"unknown fund {fund_id!r}") from None

    def asset_index(self, asset_id: str) -> int:
        if self._asset_lookup is None:
            self._asset_lookup = {a: k for k, a in enumerate(self.asset_ids)}
        try:
            return self._asset_lookup[asset_id]
        except KeyError:
            raise KeyError(f"unknown asset {asset_id!r}") from None

    def _check_fund(self, i: int) -> int:
        if isinstance(i, str):
            return self.fund_index(i)
        if not 0 <= i < self.n_funds:
            raise IndexError(f"fund index {i} out of range [0, {self.n_funds})")
        return int(i)

    def _check_asset(self, a: int) -> int:
        if isinstance(a, str):
            return self.asset_index(a)
        if not 0 <= a < self.n_assets:
            raise IndexError(f"asset index {a} out of range [0, {self.n_assets})")
        return int(a)

    def fund_degree(self, i) -> int:
        i = self._check_fund(i)
        return int(self.fund_ptr[i + 1] - self.fund_ptr[i])

    def asset_degree(self, a) -> int:
        a = self._check_asset(a)
        return int(self.asset_ptr[a + 1] - self.asset_ptr[a])

    def fund_assets(self, i) -> np.ndarray:
        i = self._check_fund(i)
        return self.edge_asset[self.fund_ptr[i]:self.fund_ptr[i + 1]]

    def asset_funds(self, a) -> np.ndarray:
        a = self._check_asset(a)
        return self.asset_fund[self.asset_ptr[a]:self.asset_ptr[a + 1]]

    def portfolio_weights(self, i) -> PortfolioView:
        """Portfolio weights ``W_ia / S_i`` of fund ``i`` (index or id)."""
        i = self._check_fund(i)
        lo, hi = self.fund_ptr[i], self.fund_ptr[i + 1]
        w = self.edge_weight[lo:hi] / self.fund_size[i]
        return PortfolioView(i, self.edge_asset[lo:hi], _readonly(w))

    def portfolios(self) -> list[PortfolioView]:
        return [self.portfolio_weights(i) for i in range(self.n_funds)]

    def normalized_weights(self) -> np.ndarray:
        """Fund-major array of ``w_ia`` aligned with ``edge_asset``."""
        return self.edge_weight / self.fund_size[self.edge_fund]

    def stats(self) -> SnapshotStats:
        return snapshot_stats(self)

    def records(self) -> list[tuple[str, str, float]]:
        """Edge list as ``(fund id, asset id, market value)`` in fund-major order."""
        return list(zip(self.fund_ids[self.edge_fund].tolist(),
                        self.asset_ids[self.edge_asset].tolist(),
                        self.edge_weight.tolist()))


def build_network(edges: Iterable[Sequence], quarter: str = "") -> HoldingNetwork:
    """Build a snapshot from ``(fund id, asset id, market value)`` records.

    Duplicate pairs are summed, zero-value holdings dropped, and nodes left
    without any edge excluded.
    """
    funds, assets, values = [], [], []
    for rec in edges:
        f, a, v = rec
        funds.append(f)
        assets.append(a)
        values.append(v)
    return build_network_arrays(funds, assets, values, quarter)


def build_network_arrays(fund_ids, asset_ids, values, quarter: str = "") -> HoldingNetwork:
    """Array form of :func:`build_network`; one entry per input record."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        raise NetworkError("empty edge list")
    if len(fund_ids) != len(values) or len(asset_ids) != len(values):
        raise NetworkError("record columns differ in length")
    bad = np.flatnonzero(~np.isfinite(values) | (values < 0))
    if len(bad):
        k = int(bad[0])
        raise NetworkError(
            f"record {k} ({fund_ids[k]!r}, {asset_ids[k]!r}, {values[k]!r}): "
            "market value must be finite and >= 0")
    keep = values > 0
    if not keep.any():
        raise NetworkError("no holding with positive market value")

    f_arr = np.asarray(fund_ids, dtype=str)[keep]
    a_arr = np.asarray(asset_ids, dtype=str)[keep]
    values = values[keep]
    f_table, f_idx = np.unique(f_arr, return_inverse=True)
    a_table, a_idx = np.unique(a_arr, return_inverse=True)

    codes = f_idx.astype(np.int64) * len(a_table) + a_idx
    uniq, inv = np.unique(codes, return_inverse=True)
    summed = np.bincount(inv, weights=values, minlength=len(uniq))
    return HoldingNetwork(quarter, f_table.astype(object), a_table.astype(object),
                          uniq // len(a_table), uniq % len(a_table), summed)


def fund_degree(net: HoldingNetwork, i) -> int:
    return net.fund_degree(i)


def asset_degree(net: HoldingNetwork, a) -> int:
    return net.asset_degree(a)


def portfolio_weights(net: HoldingNetwork, i) -> PortfolioView:
    return net.portfolio_weights(i)


def snapshot_stats(net: HoldingNetwork) -> SnapshotStats:
    """Summary row: counts, density ``E/(N_f N_a)``, mean fund degree, total value."""
    n_f, n_a, e = net.n_funds, net.n_assets, net.n_edges
    return SnapshotStats(n_f, n_a, e, e / (n_f * n_a), e / n_f, net.total_value)


# -- edge-list I/O ----------------------------------------------------------

def write_edges(net: HoldingNetwork, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for f, a, v in net.records():
            w.writerow((f, a, repr(v)))


def read_edges(path, quarter: str | None = None) -> HoldingNetwork:
    """Read an edge-list CSV; the quarter label comes from the JSON sidecar if present."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != EDGE_HEADER:
            raise NetworkError(f"{path}: expected header {','.join(EDGE_HEADER)}, got {header}")
        funds, assets, values = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise NetworkError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                v = float(row[2])
            except ValueError:
                raise NetworkError(f"{path}:{lineno}: bad market value {row[2]!r}") from None
            funds.append(row[0])
            assets.append(row[1])
            values.append(v)
    if quarter is None:
        side = path.with_suffix(".json")
        quarter = json.loads(side.read_text())["quarter"] if side.exists() else ""
    return build_network_arrays(funds, assets, values, quarter)


def write_snapshot(net: HoldingNetwork, csv_path) -> Path:
    """Write the edge list plus its ``.json`` stats sidecar; returns the sidecar path."""
    csv_path = Path(csv_path)
    write_edges(net, csv_path)
    side = csv_path.with_suffix(".json")
    side.write_text(json.dumps(snapshot_stats(net).to_json_dict(net.quarter), indent=2) + "\n")
    return side
