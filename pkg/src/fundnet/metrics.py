"""Diversification and similarity indices, pairwise engine, and distributions."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .network import HoldingNetwork, PortfolioView


class PairSimilarity(NamedTuple):
    i: int
    j: int
    jaccard: float
    similarity: float


@dataclass(frozen=True)
class PairTable:
    """Columnar pair records sorted by ``(i, j)`` with ``i < j``."""

    i: np.ndarray
    j: np.ndarray
    overlap: np.ndarray
    jaccard: np.ndarray
    similarity: np.ndarray

    def __len__(self) -> int:
        return len(self.i)

    def __iter__(self) -> Iterator[PairSimilarity]:
        for row in zip(self.i.tolist(), self.j.tolist(),
                       self.jaccard.tolist(), self.similarity.tolist()):
            yield PairSimilarity(*row)


@dataclass(frozen=True)
class CcdfTable:
    """``P(X >= value)`` evaluated at each distinct sample value."""

    values: np.ndarray
    probability: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def at(self, x: float) -> float:
        k = np.searchsorted(self.values, x, side="left")
        return float(self.probability[k]) if k < len(self.values) else 0.0

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probability.tolist()))


@dataclass(frozen=True)
class MeanIndices:
    hbar: float
    jbar: float
    sbar: float


def _weights(p) -> np.ndarray:
    if isinstance(p, PortfolioView):
        return p.weights
    return np.asarray(p, dtype=np.float64)


def inverse_herfindahl(weights) -> float:
    """Effective number of assets, ``1 / sum(w**2)``.

    ``weights`` is a :class:`PortfolioView` or a sequence of weights summing
    to one. The sum of squares is correctly rounded, so the result does not
    depend on the order of the weights.
    """
    w = _weights(weights)
    if len(w) == 0:
        raise ValueError("inverse Herfindahl index undefined for an empty portfolio")
    return 1.0 / math.fsum((w * w).tolist())


def herfindahl_all(net: HoldingNetwork) -> np.ndarray:
    """Inverse Herfindahl index of every fund."""
    w = net.normalized_weights()
    sq = (w * w).tolist()
    ptr = net.fund_ptr.tolist()
    return np.array([1.0 / math.fsum(sq[ptr[k]:ptr[k + 1]]) for k in range(net.n_funds)])


def jaccard(p_i, p_j) -> float:
    """Intersection over union of two nonempty asset sets."""
    a, b = _asset_set(p_i), _asset_set(p_j)
    if not a or not b:
        raise ValueError("Jaccard index undefined for an empty asset set")
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


def _asset_set(p) -> set:
    if isinstance(p, PortfolioView):
        return set(p.assets.tolist())
    return set(p)


def _merge_min_sum(p_i: PortfolioView, p_j: PortfolioView) -> tuple[int, float]:
    # Sorted merge over the two sparse vectors; accumulates in asset order.
    ai, wi = p_i.assets.tolist(), p_i.weights.tolist()
    aj, wj = p_j.assets.tolist(), p_j.weights.tolist()
    x = y = common = 0
    total = 0.0
    while x < len(ai) and y < len(aj):
        if ai[x] == aj[y]:
            total += min(wi[x], wj[y])
            common += 1
            x += 1
            y += 1
        elif ai[x] < aj[y]:
            x += 1
        else:
            y += 1
    # Rounding can push the sum of minima a hair above 1.
    return common, min(total, 1.0)


def similarity(p_i: PortfolioView, p_j: PortfolioView) -> float:
    """Similarity index: Jaccard times the sum of common-asset minimum weights."""
    if len(p_i) == 0 or len(p_j) == 0:
        raise ValueError("similarity undefined for an empty portfolio")
    common, min_sum = _merge_min_sum(p_i, p_j)
    jac = common / (len(p_i) + len(p_j) - common)
    return jac * min_sum


def naive_pairwise(net: HoldingNetwork, min_overlap: int = 1) -> PairTable:
    """All-pairs double loop; reference for :func:`pairwise_similarity`."""
    views = net.portfolios()
    rows = []
    for i in range(net.n_funds):
        for j in range(i + 1, net.n_funds):
            common, min_sum = _merge_min_sum(views[i], views[j])
            if common >= min_overlap and common > 0:
                jac = common / (len(views[i]) + len(views[j]) - common)
                rows.append((i, j, common, jac, jac * min_sum))
    return _table(rows)


def _table(rows) -> PairTable:
    if not rows:
        e = np.empty(0)
        return PairTable(e.astype(np.int64), e.astype(np.int64), e.astype(np.int64), e, e)
    i, j, c, jac, s = zip(*rows)
    return PairTable(np.array(i, dtype=np.int64), np.array(j, dtype=np.int64),
                     np.array(c, dtype=np.int64), np.array(jac), np.array(s))


class _PairEngine:
    """Inverted-index pair generator.

    For fund ``i`` the posting lists of its assets are cut to funds ``j > i``
    and concatenated in asset order; ``bincount`` then accumulates overlap
    counts and ``min(w_ia, w_ja)`` per partner in that same asset order, so
    the sums match a sorted merge of the two sparse vectors bit for bit.
    """

    def __init__(self, net: HoldingNetwork):
        self.net = net
        w = net.normalized_weights()
        self.w = w
        self.w_csc = w[net.asset_edge]
        # Position of each fund-major edge inside the asset-major order.
        pos = np.empty(net.n_edges, dtype=np.int64)
        pos[net.asset_edge] = np.arange(net.n_edges)
        self.start = pos + 1
        self.stop = net.asset_ptr[1:][net.edge_asset]
        self.deg = net.fund_degrees

    def fund_pairs(self, i: int, min_overlap: int):
        net = self.net
        lo, hi = net.fund_ptr[i], net.fund_ptr[i + 1]
        start, stop = self.start[lo:hi], self.stop[lo:hi]
        lens = stop - start
        total = int(lens.sum())
        if total == 0:
            return None
        offs = np.cumsum(lens) - lens
        gather = np.arange(total) - np.repeat(offs - start, lens)
        partners = net.asset_fund[gather]
        mins = np.minimum(np.repeat(self.w[lo:hi], lens), self.w_csc[gather])
        count = np.bincount(partners, minlength=net.n_funds)
        min_sum = np.bincount(partners, weights=mins, minlength=net.n_funds)
        js = np.flatnonzero(count >= max(min_overlap, 1))
        if len(js) == 0:
            return None
        c = count[js]
        jac = c / (self.deg[i] + self.deg[js] - c)
        return js, c, jac, jac * np.minimum(min_sum[js], 1.0)

    def run(self, funds, min_overlap: int):
        parts = []
        for i in funds:
            r = self.fund_pairs(i, min_overlap)
            if r is not None:
                parts.append((np.full(len(r[0]), i, dtype=np.int64),) + r)
        return parts


def pairwise_similarity(net: HoldingNetwork, min_overlap: int = 1,
                        threads: int = 1) -> PairTable:
    """Jaccard and similarity for every fund pair sharing ``>= min_overlap`` assets.

    Disjoint pairs are never visited. Output is sorted by ``(i, j)``
    whatever ``threads`` is.
    """
    engine = _PairEngine(net)
    funds = range(net.n_funds)
    if threads > 1:
        chunks = [funds[k::threads] for k in range(threads)]
        with ThreadPoolExecutor(threads) as pool:
            parts = [p for res in pool.map(lambda ch: engine.run(ch, min_overlap), chunks)
                     for p in res]
        parts.sort(key=lambda p: p[0][0])
    else:
        parts = engine.run(funds, min_overlap)
    if not parts:
        return _table([])
    cols = [np.concatenate(c) for c in zip(*parts)]
    return PairTable(*cols)


def mean_indices(net: HoldingNetwork, overlapping_only: bool = False,
                 pairs: PairTable | None = None, threads: int = 1) -> MeanIndices:
    """Network averages of h, J and s.

    Pair means run over all ``C(N_f, 2)`` unordered pairs with disjoint pairs
    counted as zero; ``overlapping_only`` averages over overlapping pairs
    instead.
    """
    n = net.n_funds
    if n < 2:
        raise ValueError("pair averages need at least 2 funds")
    if pairs is None:
        pairs = pairwise_similarity(net, threads=threads)
    hbar = math.fsum(herfindahl_all(net).tolist()) / n
    denom = len(pairs) if overlapping_only else n * (n - 1) // 2
    if denom == 0:
        return MeanIndices(hbar, float("nan"), float("nan"))
    jbar = math.fsum(pairs.jaccard.tolist()) / denom
    sbar = math.fsum(pairs.similarity.tolist()) / denom
    return MeanIndices(hbar, jbar, sbar)


def index_ccdf(values) -> CcdfTable:
    """Empirical ``P(X >= x)`` at each distinct value of the sample."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    if len(x) == 0:
        raise ValueError("CCDF of an empty sample")
    uniq, first = np.unique(x, return_index=True)
    return CcdfTable(uniq, (len(x) - first) / len(x))


def degree_ccdf(net: HoldingNetwork, side: str = "fund") -> CcdfTable:
    return index_ccdf(_degrees(net, side))


def _degrees(net: HoldingNetwork, side: str) -> np.ndarray:
    if side == "fund":
        return net.fund_degrees
    if side == "asset":
        return net.asset_degrees
    raise ValueError(f"side must be 'fund' or 'asset', got {side!r}")


def log_binned_pdf(values, bins: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Density estimate on logarithmically spaced bins.

    Returns ``(bin centers, density)``; nonpositive values are ignored.
    Empty bins are kept with density 0.
    """
    x = np.asarray(values, dtype=np.float64)
    x = x[x > 0]
    if len(x) == 0:
        raise ValueError("PDF of an empty (or nonpositive) sample")
    lo, hi = x.min(), x.max()
    if lo == hi:
        return np.array([lo]), np.array([1.0])
    edges = np.logspace(np.log10(lo), np.log10(hi), bins + 1)
    counts, edges = np.histogram(x, bins=edges)
    density = counts / (len(x) * np.diff(edges))
    return np.sqrt(edges[:-1] * edges[1:]), density


def degree_pdf(net: HoldingNetwork, side: str = "fund", bins: int = 20):
    return log_binned_pdf(_degrees(net, side), bins)
