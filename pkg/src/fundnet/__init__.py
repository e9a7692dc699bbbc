"""Bipartite fund-asset holding networks: diversification, similarity,
null models and fire-sale contagion."""

from .contagion import (DamageTrajectory, EmptyTopSetError, ShockConfig, propagate_shock,
                        systemic_damage, top_assets)
from .ingest import (HoldingRecord, HoldingsParseError, Quarter, build_quarter_snapshot,
                     consolidate_classes, parse_class_map, parse_holdings)
from .metrics import (CcdfTable, MeanIndices, PairSimilarity, PairTable, degree_ccdf,
                      herfindahl_all, index_ccdf, inverse_herfindahl, jaccard, mean_indices,
                      pairwise_similarity, similarity)
from .network import (HoldingNetwork, NetworkError, PortfolioView, SnapshotStats,
                      asset_degree, build_network, fund_degree, portfolio_weights, read_edges,
                      snapshot_stats, write_edges, write_snapshot)
from .nullmodels import RandomizationSpec, randomize, rnd1, rnd2
from .synth import SynthSpec, generate

__version__ = "0.1.0"
