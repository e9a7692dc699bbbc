# %% [markdown]
# # Diversification and portfolio overlap
#
# The inverse Herfindahl index h counts "effective" holdings. For pairs of
# funds, the Jaccard index J measures shared assets and the similarity s
# also weighs how much of each portfolio sits in them.

# %%
import numpy as np

from fundnet import (SynthSpec, generate, herfindahl_all, index_ccdf, mean_indices,
                     pairwise_similarity)

net = generate(SynthSpec(800, 3000, 40, styles=8, kappa=0.8, seed=2))
h = herfindahl_all(net)
print(f"median k = {np.median(net.fund_degrees):.0f}, median h = {np.median(h):.1f}")

# %% [markdown]
# All overlapping pairs, from the inverted-index engine.

# %%
pairs = pairwise_similarity(net)
print(f"{len(pairs)} overlapping pairs out of {net.n_funds * (net.n_funds - 1) // 2}")
print(mean_indices(net, pairs=pairs))

# %%
ccdf = index_ccdf(pairs.similarity)
for x in (1e-3, 1e-2, 1e-1):
    print(f"P(s >= {x:g}) among overlapping pairs = {ccdf.at(x):.4f}")
