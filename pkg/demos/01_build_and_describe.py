# %% [markdown]
# # Building and describing a holding network
#
# A quarter of holdings becomes a bipartite fund/asset network. Here the
# input is synthetic, but `fundnet.ingest` builds the same object from a
# holdings CSV.

# %%
import numpy as np

from fundnet import SynthSpec, degree_ccdf, generate, snapshot_stats

net = generate(SynthSpec(1000, 4000, 50, styles=10, kappa=0.7, seed=1, quarter="2006Q2"))
print(snapshot_stats(net).to_json_dict(net.quarter))

# %% [markdown]
# Both degree distributions are heavy tailed. The CCDF P(K >= k) is the
# usual way to look at them.

# %%
for side in ("fund", "asset"):
    table = degree_ccdf(net, side)
    for k in (1, 10, 100, 1000):
        print(f"{side:5s} P(K>={k:4d}) = {table.at(k):.4f}")

# %% [markdown]
# One fund's portfolio, as normalized weights.

# %%
view = net.portfolio_weights(0)
order = np.argsort(view.weights)[::-1][:5]
print(net.fund_ids[0], [(str(net.asset_ids[a]), round(float(w), 4)) for a, w in
                        zip(view.assets[order], view.weights[order])])
