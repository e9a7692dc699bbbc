# %% [markdown]
# # Fire-sale contagion
#
# A price drop on one asset hits every fund holding it. Those funds face
# redemptions and sell, which pushes other prices down.

# %%
from fundnet import ShockConfig, build_network, SynthSpec, generate, propagate_shock, rnd1, rnd2, systemic_damage

net = generate(SynthSpec(1000, 4000, 50, styles=10, kappa=0.8, seed=4))

# %% [markdown]
# The simplest case: one fund, one asset, half the price gone.

# %%
tiny = build_network([("F", "A", 100.0)])
print(propagate_shock(tiny, "A", ShockConfig(delta0=0.5, steps=3)).damage)

# %% [markdown]
# Systemic damage averages the trajectory over shocks to the largest assets.

# %%
cfg = ShockConfig(delta0=0.5, steps=10, quantile=0.99)
for name, n in (("original", net), ("rnd2", rnd2(net, 0)), ("rnd1", rnd1(net, 0))):
    print(f"{name:8s} D(10) = {systemic_damage(n, cfg).damage[-1]:.4f}")
