# %% [markdown]
# # Divergences and contrastive neighbors
#
# Two building blocks sit under everything else in `nce`: a Jensen-Shannon
# divergence measured in bits, and an exact cosine nearest-neighbor search.

# %%
import numpy as np

from nce import build_index, js, kl, knn

# %% [markdown]
# With base-2 logs the JS divergence tops out at exactly 1 for distributions
# that share no support, and it is symmetric.

# %%
print(js([1, 0], [0, 1]))          # 1.0
print(js([1, 0], [0.5, 0.5]))      # about 0.311
print(js([0.2, 0.8], [0.6, 0.4]), js([0.6, 0.4], [0.2, 0.8]))
print(kl([0.75, 0.25], [0.25, 0.75]))  # log2(3) / 2

# %% [markdown]
# KL is not symmetric and blows up when `p` has mass where `q` has none;
# the JS midpoint keeps that from happening.

# %%
try:
    kl([0.5, 0.5], [1.0, 0.0])
except Exception as err:
    print(type(err).__name__, err)

# %% [markdown]
# ## Neighbors
#
# The index normalizes every vector once. A query never returns itself, and
# equal similarities are ordered by sample id, so duplicated rows give a
# reproducible answer.

# %%
rng = np.random.default_rng(0)
X = rng.standard_normal((12, 3))
X[7] = X[2]        # exact duplicate
X[9] = 4 * X[2]    # same direction, different length
index = build_index(X)
nbrs = knn(index, 2, k=4)
print(nbrs.indices, np.round(nbrs.similarities, 4))
