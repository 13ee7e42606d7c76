"""
A t-SNE view of the balanced data
=================================

t-SNE is quadratic in the number of points, so it runs on a stratified
sample of distinct rows from the balanced matrix.
"""

import numpy as np
from _data import demo_config

from rainer.dimred import TsneConfig, tsne_affinities, tsne_embed
from rainer.features import selected_constructed
from rainer.pipeline import prepare, stratified_sample
from rainer.preprocess import zscore

config = demo_config()
prepared = prepare(config)

sample = stratified_sample(selected_constructed(prepared.matrix), 400, seed=config.seed)
scaled, _, _ = zscore(sample)
print("sample:", scaled.n_rows, "rows,", scaled.n_features, "features,",
      "positive share", round(float(scaled.y.mean()), 3))

tcfg = TsneConfig(perplexity=30, n_iter=500, seed=config.seed)
P = tsne_affinities(scaled.X, tcfg)
emb = tsne_embed(P, tcfg)

# %%
# The KL trace should flatten once early exaggeration ends.
trace = emb.kl_trace
for step in np.linspace(0, len(trace) - 1, 6).astype(int):
    print(f"  iteration {step:4d}  KL {trace[step]:.4f}")
print("final KL:", round(emb.kl, 4))

# %%
# A crude separation check: distance between class centroids in the
# embedding relative to the overall spread.
centroids = [emb.Y[scaled.y == c].mean(axis=0) for c in (0, 1)]
spread = emb.Y.std(axis=0).mean()
print("centroid gap / spread:", round(float(np.linalg.norm(centroids[0] - centroids[1]) / spread), 3))
