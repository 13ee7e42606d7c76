"""
Cleaning a station file and looking at it through PCA
=====================================================

Load the raw CSV, drop sparse columns, impute, cap outliers, encode, and
balance the two classes. Then compare the principal components of the
unbalanced and balanced data.
"""

from _data import demo_config

from rainer.dimred import pca_fit, pca_loadings_report, scree_table
from rainer.features import assemble
from rainer.pipeline import prepare

config = demo_config()
prepared = prepare(config)

# columns above the missingness threshold are gone before anything else runs
print("dropped for missingness:", prepared.dropped)
print("labeled rows:", prepared.full.n_rows, " balanced rows:", prepared.matrix.n_rows)
print("class counts after balancing:",
      int((prepared.matrix.y == 0).sum()), int((prepared.matrix.y == 1).sum()))

# %%
# The "original" strategy keeps the 17 cleaned weather columns.
for label, matrix in (("unbalanced", prepared.full), ("balanced", prepared.matrix)):
    model = pca_fit(assemble("original", matrix))
    print(f"\n{label}: {model.m} features")
    for row in scree_table(model)[:5]:
        print(f"  PC{row['component']:<2d} eigenvalue {row['eigenvalue']:6.3f}"
              f"  cumulative {row['cumulative']:.3f}")
    print(f"  cumulative at 13 components: {model.cumulative_ratio(13):.4f}")

# %%
# Loadings are unit-norm eigenvector entries; the sign of a whole component
# is arbitrary, so only relative signs within a column carry meaning.
loadings = pca_loadings_report(pca_fit(assemble("original", prepared.full)))
top = sorted(loadings, key=lambda r: -abs(r["PC1"]))[:5]
print("\nlargest PC1 loadings:")
for row in top:
    print(f"  {row['feature']:<14s} {row['PC1']:+.4f}")
