"""
Choosing hyperparameters by cross-validation
============================================

``grid_search`` scores every combination with k-fold CV on the training
split only. Validation and test rows never influence the choice.
"""

from _data import demo_config

from rainer.metrics import evaluate
from rainer.models import fit, predict_scores
from rainer.pipeline import build_features, prepare
from rainer.tuning import ParamGrid, grid_search

config = demo_config()
prepared = prepare(config)
features = build_features(prepared, "selected_constructed_pc2", config)

grid = ParamGrid({"n_neighbors": [5, 25, 75], "weight": ["uniform", "distance"]})
result = grid_search("knn", grid, features.train, range(features.train.n_rows), k=5,
                     metric="accuracy", seed=config.seed, threads=2)

for i, row in enumerate(result.table):
    flag = "*" if i == result.best_index else " "
    print(f"{flag} {row['params']}  mean accuracy {row['mean']:.4f}")

# %%
model = fit(result.winner, features.train)
m = evaluate(features.test.y, predict_scores(model, features.test))
print("\nwinner:", result.winner.params["n_neighbors"], result.winner.params["weight"],
      " test accuracy", round(m["accuracy"], 4))
