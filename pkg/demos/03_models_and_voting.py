"""
Training classifiers and a soft-voting committee
================================================

Every algorithm sits behind ``fit`` and ``predict_scores``. A voting
ensemble averages member scores (soft) or counts member labels (hard).
"""

from _data import demo_config

from rainer.ensemble import VotingSpec, fit_voting
from rainer.metrics import evaluate, roc_points
from rainer.models import ModelSpec, fit, predict_scores
from rainer.pipeline import build_features, prepare

config = demo_config()
prepared = prepare(config)
features = build_features(prepared, "selected_constructed", config)
print("train/val/test rows:", features.train.n_rows, features.val.n_rows, features.test.n_rows)

# smaller than the reference settings so the script finishes in seconds
specs = [
    ModelSpec("lr", seed=config.seed),
    ModelSpec("dt", {"max_depth": 8}, seed=config.seed),
    ModelSpec("rf", {"n_estimators": 20}, seed=config.seed),
    ModelSpec("knn", {"n_neighbors": 25}, seed=config.seed),
    ModelSpec("nb", seed=config.seed),
    ModelSpec("gb", {"n_estimators": 30}, seed=config.seed),
]

print(f"\n{'model':<10s} {'acc':>6s} {'prec':>6s} {'recall':>6s} {'f1':>6s} {'auc':>6s}")
for spec in specs:
    model = fit(spec, features.train)
    m = evaluate(features.test.y, predict_scores(model, features.test))
    print(f"{spec.algorithm:<10s} {m['accuracy']:6.3f} {m['precision']:6.3f} {m['recall']:6.3f}"
          f" {m['f1']:6.3f} {m['auc']:6.3f}")

# %%
# Member overrides are keyed by algorithm id.
members = {"dt": {"max_depth": 8}, "rf": {"n_estimators": 20}}
for mode in ("soft", "hard"):
    committee = fit_voting(VotingSpec(("dt", "lr", "rf"), mode), features.train, members,
                           seed=config.seed)
    m = evaluate(features.test.y, committee.scores(features.test))
    print(f"dt+lr+rf {mode}: accuracy {m['accuracy']:.3f}")

# %%
# The ROC curve has one point per distinct score plus the (0, 0) origin.
committee = fit_voting(VotingSpec(("dt", "lr", "rf")), features.train, members, seed=config.seed)
curve = roc_points(features.test.y, committee.scores(features.test))
print("ROC points:", len(curve.fpr), " first few:",
      [(round(float(f), 3), round(float(t), 3)) for f, t in zip(curve.fpr[:4], curve.tpr[:4])])
