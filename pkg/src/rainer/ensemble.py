"""Hard and soft voting over fitted models."""

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError, SpecError
from .models import ModelSpec, fit, predict_scores


@dataclass(frozen=True)
class VotingSpec:
    members: tuple  # algorithm ids
    mode: str = "soft"
    weights: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 2:
            raise SpecError("a voting ensemble needs at least two members")
        if self.mode not in ("soft", "hard"):
            raise SpecError(f"voting mode must be 'soft' or 'hard', got {self.mode!r}")
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != len(self.members):
                raise SpecError("one weight per member is required")
            if not all(np.isfinite(v) and v > 0 for v in w):
                raise SpecError("voting weights must be positive and finite")
            object.__setattr__(self, "weights", w)

    @classmethod
    def parse(cls, name, mode="soft", weights=None):
        """``"dt+lr+rf"`` style composite names."""
        return cls(tuple(part.strip() for part in name.split("+")), mode, weights)

    @property
    def name(self):
        return "+".join(self.members)


def is_composite(name):
    return "+" in name


def _check_features(members):
    names = members[0].feature_names
    for m in members[1:]:
        if m.feature_names != names:
            raise SchemaError(f"ensemble members disagree on features: {list(names)} vs "
                              f"{list(m.feature_names)}")


def _weights(members, weights):
    return np.ones(len(members)) if weights is None else np.asarray(weights, dtype=np.float64)


def combine_scores(member_scores, weights=None):
    """Weighted mean of per-member score rows.

    Members are summed in ascending score order per row, so any permutation
    of (member, weight) pairs gives a bitwise identical result.
    """
    S = np.asarray(member_scores, dtype=np.float64)
    w = _weights(S, weights)
    order = np.lexsort((np.broadcast_to(w[:, None], S.shape), S), axis=0)
    terms = np.take_along_axis(w[:, None] * S, order, axis=0)
    out = terms.sum(axis=0) / np.sort(w).sum()
    # rounding in the division can step just outside the member range
    return np.clip(out, S.min(axis=0), S.max(axis=0))


def combine_labels(member_labels, weights=None):
    """Weighted majority; an exact tie predicts class 0."""
    L = np.asarray(member_labels, dtype=np.float64)
    w = _weights(L, weights)
    yes = np.sort(w[:, None] * L, axis=0).sum(axis=0)
    no = np.sort(w[:, None] * (1.0 - L), axis=0).sum(axis=0)
    return (yes > no).astype(np.int64)


def soft_vote(members, matrix, weights=None):
    _check_features(members)
    return combine_scores([predict_scores(m, matrix) for m in members], weights)


def hard_vote(members, matrix, weights=None):
    _check_features(members)
    labels = [(predict_scores(m, matrix) >= 0.5).astype(np.int64) for m in members]
    return combine_labels(labels, weights)


@dataclass(frozen=True)
class VotingModel:
    spec: VotingSpec
    members: tuple  # TrainedModel

    @property
    def feature_names(self):
        return self.members[0].feature_names

    def scores(self, matrix):
        """Soft mode: averaged scores. Hard mode: the 0/1 majority labels."""
        if self.spec.mode == "soft":
            return soft_vote(self.members, matrix, self.spec.weights)
        return hard_vote(self.members, matrix, self.spec.weights).astype(np.float64)


def fit_voting(spec, train, member_params=None, seed=0, threads=1):
    """Fit each member with its own hyperparameters (``member_params`` maps
    algorithm id to overrides) and the shared seed."""
    member_params = member_params or {}
    members = tuple(fit(ModelSpec(a, member_params.get(a, {}), seed), train, threads)
                    for a in spec.members)
    return VotingModel(spec, members)
