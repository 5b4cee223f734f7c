"""Linear predictors of Trans-Score from Self-Score features.

Feature names have the form ``kind(direction,metric)``, for example
``self_score(A->B->A,spbleu)`` or ``max4_count(B->A->B,bleu-13a)``. The metric
part may carry an aggregation suffix (``chrf@sentence-average``) when records
for several aggregation modes are mixed.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .scoring import SELF_AB, SELF_BA, TRANS, ScoreRecord
from .textmetrics import MetricId
from .validation import ValidationError

FORMAT_VERSION = "1.0"
FEATURE_KINDS = ("self_score", "max4_count", "ref_length")
DIRECTION_MODES = ("both", SELF_AB, SELF_BA)

_FEATURE_RE = re.compile(r"^(\w+)\(([AB>\-]+),([\w\-]+(?:@[\w\-]+)?)\)$")


@dataclass(frozen=True)
class Feature:
    kind: str
    direction: str
    metric: str
    aggregation: Optional[str] = None

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValidationError(f"unknown feature kind {self.kind!r}")
        if self.direction not in (SELF_AB, SELF_BA):
            raise ValidationError(f"feature direction must be a round trip, got {self.direction!r}")

    @classmethod
    def parse(cls, name: str) -> "Feature":
        m = _FEATURE_RE.match(name.replace(" ", ""))
        if not m:
            raise ValidationError(f"cannot parse feature name {name!r}")
        kind, direction, metric = m.groups()
        metric, _, aggregation = metric.partition("@")
        return cls(kind, direction, metric, aggregation or None)

    @property
    def name(self) -> str:
        metric = self.metric if self.aggregation is None else f"{self.metric}@{self.aggregation}"
        return f"{self.kind}({self.direction},{metric})"

    def matches(self, record: ScoreRecord) -> bool:
        return (record.direction == self.direction and record.metric.name == self.metric
                and (self.aggregation is None or record.aggregation == self.aggregation))

    def value(self, record: ScoreRecord) -> Optional[float]:
        if self.kind == "self_score":
            return record.score
        raw = record.max4_count if self.kind == "max4_count" else record.ref_length
        return None if raw is None else float(raw)


@dataclass(frozen=True)
class FeatureSpec:
    """Ordered, duplicate-free feature list with its direction mode."""

    features: tuple[Feature, ...]

    def __post_init__(self):
        feats = tuple(Feature.parse(f) if isinstance(f, str) else f for f in self.features)
        object.__setattr__(self, "features", feats)
        if not feats:
            raise ValidationError("a feature spec needs at least one feature")
        names = [f.name for f in feats]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate features in {names}")

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def direction_mode(self) -> str:
        dirs = {f.direction for f in self.features}
        return "both" if len(dirs) == 2 else dirs.pop()

    def __len__(self) -> int:
        return len(self.features)

    @classmethod
    def default(cls, metrics: Sequence[str] | str = "spbleu", mode: str = "both",
                aux: Sequence[str] = ()) -> "FeatureSpec":
        """Self-Scores under each metric for the chosen round-trip directions.

        ``aux`` adds ``max4_count`` and/or ``ref_length`` features for every
        bleu-family metric, after the Self-Score features.
        """
        if mode not in DIRECTION_MODES:
            raise ValidationError(f"direction mode must be one of {DIRECTION_MODES}, got {mode!r}")
        if isinstance(metrics, str):
            metrics = [metrics]
        directions = (SELF_AB, SELF_BA) if mode == "both" else (mode,)
        feats = [Feature("self_score", d, m) for m in metrics for d in directions]
        for kind in aux:
            feats += [Feature(kind, d, m) for m in metrics if m in ("bleu-13a", "spbleu") for d in directions]
        return cls(tuple(feats))


@dataclass(frozen=True)
class TrainingSample:
    features: tuple[float, ...]
    target: Optional[float]
    key: tuple[str, str, str]


@dataclass
class FeatureTable:
    """Feature rows keyed by (source language, target language, A->B system)."""

    spec: FeatureSpec
    keys: list[tuple[str, str, str]]
    X: np.ndarray
    y: Optional[np.ndarray]
    rejected: dict[tuple[str, str, str], str] = field(default_factory=dict)

    def samples(self) -> list[TrainingSample]:
        ys = self.y if self.y is not None else [None] * len(self.keys)
        return [TrainingSample(tuple(map(float, x)), None if t is None or np.isnan(t) else float(t), k)
                for k, x, t in zip(self.keys, self.X, ys)]

    def subset(self, mask: Sequence[bool]) -> "FeatureTable":
        mask = np.asarray(mask, dtype=bool)
        return FeatureTable(self.spec, [k for k, m in zip(self.keys, mask) if m], self.X[mask],
                            None if self.y is None else self.y[mask], dict(self.rejected))


def _group(records: Iterable[ScoreRecord]) -> dict[tuple[str, str, str], list[ScoreRecord]]:
    groups: dict[tuple[str, str, str], list[ScoreRecord]] = {}
    for rec in records:
        groups.setdefault((rec.src_lang, rec.tgt_lang, rec.system_ab), []).append(rec)
    return groups


def _lookup(recs: list[ScoreRecord], feature) -> tuple[Optional[float], Optional[str]]:
    hits = [r for r in recs if feature.matches(r)]
    values = {feature.value(r) for r in hits} - {None}
    if not values:
        return None, f"missing {feature.name}"
    if len(values) > 1:
        return None, f"ambiguous {feature.name}: {len(hits)} records disagree"
    return values.pop(), None


@dataclass(frozen=True)
class _Target:
    metric: str
    aggregation: Optional[str] = None

    def matches(self, record: ScoreRecord) -> bool:
        return (record.direction == TRANS and record.metric.name == self.metric
                and (self.aggregation is None or record.aggregation == self.aggregation))

    def value(self, record: ScoreRecord) -> float:
        return record.score

    @property
    def name(self) -> str:
        return f"trans_score({TRANS},{self.metric})"


def _target(target) -> Optional[_Target]:
    if target is None:
        return None
    if isinstance(target, MetricId):
        return _Target(target.name, target.aggregation)
    metric, _, aggregation = str(target).partition("@")
    return _Target(metric, aggregation or None)


def build_features(records: Iterable[ScoreRecord], spec: FeatureSpec, target=None,
                   require_target: bool = True) -> FeatureTable:
    """One feature row per (language pair, system), columns ordered as in ``spec``.

    ``target`` names the Trans-Score metric (``"spbleu"``, ``"chrf@sentence-average"``
    or a ``MetricId``). Keys lacking a feature, or lacking the target when
    ``require_target`` is set, are left out and listed in ``rejected``; with
    ``require_target=False`` a missing target becomes NaN.
    """
    tgt = _target(target)
    keys, rows, ys, rejected = [], [], [], {}
    for key, recs in sorted(_group(records).items()):
        row, problems = [], []
        for feat in spec.features:
            value, problem = _lookup(recs, feat)
            row.append(value)
            if problem:
                problems.append(problem)
        y = None
        if tgt is not None:
            y, problem = _lookup(recs, tgt)
            if problem and (require_target or problem.startswith("ambiguous")):
                problems.append(problem)
        if problems:
            rejected[key] = "; ".join(problems)
            continue
        keys.append(key)
        rows.append(row)
        ys.append(np.nan if y is None else y)
    X = np.asarray(rows, dtype=float).reshape(len(rows), len(spec))
    return FeatureTable(spec, keys, X, None if tgt is None else np.asarray(ys, dtype=float), rejected)


def split_by_pairs(table: FeatureTable, train_pairs: Iterable[tuple[str, str]]) -> tuple[FeatureTable, FeatureTable]:
    """Train rows are those whose language pair is in ``train_pairs``; the rest are test rows."""
    train_pairs = set(map(tuple, train_pairs))
    mask = [(k[0], k[1]) in train_pairs for k in table.keys]
    return table.subset(mask), table.subset([not m for m in mask])


class SelfScoreFeatures(TransformerMixin, BaseEstimator):
    """Turn a list of ScoreRecords into the feature matrix of a FeatureSpec.

    Unlike :func:`build_features`, a missing feature is an error here, so the
    output always has one row per (language pair, system) key in the input.
    """

    def __init__(self, features=("self_score(A->B->A,spbleu)", "self_score(B->A->B,spbleu)")):
        self.features = features

    def fit(self, records=None, y=None):
        self.spec_ = FeatureSpec(tuple(self.features))
        self.n_features_out_ = len(self.spec_)
        return self

    def transform(self, records):
        check_is_fitted(self, "spec_")
        table = build_features(records, self.spec_)
        if table.rejected:
            key, why = next(iter(table.rejected.items()))
            raise ValidationError(f"{len(table.rejected)} keys lack features, e.g. {key}: {why}")
        self.keys_ = table.keys
        return table.X

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "spec_")
        return np.asarray(self.spec_.names, dtype=object)


# --------------------------------------------------------------------------
# Least squares
# --------------------------------------------------------------------------


def solve_least_squares(X: np.ndarray, y: np.ndarray, rcond: float = 1e-12) -> tuple[np.ndarray, float]:
    """Minimize the residual sum of squares of ``y ~ X @ w + b``.

    Solves the normal equations of the intercept-augmented design. When the
    Gram matrix is numerically singular the minimum-norm solution over
    ``(w, b)`` is returned instead.
    """
    A = np.column_stack([X, np.ones(len(X))])
    gram = A.T @ A
    rhs = A.T @ y
    evals, evecs = np.linalg.eigh(gram)
    cutoff = rcond * max(evals[-1], 0.0)
    if evals[0] > cutoff:
        theta = scipy.linalg.solve(gram, rhs, assume_a="pos")
    else:
        keep = evals > cutoff
        theta = evecs[:, keep] @ ((evecs[:, keep].T @ rhs) / evals[keep])
    return theta[:-1], float(theta[-1])


def rss(X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float) -> float:
    resid = y - (X @ weights + intercept)
    return float(resid @ resid)


class LinearPredictor(RegressorMixin, BaseEstimator):
    """Affine map from Self-Score features to a Trans-Score, fitted by least squares.

    Parameters
    ----------
    feature_names : sequence of str, optional
        Names of the input columns, usually ``FeatureSpec.names``.
    target_metric : MetricId or str, optional
        Metric of the predicted Trans-Score.
    standardize : bool, default=False
        Z-score features before fitting; the scaling is stored with the model.
    clip : bool, default=False
        Clamp predictions to [0, 100].

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    mean_, scale_ : ndarray or None
        Standardization parameters when ``standardize`` is set.
    training_ : dict
        ``n_samples``, ``language_pairs`` and ``created_at`` of the fit.
    """

    def __init__(self, feature_names=None, target_metric=None, standardize=False, clip=False):
        self.feature_names = feature_names
        self.target_metric = target_metric
        self.standardize = standardize
        self.clip = clip

    def _scale(self, X):
        if self.mean_ is None:
            return X
        return (X - self.mean_) / self.scale_

    def fit(self, X, y, language_pairs=None, created_at=None):
        X, y = validate_data(self, X, y, dtype=np.float64, y_numeric=True)
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise ValidationError(
                f"{len(self.feature_names)} feature names for {X.shape[1]} feature columns")
        self.mean_ = self.scale_ = None
        if self.standardize:
            self.mean_ = X.mean(axis=0)
            scale = X.std(axis=0)
            self.scale_ = np.where(scale > 0, scale, 1.0)
        self.coef_, self.intercept_ = solve_least_squares(self._scale(X), y)
        self.training_ = {
            "n_samples": int(X.shape[0]),
            "language_pairs": [list(p) for p in language_pairs] if language_pairs is not None else [],
            "created_at": time.time() if created_at is None else created_at,
        }
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        pred = self._scale(X) @ self.coef_ + self.intercept_
        if self.clip:
            pred = np.clip(pred, 0.0, 100.0)
        return pred

    def rss(self, X, y) -> float:
        return float(np.sum((np.asarray(y, dtype=float) - self.predict(X)) ** 2))

    @property
    def feature_names_(self) -> list[str]:
        if self.feature_names is not None:
            return list(self.feature_names)
        return [f"x{i}" for i in range(self.n_features_in_)]


def fit_ols(samples, y=None, **params) -> LinearPredictor:
    """Fit a :class:`LinearPredictor` to TrainingSamples, a FeatureTable, or ``(X, y)``."""
    pairs = None
    if isinstance(samples, FeatureTable):
        if samples.y is None:
            raise ValidationError("feature table has no targets")
        params.setdefault("feature_names", samples.spec.names)
        X, y, pairs = samples.X, samples.y, samples.keys
    elif y is None:
        samples = list(samples)
        if not samples:
            raise ValidationError("cannot fit on zero samples")
        if any(s.target is None for s in samples):
            raise ValidationError("every training sample needs a target")
        X = np.asarray([s.features for s in samples], dtype=float)
        y = np.asarray([s.target for s in samples], dtype=float)
        pairs = [s.key for s in samples]
    else:
        X = samples
    return LinearPredictor(**params).fit(X, y, language_pairs=pairs)


# --------------------------------------------------------------------------
# Model files
# --------------------------------------------------------------------------


def _metric_to_json(metric):
    if metric is None or isinstance(metric, str):
        return metric
    return metric.to_dict()


def _metric_from_json(data):
    if data is None or isinstance(data, str):
        return data
    return MetricId.from_dict(data)


def model_to_dict(model: LinearPredictor, provenance: Optional[Mapping] = None) -> dict:
    check_is_fitted(model, "coef_")
    data = {
        "format_version": FORMAT_VERSION,
        "target_metric": _metric_to_json(model.target_metric),
        "feature_names": model.feature_names_,
        "weights": [repr(float(w)) for w in model.coef_],
        "intercept": repr(float(model.intercept_)),
        "standardization": None if model.mean_ is None else {
            "mean": [repr(float(v)) for v in model.mean_],
            "scale": [repr(float(v)) for v in model.scale_],
        },
        "clip": bool(model.clip),
        "training": model.training_,
    }
    if provenance is not None:
        data["provenance"] = dict(provenance)
    return data


def model_from_dict(data: Mapping) -> LinearPredictor:
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"unsupported model format_version {version!r}; expected {FORMAT_VERSION!r}")
    names = list(data["feature_names"])
    weights = np.array([float(w) for w in data["weights"]])
    if len(weights) != len(names):
        raise ValidationError(f"model has {len(weights)} weights for {len(names)} features")
    model = LinearPredictor(feature_names=names, target_metric=_metric_from_json(data.get("target_metric")),
                            standardize=data.get("standardization") is not None, clip=bool(data.get("clip", False)))
    model.coef_ = weights
    model.intercept_ = float(data["intercept"])
    model.n_features_in_ = len(names)
    model.mean_ = model.scale_ = None
    if data.get("standardization") is not None:
        model.mean_ = np.array([float(v) for v in data["standardization"]["mean"]])
        model.scale_ = np.array([float(v) for v in data["standardization"]["scale"]])
        if len(model.mean_) != len(names) or len(model.scale_) != len(names):
            raise ValidationError("standardization vectors do not match the feature count")
    model.training_ = dict(data.get("training") or {})
    return model


def save_model(model: LinearPredictor, path, provenance: Optional[Mapping] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(model, provenance), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def load_model(path) -> LinearPredictor:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not a model file ({exc})") from None
    return model_from_dict(data)
