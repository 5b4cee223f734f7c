"""Reference-free MT quality estimation from round-trip translation.

Self-Scores compare a text with its own round-trip translation; a linear
predictor fitted on language pairs with references maps them to the
Trans-Score a forward system would get against a reference.
"""

__version__ = "0.1.0"

from .analysis import error_stats, evaluate, kendall_tau, pearson_r, rank_systems
from .dataset import Corpus, LanguageSpec, ParallelCorpus, align_parallel, enumerate_pairs, load_corpus
from .predictor import FeatureSpec, LinearPredictor, SelfScoreFeatures, build_features, fit_ols
from .scoring import ScoreRecord, score_matrix, self_score, trans_score
from .textmetrics import MetricId, chrf_score, score_corpus, tokenize_13a

__all__ = [
    "Corpus",
    "FeatureSpec",
    "LanguageSpec",
    "LinearPredictor",
    "MetricId",
    "ParallelCorpus",
    "ScoreRecord",
    "SelfScoreFeatures",
    "align_parallel",
    "build_features",
    "chrf_score",
    "enumerate_pairs",
    "error_stats",
    "evaluate",
    "fit_ols",
    "kendall_tau",
    "load_corpus",
    "pearson_r",
    "rank_systems",
    "score_corpus",
    "score_matrix",
    "self_score",
    "tokenize_13a",
    "trans_score",
]
