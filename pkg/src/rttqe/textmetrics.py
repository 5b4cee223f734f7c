"""String-based translation metrics: 13a tokenization, BLEU, spBLEU and chrF.

Every metric is computed from additive sufficient statistics so that corpus
scores, sentence scores and the auxiliary regression features (correct 4-gram
count, cumulative reference length) all come from the same counts.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

NGRAM_ORDER = 4
CHRF_ORDER = 6
CHRF_BETA = 2
FLOOR_EPSILON = 0.1

METRIC_NAMES = ("bleu-13a", "spbleu", "chrf", "external")
SMOOTHING_MODES = ("none", "floor", "add-k")
AGGREGATION_MODES = ("corpus-level", "sentence-average")

_WHITESPACE = re.compile(r"\s+")


def normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def tokenize_13a(text: str) -> list[str]:
    """Tokenize with the mteval-v13a rules used by WMT.

    The input is NFC-normalized first. Returns the list of tokens; an empty
    or all-whitespace input gives ``[]``.
    """
    norm = normalize(text)
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")

    norm = f" {norm} "
    norm = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", r" \1 ", norm)
    # period and comma, unless between digits
    norm = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", norm)
    norm = re.sub(r"([\.,])([^0-9])", r" \1 \2", norm)
    # dash preceded by a digit
    norm = re.sub(r"([0-9])(-)", r"\1 \2 ", norm)
    return norm.split()


def ngram_counts(seq: Union[Sequence[str], str], n: int) -> Counter:
    """Count every contiguous length-``n`` window of ``seq``.

    Keys are tuples for token sequences and substrings for plain strings.
    """
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    if isinstance(seq, str):
        return Counter(seq[i:i + n] for i in range(len(seq) - n + 1))
    return Counter(tuple(seq[i:i + n]) for i in range(len(seq) - n + 1))


# --------------------------------------------------------------------------
# Subword tokenization (spBLEU)
# --------------------------------------------------------------------------


class SubwordTokenizer:
    """Greedy longest-match subword segmenter over a fixed vocabulary.

    Each whitespace-delimited word is split left to right, always taking the
    longest vocabulary entry that matches at the current position. Characters
    no entry covers become single-character pieces.
    """

    def __init__(self, vocab: Iterable[str]):
        ranks: dict[str, int] = {}
        for line_no, piece in enumerate(vocab):
            piece = normalize(piece.strip())
            if piece and piece not in ranks:
                ranks[piece] = line_no
        self.ranks = ranks
        self.max_len = max((len(p) for p in ranks), default=1)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SubwordTokenizer":
        with open(path, encoding="utf-8") as fh:
            return cls(fh.read().splitlines())

    def tokenize(self, text: str) -> list[str]:
        pieces = []
        for word in normalize(text).split():
            i = 0
            while i < len(word):
                for j in range(min(len(word), i + self.max_len), i, -1):
                    if word[i:j] in self.ranks:
                        break
                else:
                    j = i + 1
                pieces.append(word[i:j])
                i = j
        return pieces


@lru_cache(maxsize=8)
def load_subword_tokenizer(path: str) -> SubwordTokenizer:
    return SubwordTokenizer.from_file(path)


# --------------------------------------------------------------------------
# Metric identity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricId:
    """Which metric, and with which parameters, a score was computed.

    ``smoothing=None`` resolves to ``"none"`` for corpus-level aggregation and
    ``"floor"`` for sentence averages.
    """

    name: str = "bleu-13a"
    aggregation: str = "corpus-level"
    smoothing: Optional[str] = None
    epsilon: float = FLOOR_EPSILON
    order: Optional[int] = None
    beta: Optional[float] = None
    vocab: Optional[str] = None

    def __post_init__(self):
        if self.name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {self.name!r}; expected one of {METRIC_NAMES}")
        if self.aggregation not in AGGREGATION_MODES:
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if self.smoothing is None:
            default = "none" if self.aggregation == "corpus-level" else "floor"
            object.__setattr__(self, "smoothing", default)
        if self.smoothing not in SMOOTHING_MODES:
            raise ValueError(f"unknown smoothing {self.smoothing!r}")
        if self.order is None:
            object.__setattr__(self, "order", CHRF_ORDER if self.name == "chrf" else NGRAM_ORDER)
        if self.name == "chrf" and self.beta is None:
            object.__setattr__(self, "beta", float(CHRF_BETA))

    @property
    def is_bleu(self) -> bool:
        return self.name in ("bleu-13a", "spbleu")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "aggregation": self.aggregation,
            "smoothing": self.smoothing,
            "epsilon": self.epsilon,
            "order": self.order,
            "beta": self.beta,
            "vocab": self.vocab,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricId":
        return cls(**data)


# --------------------------------------------------------------------------
# BLEU
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BleuStats:
    """Clipped n-gram matches and candidate totals for orders 1..4, plus lengths."""

    matches: tuple[int, ...] = (0, 0, 0, 0)
    totals: tuple[int, ...] = (0, 0, 0, 0)
    hyp_len: int = 0
    ref_len: int = 0

    def __add__(self, other: "BleuStats") -> "BleuStats":
        if not isinstance(other, BleuStats):
            return NotImplemented
        return BleuStats(
            tuple(a + b for a, b in zip(self.matches, other.matches)),
            tuple(a + b for a, b in zip(self.totals, other.totals)),
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    @classmethod
    def zero(cls, order: int = NGRAM_ORDER) -> "BleuStats":
        return cls((0,) * order, (0,) * order, 0, 0)


def bleu_stats(hyp: Sequence[str], ref: Sequence[str], order: int = NGRAM_ORDER) -> BleuStats:
    matches, totals = [], []
    for n in range(1, order + 1):
        hyp_ngrams = ngram_counts(hyp, n)
        ref_ngrams = ngram_counts(ref, n)
        matches.append(sum((hyp_ngrams & ref_ngrams).values()))
        totals.append(max(0, len(hyp) - n + 1))
    return BleuStats(tuple(matches), tuple(totals), len(hyp), len(ref))


def sum_stats(stats: Iterable[BleuStats], order: int = NGRAM_ORDER) -> BleuStats:
    total = BleuStats.zero(order)
    for s in stats:
        total = total + s
    return total


def brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len >= ref_len:
        return 1.0
    if hyp_len == 0:
        return 0.0
    return math.exp(1.0 - ref_len / hyp_len)


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, ...]
    bp: float
    degenerate: bool = False


def aggregate_bleu(stats: BleuStats, smoothing: str = "none", epsilon: float = FLOOR_EPSILON) -> BleuScore:
    """Turn sufficient statistics into a BLEU score on the 0-100 scale.

    Orders for which the hypothesis has no n-grams at all are left out of the
    geometric mean. An empty hypothesis is degenerate and scores 0.
    """
    if smoothing not in SMOOTHING_MODES:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    if stats.totals[0] == 0:
        return BleuScore(0.0, (0.0,) * len(stats.totals), brevity_penalty(stats.hyp_len, stats.ref_len), True)

    precisions = []
    for k, (match, total) in enumerate(zip(stats.matches, stats.totals), start=1):
        if total == 0:
            break
        if smoothing == "add-k" and k > 1:
            match, total = match + 1, total + 1
        if match == 0:
            if smoothing == "floor":
                precisions.append(epsilon / total)
                continue
            precisions.append(0.0)
            continue
        precisions.append(match / total)

    bp = brevity_penalty(stats.hyp_len, stats.ref_len)
    if min(precisions) == 0.0:
        score = 0.0
    else:
        score = 100.0 * bp * math.exp(math.fsum(math.log(p) for p in precisions) / len(precisions))
    padded = tuple(precisions) + (0.0,) * (len(stats.totals) - len(precisions))
    return BleuScore(min(score, 100.0), padded, bp)


def feature_stats(stats: BleuStats) -> tuple[int, int]:
    """Return ``(max4_count, ref_length)``: correct 4-grams and reference tokens."""
    return stats.matches[3], stats.ref_len


# --------------------------------------------------------------------------
# chrF
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChrfStats:
    """Per-order character n-gram counts: hypothesis, reference, clipped matches."""

    hyp: tuple[int, ...] = field(default=(0,) * CHRF_ORDER)
    ref: tuple[int, ...] = field(default=(0,) * CHRF_ORDER)
    matches: tuple[int, ...] = field(default=(0,) * CHRF_ORDER)

    def __add__(self, other: "ChrfStats") -> "ChrfStats":
        if not isinstance(other, ChrfStats):
            return NotImplemented
        return ChrfStats(
            tuple(a + b for a, b in zip(self.hyp, other.hyp)),
            tuple(a + b for a, b in zip(self.ref, other.ref)),
            tuple(a + b for a, b in zip(self.matches, other.matches)),
        )


def chrf_stats(hyp: str, ref: str, order: int = CHRF_ORDER) -> ChrfStats:
    hyp = _WHITESPACE.sub("", normalize(hyp))
    ref = _WHITESPACE.sub("", normalize(ref))
    h, r, m = [], [], []
    for n in range(1, order + 1):
        hyp_ngrams = ngram_counts(hyp, n)
        ref_ngrams = ngram_counts(ref, n)
        h.append(max(0, len(hyp) - n + 1))
        r.append(max(0, len(ref) - n + 1))
        m.append(sum((hyp_ngrams & ref_ngrams).values()))
    return ChrfStats(tuple(h), tuple(r), tuple(m))


def chrf_from_stats(stats: ChrfStats, beta: float = CHRF_BETA) -> float:
    # an order with neither hypothesis nor reference n-grams carries no evidence and is skipped;
    # an order where only one side is empty contributes 0
    precisions, recalls = [], []
    for h, r, m in zip(stats.hyp, stats.ref, stats.matches):
        if h == 0 and r == 0:
            continue
        precisions.append(m / h if h else 0.0)
        recalls.append(m / r if r else 0.0)
    if not precisions:
        return 0.0
    p = math.fsum(precisions) / len(precisions)
    r = math.fsum(recalls) / len(recalls)
    if p + r == 0:
        return 0.0
    b2 = beta ** 2
    return min(100.0, 100.0 * (1 + b2) * p * r / (b2 * p + r))


def chrf_score(hyp: str, ref: str, n: int = CHRF_ORDER, beta: float = CHRF_BETA) -> float:
    return chrf_from_stats(chrf_stats(hyp, ref, n), beta)


# --------------------------------------------------------------------------
# Corpus scoring
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricResult:
    score: float
    degenerate: bool
    stats: Optional[BleuStats] = None

    @property
    def max4_count(self) -> Optional[int]:
        return None if self.stats is None else feature_stats(self.stats)[0]

    @property
    def ref_length(self) -> Optional[int]:
        return None if self.stats is None else feature_stats(self.stats)[1]


def tokenizer_for(metric: MetricId):
    if metric.name == "bleu-13a":
        return tokenize_13a
    if metric.name == "spbleu":
        if metric.vocab is None:
            # input is already subword-tokenized
            return lambda text: normalize(text).split()
        return load_subword_tokenizer(str(metric.vocab)).tokenize
    raise ValueError(f"metric {metric.name!r} has no tokenizer")


def score_corpus(metric: MetricId, hyps: Sequence[str], refs: Sequence[str]) -> MetricResult:
    """Score aligned hypotheses against references under ``metric``."""
    if len(hyps) != len(refs):
        raise ValueError(f"hypothesis/reference count mismatch: {len(hyps)} vs {len(refs)}")
    if metric.name == "external":
        raise ValueError("external scores are ingested as records, not computed")

    if metric.name == "chrf":
        per_segment = [chrf_stats(h, r, metric.order) for h, r in zip(hyps, refs)]
        if metric.aggregation == "sentence-average":
            scores = [chrf_from_stats(s, metric.beta) for s in per_segment]
            return MetricResult(_mean(scores), False)
        total = ChrfStats((0,) * metric.order, (0,) * metric.order, (0,) * metric.order)
        for s in per_segment:
            total = total + s
        return MetricResult(chrf_from_stats(total, metric.beta), False)

    tokenize = tokenizer_for(metric)
    per_segment = [bleu_stats(tokenize(h), tokenize(r), metric.order) for h, r in zip(hyps, refs)]
    total = sum_stats(per_segment, metric.order)
    if metric.aggregation == "sentence-average":
        results = [aggregate_bleu(s, metric.smoothing, metric.epsilon) for s in per_segment]
        return MetricResult(_mean([b.score for b in results]), any(b.degenerate for b in results), total)
    result = aggregate_bleu(total, metric.smoothing, metric.epsilon)
    return MetricResult(result.score, result.degenerate, total)


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0
