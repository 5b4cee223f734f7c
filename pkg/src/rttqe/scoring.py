"""Trans-Scores from parallel data and Self-Scores from round trips.

Direction tags are plain ASCII: ``"A->B"`` for forward translation against a
reference, ``"A->B->A"`` for the round trip starting in A and ``"B->A->B"``
for the one starting in B. Language pairs are always stated as (A, B), with
``system_ab`` the A-to-B system and ``system_ba`` the B-to-A system.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .dataset import Corpus, ParallelCorpus, align_parallel
from .rtt.cache import TranslationCache
from .rtt.roundtrip import cached_translate
from .rtt.translators import Translator
from .textmetrics import MetricId, score_corpus
from .validation import ValidationError

logger = logging.getLogger(__name__)

TRANS = "A->B"
SELF_AB = "A->B->A"
SELF_BA = "B->A->B"
DIRECTIONS = (TRANS, SELF_AB, SELF_BA)


@dataclass(frozen=True)
class ScoreRecord:
    src_lang: str
    tgt_lang: str
    system_ab: str
    system_ba: Optional[str]
    direction: str
    metric: MetricId
    score: float
    max4_count: Optional[int] = None
    ref_length: Optional[int] = None
    aggregation: str = "corpus-level"
    smoothing: Optional[str] = None
    n_segments: int = 0
    degenerate: bool = False

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValidationError(f"unknown direction {self.direction!r}")
        if not 0.0 <= self.score <= 100.0:
            raise ValidationError(f"score {self.score} outside [0, 100]")

    @property
    def pair(self) -> tuple[str, str]:
        return self.src_lang, self.tgt_lang

    def sort_key(self) -> tuple:
        return (self.src_lang, self.tgt_lang, self.system_ab, self.system_ba or "",
                DIRECTIONS.index(self.direction), self.metric.name, self.aggregation, self.smoothing or "")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["metric"] = self.metric.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScoreRecord":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown ScoreRecord fields: {sorted(unknown)}")
        kwargs = dict(data)
        metric = kwargs["metric"]
        kwargs["metric"] = MetricId.from_dict(metric) if isinstance(metric, Mapping) else MetricId(metric)
        return cls(**kwargs)


def _record(metric: MetricId, hyps, refs, *, src_lang, tgt_lang, system_ab, system_ba, direction) -> ScoreRecord:
    result = score_corpus(metric, hyps, refs)
    return ScoreRecord(
        src_lang=src_lang,
        tgt_lang=tgt_lang,
        system_ab=system_ab,
        system_ba=system_ba,
        direction=direction,
        metric=metric,
        score=result.score,
        max4_count=result.max4_count,
        ref_length=result.ref_length,
        aggregation=metric.aggregation,
        smoothing=metric.smoothing,
        n_segments=len(hyps),
        degenerate=result.degenerate,
    )


def trans_score(sys_ab: Translator, parallel: ParallelCorpus, metric: MetricId,
                cache: Optional[TranslationCache] = None) -> ScoreRecord:
    """Score forward translations of the A side against the B side."""
    if len(parallel) == 0:
        raise ValidationError("trans_score needs a nonempty parallel corpus")
    hyps = cached_translate(cache, sys_ab, parallel.sources, parallel.src_lang, parallel.tgt_lang)
    return _record(metric, hyps, parallel.targets, src_lang=parallel.src_lang, tgt_lang=parallel.tgt_lang,
                   system_ab=sys_ab.system_id, system_ba=None, direction=TRANS)


def _round_trip_texts(direction, sys_ab, sys_ba, corpus, src_lang, tgt_lang, cache):
    if direction == SELF_AB:
        middle = cached_translate(cache, sys_ab, corpus.segments, src_lang, tgt_lang)
        return cached_translate(cache, sys_ba, middle, tgt_lang, src_lang)
    middle = cached_translate(cache, sys_ba, corpus.segments, tgt_lang, src_lang)
    return cached_translate(cache, sys_ab, middle, src_lang, tgt_lang)


def self_score(direction: str, sys_ab: Translator, sys_ba: Translator, corpus: Corpus, metric: MetricId,
               src_lang: str, tgt_lang: str, cache: Optional[TranslationCache] = None) -> ScoreRecord:
    """Score the round trip of ``corpus`` against itself.

    ``direction="A->B->A"`` expects ``corpus`` in ``src_lang``;
    ``"B->A->B"`` expects it in ``tgt_lang``.
    """
    if direction not in (SELF_AB, SELF_BA):
        raise ValidationError(f"self_score direction must be {SELF_AB!r} or {SELF_BA!r}, got {direction!r}")
    expected = src_lang if direction == SELF_AB else tgt_lang
    if corpus.lang != expected:
        raise ValidationError(f"{direction} needs a {expected} corpus, got {corpus.lang}")
    if len(corpus) == 0:
        raise ValidationError(f"self_score needs a nonempty {corpus.lang} corpus")
    hyps = _round_trip_texts(direction, sys_ab, sys_ba, corpus, src_lang, tgt_lang, cache)
    return _record(metric, hyps, corpus.segments, src_lang=src_lang, tgt_lang=tgt_lang,
                   system_ab=sys_ab.system_id, system_ba=sys_ba.system_id, direction=direction)


SystemSpec = Union[Translator, tuple[Translator, Translator]]


def score_matrix(
    pairs: Iterable[tuple[str, str]],
    systems: Sequence[SystemSpec],
    corpora: Mapping[str, Corpus],
    metrics: Sequence[MetricId],
    cache: Optional[TranslationCache] = None,
    skipped: Optional[list] = None,
) -> list[ScoreRecord]:
    """One record per (pair, system, direction, metric), in stable order.

    ``corpora`` maps language codes to multi-way aligned corpora; the A->B
    score pairs ``corpora[A]`` with ``corpora[B]`` line by line. A system is
    either one multilingual translator or an ``(A->B, B->A)`` tuple. Pairs
    with a missing corpus are skipped, logged and appended to ``skipped``.
    """
    records = []
    for src, tgt in pairs:
        missing = [lang for lang in (src, tgt) if lang not in corpora]
        if missing:
            logger.warning("skipping pair %s-%s: no corpus for %s", src, tgt, ", ".join(missing))
            if skipped is not None:
                skipped.append(((src, tgt), f"no corpus for {', '.join(missing)}"))
            continue
        corpus_a, corpus_b = corpora[src], corpora[tgt]
        parallel = align_parallel(corpus_a, corpus_b) if len(corpus_a) == len(corpus_b) else None
        for system in systems:
            sys_ab, sys_ba = system if isinstance(system, tuple) else (system, system)
            # translate once per direction, then score every metric on the same outputs
            fwd = round_ab = round_ba = None
            if parallel is not None:
                fwd = cached_translate(cache, sys_ab, corpus_a.segments, src, tgt)
            round_ab = _round_trip_texts(SELF_AB, sys_ab, sys_ba, corpus_a, src, tgt, cache)
            round_ba = _round_trip_texts(SELF_BA, sys_ab, sys_ba, corpus_b, src, tgt, cache)
            common = dict(src_lang=src, tgt_lang=tgt, system_ab=sys_ab.system_id)
            for metric in metrics:
                if fwd is not None:
                    records.append(_record(metric, fwd, corpus_b.segments, system_ba=None, direction=TRANS, **common))
                records.append(_record(metric, round_ab, corpus_a.segments, system_ba=sys_ba.system_id,
                                       direction=SELF_AB, **common))
                records.append(_record(metric, round_ba, corpus_b.segments, system_ba=sys_ba.system_id,
                                       direction=SELF_BA, **common))
            if parallel is None:
                logger.warning("%s-%s: corpora are not aligned (%d vs %d lines), no A->B score",
                               src, tgt, len(corpus_a), len(corpus_b))
    records.sort(key=ScoreRecord.sort_key)
    return records


# --------------------------------------------------------------------------
# Line-delimited JSON
# --------------------------------------------------------------------------


def dumps_record(record: ScoreRecord) -> str:
    return json.dumps(record.to_dict(), ensure_ascii=False)


def write_records(records: Iterable[ScoreRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(dumps_record(record) + "\n")


def read_records(path) -> list[ScoreRecord]:
    records = []
    with open(path, encoding="utf-8-sig") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(ScoreRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, TypeError, KeyError) as exc:
                raise ValidationError(f"{Path(path).name}:{line_no}: bad score record ({exc})") from None
    return records
