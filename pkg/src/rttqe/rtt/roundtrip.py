from __future__ import annotations

import logging
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from ..dataset import Corpus
from ..textmetrics import tokenize_13a
from ..validation import TranslationError, ValidationError, check_same_length
from .cache import TranslationCache
from .translators import Translator

logger = logging.getLogger(__name__)


def _call(translator: Translator, texts: list[str], src: str, tgt: str, batch_index: int) -> list[str]:
    try:
        out = translator.translate(texts, src, tgt)
    except TranslationError as exc:
        raise TranslationError(str(exc), batch_index) from exc
    if len(out) != len(texts):
        raise TranslationError(
            f"{translator.system_id} returned {len(out)} outputs for {len(texts)} inputs", batch_index)
    return list(out)


def cached_translate(
    cache: Optional[TranslationCache],
    translator: Translator,
    texts: Sequence[str],
    src: str,
    tgt: str,
    batch_size: Optional[int] = None,
) -> list[str]:
    """Translate ``texts``, sending only cache misses to ``translator``.

    Misses are deduplicated and sent in batches of ``batch_size``; each batch
    is persisted as soon as it returns, so a later failure keeps earlier work.
    If the cache itself fails, translation proceeds uncached and
    ``cache.degraded`` is set.
    """
    texts = list(texts)
    if cache is None:
        return _call(translator, texts, src, tgt, 0) if texts else []

    known: dict[str, str] = {}
    try:
        known = cache.lookup(translator.system_id, src, tgt, texts)
    except OSError as exc:
        _degrade(cache, exc)

    misses = list(dict.fromkeys(t for t in texts if t not in known))
    size = batch_size or len(misses) or 1
    for batch_index, start in enumerate(range(0, len(misses), size)):
        batch = misses[start:start + size]
        translated = dict(zip(batch, _call(translator, batch, src, tgt, batch_index)))
        known.update(translated)
        if not cache.degraded:
            try:
                cache.put_many(translator.system_id, src, tgt, translated)
            except OSError as exc:
                _degrade(cache, exc)
    return [known[t] for t in texts]


def _degrade(cache: TranslationCache, exc: Exception) -> None:
    cache.degraded = True
    warnings.warn(f"translation cache unavailable, continuing uncached: {exc}", RuntimeWarning, stacklevel=3)


@dataclass(frozen=True)
class RoundTripResult:
    src_lang: str
    tgt_lang: str
    fwd_system: str
    back_system: str
    sources: tuple[str, ...]
    forward: tuple[str, ...]
    back: tuple[str, ...]

    def __post_init__(self):
        if not len(self.sources) == len(self.forward) == len(self.back):
            raise ValidationError("round-trip segment lists differ in length")


def round_trip(
    corpus: Corpus,
    fwd: Translator,
    back: Translator,
    tgt: str,
    cache: Optional[TranslationCache] = None,
    batch_size: Optional[int] = None,
) -> RoundTripResult:
    """Translate ``corpus`` into ``tgt`` with ``fwd`` and back again with ``back``."""
    if len(corpus) == 0:
        raise ValidationError(f"cannot round-trip an empty {corpus.lang} corpus")
    forward = cached_translate(cache, fwd, corpus.segments, corpus.lang, tgt, batch_size)
    backward = cached_translate(cache, back, forward, tgt, corpus.lang, batch_size)
    return RoundTripResult(corpus.lang, tgt, fwd.system_id, back.system_id,
                           tuple(corpus.segments), tuple(forward), tuple(backward))


# --------------------------------------------------------------------------
# Word copy analysis
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CopyStats:
    avg_copy_count: float
    avg_copy_pct: float
    avg_copy_pct_source: float
    n: int


def sentence_copy(source: str, output: str) -> tuple[int, float, float]:
    """Tokens of ``output`` copied verbatim from ``source`` (multiset intersection).

    Returns ``(count, pct of output tokens, pct of source tokens)``.
    """
    src_tokens = tokenize_13a(source)
    out_tokens = tokenize_13a(output)
    copied = sum((Counter(out_tokens) & Counter(src_tokens)).values())
    pct_out = 100.0 * copied / len(out_tokens) if out_tokens else 0.0
    pct_src = 100.0 * copied / len(src_tokens) if src_tokens else 0.0
    return copied, pct_out, pct_src


def copy_stats(sources: Sequence[str], outputs: Sequence[str]) -> CopyStats:
    check_same_length(sources, outputs, "sources and outputs")
    if not sources:
        return CopyStats(0.0, 0.0, 0.0, 0)
    rows = [sentence_copy(s, o) for s, o in zip(sources, outputs)]
    n = len(rows)
    return CopyStats(
        sum(r[0] for r in rows) / n,
        sum(r[1] for r in rows) / n,
        sum(r[2] for r in rows) / n,
        n,
    )
