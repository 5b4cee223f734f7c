"""Translators, round-trip translation, the translation cache and word-copy analysis."""

from .cache import TranslationCache, digest
from .http import HttpTranslator
from .roundtrip import (
    CopyStats,
    RoundTripResult,
    cached_translate,
    copy_stats,
    round_trip,
    sentence_copy,
)
from .translators import (
    DropoutTranslator,
    IdentityTranslator,
    ReverseWordsTranslator,
    Translator,
    drop_tokens,
    make_dropout_translator,
)

__all__ = [
    "CopyStats",
    "DropoutTranslator",
    "HttpTranslator",
    "IdentityTranslator",
    "ReverseWordsTranslator",
    "RoundTripResult",
    "TranslationCache",
    "Translator",
    "cached_translate",
    "copy_stats",
    "digest",
    "drop_tokens",
    "make_dropout_translator",
    "round_trip",
    "sentence_copy",
]
