"""Translator interface and deterministic mock systems."""

from __future__ import annotations

import abc
import hashlib
import math
from typing import Sequence

import numpy as np

from ..textmetrics import normalize, tokenize_13a
from ..validation import ValidationError


class Translator(abc.ABC):
    """A machine translation system: a batch of texts in, a batch of texts out.

    Implementations must return exactly one output per input, in input order.
    """

    system_id: str

    @abc.abstractmethod
    def translate(self, texts: Sequence[str], src: str, tgt: str) -> list[str]:
        ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.system_id!r})"


class IdentityTranslator(Translator):
    def __init__(self, system_id: str = "identity"):
        self.system_id = system_id

    def translate(self, texts, src, tgt):
        return list(texts)


class ReverseWordsTranslator(Translator):
    """Reverses the whitespace-separated word order; applying it twice restores the text."""

    def __init__(self, system_id: str = "reverse"):
        self.system_id = system_id

    def translate(self, texts, src, tgt):
        return [" ".join(reversed(text.split())) for text in texts]


def _text_seed(text: str) -> int:
    return int.from_bytes(hashlib.sha256(normalize(text).encode("utf-8")).digest()[:8], "big")


def drop_tokens(text: str, rate: float, seed: int) -> str:
    """Delete ``floor(rate * n)`` of the n 13a tokens of ``text``, chosen uniformly.

    The draw depends only on ``seed`` and the text, so the tokens dropped at a
    lower rate are always a subset of those dropped at a higher one.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValidationError(f"dropout rate must lie in [0, 1], got {rate}")
    tokens = tokenize_13a(text)
    # tolerance keeps e.g. 0.35 * 20 from flooring to 6
    n_drop = math.floor(rate * len(tokens) + 1e-9)
    if n_drop == 0:
        return text
    rng = np.random.default_rng([seed, _text_seed(text)])
    dropped = set(rng.permutation(len(tokens))[:n_drop].tolist())
    return " ".join(tok for i, tok in enumerate(tokens) if i not in dropped)


class DropoutTranslator(Translator):
    """Wraps ``base`` and randomly deletes a fixed share of tokens.

    ``stage="output"`` drops tokens from what ``base`` produced, which is how
    synthetic competitor systems are built. ``stage="input"`` drops them from
    the source before ``base`` translates it.
    """

    def __init__(self, base: Translator, rate: float, seed: int, stage: str = "output",
                 system_id: str | None = None):
        if not 0.0 <= rate <= 1.0:
            raise ValidationError(f"dropout rate must lie in [0, 1], got {rate}")
        if stage not in ("input", "output"):
            raise ValidationError(f"stage must be 'input' or 'output', got {stage!r}")
        self.base = base
        self.rate = rate
        self.seed = seed
        self.stage = stage
        self.system_id = system_id or f"{base.system_id}+drop{rate:.2f}"

    def translate(self, texts, src, tgt):
        if self.stage == "input":
            return self.base.translate([drop_tokens(t, self.rate, self.seed) for t in texts], src, tgt)
        return [drop_tokens(t, self.rate, self.seed) for t in self.base.translate(texts, src, tgt)]


def make_dropout_translator(base: Translator, rate: float, seed: int, **kwargs) -> DropoutTranslator:
    return DropoutTranslator(base, rate, seed, **kwargs)
