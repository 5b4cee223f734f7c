"""Corpora, parallel alignment, the language registry and Type I/II/III pairs."""

from __future__ import annotations

import csv
import io
import unicodedata
from dataclasses import dataclass
from importlib import resources
from itertools import permutations
from pathlib import Path
from typing import Iterable, Sequence, Union

from .validation import ValidationError

RESOURCE_CLASSES = ("high", "medium", "low")
USAGES = ("train+test", "test")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Corpus:
    """Monolingual segments in one language, one segment per line."""

    lang: str
    segments: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        for i, seg in enumerate(self.segments, start=1):
            if "\n" in seg or "\r" in seg:
                raise ValidationError(f"segment {i} of {self.lang} corpus contains a line break")

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)


@dataclass(frozen=True)
class ParallelCorpus:
    src_lang: str
    tgt_lang: str
    sources: tuple[str, ...]
    targets: tuple[str, ...]

    def __post_init__(self):
        if len(self.sources) != len(self.targets):
            raise ValidationError(
                f"parallel sides differ in length: ({len(self.sources)}, {len(self.targets)})"
            )

    def __len__(self) -> int:
        return len(self.sources)

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return list(zip(self.sources, self.targets))


def load_corpus(path: PathLike, lang: str) -> Corpus:
    """Read a UTF-8 corpus: BOM stripped, CRLF accepted, segments NFC-normalized."""
    data = Path(path).read_bytes()
    if data.startswith(b"\xef\xbb\xbf"):
        data = data[3:]
    if not data:
        return Corpus(lang, ())
    lines = data.split(b"\n")
    if lines[-1] == b"":
        lines.pop()
    segments = []
    for line_no, raw in enumerate(lines, start=1):
        if raw.endswith(b"\r"):
            raw = raw[:-1]
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValidationError(f"{path}: invalid UTF-8 on line {line_no}: {exc.reason}") from None
        segments.append(unicodedata.normalize("NFC", text))
    return Corpus(lang, tuple(segments))


def save_corpus(corpus: Union[Corpus, Sequence[str]], path: PathLike) -> None:
    segments = corpus.segments if isinstance(corpus, Corpus) else corpus
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for seg in segments:
            fh.write(seg + "\n")


def align_parallel(corpus_a: Corpus, corpus_b: Corpus) -> ParallelCorpus:
    if len(corpus_a) != len(corpus_b):
        raise ValidationError(
            f"cannot align corpora of different sizes ({len(corpus_a)}, {len(corpus_b)})"
        )
    return ParallelCorpus(corpus_a.lang, corpus_b.lang, corpus_a.segments, corpus_b.segments)


# --------------------------------------------------------------------------
# Language registry
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LanguageSpec:
    code: str
    resource: str = "medium"
    usage: str = "train+test"

    def __post_init__(self):
        if self.resource not in RESOURCE_CLASSES:
            raise ValidationError(f"{self.code}: unknown resource class {self.resource!r}")
        if self.usage not in USAGES:
            raise ValidationError(f"{self.code}: unknown usage {self.usage!r}")


@dataclass(frozen=True)
class PairPartition:
    type1: tuple[tuple[str, str], ...]
    type2: tuple[tuple[str, str], ...]
    type3: tuple[tuple[str, str], ...]

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.type1), len(self.type2), len(self.type3)

    def type_of(self, pair: tuple[str, str]) -> str:
        for name, pairs in (("I", self.type1), ("II", self.type2), ("III", self.type3)):
            if pair in pairs:
                return name
        raise KeyError(pair)


def _read_registry(fh) -> list[LanguageSpec]:
    reader = csv.DictReader(fh)
    missing = {"code", "resource", "usage"} - set(reader.fieldnames or ())
    if missing:
        raise ValidationError(f"registry is missing columns: {sorted(missing)}")
    return [
        LanguageSpec(row["code"].strip(), row["resource"].strip(), row["usage"].strip())
        for row in reader
    ]


def load_registry(path: PathLike | None = None) -> list[LanguageSpec]:
    """Load a ``code,resource,usage`` CSV; without a path, the bundled 33-language registry."""
    if path is None:
        text = resources.files("rttqe.data").joinpath("flores_ae33.csv").read_text(encoding="utf-8")
        return _read_registry(io.StringIO(text))
    with open(path, encoding="utf-8-sig", newline="") as fh:
        return _read_registry(fh)


def save_registry(registry: Iterable[LanguageSpec], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["code", "resource", "usage"])
        for spec in registry:
            writer.writerow([spec.code, spec.resource, spec.usage])


def enumerate_pairs(registry: Sequence[LanguageSpec]) -> PairPartition:
    """Split all ordered language pairs by how many sides were seen in training."""
    if not registry:
        raise ValidationError("registry is empty")
    codes = [spec.code for spec in registry]
    dupes = sorted({c for c in codes if codes.count(c) > 1})
    if dupes:
        raise ValidationError(f"duplicate language codes: {dupes}")

    seen = {spec.code for spec in registry if spec.usage == "train+test"}
    type1, type2, type3 = [], [], []
    for a, b in permutations(codes, 2):
        n_seen = (a in seen) + (b in seen)
        (type3, type2, type1)[n_seen].append((a, b))
    return PairPartition(tuple(type1), tuple(type2), tuple(type3))
