"""Persistent translation cache.

One append-only JSON-lines log per (system, source language, target language).
Records are keyed by the SHA-256 of the NFC-normalized source text; the index
is rebuilt in memory the first time a log is touched. A torn last line from an
interrupted write is ignored on load.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from pathlib import Path
from typing import Iterable, Mapping
from urllib.parse import quote

from ..textmetrics import normalize

logger = logging.getLogger(__name__)


def digest(text: str) -> str:
    return hashlib.sha256(normalize(text).encode("utf-8")).hexdigest()


class TranslationCache:
    def __init__(self, root):
        self.root = Path(root)
        self.degraded = False
        self._indexes: dict[tuple[str, str, str], dict[str, str]] = {}
        self._lock = threading.RLock()

    def log_path(self, system_id: str, src: str, tgt: str) -> Path:
        return self.root / quote(system_id, safe="") / f"{quote(src, safe='')}-{quote(tgt, safe='')}.jsonl"

    def _index(self, system_id: str, src: str, tgt: str) -> dict[str, str]:
        key = (system_id, src, tgt)
        index = self._indexes.get(key)
        if index is not None:
            return index
        with self._lock:
            if key in self._indexes:
                return self._indexes[key]
            index = {}
            path = self.log_path(system_id, src, tgt)
            if path.exists():
                with open(path, encoding="utf-8") as fh:
                    for line_no, line in enumerate(fh, start=1):
                        try:
                            rec = json.loads(line)
                            index[rec["digest"]] = rec["translation"]
                        except (json.JSONDecodeError, KeyError, TypeError):
                            logger.warning("skipping unreadable cache record %s:%d", path, line_no)
            self._indexes[key] = index
            return index

    def get(self, system_id: str, src: str, tgt: str, text: str) -> str | None:
        return self._index(system_id, src, tgt).get(digest(text))

    def lookup(self, system_id: str, src: str, tgt: str, texts: Iterable[str]) -> dict[str, str]:
        """Map each cached text among ``texts`` to its stored translation."""
        index = self._index(system_id, src, tgt)
        found = {}
        for text in texts:
            value = index.get(digest(text))
            if value is not None:
                found[text] = value
        return found

    def put_many(self, system_id: str, src: str, tgt: str, items: Mapping[str, str]) -> None:
        if not items:
            return
        with self._lock:
            index = self._index(system_id, src, tgt)
            path = self.log_path(system_id, src, tgt)
            path.parent.mkdir(parents=True, exist_ok=True)
            now = time.time()
            lines = []
            for source, translation in items.items():
                key = digest(source)
                if key in index:
                    continue
                lines.append(json.dumps(
                    {"digest": key, "source": source, "translation": translation, "created_at": now},
                    ensure_ascii=False,
                ))
            if not lines:
                return
            with open(path, "a", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
                fh.flush()
            for source, translation in items.items():
                index.setdefault(digest(source), translation)

    def __len__(self) -> int:
        return sum(len(ix) for ix in self._indexes.values())
