"""HTTP adapter for remote MT services.

Wire contract::

    POST {endpoint}{path}
    {"source_lang": "...", "target_lang": "...", "texts": ["...", ...]}
    -> {"translations": ["...", ...]}   # same length as "texts"

Transport errors are retried with exponential backoff; an HTTP error status is
a semantic failure and is raised immediately.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import httpx

from ..validation import TranslationError, ValidationError
from .translators import Translator

logger = logging.getLogger(__name__)


class HttpTranslator(Translator):
    def __init__(
        self,
        endpoint: str,
        system_id: str,
        path: str = "/translate",
        auth_env: Optional[str] = None,
        batch_size: int = 32,
        timeout: float = 30.0,
        concurrency: int = 4,
        retries: int = 3,
        backoff: float = 0.5,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if batch_size < 1 or concurrency < 1 or retries < 0:
            raise ValidationError("batch_size and concurrency must be >= 1 and retries >= 0")
        self.endpoint = endpoint.rstrip("/")
        self.system_id = system_id
        self.path = path if path.startswith("/") else "/" + path
        self.auth_env = auth_env
        self.batch_size = batch_size
        self.timeout = timeout
        self.concurrency = concurrency
        self.retries = retries
        self.backoff = backoff
        self._transport = transport
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        if not self.auth_env:
            return {}
        token = os.environ.get(self.auth_env)
        if not token:
            raise ValidationError(f"environment variable {self.auth_env} holding the API token is not set")
        return {"Authorization": f"Bearer {token}"}

    def _post(self, client: httpx.Client, batch: list[str], src: str, tgt: str, index: int) -> list[str]:
        body = {"source_lang": src, "target_lang": tgt, "texts": batch}
        for attempt in range(self.retries + 1):
            try:
                response = client.post(self.path, json=body)
            except httpx.TransportError as exc:
                if attempt == self.retries:
                    raise TranslationError(f"{self.system_id}: {exc!r} after {attempt + 1} attempts", index) from exc
                delay = self.backoff * 2 ** attempt
                logger.warning("%s: transport error on batch %d (%r), retrying in %.2fs",
                               self.system_id, index, exc, delay)
                self._sleep(delay)
                continue
            if not response.is_success:
                raise TranslationError(f"{self.system_id}: HTTP {response.status_code}: {response.text[:200]}", index)
            try:
                translations = response.json()["translations"]
            except (ValueError, KeyError, TypeError) as exc:
                raise TranslationError(f"{self.system_id}: malformed response ({exc!r})", index) from exc
            if not isinstance(translations, list) or len(translations) != len(batch) or \
                    not all(isinstance(t, str) for t in translations):
                raise TranslationError(
                    f"{self.system_id}: expected {len(batch)} translations, got {translations!r:.200}", index)
            return translations
        raise AssertionError("unreachable")

    def translate(self, texts, src, tgt):
        texts = list(texts)
        if not texts:
            return []
        batches = [texts[i:i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        headers = self._headers()
        with httpx.Client(base_url=self.endpoint, headers=headers, timeout=self.timeout,
                          transport=self._transport) as client:
            if len(batches) == 1 or self.concurrency == 1:
                results = [self._post(client, b, src, tgt, i) for i, b in enumerate(batches)]
            else:
                with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
                    futures = [pool.submit(self._post, client, b, src, tgt, i) for i, b in enumerate(batches)]
                    results = [f.result() for f in futures]
        return [t for batch in results for t in batch]
