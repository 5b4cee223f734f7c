"""Run configuration and translator construction.

A config is a JSON object; every key is optional::

    {
      "seed": 13,
      "cache_dir": ".rttqe-cache",
      "metrics": ["bleu-13a", "chrf"],
      "aggregation": "corpus-level",
      "smoothing": null,
      "vocab": null,
      "created_at": null,
      "adapter": {"batch_size": 32, "timeout": 30, "concurrency": 4, "retries": 3},
      "systems": {
        "mt-api": {"type": "http", "endpoint": "https://mt.example.org", "path": "/translate",
                    "auth_env": "MT_API_TOKEN"},
        "mt-api+drop0.25": {"type": "dropout", "base": "mt-api", "rate": 0.25}
      },
      "systems_files": ["synth_systems.json"]
    }

``identity`` and ``reverse`` are always available as mock systems.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from .rtt.http import HttpTranslator
from .rtt.translators import DropoutTranslator, IdentityTranslator, ReverseWordsTranslator, Translator
from .textmetrics import MetricId
from .validation import ValidationError

BUILTIN_SYSTEMS = ("identity", "reverse")
SYSTEM_TYPES = ("identity", "reverse", "dropout", "http")
ADAPTER_DEFAULTS = {"batch_size": 32, "timeout": 30.0, "concurrency": 4, "retries": 3, "backoff": 0.5}


@dataclass
class RunConfig:
    seed: Optional[int] = None
    cache_dir: Optional[str] = None
    metrics: list = field(default_factory=lambda: ["bleu-13a", "chrf"])
    aggregation: str = "corpus-level"
    smoothing: Optional[str] = None
    vocab: Optional[str] = None
    created_at: Optional[Any] = None
    adapter: dict = field(default_factory=dict)
    systems: dict = field(default_factory=dict)
    systems_files: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[Path] = None) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        config = cls(**data)
        systems = {}
        for extra in config.systems_files:
            path = Path(extra)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            systems.update(_read_json(path).get("systems", {}))
        systems.update(config.systems)
        config.systems = systems
        config.systems_files = []
        return config

    def override(self, **values) -> "RunConfig":
        return replace(self, **{k: v for k, v in values.items() if v is not None})

    def digest(self) -> str:
        canonical = json.dumps(asdict(self), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def metric_ids(self, names=None) -> list[MetricId]:
        out = []
        for entry in names if names is not None else self.metrics:
            if isinstance(entry, dict):
                out.append(MetricId.from_dict(entry))
                continue
            name, _, aggregation = str(entry).partition("@")
            out.append(MetricId(
                name=name,
                aggregation=aggregation or self.aggregation,
                smoothing=self.smoothing if name != "chrf" else None,
                vocab=self.vocab if name == "spbleu" else None,
            ))
        return out

    def sub_seed(self, name: str) -> int:
        """Seed for the named component, derived from the run seed."""
        if self.seed is None:
            raise ValidationError(f"{name} is stochastic and the config has no seed")
        return derive_seed(self.seed, name)

    def translator(self, system_id: str) -> Translator:
        return build_translator(self, system_id)


def derive_seed(seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def load_config(path=None, **overrides) -> RunConfig:
    if path is None:
        return RunConfig().override(**overrides)
    path = Path(path)
    return RunConfig.from_dict(_read_json(path), base_dir=path.parent).override(**overrides)


def build_translator(config: RunConfig, system_id: str, _seen: tuple = ()) -> Translator:
    if system_id in _seen:
        raise ValidationError(f"system definitions form a cycle: {' -> '.join(_seen + (system_id,))}")
    spec = config.systems.get(system_id)
    if spec is None:
        if system_id == "identity":
            return IdentityTranslator()
        if system_id == "reverse":
            return ReverseWordsTranslator()
        raise ValidationError(f"unknown system {system_id!r}")

    kind = spec.get("type")
    if kind not in SYSTEM_TYPES:
        raise ValidationError(f"system {system_id!r}: unknown type {kind!r}")
    if kind == "identity":
        return IdentityTranslator(system_id)
    if kind == "reverse":
        return ReverseWordsTranslator(system_id)
    if kind == "dropout":
        base = build_translator(config, spec.get("base", "identity"), _seen + (system_id,))
        seed = spec["seed"] if spec.get("seed") is not None else config.sub_seed(system_id)
        return DropoutTranslator(base, float(spec["rate"]), int(seed), stage=spec.get("stage", "output"),
                                 system_id=system_id)
    settings = {**ADAPTER_DEFAULTS, **config.adapter, **spec}
    if "endpoint" not in settings:
        raise ValidationError(f"system {system_id!r}: http systems need an endpoint")
    return HttpTranslator(
        endpoint=settings["endpoint"],
        system_id=system_id,
        path=settings.get("path", "/translate"),
        auth_env=settings.get("auth_env"),
        batch_size=int(settings["batch_size"]),
        timeout=float(settings["timeout"]),
        concurrency=int(settings["concurrency"]),
        retries=int(settings["retries"]),
        backoff=float(settings["backoff"]),
    )


SYNTH_RATES = tuple(round(0.05 * i, 2) for i in range(17))


def synth_systems(config: RunConfig, base: str = "identity", rates=SYNTH_RATES) -> dict[str, dict]:
    """Dropout pseudo-competitors over ``base``, one per rate.

    All of them share one seed so each drops a superset of the tokens dropped
    at every lower rate.
    """
    seed = config.sub_seed(f"synth:{base}")
    return {
        f"{base}+drop{rate:.2f}": {"type": "dropout", "base": base, "rate": rate, "seed": seed}
        for rate in rates
    }
