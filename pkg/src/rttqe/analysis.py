"""Prediction error, correlation and system ranking."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .scoring import SELF_AB, SELF_BA, TRANS, ScoreRecord
from .validation import UndefinedCorrelationError, ValidationError, check_pair

TAU_VARIANT = "tau-b"


def error_stats(pred, truth) -> tuple[float, float]:
    """Mean absolute error and root mean squared error."""
    pred, truth = check_pair(pred, truth)
    diff = pred - truth
    return float(np.mean(np.abs(diff))), float(math.sqrt(np.mean(diff * diff)))


def pearson_r(x, y) -> float:
    x, y = check_pair(x, y, min_length=2)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("Pearson r is undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def kendall_tau(x, y) -> float:
    """Kendall's tau-b.

    Pairs tied in both x and y are ignored; pairs tied in only one of them
    count toward that side's tie correction.
    """
    x, y = check_pair(x, y, min_length=2)
    i, j = np.triu_indices(len(x), k=1)
    sx = np.sign(x[i] - x[j])
    sy = np.sign(y[i] - y[j])
    untied_x = int(np.count_nonzero(sx))
    untied_y = int(np.count_nonzero(sy))
    if untied_x == 0 or untied_y == 0:
        raise UndefinedCorrelationError("Kendall tau is undefined when every pair is tied")
    s = int(np.sum(sx * sy))
    return max(-1.0, min(1.0, s / math.sqrt(untied_x * untied_y)))


@dataclass(frozen=True)
class ErrorReport:
    mae: float
    rmse: float
    pearson_r: Optional[float]
    kendall_tau: Optional[float]
    n: int
    tau_variant: str = TAU_VARIANT


def _maybe(fn, x, y) -> Optional[float]:
    try:
        return fn(x, y)
    except UndefinedCorrelationError:
        return None


def evaluate(pred, truth) -> ErrorReport:
    """MAE, RMSE and both correlations; a correlation is ``None`` when undefined."""
    pred, truth = check_pair(pred, truth)
    mae, rmse = error_stats(pred, truth)
    if len(pred) < 2:
        return ErrorReport(mae, rmse, None, None, len(pred))
    return ErrorReport(mae, rmse, _maybe(pearson_r, pred, truth), _maybe(kendall_tau, pred, truth), len(pred))


# --------------------------------------------------------------------------
# Trans-Score vs Self-Score correlation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationRow:
    system: str
    metric: str
    aggregation: str
    comparison: str
    pearson_r: float
    n_pairs: int


@dataclass
class CorrelationReport:
    rows: list[CorrelationRow]
    diagnostics: list[str] = field(default_factory=list)
    points: dict[tuple, list[tuple[str, str, float, float]]] = field(default_factory=dict)


def correlation_report(records: Iterable[ScoreRecord]) -> CorrelationReport:
    """Pearson r over language pairs between Trans-Score and each Self-Score direction.

    One row per (system, metric, aggregation, comparison). The points behind
    each row, ``(src, tgt, self_score, trans_score)``, are kept for plotting.
    """
    trans: dict[tuple, float] = {}
    selfs: dict[tuple, float] = {}
    for rec in records:
        key = (rec.system_ab, rec.metric.name, rec.aggregation, rec.src_lang, rec.tgt_lang)
        if rec.direction == TRANS:
            trans[key] = rec.score
        else:
            selfs[key + (rec.direction,)] = rec.score

    groups: dict[tuple, list] = {}
    for key, t in sorted(trans.items()):
        system, metric, aggregation, src, tgt = key
        for direction in (SELF_AB, SELF_BA):
            s = selfs.get(key + (direction,))
            if s is not None:
                groups.setdefault((system, metric, aggregation, direction), []).append((src, tgt, s, t))

    report = CorrelationReport([])
    for (system, metric, aggregation, direction), points in sorted(groups.items()):
        label = f"{system} {metric} {direction} vs {TRANS}"
        if len(points) < 2:
            report.diagnostics.append(f"{label}: only {len(points)} language pair(s), need 2")
            continue
        xs = [p[2] for p in points]
        ys = [p[3] for p in points]
        try:
            r = pearson_r(xs, ys)
        except UndefinedCorrelationError as exc:
            report.diagnostics.append(f"{label}: {exc}")
            continue
        report.rows.append(CorrelationRow(system, metric, aggregation, direction, r, len(points)))
        report.points[(system, metric, aggregation, direction)] = points
    if not groups:
        report.diagnostics.append("no language pair has both a Trans-Score and a Self-Score")
    return report


# --------------------------------------------------------------------------
# Ranking
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RankedSystem:
    system: str
    predicted: float
    true: Optional[float]
    predicted_rank: float
    true_rank: Optional[float]


@dataclass(frozen=True)
class RankingReport:
    systems: tuple[RankedSystem, ...]
    kendall_tau: Optional[float] = None
    pearson_r: Optional[float] = None
    mae: Optional[float] = None
    rmse: Optional[float] = None
    tau_variant: str = TAU_VARIANT


def _ranks(scores: Sequence[float]) -> np.ndarray:
    # rank 1 is the best (highest) score; ties share their average rank
    return rankdata(-np.asarray(scores, dtype=float), method="average")


def rank_systems(entries: Sequence) -> RankingReport:
    """Rank systems by predicted score and compare with the true ranking if given.

    ``entries`` holds ``(system_id, predicted)`` or ``(system_id, predicted, true)``
    tuples. True scores must be given for all systems or for none.
    """
    entries = [tuple(e) for e in entries]
    if len(entries) < 2:
        raise ValidationError("ranking needs at least 2 systems")
    ids = [e[0] for e in entries]
    dupes = sorted({s for s in ids if ids.count(s) > 1})
    if dupes:
        raise ValidationError(f"duplicate system ids: {dupes}")
    predicted = [float(e[1]) for e in entries]
    truths = [e[2] if len(e) > 2 else None for e in entries]
    has_truth = [t is not None for t in truths]
    if any(has_truth) and not all(has_truth):
        raise ValidationError("true scores must be given for every system or for none")

    pred_ranks = _ranks(predicted)
    true_ranks = _ranks([float(t) for t in truths]) if all(has_truth) else [None] * len(entries)
    systems = tuple(
        RankedSystem(s, p, None if t is None else float(t), float(pr), None if tr is None else float(tr))
        for s, p, t, pr, tr in zip(ids, predicted, truths, pred_ranks, true_ranks)
    )
    systems = tuple(sorted(systems, key=lambda r: (r.predicted_rank, r.system)))
    if not all(has_truth):
        return RankingReport(systems)
    truth = [float(t) for t in truths]
    mae, rmse = error_stats(predicted, truth)
    return RankingReport(systems, _maybe(kendall_tau, predicted, truth), _maybe(pearson_r, predicted, truth),
                         mae, rmse)


# --------------------------------------------------------------------------
# Output formats
# --------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def format_table(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    """Plain-text table with left-aligned, space-padded columns."""
    cells = [[str(h) for h in header]] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def to_jsonl(items: Iterable) -> str:
    out = []
    for item in items:
        data = asdict(item) if hasattr(item, "__dataclass_fields__") else dict(item)
        out.append(json.dumps(data, ensure_ascii=False))
    return "".join(line + "\n" for line in out)


def plot_csv(points: Iterable[Sequence], header: Sequence[str] = ("x", "y")) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for p in points:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in p])
    return buf.getvalue()
