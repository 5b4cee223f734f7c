"""``rtt-qe`` command line front end.

Exit status is 0 on success, 1 for invalid input and 2 when a translator or
remote adapter fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional

from . import __version__
from .analysis import correlation_report, evaluate, format_table, plot_csv, rank_systems, to_jsonl
from .config import RunConfig, load_config, synth_systems
from .dataset import enumerate_pairs, load_corpus, load_registry, save_corpus
from .predictor import FeatureSpec, build_features, fit_ols, load_model, save_model
from .rtt.cache import TranslationCache
from .rtt.roundtrip import copy_stats, round_trip
from .scoring import read_records, score_matrix, write_records
from .validation import TranslationError, ValidationError

logger = logging.getLogger("rttqe")


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _provenance(config: RunConfig) -> dict:
    return {"tool": "rttqe", "tool_version": __version__, "config_digest": config.digest()}


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path, data) -> None:
    _write_text(path, json.dumps(data, indent=2, ensure_ascii=False) + "\n")


def _write_meta(path, config: RunConfig, **extra) -> None:
    """Provenance sidecar for line-oriented outputs that cannot carry it inline."""
    _write_json(f"{path}.meta.json", {**_provenance(config), "file": Path(path).name, **extra})


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        _write_text(out, text)
    else:
        sys.stdout.write(text)


def _cache(config: RunConfig) -> Optional[TranslationCache]:
    return TranslationCache(config.cache_dir) if config.cache_dir else None


def _pair(text: str) -> tuple[str, str]:
    parts = text.split(":") if ":" in text else text.split("-")
    if len(parts) != 2 or not all(parts):
        raise ValidationError(f"language pair must look like 'src-tgt' or 'src:tgt', got {text!r}")
    return parts[0], parts[1]


def _created_at(config: RunConfig):
    if config.created_at is not None:
        return config.created_at
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    return int(epoch) if epoch else None


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_roundtrip(args, config: RunConfig) -> int:
    corpus = load_corpus(args.corpus, args.src)
    fwd = config.translator(args.fwd)
    back = config.translator(args.back)
    cache = _cache(config)
    result = round_trip(corpus, fwd, back, args.tgt, cache=cache, batch_size=args.batch_size)

    out_dir = Path(args.out_dir) if args.out_dir else Path(args.corpus).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.corpus).name
    fwd_path = out_dir / f"{stem}.{fwd.system_id}.{args.tgt}"
    back_path = out_dir / f"{stem}.{fwd.system_id}.{back.system_id}.{args.src}"
    save_corpus(result.forward, fwd_path)
    save_corpus(result.back, back_path)
    for path in (fwd_path, back_path):
        _write_meta(path, config, source=stem, src_lang=args.src, tgt_lang=args.tgt,
                    fwd_system=fwd.system_id, back_system=back.system_id, n_segments=len(result.sources))
    print(fwd_path)
    print(back_path)
    if cache is not None and cache.degraded:
        logger.warning("translation cache was unavailable; results were not cached")
    return 0


def cmd_score(args, config: RunConfig) -> int:
    corpora = {}
    for item in args.corpus:
        lang, sep, path = item.partition("=")
        if not sep:
            raise ValidationError(f"--corpus expects LANG=PATH, got {item!r}")
        corpora[lang] = load_corpus(path, lang)
    if args.pairs:
        pairs = [_pair(p) for p in args.pairs]
    else:
        langs = sorted(corpora)
        pairs = [(a, b) for a in langs for b in langs if a != b]
    systems = [config.translator(s) for s in args.systems]
    metrics = config.metric_ids(args.metrics)
    skipped: list = []
    records = score_matrix(pairs, systems, corpora, metrics, cache=_cache(config), skipped=skipped)
    for pair, why in skipped:
        logger.warning("skipped %s-%s: %s", pair[0], pair[1], why)

    write_records(records, args.out)
    _write_meta(args.out, config, n_records=len(records), skipped=[list(p) for p, _ in skipped])
    if args.plot_data:
        report = correlation_report(records)
        points = [(sys_, metric, agg, direction, src, tgt, s, t)
                  for (sys_, metric, agg, direction), pts in sorted(report.points.items())
                  for src, tgt, s, t in pts]
        _write_text(args.plot_data, plot_csv(
            points, ("system", "metric", "aggregation", "direction", "src", "tgt", "self_score", "trans_score")))
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_correlate(args, config: RunConfig) -> int:
    records = [r for path in args.records for r in read_records(path)]
    report = correlation_report(records)
    rows = [(r.system, r.metric, r.aggregation, f"{r.comparison} vs A->B", r.pearson_r, r.n_pairs)
            for r in report.rows]
    _emit(format_table(rows, ("system", "metric", "aggregation", "comparison", "pearson_r", "pairs")), args.out)
    for line in report.diagnostics:
        logger.warning(line)
    return 0


def cmd_fit(args, config: RunConfig) -> int:
    records = [r for path in args.records for r in read_records(path)]
    if args.features:
        spec = FeatureSpec(tuple(args.features))
    else:
        spec = FeatureSpec.default(args.feature_metrics or [args.target.partition("@")[0]], args.mode, args.aux)
    table = build_features(records, spec, target=args.target)
    for key, why in table.rejected.items():
        logger.warning("rejected %s: %s", "/".join(key), why)
    if args.train_type:
        partition = enumerate_pairs(load_registry(args.registry))
        allowed = {"I": partition.type1, "II": partition.type2, "III": partition.type3}
        pairs = {p for t in args.train_type for p in allowed[t]}
        table = table.subset([(k[0], k[1]) in pairs for k in table.keys])
    if len(table.keys) == 0:
        raise ValidationError("no training samples left after feature extraction")
    model = fit_ols(table, target_metric=args.target, standardize=args.standardize, clip=args.clip)
    model.training_["created_at"] = _created_at(config)
    save_model(model, args.out, provenance=_provenance(config))
    print(f"fitted {len(spec)} weights on {len(table.keys)} samples -> {args.out}")
    return 0


def cmd_predict(args, config: RunConfig) -> int:
    model = load_model(args.model)
    records = [r for path in args.records for r in read_records(path)]
    spec = FeatureSpec(tuple(model.feature_names_))
    table = build_features(records, spec, target=model.target_metric, require_target=False)
    for key, why in table.rejected.items():
        logger.warning("rejected %s: %s", "/".join(key), why)
    preds = model.predict(table.X) if len(table.keys) else []
    lines = []
    for i, (src, tgt, system) in enumerate(table.keys):
        true = None if table.y is None or table.y[i] != table.y[i] else float(table.y[i])
        lines.append(json.dumps({"src_lang": src, "tgt_lang": tgt, "system": system,
                                 "predicted": float(preds[i]), "true": true}, ensure_ascii=False))
    _write_text(args.out, "".join(line + "\n" for line in lines))
    _write_meta(args.out, config, model=Path(args.model).name, n_predictions=len(lines))
    print(f"wrote {len(lines)} predictions to {args.out}")
    return 0


def _read_scores(path, field: str) -> tuple[list, list[float]]:
    """Read numbers from plain text (one per line) or JSON lines with a value field."""
    keys, values = [], []
    with open(path, encoding="utf-8-sig") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                obj = json.loads(line)
                value = next((obj[f] for f in (field, "score", "predicted", "true") if obj.get(f) is not None), None)
                if value is None:
                    raise ValidationError(f"{path}:{line_no}: no score field")
                keys.append((obj.get("src_lang"), obj.get("tgt_lang"), obj.get("system")))
            else:
                try:
                    value = float(line)
                except ValueError:
                    raise ValidationError(f"{path}:{line_no}: not a number: {line!r}") from None
                keys.append(None)
            values.append(float(value))
    return keys, values


def cmd_eval(args, config: RunConfig) -> int:
    pkeys, pred = _read_scores(args.pred, "predicted")
    if args.truth:
        tkeys, truth = _read_scores(args.truth, "true")
        if all(k is not None for k in pkeys + tkeys):
            lookup = dict(zip(tkeys, truth))
            missing = [k for k in pkeys if k not in lookup]
            if missing:
                raise ValidationError(f"{len(missing)} predictions have no truth, e.g. {missing[0]}")
            truth = [lookup[k] for k in pkeys]
    else:
        with open(args.pred, encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        if any(r.get("true") is None for r in rows):
            raise ValidationError("predictions lack true scores; pass --truth")
        truth = [float(r["true"]) for r in rows]
    report = evaluate(pred, truth)
    table = format_table([(report.mae, report.rmse, report.pearson_r, report.kendall_tau, report.n)],
                         ("mae", "rmse", "pearson_r", f"kendall_{report.tau_variant}", "n"))
    sys.stdout.write(table)
    if args.out:
        _write_json(args.out, {**vars(report), "provenance": _provenance(config)})
    if args.plot_data:
        _write_text(args.plot_data, plot_csv(zip(pred, truth), ("predicted", "true")))
    return 0


def cmd_rank(args, config: RunConfig) -> int:
    with open(args.pred, encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault((row["src_lang"], row["tgt_lang"]), []).append(row)
    wanted = {_pair(p) for p in args.pairs} if args.pairs else None
    reports = []
    for pair, items in sorted(groups.items()):
        if wanted is not None and pair not in wanted:
            continue
        has_truth = all(r.get("true") is not None for r in items)
        entries = [(r["system"], r["predicted"], r["true"]) if has_truth else (r["system"], r["predicted"])
                   for r in items]
        report = rank_systems(entries)
        reports.append((pair, report))
        body = [(s.system, s.predicted, s.true, s.predicted_rank, s.true_rank) for s in report.systems]
        sys.stdout.write(f"{pair[0]}-{pair[1]}  tau_b={_num(report.kendall_tau)}  r={_num(report.pearson_r)}"
                         f"  mae={_num(report.mae)}  rmse={_num(report.rmse)}\n")
        sys.stdout.write(format_table(body, ("system", "predicted", "true", "pred_rank", "true_rank")))
    if args.out:
        lines = [{"src_lang": p[0], "tgt_lang": p[1], **asdict(r)} for p, r in reports]
        _write_text(args.out, to_jsonl(lines))
        _write_meta(args.out, config, n_reports=len(lines))
    return 0


def _num(v) -> str:
    return "-" if v is None else f"{v:.4f}"


def cmd_copystats(args, config: RunConfig) -> int:
    sources = load_corpus(args.source, "src").segments
    outputs = load_corpus(args.output, "out").segments
    stats = copy_stats(sources, outputs)
    header = ["avg_copy_count", "avg_copy_pct"]
    row = [stats.avg_copy_count, stats.avg_copy_pct]
    if args.verbose_copy:
        header.append("avg_copy_pct_of_source")
        row.append(stats.avg_copy_pct_source)
    sys.stdout.write(format_table([row + [stats.n]], header + ["n"]))
    if args.out:
        _write_json(args.out, {**vars(stats), "provenance": _provenance(config)})
    return 0


def cmd_synth(args, config: RunConfig) -> int:
    systems = synth_systems(config, base=args.base)
    _write_json(args.out, {"systems": systems, "provenance": _provenance(config)})
    print(f"wrote {len(systems)} systems to {args.out}")
    return 0


def cmd_partition(args, config: RunConfig) -> int:
    partition = enumerate_pairs(load_registry(args.registry))
    n1, n2, n3 = partition.counts
    print(f"Type I: {n1}\nType II: {n2}\nType III: {n3}\n({n1}, {n2}, {n3})")
    if args.out:
        _write_json(args.out, {
            "type1": [list(p) for p in partition.type1],
            "type2": [list(p) for p in partition.type2],
            "type3": [list(p) for p in partition.type3],
            "provenance": _provenance(config),
        })
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtt-qe", description="Round-trip translation quality estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--cache-dir", help="override the translation cache directory")
    common.add_argument("--aggregation", choices=("corpus-level", "sentence-average"))
    common.add_argument("--smoothing", choices=("none", "floor", "add-k"))
    common.add_argument("--vocab", help="subword vocabulary file for spbleu")
    common.add_argument("--systems-file", action="append", default=[],
                        help="extra system definitions, e.g. the output of 'synth'")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roundtrip", parents=[common], help="translate a corpus there and back")
    p.add_argument("--corpus", required=True)
    p.add_argument("--src", required=True, help="language of the corpus")
    p.add_argument("--tgt", required=True, help="intermediate language")
    p.add_argument("--fwd", required=True, help="system id for src->tgt")
    p.add_argument("--back", required=True, help="system id for tgt->src")
    p.add_argument("--out-dir")
    p.add_argument("--batch-size", type=int)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("score", parents=[common], help="Trans-Scores and Self-Scores for language pairs")
    p.add_argument("--corpus", action="append", required=True, metavar="LANG=PATH")
    p.add_argument("--pairs", nargs="*", help="pairs as src-tgt; default: all ordered pairs")
    p.add_argument("--systems", nargs="+", required=True)
    p.add_argument("--metrics", nargs="+", help="metric names, optionally name@aggregation")
    p.add_argument("--out", required=True)
    p.add_argument("--plot-data", help="CSV of (self_score, trans_score) points")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("correlate", parents=[common], help="Pearson r of Self-Score vs Trans-Score")
    p.add_argument("--records", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("fit", parents=[common], help="fit a linear predictor")
    p.add_argument("--records", nargs="+", required=True)
    p.add_argument("--target", required=True, help="target metric, optionally name@aggregation")
    p.add_argument("--features", nargs="+", help="explicit feature names")
    p.add_argument("--feature-metrics", nargs="+", help="metrics for Self-Score features (default: target)")
    p.add_argument("--mode", default="both", choices=("both", "A->B->A", "B->A->B"))
    p.add_argument("--aux", nargs="*", default=[], choices=("max4_count", "ref_length"))
    p.add_argument("--train-type", nargs="+", choices=("I", "II", "III"),
                   help="keep only these pair types (needs --registry or the bundled one)")
    p.add_argument("--registry")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--clip", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="predict Trans-Scores")
    p.add_argument("--model", required=True)
    p.add_argument("--records", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", parents=[common], help="MAE, RMSE, Pearson r and Kendall tau")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth")
    p.add_argument("--out")
    p.add_argument("--plot-data")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rank", parents=[common], help="rank systems per language pair")
    p.add_argument("--pred", required=True)
    p.add_argument("--pairs", nargs="*")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("copystats", parents=[common], help="word copy statistics")
    p.add_argument("--source", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--verbose-copy", action="store_true", help="also report the source-denominator percentage")
    p.add_argument("--out")
    p.set_defaults(func=cmd_copystats)

    p = sub.add_parser("synth", parents=[common], help="dropout pseudo-competitors at rates 0.00..0.80")
    p.add_argument("--base", default="identity")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("partition", parents=[common], help="Type I/II/III language pair counts")
    p.add_argument("--registry")
    p.add_argument("--out")
    p.set_defaults(func=cmd_partition)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config, seed=args.seed, cache_dir=args.cache_dir,
                             aggregation=args.aggregation, smoothing=args.smoothing, vocab=args.vocab)
        if args.systems_file:
            extra = RunConfig.from_dict({"systems_files": args.systems_file}).systems
            config.systems = {**extra, **config.systems}
        return args.func(args, config)
    except TranslationError as exc:
        logger.error("translation failed: %s", exc)
        return 2
    except (ValidationError, ValueError, KeyError, OSError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
