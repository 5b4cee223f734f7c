import json

import numpy as np
import pytest

from rttqe.cli import main
from rttqe.rtt import IdentityTranslator

from . import oracles


def write_corpus(path, n, seed):
    rng = np.random.default_rng(seed)
    lines = [" ".join(t) for t in oracles.random_corpus(rng, n, vocab_size=25, min_len=4)]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "seed": 13,
        "cache_dir": str(tmp_path / "cache"),
        "created_at": "2024-01-01T00:00:00Z",
        "systems": {
            "drop50": {"type": "dropout", "base": "identity", "rate": 0.5},
            "drop20": {"type": "dropout", "base": "identity", "rate": 0.2},
            "down": {"type": "http", "endpoint": "http://127.0.0.1:9", "retries": 0, "timeout": 1},
        },
    }), encoding="utf-8")
    return path


@pytest.fixture
def calls(monkeypatch):
    counter = []
    original = IdentityTranslator.translate

    def counting(self, texts, src, tgt):
        counter.append(len(texts))
        return original(self, texts, src, tgt)

    monkeypatch.setattr(IdentityTranslator, "translate", counting)
    return counter


def test_partition(capsys):
    assert main(["partition"]) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1] == "(380, 520, 156)"


class TestRoundtrip:
    def test_identity_restores_bytes(self, tmp_path, config):
        corpus = write_corpus(tmp_path / "src.en", 20, 0)
        assert main(["roundtrip", "--config", str(config), "--corpus", str(corpus), "--src", "en", "--tgt", "de",
                     "--fwd", "identity", "--back", "identity"]) == 0
        back = tmp_path / "src.en.identity.identity.en"
        assert back.read_bytes() == corpus.read_bytes()
        meta = json.loads((tmp_path / "src.en.identity.identity.en.meta.json").read_text())
        assert meta["tool"] == "rttqe" and len(meta["config_digest"]) == 64

    def test_rerun_hits_cache(self, tmp_path, config, calls):
        corpus = write_corpus(tmp_path / "src.en", 20, 1)
        argv = ["roundtrip", "--config", str(config), "--corpus", str(corpus), "--src", "en", "--tgt", "de",
                "--fwd", "drop50", "--back", "identity", "--out-dir"]
        assert main(argv + [str(tmp_path / "a")]) == 0
        first_calls = len(calls)
        assert first_calls > 0
        assert main(argv + [str(tmp_path / "b")]) == 0
        assert len(calls) == first_calls
        name = "src.en.drop50.identity.en"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seeded_dropout_reproducible_without_cache(self, tmp_path, config):
        corpus = write_corpus(tmp_path / "src.en", 30, 2)
        outputs = []
        for run in ("x", "y"):
            argv = ["roundtrip", "--config", str(config), "--cache-dir", str(tmp_path / f"cache-{run}"),
                    "--corpus", str(corpus), "--src", "en", "--tgt", "de", "--fwd", "drop50", "--back", "identity",
                    "--out-dir", str(tmp_path / run)]
            assert main(argv) == 0
            outputs.append((tmp_path / run / "src.en.drop50.de").read_bytes())
        assert outputs[0] == outputs[1]
        assert outputs[0] != corpus.read_bytes()

    def test_translation_failure_exit_code(self, tmp_path, config):
        corpus = write_corpus(tmp_path / "src.en", 3, 3)
        assert main(["roundtrip", "--config", str(config), "--corpus", str(corpus), "--src", "en", "--tgt", "de",
                     "--fwd", "down", "--back", "identity"]) == 2

    def test_missing_corpus_exit_code(self, tmp_path, config):
        assert main(["roundtrip", "--config", str(config), "--corpus", str(tmp_path / "nope"), "--src", "en",
                     "--tgt", "de", "--fwd", "identity", "--back", "identity"]) == 1

    def test_unknown_system_exit_code(self, tmp_path, config):
        corpus = write_corpus(tmp_path / "src.en", 3, 3)
        assert main(["roundtrip", "--config", str(config), "--corpus", str(corpus), "--src", "en", "--tgt", "de",
                     "--fwd", "nonesuch", "--back", "identity"]) == 1


def test_synth(tmp_path, config):
    out = tmp_path / "synth.json"
    assert main(["synth", "--config", str(config), "--out", str(out)]) == 0
    systems = json.loads(out.read_text())["systems"]
    assert len(systems) == 17
    assert sorted(s["rate"] for s in systems.values())[-1] == 0.8
    assert len({s["seed"] for s in systems.values()}) == 1


def test_synth_needs_seed(tmp_path):
    assert main(["synth", "--out", str(tmp_path / "s.json")]) == 1


class TestEval:
    def test_identical_scores(self, tmp_path, capsys):
        pred = tmp_path / "pred.txt"
        pred.write_text("10\n20\n35\n", encoding="utf-8")
        out = tmp_path / "eval.json"
        assert main(["eval", "--pred", str(pred), "--truth", str(pred), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert (report["mae"], report["rmse"], report["pearson_r"]) == (0.0, 0.0, 1.0)

    def test_bad_number(self, tmp_path):
        pred = tmp_path / "pred.txt"
        pred.write_text("10\nabc\n", encoding="utf-8")
        assert main(["eval", "--pred", str(pred), "--truth", str(pred)]) == 1


def test_copystats(tmp_path, capsys):
    src = tmp_path / "src.txt"
    out = tmp_path / "out.txt"
    src.write_text("a b c\n", encoding="utf-8")
    out.write_text("a x\n", encoding="utf-8")
    report = tmp_path / "copy.json"
    assert main(["copystats", "--source", str(src), "--output", str(out), "--out", str(report)]) == 0
    data = json.loads(report.read_text())
    assert (data["avg_copy_count"], data["avg_copy_pct"]) == (1.0, 50.0)


def test_score_fit_predict_rank(tmp_path, config, capsys):
    langs = ["en", "de", "fr"]
    corpus_args = []
    for i, lang in enumerate(langs):
        corpus_args += ["--corpus", f"{lang}={write_corpus(tmp_path / f'c.{lang}', 40, 10 + i)}"]
    synth = tmp_path / "synth.json"
    assert main(["synth", "--config", str(config), "--out", str(synth)]) == 0
    systems = list(json.loads(synth.read_text())["systems"])
    scores = tmp_path / "scores.jsonl"
    common = ["--config", str(config), "--systems-file", str(synth)]
    assert main(["score", *common, *corpus_args, "--systems", *systems, "--metrics", "bleu-13a", "chrf",
                 "--out", str(scores), "--plot-data", str(tmp_path / "plot.csv")]) == 0
    # 6 ordered pairs, 17 systems, 3 directions, 2 metrics
    assert len(scores.read_text().splitlines()) == 6 * 17 * 3 * 2

    model = tmp_path / "model.json"
    assert main(["fit", *common, "--records", str(scores), "--target", "chrf", "--out", str(model)]) == 0
    saved = json.loads(model.read_text())
    assert saved["feature_names"] == ["self_score(A->B->A,chrf)", "self_score(B->A->B,chrf)"]
    assert saved["training"]["created_at"] == "2024-01-01T00:00:00Z"

    preds = tmp_path / "pred.jsonl"
    assert main(["predict", *common, "--model", str(model), "--records", str(scores), "--out", str(preds)]) == 0
    rows = [json.loads(line) for line in preds.read_text().splitlines()]
    assert len(rows) == 6 * 17

    capsys.readouterr()
    ranks = tmp_path / "rank.jsonl"
    assert main(["rank", *common, "--pred", str(preds), "--pairs", "en-de", "--out", str(ranks)]) == 0
    report = json.loads(ranks.read_text())
    assert report["kendall_tau"] > 0.9
    assert "en-de" in capsys.readouterr().out

    assert main(["eval", *common, "--pred", str(preds)]) == 0

    again = tmp_path / "model2.json"
    assert main(["fit", *common, "--records", str(scores), "--target", "chrf", "--out", str(again)]) == 0
    assert again.read_bytes() == model.read_bytes()
