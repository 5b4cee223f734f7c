import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rttqe.analysis import (
    correlation_report,
    error_stats,
    evaluate,
    format_table,
    kendall_tau,
    pearson_r,
    plot_csv,
    rank_systems,
    to_jsonl,
)
from rttqe.scoring import SELF_AB, SELF_BA, TRANS, ScoreRecord
from rttqe.textmetrics import MetricId
from rttqe.validation import UndefinedCorrelationError, ValidationError

from . import oracles

vectors = st.lists(st.integers(-5, 5), min_size=2, max_size=25)


class TestErrorStats:
    @pytest.mark.parametrize("pred, truth, expected", [
        ([1, 3], [2, 2], (1.0, 1.0)),
        ([0, 4], [0, 0], (2.0, 2 * math.sqrt(2))),
        ([5.5], [5.5], (0.0, 0.0)),
    ])
    def test_examples(self, pred, truth, expected):
        assert error_stats(pred, truth) == pytest.approx(expected)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            error_stats([1, 2], [1])

    @given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=1, max_size=30))
    def test_mae_le_rmse(self, pairs):
        mae, rmse = error_stats([p for p, _ in pairs], [t for _, t in pairs])
        assert 0 <= mae <= rmse + 1e-9


class TestCorrelations:
    def test_pearson_hand_case(self):
        assert pearson_r([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6, abs=1e-12)
        assert oracles.pearson([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6, abs=1e-12)

    def test_kendall_hand_case(self):
        assert kendall_tau([1, 2, 2, 3], [1, 2, 3, 4]) == pytest.approx(5 / math.sqrt(30), abs=1e-12)

    def test_perfect(self):
        assert pearson_r([1, 2, 3], [2, 4, 6]) == 1.0
        assert kendall_tau([1, 2, 3], [3, 2, 1]) == -1.0

    @pytest.mark.parametrize("fn", [pearson_r, kendall_tau])
    def test_constant_input_undefined(self, fn):
        with pytest.raises(UndefinedCorrelationError):
            fn([1, 1, 1], [1, 2, 3])

    @pytest.mark.parametrize("fn", [pearson_r, kendall_tau])
    def test_too_short(self, fn):
        with pytest.raises(ValidationError):
            fn([1], [1])

    @settings(max_examples=100)
    @given(vectors, st.data())
    def test_match_oracles(self, x, data):
        y = data.draw(st.lists(st.integers(-5, 5), min_size=len(x), max_size=len(x)))
        if len(set(x)) < 2 or len(set(y)) < 2:
            return
        assert pearson_r(x, y) == pytest.approx(oracles.pearson(x, y), abs=1e-12)
        assert kendall_tau(x, y) == pytest.approx(oracles.kendall_tau_b(x, y), abs=1e-12)

    @settings(max_examples=50)
    @given(vectors, st.data(), st.floats(0.1, 10), st.floats(-100, 100))
    def test_invariances(self, x, data, scale, shift):
        y = data.draw(st.lists(st.integers(-5, 5), min_size=len(x), max_size=len(x)))
        if len(set(x)) < 2 or len(set(y)) < 2:
            return
        x = np.asarray(x, dtype=float)
        affine = scale * x + shift
        assert pearson_r(affine, y) == pytest.approx(pearson_r(x, y), abs=1e-9)
        # strictly increasing transform keeps every pairwise order
        assert kendall_tau(np.exp(x), y) == kendall_tau(x, y)
        assert -1 <= pearson_r(x, y) <= 1
        assert kendall_tau(x, y) == kendall_tau(y, x)

    def test_evaluate_identical(self):
        report = evaluate([10, 20, 30], [10, 20, 30])
        assert (report.mae, report.rmse, report.pearson_r, report.kendall_tau) == (0.0, 0.0, 1.0, 1.0)
        assert report.tau_variant == "tau-b"

    def test_evaluate_constant_keeps_errors(self):
        report = evaluate([5, 5, 5], [1, 2, 3])
        assert report.mae == pytest.approx(3.0)
        assert report.pearson_r is None


def records_for(pairs, self_fn, trans_fn, system="s"):
    metric = MetricId("chrf")
    out = []
    for i, (src, tgt) in enumerate(pairs):
        out.append(ScoreRecord(src, tgt, system, None, TRANS, metric, trans_fn(i)))
        for direction in (SELF_AB, SELF_BA):
            out.append(ScoreRecord(src, tgt, system, system, direction, metric, self_fn(i)))
    return out


class TestCorrelationReport:
    def test_affine_relation_gives_one(self):
        pairs = [(f"l{i}", f"m{i}") for i in range(10)]
        report = correlation_report(records_for(pairs, lambda i: 5.0 * i, lambda i: 2.0 * i + 1))
        assert [row.pearson_r for row in report.rows] == pytest.approx([1.0, 1.0])
        assert {row.comparison for row in report.rows} == {SELF_AB, SELF_BA}
        assert len(report.points[("s", "chrf", "corpus-level", SELF_AB)]) == 10

    def test_single_pair_diagnostic(self):
        report = correlation_report(records_for([("en", "de")], lambda i: 50.0, lambda i: 40.0))
        assert report.rows == []
        assert "only 1 language pair" in report.diagnostics[0]

    def test_many_pairs_matches_oracle(self):
        rng = np.random.default_rng(0)
        langs = [f"x{i}" for i in range(20)]
        pairs = [(a, b) for a in langs for b in langs if a != b]
        selfs = rng.uniform(0, 100, len(pairs))
        trans = np.clip(0.6 * selfs + rng.normal(0, 5, len(pairs)), 0, 100)
        report = correlation_report(records_for(pairs, lambda i: float(selfs[i]), lambda i: float(trans[i])))
        assert report.rows[0].n_pairs == 380
        assert report.rows[0].pearson_r == pytest.approx(oracles.pearson(list(selfs), list(trans)), abs=1e-12)


class TestRankSystems:
    def test_perfect_agreement(self):
        report = rank_systems([("a", 30, 25), ("b", 20, 15), ("c", 10, 5)])
        assert report.kendall_tau == 1.0
        assert [s.system for s in report.systems] == ["a", "b", "c"]
        assert [s.predicted_rank for s in report.systems] == [1.0, 2.0, 3.0]

    def test_reversed(self):
        assert rank_systems([("a", 1, 3), ("b", 2, 2), ("c", 3, 1)]).kendall_tau == -1.0

    def test_ties_share_rank(self):
        report = rank_systems([("a", 10), ("b", 10), ("c", 5)])
        assert [s.predicted_rank for s in report.systems] == [1.5, 1.5, 3.0]
        assert report.kendall_tau is None

    def test_duplicates_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            rank_systems([("a", 1), ("a", 2)])

    def test_partial_truth_rejected(self):
        with pytest.raises(ValidationError):
            rank_systems([("a", 1, 2), ("b", 2)])


class TestFormats:
    def test_table(self):
        text = format_table([("a", 1.0), ("bb", None)], ["sys", "score"])
        assert text.splitlines() == ["sys  score", "---  ------", "a    1.0000", "bb   -"]

    def test_jsonl_and_csv(self):
        assert to_jsonl([{"a": 1}]) == '{"a": 1}\n'
        assert plot_csv([(0.5, "x")], ("v", "name")) == "v,name\n0.5,x\n"
