"""Tests for classification metrics, probability scores and McNemar's test."""

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusionet.evalkit import (
    MetricsReport,
    brier,
    classification_metrics,
    emit_report,
    mcnemar,
    nll,
)

labels_st = st.lists(st.sampled_from(["real", "fake"]), min_size=1, max_size=40)


class TestClassificationMetrics:
    def test_all_correct(self):
        report = classification_metrics(["real", "fake"], ["real", "fake"])
        assert (report.accuracy, report.precision, report.recall, report.f1) == (1, 1, 1, 1)

    def test_hand_confusion_matrix(self):
        gold = ["real", "real", "fake", "fake"]
        pred = ["real", "fake", "fake", "fake"]
        report = classification_metrics(pred, gold, "weighted")
        # real: tp=1 fp=0 fn=1; fake: tp=2 fp=1 fn=0
        assert report.accuracy == 0.75
        assert report.precision == pytest.approx((1.0 + 2 / 3) / 2)
        assert report.recall == 0.75
        assert report.f1 == pytest.approx((2 / 3 + 0.8) / 2)

    def test_single_class_gold_warns(self):
        with pytest.warns(UserWarning, match="never predicted"):
            report = classification_metrics(["real"] * 3, ["real"] * 3)
        assert report.accuracy == 1.0
        assert report.per_class["fake"].precision == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            classification_metrics(["real"], ["real", "fake"])

    def test_empty_input(self):
        with pytest.raises(ValueError):
            classification_metrics([], [])

    def test_macro_micro_modes(self):
        gold = ["real", "real", "fake", "fake"]
        pred = ["real", "fake", "fake", "fake"]
        macro = classification_metrics(pred, gold, "macro")
        micro = classification_metrics(pred, gold, "micro")
        assert macro.precision == pytest.approx((1.0 + 2 / 3) / 2)
        assert micro.precision == micro.recall == micro.f1 == micro.accuracy

    @given(labels_st, labels_st)
    @settings(max_examples=150)
    def test_weighted_recall_equals_accuracy(self, pred, gold):
        n = min(len(pred), len(gold))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = classification_metrics(pred[:n], gold[:n], "weighted")
        assert report.recall == pytest.approx(report.accuracy, abs=1e-12)

    @given(labels_st, labels_st, st.randoms(use_true_random=False))
    @settings(max_examples=100)
    def test_permutation_invariance(self, pred, gold, rnd):
        import warnings

        n = min(len(pred), len(gold))
        pred, gold = pred[:n], gold[:n]
        order = list(range(n))
        rnd.shuffle(order)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            base = classification_metrics(pred, gold)
            perm = classification_metrics([pred[i] for i in order], [gold[i] for i in order])
        assert base == perm


class TestNll:
    def test_uniform_probability_is_ln2(self):
        value = nll([(0.5, 0.5)] * 7, ["real", "fake", "real", "fake", "real", "fake", "real"])
        assert value == pytest.approx(math.log(2), abs=1e-12)

    def test_perfect_predictions_clip(self):
        value = nll([(0.0, 1.0), (1.0, 0.0)], ["fake", "real"])
        assert value == pytest.approx(-math.log(1 - 1e-15), abs=1e-18)

    def test_two_item_hand_value(self):
        value = nll([(0.1, 0.9), (0.8, 0.2)], ["fake", "real"])
        assert value == pytest.approx((-math.log(0.9) - math.log(0.8)) / 2, abs=1e-12)
        assert value == pytest.approx(0.1643, abs=1e-4)

    def test_finite_even_at_exact_zero_or_one(self):
        assert math.isfinite(nll([(1.0, 0.0)], ["fake"]))


class TestBrier:
    def test_perfect(self):
        assert brier([(0.0, 1.0), (1.0, 0.0)], ["fake", "real"]) == 0.0

    def test_uniform_is_quarter(self):
        assert brier([(0.5, 0.5)] * 3, ["real", "fake", "real"]) == pytest.approx(0.25, abs=1e-15)

    def test_two_item_hand_value(self):
        assert brier([(0.1, 0.9), (0.8, 0.2)], ["fake", "real"]) == pytest.approx(0.025, abs=1e-12)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30), labels_st)
    @settings(max_examples=100)
    def test_bounds(self, p_fakes, gold):
        n = min(len(p_fakes), len(gold))
        value = brier([(1 - p, p) for p in p_fakes[:n]], gold[:n])
        assert 0.0 <= value <= 1.0


def exact_p_oracle(b, c):
    """Independent rational-arithmetic binomial-tail oracle."""
    n, m = b + c, min(b, c)
    tail = sum(math.comb(n, k) for k in range(m + 1))
    return min(1, 2 * Fraction(tail, 2**n))


class TestMcNemar:
    def run(self, b, c, mode="exact"):
        # build label sequences realizing exactly b and c discordant items
        gold = ["real"] * (b + c)
        pred_a = ["real"] * b + ["fake"] * c
        pred_b = ["fake"] * b + ["real"] * c
        return mcnemar(pred_a, pred_b, gold, mode=mode)

    def test_symmetric_counts_never_reject(self):
        for k in range(1, 6):
            result = self.run(k, k)
            assert result.p_value == 1.0
            assert not result.reject_at_alpha

    def test_heavily_one_sided(self):
        result = self.run(59, 0)
        assert result.statistic == 0.0
        assert result.p_value == pytest.approx(2.0 * 0.5**59, rel=1e-12)
        assert result.reject_at_alpha

    def test_identical_predictions_degenerate(self):
        result = mcnemar(["real", "fake"], ["real", "fake"], ["real", "real"])
        assert result.degenerate and result.p_value == 1.0 and not result.reject_at_alpha

    def test_exact_matches_rational_oracle(self):
        for b, c in ((0, 5), (3, 10), (7, 7), (20, 35), (1, 0)):
            result = self.run(b, c)
            assert result.p_value == pytest.approx(float(exact_p_oracle(b, c)), abs=1e-12)

    def test_chi2_corrected_formula(self):
        result = self.run(15, 5, mode="chi2-corrected")
        stat = (abs(15 - 5) - 1) ** 2 / 20
        assert result.statistic == pytest.approx(stat)
        assert result.p_value == pytest.approx(math.erfc(math.sqrt(stat / 2)), abs=1e-12)

    def test_counts_recorded(self):
        result = self.run(4, 9)
        assert (result.b, result.c) == (4, 9)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            self.run(1, 1, mode="bootstrap")

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mcnemar(["real"], ["real", "fake"], ["real", "fake"])


class TestEmitReport:
    def report(self):
        report = classification_metrics(["real", "fake"], ["real", "real"])
        from dataclasses import replace

        return replace(report, nll=0.5, brier=0.1)

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "report.json"
        emit_report({"test": self.report()}, "json", path)
        payload = json.loads(path.read_text())
        assert MetricsReport.from_dict(payload["test"]) == self.report()

    def test_csv_fixed_header(self, tmp_path):
        path = tmp_path / "report.csv"
        emit_report({"test": self.report()}, "csv", path)
        lines = path.read_text().splitlines()
        assert lines[0] == "split,metric,value"
        assert lines[1].startswith("test,accuracy,")

    def test_byte_identical_emissions(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        emit_report({"x": self.report()}, "json", a)
        emit_report({"x": self.report()}, "json", b)
        assert a.read_bytes() == b.read_bytes()

    def test_text_format_smoke(self, tmp_path):
        path = tmp_path / "report.txt"
        emit_report({"validation/final": self.report()}, "text", path)
        assert "validation/final" in path.read_text()

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report({"x": self.report()}, "yaml", tmp_path / "x")
