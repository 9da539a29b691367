"""Tests for attribute statistics tables and fusion feature assembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusionet.backbone import PredictionMatrix
from fusionet.corpus import Dataset, LabeledItem
from fusionet.ensemble import soft_vote
from fusionet.stat_features import (
    AttributeStatsTable,
    FeatureError,
    build_features,
    feature_columns,
    fit_stats,
    lookup,
    read_features,
    write_features,
)
from fusionet.types import ProbPair


def corpus_with_counts(kind, value, n_real, n_fake):
    """n_real real + n_fake fake items, each containing the attribute value."""
    items = [
        LabeledItem(id=f"r{k}", text="t", attributes={kind: (value,)}, label="real")
        for k in range(n_real)
    ] + [
        LabeledItem(id=f"f{k}", text="t", attributes={kind: (value,)}, label="fake")
        for k in range(n_fake)
    ]
    return Dataset(items=tuple(items))


class TestFitStats:
    def test_pure_real_value(self):
        table = fit_stats(corpus_with_counts("domain", "news.sky", 274, 0), ["domain"])
        pair = table.prob("domain", "news.sky")
        assert pair == (1.0, 0.0)
        assert table.counts[("domain", "news.sky")] == (274, 0)

    def test_mixed_value_three_decimals(self):
        table = fit_stats(corpus_with_counts("username", "mohfw_ndia", 156, 6), ["username"])
        pair = table.prob("username", "mohfw_ndia")
        assert round(pair.p_real, 3) == 0.963

    def test_absent_value_has_no_entry(self):
        table = fit_stats(corpus_with_counts("domain", "a.com", 2, 1), ["domain"])
        assert ("domain", "b.com") not in table

    def test_item_mentioning_value_twice_counts_once(self):
        items = (
            LabeledItem(id="r", text="t", attributes={"domain": ("a.com", "a.com")}, label="real"),
            LabeledItem(id="f", text="t", attributes={"domain": ("a.com",)}, label="fake"),
        )
        table = fit_stats(Dataset(items=items), ["domain"])
        assert table.counts[("domain", "a.com")] == (1, 1)

    def test_unlabeled_training_item_rejected(self):
        items = (LabeledItem(id="x", text="t"),)
        with pytest.raises(ValueError, match="no label"):
            fit_stats(Dataset(items=items), ["domain"])

    def test_only_requested_kinds_counted(self):
        items = (
            LabeledItem(
                id="r",
                text="t",
                attributes={"domain": ("a.com",), "username": ("bob",)},
                label="real",
            ),
        )
        table = fit_stats(Dataset(items=items), ["domain"])
        assert ("username", "bob") not in table

    @given(
        st.lists(
            st.tuples(
                st.sampled_from(["real", "fake"]),
                st.lists(st.sampled_from(["a", "b", "c"]), max_size=3),
            ),
            min_size=1,
            max_size=30,
        )
    )
    @settings(max_examples=100)
    def test_counts_match_brute_force_recount(self, rows):
        items = tuple(
            LabeledItem(id=f"i{k}", text="t", attributes={"domain": tuple(vals)} if vals else {}, label=lab)
            for k, (lab, vals) in enumerate(rows)
        )
        table = fit_stats(Dataset(items=items), ["domain"])
        for value in ("a", "b", "c"):
            n_real = sum(1 for lab, vals in rows if lab == "real" and value in vals)
            n_fake = sum(1 for lab, vals in rows if lab == "fake" and value in vals)
            if n_real + n_fake == 0:
                assert ("domain", value) not in table
            else:
                assert table.counts[("domain", value)] == (n_real, n_fake)
                pair = table.prob("domain", value)
                assert pair.p_real + pair.p_fake == pytest.approx(1.0, abs=1e-9)

    def test_monotone_refit_on_added_real_item(self):
        base_items = corpus_with_counts("domain", "a.com", 3, 2).items
        before = fit_stats(Dataset(items=base_items), ["domain"]).prob("domain", "a.com")
        extra = LabeledItem(id="new", text="t", attributes={"domain": ("a.com",)}, label="real")
        after = fit_stats(Dataset(items=base_items + (extra,)), ["domain"]).prob("domain", "a.com")
        assert after.p_real > before.p_real


class TestLookup:
    def table(self):
        return AttributeStatsTable(
            counts={
                ("domain", "news.sky"): (274, 0),
                ("domain", "theguardian.com"): (1, 5),
            }
        )

    def test_single_known_value(self):
        pair, present = lookup(self.table(), "domain", ["news.sky"])
        assert present and pair == (1.0, 0.0)

    def test_mean_of_two_known_values(self):
        pair, present = lookup(self.table(), "domain", ["news.sky", "theguardian.com"])
        assert present
        # printed 3-d.p. reference of the second row makes this 0.5835
        assert pair.p_real == pytest.approx(0.5835, abs=5e-4)
        assert pair.p_fake == pytest.approx(0.4165, abs=5e-4)

    def test_all_unknown_gives_neutral_absent(self):
        pair, present = lookup(self.table(), "domain", ["nowhere.net"])
        assert not present and pair == (0.5, 0.5)

    def test_duplicate_mentions_average_once(self):
        one, _ = lookup(self.table(), "domain", ["news.sky", "news.sky", "theguardian.com"])
        two, _ = lookup(self.table(), "domain", ["news.sky", "theguardian.com"])
        assert one == two

    def test_unknown_values_ignored_in_average(self):
        pair, present = lookup(self.table(), "domain", ["news.sky", "unseen.org"])
        assert present and pair == (1.0, 0.0)


class TestBuildFeatures:
    def setup_method(self):
        self.table = AttributeStatsTable(counts={("domain", "a.com"): (4, 0)})
        self.items = (
            LabeledItem(id="x1", text="t", attributes={"domain": ("a.com",)}, label="real"),
            LabeledItem(id="x2", text="t", label="fake"),
        )
        probs = np.array([[[0.4, 0.6]], [[0.3, 0.7]]])
        self.matrix = PredictionMatrix(("m0",), ("x1", "x2"), probs)
        self.ensemble = soft_vote(self.matrix)

    def test_concatenation_rule(self):
        features = build_features(self.items, self.ensemble, self.table, ["domain", "username"])
        assert features[0].values == (0.4, 0.6, 1.0, 0.0, 0.5, 0.5)
        assert features[0].masks == (True, False)
        np.testing.assert_array_equal(
            features[0].to_input(), [0.4, 0.6, 1.0, 0.0, 0.5, 0.5, 1.0, 0.0]
        )

    def test_no_kinds_gives_base_alone(self):
        features = build_features(self.items, self.ensemble, self.table, [])
        assert features[0].values == (0.4, 0.6)
        assert features[0].masks == ()

    def test_raw_mode_dimensionality(self):
        probs = np.tile(np.array([[0.6, 0.4]]), (2, 5, 1))
        matrix = PredictionMatrix(tuple(f"m{i}" for i in range(5)), ("x1", "x2"), probs)
        features = build_features(self.items, matrix, self.table, ["domain", "username"])
        assert len(features[0].values) == 10 + 4

    def test_missing_item_named_in_error(self):
        probs = np.array([[[0.4, 0.6]]])
        matrix = PredictionMatrix(("m0",), ("x1",), probs)
        with pytest.raises(FeatureError, match="x2"):
            build_features(self.items, matrix, self.table, ["domain"])

    def test_fixed_dimensionality_across_items(self):
        features = build_features(self.items, self.ensemble, self.table, ["domain", "username"])
        assert {len(f.values) for f in features} == {2 + 2 * 2}


class TestFeaturesFile:
    def test_round_trip(self, tmp_path):
        table = AttributeStatsTable(counts={("domain", "a.com"): (3, 1)})
        items = (
            LabeledItem(id="x1", text="t", attributes={"domain": ("a.com",)}, label="real"),
            LabeledItem(id="x2", text="t", label=None),
        )
        probs = np.array([[[0.4, 0.6]], [[0.3, 0.7]]])
        ens = soft_vote(PredictionMatrix(("m0",), ("x1", "x2"), probs))
        features = build_features(items, ens, table, ["domain"])
        path = tmp_path / "features.csv"
        write_features(features, ["domain"], path, labels=("real", None))
        ids, X, labels, columns = read_features(path)
        assert ids == ["x1", "x2"]
        assert labels == ["real", None]
        assert columns == feature_columns(2, ["domain"])
        np.testing.assert_array_equal(X[0], features[0].to_input())

    def test_header_names_masks(self):
        cols = feature_columns(2, ["domain", "username"])
        assert cols == [
            "base_p_real",
            "base_p_fake",
            "domain_p_real",
            "domain_p_fake",
            "username_p_real",
            "username_p_fake",
            "domain_present",
            "username_present",
        ]


class TestStatsFile:
    def test_round_trip_with_awkward_values(self, tmp_path):
        table = AttributeStatsTable(
            counts={
                ("author", "dailymail.com reporter"): (216, 27),
                ("author", "name, with comma"): (1, 2),
            }
        )
        path = tmp_path / "stats.csv"
        table.save(path)
        assert AttributeStatsTable.load(path).counts == table.counts
