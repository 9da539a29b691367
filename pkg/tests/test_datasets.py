"""Tests for the synthetic corpus generator and the reference fixture tables."""

import pytest

from fusionet.datasets import (
    RECONSTRUCTION_TOL,
    REFERENCE_ROWS,
    AttributeKindSpec,
    SynthSpec,
    generate,
    lift_benchmark_spec,
    load_reference_stats,
    reconstruct_counts,
    reference_stats,
    spec_from_json,
)
from fusionet.stat_features import fit_stats


class TestReferenceTables:
    def test_pure_real_domain_counts(self):
        table, _ = reference_stats("covid")
        assert table.counts[("domain", "news.sky")] == (274, 0)

    def test_mixed_username_counts(self):
        table, _ = reference_stats("covid")
        assert table.counts[("username", "MoHFW_NDIA")] == (156, 6)
        assert round(table.prob("username", "MoHFW_NDIA").p_real, 3) == 0.963

    def test_source_counts(self):
        table, _ = reference_stats("fakenewsnet")
        assert table.counts[("source", "people.com")] == (1569, 200)
        assert table.prob("source", "people.com").p_real == pytest.approx(0.8869, abs=5e-4)

    def test_no_rows_excluded(self):
        for name in REFERENCE_ROWS:
            _, excluded = reference_stats(name)
            assert excluded == []

    def test_every_row_reproduces_printed_probabilities(self):
        for name, rows in REFERENCE_ROWS.items():
            table, _ = reference_stats(name)
            for kind, value, p_real, p_fake, freq in rows:
                got = table.prob(kind, value)
                assert got.p_real == pytest.approx(p_real, abs=RECONSTRUCTION_TOL)
                assert got.p_fake == pytest.approx(p_fake, abs=RECONSTRUCTION_TOL)

    def test_shipped_csv_matches_reconstruction(self):
        for name in REFERENCE_ROWS:
            assert load_reference_stats(name).counts == reference_stats(name)[0].counts

    def test_reconstruct_counts(self):
        assert reconstruct_counts(0.963, 162) == (156, 6)
        assert reconstruct_counts(0.8869, 1769) == (1569, 200)
        assert reconstruct_counts(1.0, 274) == (274, 0)


class TestGenerate:
    def test_full_skew_forces_pure_values(self):
        spec = SynthSpec(
            n_items=400,
            kinds={"domain": AttributeKindSpec(n_values=4, skew=1.0)},
            label_noise=0.0,
            seed=1,
        )
        table = fit_stats(generate(spec), ["domain"])
        for (kind, value), (n_real, n_fake) in table.counts.items():
            assert n_real == 0 or n_fake == 0

    def test_skew_convergence_at_large_n(self):
        spec = SynthSpec(
            n_items=10000,
            kinds={"domain": AttributeKindSpec(n_values=6, skew=0.9)},
            label_noise=0.0,
            seed=2,
        )
        table = fit_stats(generate(spec), ["domain"])
        for (_, value), _ in table.counts.items():
            p_real = table.prob("domain", value).p_real
            leaning = p_real if p_real >= 0.5 else 1.0 - p_real
            assert 0.87 <= leaning <= 0.93

    def test_same_seed_identical(self):
        spec = lift_benchmark_spec()
        a, b = generate(spec), generate(spec)
        assert a.items == b.items

    def test_distinct_seeds_differ(self):
        base = lift_benchmark_spec()
        other = lift_benchmark_spec(seed=base.seed + 1)
        assert generate(base).items != generate(other).items

    def test_coverage_controls_attribute_presence(self):
        spec = SynthSpec(
            n_items=2000,
            kinds={"domain": AttributeKindSpec(n_values=4, skew=0.9, coverage=0.5)},
            seed=3,
        )
        data = generate(spec)
        with_domain = sum(1 for item in data if "domain" in item.attributes)
        assert 0.42 <= with_domain / len(data) <= 0.58

    def test_label_prior(self):
        spec = SynthSpec(n_items=3000, class_prior=0.75, seed=4)
        data = generate(spec)
        real = sum(1 for item in data if item.label == "real")
        assert 0.70 <= real / len(data) <= 0.80

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError):
            SynthSpec(n_items=0)
        with pytest.raises(ValueError):
            SynthSpec(n_items=10, label_noise=1.5)
        with pytest.raises(ValueError):
            AttributeKindSpec(n_values=1)


class TestSpecFromJson:
    def test_parses_nested_kinds(self):
        payload = """
        {"n_items": 50, "seed": 9, "label_noise": 0.1,
         "kinds": {"domain": {"n_values": 4, "skew": 0.8, "coverage": 0.9}}}
        """
        spec = spec_from_json(payload)
        assert spec.n_items == 50
        assert spec.kinds["domain"] == AttributeKindSpec(n_values=4, skew=0.8, coverage=0.9)
