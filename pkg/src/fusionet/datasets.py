"""Bundled desk-scale data: a synthetic corpus generator and oracle fixtures.

The generator produces labeled items whose text carries a controllable
class signal and whose attributes follow configurable per-value class
skews, so attribute conditional probabilities fitted on a generated
training set converge to the configured skews (exactly so at a balanced
class prior with zero label noise).

The fixture tables transcribe reference attribute distributions from
the two public benchmarks (COVID-19 fake-news tweets, FakeNewsNet
articles); integer counts are recovered from each row's printed
probability and frequency and re-verified to 5e-4 before use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

import numpy as np

from .corpus import Dataset, LabeledItem
from .stat_features import AttributeStatsTable

# (kind, value, p_real, p_fake, frequency)
ReferenceRow = tuple[str, str, float, float, int]

REFERENCE_ROWS: dict[str, tuple[ReferenceRow, ...]] = {
    "covid": (
        ("domain", "news.sky", 1.0, 0.0, 274),
        ("domain", "medscape.com", 1.0, 0.0, 258),
        ("domain", "thespoof.com", 0.0, 1.0, 253),
        ("domain", "newsthump.com", 0.0, 1.0, 68),
        ("domain", "theguardian.com", 0.167, 0.833, 6),
        ("username", "MoHFW_NDIA", 0.963, 0.037, 162),
        ("username", "DrTedros", 1.0, 0.0, 110),
        ("username", "ICMRDELHI", 0.9903, 0.0097, 103),
        ("username", "PIB_ndia", 1.0, 0.0, 83),
        ("username", "CDCMMWR", 1.0, 0.0, 34),
    ),
    "fakenewsnet": (
        ("source", "people.com", 0.8869, 0.1131, 1769),
        ("source", "www.dailymail.co.uk", 0.8134, 0.1866, 943),
        ("source", "www.usmagazine.com", 0.8063, 0.1937, 697),
        ("source", "hollywoodlife.com", 0.8677, 0.1323, 446),
        ("source", "radaronline.com", 0.8805, 0.1195, 159),
        ("author", "Amy Mistretta", 0.1175, 0.8825, 434),
        ("author", "Lindsay Valdez", 0.1175, 0.8825, 4340),
        ("author", "Daisy Maldonado", 0.0681, 0.9319, 411),
        ("author", "Dailymail.Com Reporter", 0.8889, 0.1111, 243),
        ("author", "Dave", 0.8869, 0.1131, 168),
    ),
}

RECONSTRUCTION_TOL = 5e-4  # half of the last printed digit


def reconstruct_counts(p_real: float, frequency: int) -> tuple[int, int]:
    """Recover integer (n_real, n_fake) from a printed probability and frequency."""
    n_real = round(p_real * frequency)
    return n_real, frequency - n_real


def reference_stats(name: str) -> tuple[AttributeStatsTable, list[ReferenceRow]]:
    """Reconstructed fixture table plus any rows failing the 5e-4 recheck.

    A row is excluded (and returned in the second element) when its
    recomputed probability does not reproduce the printed value within
    RECONSTRUCTION_TOL.
    """
    rows = REFERENCE_ROWS[name]
    counts: dict[tuple[str, str], tuple[int, int]] = {}
    excluded: list[ReferenceRow] = []
    for kind, value, p_real, p_fake, freq in rows:
        n_real, n_fake = reconstruct_counts(p_real, freq)
        if abs(n_real / freq - p_real) > RECONSTRUCTION_TOL:
            excluded.append((kind, value, p_real, p_fake, freq))
            continue
        counts[(kind, value)] = (n_real, n_fake)
    return AttributeStatsTable(counts=counts), excluded


def load_reference_stats(name: str) -> AttributeStatsTable:
    """Load the shipped CSV fixture (same schema as stats.csv artifacts)."""
    resource = resources.files("fusionet") / "fixtures" / f"attribute_stats_{name}.csv"
    with resources.as_file(resource) as path:
        return AttributeStatsTable.load(path)


# --- synthetic corpus ---------------------------------------------------------


@dataclass(frozen=True)
class AttributeKindSpec:
    """How one attribute kind is generated.

    Half of the distinct values lean real and half lean fake; ``skew``
    is the probability that an item picks a value leaning toward its
    own (true) class, hence also the asymptotic conditional probability
    of the leaning class at a balanced prior.
    """

    n_values: int
    skew: float = 0.9
    coverage: float = 1.0  # fraction of items that carry this kind

    def __post_init__(self) -> None:
        if self.n_values < 2:
            raise ValueError("need at least 2 distinct values per kind")
        if not 0.0 <= self.skew <= 1.0 or not 0.0 <= self.coverage <= 1.0:
            raise ValueError("skew and coverage must lie in [0, 1]")


@dataclass(frozen=True)
class SynthSpec:
    n_items: int
    class_prior: float = 0.5  # P(real)
    kinds: Mapping[str, AttributeKindSpec] = field(default_factory=dict)
    text_separation: float = 0.5  # 0 = no text signal, 1 = fully separated pools
    label_noise: float = 0.0
    seed: int = 0
    vocab_size: int = 120
    tokens_per_item: int = 12

    def __post_init__(self) -> None:
        for rate in (self.class_prior, self.text_separation, self.label_noise):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"rates must lie in [0, 1], got {rate!r}")
        if self.n_items < 1:
            raise ValueError("n_items must be positive")


def generate(spec: SynthSpec) -> Dataset:
    """Seed-deterministic synthetic corpus matching the spec's skews."""
    rng = np.random.default_rng(spec.seed)
    half_vocab = spec.vocab_size // 2
    pools = (
        [f"w{i}" for i in range(half_vocab)],
        [f"w{i}" for i in range(half_vocab, spec.vocab_size)],
    )
    own_pool_prob = (1.0 + spec.text_separation) / 2.0

    items = []
    for i in range(spec.n_items):
        real = rng.random() < spec.class_prior
        pool_own, pool_other = pools if real else pools[::-1]
        tokens = [
            (pool_own if rng.random() < own_pool_prob else pool_other)[
                rng.integers(len(pool_own))
            ]
            for _ in range(spec.tokens_per_item)
        ]
        attributes: dict[str, tuple[str, ...]] = {}
        for kind, kspec in spec.kinds.items():
            if rng.random() >= kspec.coverage:
                continue
            half_values = kspec.n_values // 2
            own_leaning = rng.random() < kspec.skew
            # value ids 0..half-1 lean real, the rest lean fake
            leaning_real = own_leaning if real else not own_leaning
            lo, hi = (0, half_values) if leaning_real else (half_values, kspec.n_values)
            attributes[kind] = (f"{kind}v{rng.integers(lo, hi)}",)
        observed_real = (not real) if rng.random() < spec.label_noise else real
        items.append(
            LabeledItem(
                id=f"item-{i:06d}",
                text=" ".join(tokens),
                attributes=attributes,
                label="real" if observed_real else "fake",
            )
        )
    return Dataset(items=tuple(items))


def lift_benchmark_spec(seed: int = 20240817) -> SynthSpec:
    """The bundled end-to-end benchmark: strong attributes, weak text, 5% noise."""
    return SynthSpec(
        n_items=5000,
        class_prior=0.5,
        kinds={
            "domain": AttributeKindSpec(n_values=12, skew=0.95, coverage=0.85),
            "username": AttributeKindSpec(n_values=16, skew=0.95, coverage=0.7),
        },
        text_separation=0.2,
        label_noise=0.05,
        seed=seed,
    )


def spec_from_json(payload: str | Mapping) -> SynthSpec:
    """Parse a SynthSpec from a JSON document (string or parsed object)."""
    data = json.loads(payload) if isinstance(payload, str) else dict(payload)
    kinds = {
        kind: AttributeKindSpec(**kspec) for kind, kspec in data.pop("kinds", {}).items()
    }
    return SynthSpec(kinds=kinds, **data)
