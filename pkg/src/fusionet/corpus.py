"""Data model, text cleaning, attribute extraction and dataset splitting.

Items are immutable once constructed; a :class:`Dataset` is an ordered,
id-unique collection tagged with the split it belongs to.  Attribute
values (usernames, URL domains, authors, sources) are normalized at
ingestion time: lowercase, usernames without the leading "@", domains
without a leading "www.".
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence
from urllib.parse import urlsplit

import numpy as np

logger = logging.getLogger(__name__)

ATTRIBUTE_KINDS = ("username", "domain", "author", "source")
SPLIT_TAGS = ("train", "validation", "test", "unsplit")


class ClassLabel:
    """Binary class label with the canonical encoding real=0, fake=1."""

    REAL = "real"
    FAKE = "fake"

    _TO_INDEX = {REAL: 0, FAKE: 1}
    _FROM_INDEX = {0: REAL, 1: FAKE}

    @staticmethod
    def to_index(label: str) -> int:
        try:
            return ClassLabel._TO_INDEX[label]
        except KeyError:
            raise ValueError(f"unknown class label: {label!r}") from None

    @staticmethod
    def from_index(index: int) -> str:
        try:
            return ClassLabel._FROM_INDEX[int(index)]
        except KeyError:
            raise ValueError(f"class index must be 0 or 1, got {index!r}") from None


@dataclass(frozen=True)
class LabeledItem:
    """One news item or tweet with its extracted attributes."""

    id: str
    text: str
    attributes: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self) -> None:
        if self.label is not None:
            ClassLabel.to_index(self.label)
        for kind in self.attributes:
            if kind not in ATTRIBUTE_KINDS:
                raise ValueError(f"unknown attribute kind: {kind!r}")

    def to_json(self) -> str:
        record: dict = {"id": self.id, "text": self.text, "label": self.label}
        if self.attributes:
            record["attributes"] = {k: list(v) for k, v in self.attributes.items()}
        return json.dumps(record, ensure_ascii=False, sort_keys=True)

    @staticmethod
    def from_json(line: str) -> "LabeledItem":
        record = json.loads(line)
        attrs = {
            kind: tuple(normalize_attribute(kind, v) for v in values)
            for kind, values in record.get("attributes", {}).items()
            if values
        }
        return LabeledItem(
            id=record["id"],
            text=record["text"],
            attributes=attrs,
            label=record.get("label"),
        )


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of items, ids unique, tagged by split."""

    items: tuple[LabeledItem, ...]
    split_tag: str = "unsplit"

    def __post_init__(self) -> None:
        if self.split_tag not in SPLIT_TAGS:
            raise ValueError(f"unknown split tag: {self.split_tag!r}")
        seen: set[str] = set()
        for item in self.items:
            if item.id in seen:
                raise ValueError(f"duplicate item id: {item.id!r}")
            seen.add(item.id)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def ids(self) -> tuple[str, ...]:
        return tuple(item.id for item in self.items)

    def labels(self) -> tuple[str | None, ...]:
        return tuple(item.label for item in self.items)


# --- text preprocessing ----------------------------------------------------

_URL_RE = re.compile(r"(?:https?://\S+|www\.\S+)", re.IGNORECASE)
_USERNAME_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#(\w+)")
_WS_RE = re.compile(r"\s+")

# Pictographs, transport symbols, dingbats, flags, skin tones, variation
# selectors and the zero-width joiner used in emoji sequences.
_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),
    (0x2600, 0x27BF),
    (0x2B00, 0x2BFF),
    (0xFE00, 0xFE0F),
    (0x200D, 0x200D),
)


def _is_emoji(ch: str) -> bool:
    cp = ord(ch)
    if any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES):
        return True
    return unicodedata.category(ch) == "So"


def preprocess_text(raw: str, kind: str = "tweet") -> str:
    """Strip platform noise from one item's text.

    Tweets lose URLs, @-usernames, emoji and the "#" marker (the tagged
    word itself stays); articles only lose URLs and @-usernames.  The
    result has collapsed whitespace and is idempotent under repeated
    application.
    """
    if kind not in ("tweet", "article"):
        raise ValueError(f"item kind must be 'tweet' or 'article', got {kind!r}")
    text = _URL_RE.sub(" ", raw)
    text = _USERNAME_RE.sub(" ", text)
    if kind == "tweet":
        text = _HASHTAG_RE.sub(r"\1", text)
        text = "".join(ch for ch in text if not _is_emoji(ch))
    return _WS_RE.sub(" ", text).strip()


# --- attribute extraction --------------------------------------------------


def normalize_attribute(kind: str, value: str) -> str:
    """Lowercase; strip a leading "@" from usernames and "www." from domains."""
    v = value.strip().lower()
    if kind == "username":
        v = v.lstrip("@")
    elif kind == "domain":
        v = v.removeprefix("www.")
    return v


def _domain_of(url: str) -> str | None:
    candidate = url if "://" in url else "//" + url
    try:
        host = urlsplit(candidate).hostname
    except ValueError:
        return None
    if not host or "." not in host:
        return None
    return normalize_attribute("domain", host)


def extract_attributes(raw: str, metadata: Mapping[str, object] | None = None) -> dict[str, tuple[str, ...]]:
    """Pull username/domain attributes out of raw text, author/source out of metadata.

    Values appear in first-occurrence order with duplicates retained.
    A URL that cannot be parsed contributes no domain; it is logged and
    skipped rather than aborting the item.
    """
    attributes: dict[str, list[str]] = {}

    usernames = [normalize_attribute("username", m.group(0)) for m in _USERNAME_RE.finditer(raw)]
    if usernames:
        attributes["username"] = usernames

    domains: list[str] = []
    for m in _URL_RE.finditer(raw):
        url = m.group(0).rstrip(".,;:!?)\"'")
        domain = _domain_of(url)
        if domain is None:
            logger.warning("skipping malformed URL %r", url)
            continue
        domains.append(domain)
    if domains:
        attributes["domain"] = domains

    for kind in ("author", "source"):
        value = (metadata or {}).get(kind)
        if value is None or value == "":
            continue
        values = value if isinstance(value, (list, tuple)) else [value]
        attributes[kind] = [normalize_attribute(kind, str(v)) for v in values]

    return {kind: tuple(values) for kind, values in attributes.items()}


def ingest_item(record: Mapping[str, object], kind: str = "tweet") -> LabeledItem:
    """Build a LabeledItem from one raw JSONL record.

    Attributes are extracted from the raw text (before cleaning removes
    them) and from the optional "metadata" object, then merged with any
    attributes the record already carries.
    """
    raw_text = str(record["text"])
    extracted = extract_attributes(raw_text, record.get("metadata"))
    merged: dict[str, list[str]] = {k: list(v) for k, v in extracted.items()}
    for akind, values in (record.get("attributes") or {}).items():
        normalized = [normalize_attribute(akind, str(v)) for v in values]
        existing = merged.setdefault(akind, [])
        existing.extend(v for v in normalized if v not in existing)
    return LabeledItem(
        id=str(record["id"]),
        text=preprocess_text(raw_text, kind),
        attributes={k: tuple(v) for k, v in merged.items() if v},
        label=record.get("label"),  # type: ignore[arg-type]
    )


# --- JSONL IO ---------------------------------------------------------------


def read_items(path: str | Path) -> Dataset:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                items.append(LabeledItem.from_json(line))
    return Dataset(items=tuple(items))


def write_items(dataset: Iterable[LabeledItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for item in dataset:
            fh.write(item.to_json() + "\n")


# --- splitting ---------------------------------------------------------------


def _split_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment: sizes sum to n, each within 1 of exact."""
    exact = [r * n for r in ratios]
    sizes = [int(np.floor(e)) for e in exact]
    remainders = [e - s for e, s in zip(exact, sizes)]
    for _ in range(n - sum(sizes)):
        i = int(np.argmax(remainders))
        sizes[i] += 1
        remainders[i] = -1.0
    return sizes


def split_dataset(
    dataset: Dataset,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> tuple[Dataset, Dataset, Dataset]:
    """Deterministic, disjoint train/validation/test split.

    Sizes are within one item of the exact proportions and a fixed
    (dataset, ratios, seed) triple always returns the same memberships.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be three positive numbers, got {ratios!r}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)!r}")
    n = len(dataset)
    if n < 3:
        raise ValueError(f"dataset has {n} items; need at least 3 to split")

    order = np.random.default_rng(seed).permutation(n)
    sizes = _split_sizes(n, ratios)
    bounds = np.cumsum([0] + sizes)
    parts = []
    for tag, lo, hi in zip(("train", "validation", "test"), bounds[:-1], bounds[1:]):
        chosen = sorted(order[lo:hi])
        parts.append(Dataset(items=tuple(dataset.items[i] for i in chosen), split_tag=tag))
    return parts[0], parts[1], parts[2]
