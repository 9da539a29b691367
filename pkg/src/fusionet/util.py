"""Shared helpers: stable seed derivation, checksums, float formatting.

Python's builtin ``hash`` is salted per process, so every piece of
derived randomness in this package goes through :func:`derive_seed`,
which is stable across processes, platforms and runs.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

_SEED_BYTES = 8


def derive_seed(root: int, *names: object) -> int:
    """Derive a child seed from a root seed and a name path.

    The same (root, names) pair always maps to the same 63-bit integer,
    so stage order or parallel scheduling cannot silently change which
    stream a consumer draws from.
    """
    tag = ":".join(str(n) for n in (root, *names))
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:_SEED_BYTES], "big") >> 1


def sha256_file(path: str | Path) -> str:
    """Hex digest of a file's bytes, streamed."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def fmt_float(x: float) -> str:
    """Shortest decimal string that round-trips the exact float64 value.

    Used by every artifact writer so that rerunning a stage reproduces
    byte-identical files.
    """
    return repr(float(x))
