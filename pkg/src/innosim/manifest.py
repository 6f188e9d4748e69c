"""Experiment manifests: a flat key-tree text format.

A manifest is a plain text file with one ``key = value`` assignment per
line.  Keys are dot-separated paths, values run to the end of the line::

    manifest_version = 1
    experiment = equilibrium
    seed = 7
    reps = 500
    world.n = 1000
    world.k = 3
    world.delta = 1.0
    sweep.n = 250 500 1000

``#`` starts a comment, blank lines are ignored.  List-valued keys (sweep
axes, payoff tables) hold whitespace-separated tokens.  There is no other
structure: no nesting syntax, no quoting, no type tags on the wire.  The
schema is versioned through the mandatory ``manifest_version`` key and
typed on access by the consumer, which keeps files hand-editable and
diffs one line per changed setting.

parse and serialize are inverse up to comments and spacing, so a manifest
can be loaded, re-emitted, and loaded again without change.
"""

from __future__ import annotations

import re
from typing import Iterator, Optional

from .errors import ManifestError

MANIFEST_VERSION = 1

_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*(\.[a-z][a-z0-9_]*)*$")


class Manifest:
    """Ordered key -> raw string mapping with typed accessors."""

    def __init__(self, entries: Optional[dict[str, str]] = None):
        self.entries: dict[str, str] = dict(entries) if entries else {}

    # -- construction ------------------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "Manifest":
        entries: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ManifestError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            value = value.strip()
            if not _KEY_RE.match(key):
                raise ManifestError(f"line {lineno}: bad key {key!r} "
                                    "(dot-separated lowercase identifiers)")
            if key in entries:
                raise ManifestError(f"line {lineno}: duplicate key {key!r}")
            entries[key] = value
        m = cls(entries)
        ver = m.require_int("manifest_version")
        if ver != MANIFEST_VERSION:
            raise ManifestError(f"manifest_version: expected {MANIFEST_VERSION}, got {ver}")
        return m

    @classmethod
    def load(cls, path) -> "Manifest":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())

    # -- emission ----------------------------------------------------------

    def serialize(self) -> str:
        lines = [f"{k} = {v}" for k, v in self.entries.items()]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.serialize())

    # -- raw access --------------------------------------------------------

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def __eq__(self, other) -> bool:
        return isinstance(other, Manifest) and self.entries == other.entries

    def set(self, key: str, value) -> "Manifest":
        if not _KEY_RE.match(key):
            raise ManifestError(f"bad key {key!r}")
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            value = " ".join(_fmt_token(v) for v in value)
        else:
            value = _fmt_token(value)
        self.entries[key] = value
        return self

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return self.entries.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.entries:
            raise ManifestError(f"{key}: required key is missing")
        return self.entries[key]

    def section(self, prefix: str) -> dict[str, str]:
        """Entries under ``prefix.``, keyed by the remainder of the path."""
        cut = len(prefix) + 1
        return {k[cut:]: v for k, v in self.entries.items()
                if k.startswith(prefix + ".")}

    def keys(self) -> Iterator[str]:
        return iter(self.entries)

    # -- typed access ------------------------------------------------------

    def get_int(self, key: str, default: Optional[int] = None) -> Optional[int]:
        raw = self.entries.get(key)
        return default if raw is None else _to_int(key, raw)

    def require_int(self, key: str) -> int:
        return _to_int(key, self.require(key))

    def get_float(self, key: str, default: Optional[float] = None) -> Optional[float]:
        raw = self.entries.get(key)
        return default if raw is None else _to_float(key, raw)

    def require_float(self, key: str) -> float:
        return _to_float(key, self.require(key))

    def get_bool(self, key: str, default: bool = False) -> bool:
        raw = self.entries.get(key)
        if raw is None:
            return default
        if raw == "true":
            return True
        if raw == "false":
            return False
        raise ManifestError(f"{key}: expected true or false, got {raw!r}")

    def get_floats(self, key: str) -> list[float]:
        raw = self.entries.get(key, "")
        return [_to_float(key, tok) for tok in raw.split()]

    def get_ints(self, key: str) -> list[int]:
        raw = self.entries.get(key, "")
        return [_to_int(key, tok) for tok in raw.split()]


def _fmt_token(v) -> str:
    if isinstance(v, float):
        # repr keeps round-trip exactness and stays readable for hand edits
        return repr(v)
    return str(v)


def _to_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ManifestError(f"{key}: expected an integer, got {raw!r}") from None


def _to_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ManifestError(f"{key}: expected a number, got {raw!r}") from None
