"""Painting catalog: loading, validation, and lookup.

The catalog file is UTF-8 JSON Lines, one painting object per line.
Required keys: ``id``, ``title``, ``image_uri``, ``license``; optional:
``artist``, ``tags``. Iteration order is load order and is preserved by
serialization, so loading the same file twice yields byte-identical output.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import DuplicateId, NotFound, SchemaError

ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]+$")
REQUIRED_KEYS = ("id", "title", "image_uri", "license")


@dataclass(frozen=True)
class Painting:
    id: str
    title: str
    image_uri: str
    license: str
    artist: str = ""
    tags: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Catalog:
    paintings: tuple[Painting, ...]
    source_label: str = ""

    def __post_init__(self) -> None:
        index = {}
        for p in self.paintings:
            if p.id in index:
                raise DuplicateId(f"duplicate painting id {p.id!r}", id=p.id)
            index[p.id] = p
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.paintings)

    def __iter__(self) -> Iterator[Painting]:
        return iter(self.paintings)

    def __contains__(self, painting_id: str) -> bool:
        return painting_id in self._index

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.paintings)

    def get(self, painting_id: str) -> Painting:
        """Return the painting with that id, or raise NotFound."""
        try:
            return self._index[painting_id]
        except KeyError:
            raise NotFound(f"painting {painting_id!r} not in catalog", id=painting_id) from None


def _parse_record(obj: object, line: int) -> Painting:
    if not isinstance(obj, dict):
        raise SchemaError(f"line {line}: record must be a JSON object", line=line)
    for key in REQUIRED_KEYS:
        if key not in obj:
            raise SchemaError(f"line {line}: missing required key {key!r}", line=line, key=key)
        if not isinstance(obj[key], str):
            raise SchemaError(f"line {line}: key {key!r} must be a string", line=line, key=key)
    pid = obj["id"]
    if not pid or not ID_PATTERN.match(pid):
        raise SchemaError(f"line {line}: invalid id {pid!r}", line=line, key="id")
    if not obj["image_uri"]:
        raise SchemaError(f"line {line}: image_uri must be nonempty", line=line, key="image_uri")
    artist = obj.get("artist", "")
    if not isinstance(artist, str):
        raise SchemaError(f"line {line}: artist must be a string", line=line, key="artist")
    tags = obj.get("tags", {})
    if not isinstance(tags, dict) or any(
        not isinstance(k, str) or not isinstance(v, str) for k, v in tags.items()
    ):
        raise SchemaError(f"line {line}: tags must map strings to strings", line=line, key="tags")
    return Painting(
        id=pid,
        title=obj["title"],
        image_uri=obj["image_uri"],
        license=obj["license"],
        artist=artist,
        tags=dict(tags),
    )


def load_catalog(path: str | Path, source_label: str = "") -> Catalog:
    """Load and validate a JSON Lines catalog file.

    Raises DuplicateId, SchemaError for bad records; OSError for unreadable
    files. The returned catalog preserves record order.
    """
    path = Path(path)
    paintings: list[Painting] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {line_no}: invalid JSON ({exc.msg})", line=line_no) from exc
            painting = _parse_record(obj, line_no)
            if painting.id in seen:
                raise DuplicateId(f"duplicate painting id {painting.id!r}", id=painting.id)
            seen.add(painting.id)
            paintings.append(painting)
    return Catalog(paintings=tuple(paintings), source_label=source_label or path.name)


def painting_to_record(p: Painting) -> dict:
    record: dict = {"id": p.id, "title": p.title, "image_uri": p.image_uri, "license": p.license}
    if p.artist:
        record["artist"] = p.artist
    if p.tags:
        record["tags"] = dict(sorted(p.tags.items()))
    return record


def dump_catalog(catalog: Catalog) -> str:
    """Serialize a catalog to canonical JSON Lines (deterministic bytes)."""
    lines = [
        json.dumps(painting_to_record(p), sort_keys=True, separators=(",", ":"))
        for p in catalog
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def save_catalog(catalog: Catalog, path: str | Path) -> None:
    Path(path).write_text(dump_catalog(catalog), encoding="utf-8")
