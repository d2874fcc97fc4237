"""Embedding spaces, interchange formats, and the cosine similarity kernel.

One space per backbone label ("visual", "multimodal", or custom). Vectors
are stored float32 and L2-normalized once at ingestion, so per-pair cosine
reduces to a dot product accumulated in float64.

Reduction order note: all dot products go through numpy's float64 ``dot``,
whose per-element products commute and whose reduction order depends only on
the vector length — so cosine(u, v) == cosine(v, u) bit-for-bit.

Interchange formats
-------------------
Text (canonical): UTF-8 JSON Lines. Line 1 is a header object
``{"space": str, "model": str, "dim": int, "normalized": bool}``; each
following line is ``{"id": str, "vec": [float; dim]}``.

Binary: magic ``VAEM``, u32 LE version=1, u32 dim, u32 count; then per
record u16 id byte-length, id UTF-8 bytes, dim x float32 LE. Conversion to
and from the text form preserves float32 values bit-exactly (JSON numbers
are written as the shortest decimal that round-trips the float32's exact
float64 value).
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .catalog import Catalog
from .errors import DimensionMismatch, DuplicateId, SchemaError, UnknownPainting

logger = logging.getLogger(__name__)

BINARY_MAGIC = b"VAEM"
BINARY_VERSION = 1

# Unit-norm check tolerance for spaces claiming normalized=True.
NORM_TOLERANCE = 1e-4

# Full m x m similarity matrices are materialized only below this size.
DEFAULT_MATRIX_LIMIT = 4096


@dataclass(frozen=True)
class EmbeddingSpace:
    """Immutable set of L2-normalized float32 vectors keyed by painting id."""

    space_id: str
    model_name: str
    dim: int
    ids: tuple[str, ...]
    matrix: np.ndarray          # float32, shape (len(ids), dim), rows unit-norm
    normalized: bool
    zero_ids: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "_row", {pid: i for i, pid in enumerate(self.ids)})
        # One float64 copy up front; every similarity query reuses it.
        object.__setattr__(self, "_matrix64", self.matrix.astype(np.float64))

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, painting_id: str) -> bool:
        return painting_id in self._row

    def vector(self, painting_id: str) -> np.ndarray:
        try:
            return self.matrix[self._row[painting_id]]
        except KeyError:
            raise UnknownPainting(
                f"painting {painting_id!r} not in space {self.space_id!r}", id=painting_id
            ) from None

    def row_index(self, painting_id: str) -> int:
        try:
            return self._row[painting_id]
        except KeyError:
            raise UnknownPainting(
                f"painting {painting_id!r} not in space {self.space_id!r}", id=painting_id
            ) from None


@dataclass(frozen=True)
class SimilarityRow:
    """One row of the similarity matrix: seed vs every painting in the space."""

    seed_id: str
    scores: dict[str, float]


@dataclass
class InterchangeFile:
    """Parsed embedding interchange content, either text or binary form."""

    space: str
    model: str
    dim: int
    normalized: bool
    records: list[tuple[str, np.ndarray]] = field(default_factory=list)  # float32 vectors


# -- kernel ---------------------------------------------------------------------

def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity u.v / (|u||v|), with 0.0 for zero-norm input.

    Inputs are treated as float32 storage; accumulation is float64.
    """
    u32 = np.asarray(u, dtype=np.float32)
    v32 = np.asarray(v, dtype=np.float32)
    if u32.shape != v32.shape or u32.ndim != 1:
        raise DimensionMismatch(
            f"vector lengths differ: {u32.shape} vs {v32.shape}",
            got=int(v32.shape[0]) if v32.ndim == 1 else -1,
            want=int(u32.shape[0]) if u32.ndim == 1 else -1,
        )
    u64 = u32.astype(np.float64)
    v64 = v32.astype(np.float64)
    nu = float(np.linalg.norm(u64))
    nv = float(np.linalg.norm(v64))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u64, v64) / (nu * nv))


def similarity_row(space: EmbeddingSpace, seed_id: str) -> SimilarityRow:
    """Scores of every painting in the space against the seed, seed included."""
    row = space.row_index(seed_id)
    seed64 = space._matrix64[row]
    scores64 = space._matrix64 @ seed64
    scores = {pid: float(scores64[i]) for i, pid in enumerate(space.ids)}
    return SimilarityRow(seed_id=seed_id, scores=scores)


def similarity_matrix(space: EmbeddingSpace, limit: int = DEFAULT_MATRIX_LIMIT) -> np.ndarray:
    """Full m x m score matrix; refuses to materialize above ``limit`` rows."""
    if len(space) > limit:
        raise ValueError(
            f"space has {len(space)} vectors; full matrix materialization capped at {limit}"
        )
    m64 = space._matrix64
    return m64 @ m64.T


# -- ingestion ------------------------------------------------------------------

def normalize_rows(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """L2-normalize rows (float64 math, float32 result); zero rows are kept.

    Returns the normalized float32 matrix and the indices of zero rows.
    """
    m64 = np.asarray(matrix, dtype=np.float32).astype(np.float64)
    norms = np.linalg.norm(m64, axis=1)
    zero_rows = [int(i) for i in np.flatnonzero(norms == 0.0)]
    safe = np.where(norms == 0.0, 1.0, norms)
    return (m64 / safe[:, None]).astype(np.float32), zero_rows


def ingest_embeddings(
    catalog: Catalog,
    path: str | Path,
    space_id: str | None = None,
    model_name: str | None = None,
) -> EmbeddingSpace:
    """Read an interchange file, validate ids against the catalog, normalize.

    Works for both the text and binary forms (sniffed by magic bytes). For
    the binary form, which carries no space/model metadata, ``space_id``
    defaults to the file stem. Zero vectors are kept as all-zeros, recorded
    in ``zero_ids``, and logged as warnings.
    """
    content = read_interchange(path)
    if space_id is None:
        space_id = content.space or Path(path).stem
    if model_name is None:
        model_name = content.model

    ids: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    for pid, vec in content.records:
        if pid not in catalog:
            raise UnknownPainting(f"embedding id {pid!r} not in catalog", id=pid)
        if pid in seen:
            raise DuplicateId(f"duplicate embedding id {pid!r}", id=pid)
        seen.add(pid)
        ids.append(pid)
        rows.append(vec)

    matrix = (
        np.stack(rows).astype(np.float32)
        if rows
        else np.zeros((0, content.dim), dtype=np.float32)
    )
    normalized, zero_rows = normalize_rows(matrix)
    zero_ids = frozenset(ids[i] for i in zero_rows)
    for pid in sorted(zero_ids):
        logger.warning("zero vector for painting %r in space %r (kept, flagged)", pid, space_id)
    return EmbeddingSpace(
        space_id=space_id,
        model_name=model_name,
        dim=content.dim,
        ids=tuple(ids),
        matrix=normalized,
        normalized=True,
        zero_ids=zero_ids,
    )


# -- text form --------------------------------------------------------------------

def read_embeddings_jsonl(path: str | Path) -> InterchangeFile:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header_raw = fh.readline()
        if not header_raw.strip():
            raise SchemaError("missing header line", line=1)
        try:
            header = json.loads(header_raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line 1: invalid JSON header ({exc.msg})", line=1) from exc
        if not isinstance(header, dict):
            raise SchemaError("header must be a JSON object", line=1)
        for key, kind in (("space", str), ("model", str), ("dim", int), ("normalized", bool)):
            if key not in header or not isinstance(header[key], kind):
                raise SchemaError(f"header key {key!r} missing or wrong type", line=1, key=key)
        dim = header["dim"]
        if dim <= 0:
            raise SchemaError(f"header dim must be positive, got {dim}", line=1, key="dim")

        content = InterchangeFile(
            space=header["space"], model=header["model"], dim=dim, normalized=header["normalized"]
        )
        for line_no, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {line_no}: invalid JSON ({exc.msg})", line=line_no) from exc
            if not isinstance(obj, dict) or not isinstance(obj.get("id"), str) or not obj["id"]:
                raise SchemaError(f"line {line_no}: record needs a string id", line=line_no)
            vec = obj.get("vec")
            if not isinstance(vec, list) or not all(isinstance(x, (int, float)) for x in vec):
                raise SchemaError(f"line {line_no}: vec must be a list of numbers", line=line_no)
            if len(vec) != dim:
                raise DimensionMismatch(
                    f"vector for {obj['id']!r} has {len(vec)} values, header says {dim}",
                    id=obj["id"], got=len(vec), want=dim,
                )
            content.records.append((obj["id"], np.asarray(vec, dtype=np.float32)))
    return content


def _float32_repr(x: np.float32) -> str:
    # float32 -> float64 is exact, so the float64's shortest repr re-parses
    # (via float64 -> float32 rounding) to the identical float32 bits.
    return repr(float(x))


def write_embeddings_jsonl(path: str | Path, content: InterchangeFile) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        header = {
            "space": content.space,
            "model": content.model,
            "dim": content.dim,
            "normalized": content.normalized,
        }
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for pid, vec in content.records:
            vec32 = np.asarray(vec, dtype=np.float32)
            if vec32.shape != (content.dim,):
                raise DimensionMismatch(
                    f"vector for {pid!r} has {vec32.shape[0]} values, header says {content.dim}",
                    id=pid, got=int(vec32.shape[0]), want=content.dim,
                )
            values = ",".join(_float32_repr(x) for x in vec32)
            fh.write('{"id":%s,"vec":[%s]}\n' % (json.dumps(pid), values))


# -- binary form -------------------------------------------------------------------

def read_embeddings_binary(
    path: str | Path,
    space: str = "",
    model: str = "",
    normalized: bool = False,
) -> InterchangeFile:
    """Read the binary form; space/model/normalized are caller-supplied
    because the binary header does not carry them."""
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != BINARY_MAGIC:
        raise SchemaError("bad magic bytes: not an embedding binary file")
    version, dim, count = struct.unpack_from("<III", data, 4)
    if version != BINARY_VERSION:
        raise SchemaError(f"unsupported binary version {version}", got=version)
    if dim <= 0:
        raise SchemaError(f"header dim must be positive, got {dim}", key="dim")

    content = InterchangeFile(space=space, model=model, dim=dim, normalized=normalized)
    offset = 16
    vec_bytes = 4 * dim
    for i in range(count):
        if offset + 2 > len(data):
            raise SchemaError(f"truncated record {i + 1}: missing id length")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + vec_bytes > len(data):
            raise SchemaError(f"truncated record {i + 1}")
        pid = data[offset:offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += vec_bytes
        content.records.append((pid, vec))
    if offset != len(data):
        raise SchemaError("trailing bytes after last record")
    return content


def write_embeddings_binary(path: str | Path, content: InterchangeFile) -> None:
    with Path(path).open("wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<III", BINARY_VERSION, content.dim, len(content.records)))
        for pid, vec in content.records:
            vec32 = np.asarray(vec, dtype=np.float32)
            if vec32.shape != (content.dim,):
                raise DimensionMismatch(
                    f"vector for {pid!r} has {vec32.shape[0]} values, header says {content.dim}",
                    id=pid, got=int(vec32.shape[0]), want=content.dim,
                )
            id_bytes = pid.encode("utf-8")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(vec32.astype("<f4").tobytes())


def read_interchange(path: str | Path) -> InterchangeFile:
    """Read either interchange form, sniffing the binary magic."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
    if magic == BINARY_MAGIC:
        return read_embeddings_binary(path)
    return read_embeddings_jsonl(path)


def jsonl_to_binary(src: str | Path, dst: str | Path) -> None:
    write_embeddings_binary(dst, read_embeddings_jsonl(src))


def binary_to_jsonl(
    src: str | Path, dst: str | Path, space: str = "", model: str = "", normalized: bool = False
) -> None:
    write_embeddings_jsonl(dst, read_embeddings_binary(src, space=space, model=model, normalized=normalized))


def space_to_interchange(space: EmbeddingSpace) -> InterchangeFile:
    """Canonical (normalized) interchange content for an ingested space."""
    return InterchangeFile(
        space=space.space_id,
        model=space.model_name,
        dim=space.dim,
        normalized=True,
        records=[(pid, space.matrix[i]) for i, pid in enumerate(space.ids)],
    )
