"""Binary embedding cache, keyed by map content hash and dimension.

Layout (little-endian): magic "TBAE", version u16, SHA-256 of the map file
bytes (32 bytes), n u32, m u16, row-major float64 coordinates, final
normalized stress f64, then the vertex distance matrix as n u32 followed by
n*n row-major float64.  Keying by content hash means moving or renaming a
map file never invalidates its entry, while editing a single vertex does.
"""

from __future__ import annotations

import hashlib
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError

MAGIC = b"TBAE"
VERSION = 1
_HEAD = struct.Struct("<4sH32sIH")


@dataclass(frozen=True, eq=False)
class CacheEntry:
    map_hash: bytes          # 32-byte SHA-256 of the map file content
    m: int
    coords: np.ndarray       # (n, m) float64 embedding
    stress: float
    distances: np.ndarray    # (n, n) float64 vertex geodesic distances

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def map_content_hash(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def cache_path(cache_dir: str | Path, map_hash: bytes, m: int) -> Path:
    return Path(cache_dir) / f"{map_hash.hex()}-m{m}.tbae"


def encode(entry: CacheEntry) -> bytes:
    n = entry.n
    head = _HEAD.pack(MAGIC, VERSION, entry.map_hash, n, entry.m)
    coords = np.ascontiguousarray(entry.coords, dtype="<f8").tobytes()
    stress = struct.pack("<d", entry.stress)
    dist = struct.pack("<I", n) + np.ascontiguousarray(
        entry.distances, dtype="<f8"
    ).tobytes()
    return head + coords + stress + dist


def decode(blob: bytes) -> CacheEntry:
    if len(blob) < _HEAD.size:
        raise ParseError("cache entry is truncated")
    magic, version, map_hash, n, m = _HEAD.unpack_from(blob)
    if magic != MAGIC:
        raise ParseError("not an embedding cache entry (bad magic)")
    if version != VERSION:
        raise ParseError(f"unsupported cache version {version}")
    need = _HEAD.size + 8 * n * m + 8 + 4 + 8 * n * n
    if len(blob) != need:
        raise ParseError(f"cache entry has {len(blob)} bytes, expected {need}")
    off = _HEAD.size
    coords = np.frombuffer(blob, dtype="<f8", count=n * m, offset=off).reshape(n, m)
    off += 8 * n * m
    (stress,) = struct.unpack_from("<d", blob, off)
    off += 8
    (n2,) = struct.unpack_from("<I", blob, off)
    if n2 != n:
        raise ParseError("distance section size disagrees with the header")
    off += 4
    distances = np.frombuffer(blob, dtype="<f8", count=n * n, offset=off).reshape(n, n)
    return CacheEntry(
        map_hash=map_hash,
        m=m,
        coords=coords.copy(),
        stress=float(stress),
        distances=distances.copy(),
    )


def write_entry(path: str | Path, entry: CacheEntry) -> None:
    """Whole-file atomic write (temp file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(encode(entry))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_entry(path: str | Path) -> CacheEntry:
    with open(path, "rb") as fh:
        return decode(fh.read())
