"""On-disk persistence for prime bitmaps and verification reports.

Bitmap file layout (all integers little-endian)::

    0   4  magic  b"HLPB"
    4   4  version (uint32, = 1)
    8   8  limit (uint64)
    16  8  FNV-1a 64 checksum of the payload (uint64)
    24  .. payload: ceil(limit / 8) bytes, integer n at byte (n-1)//8, bit (n-1)%8
"""
from __future__ import annotations

import json
import os
import struct
import sys
import tempfile
from pathlib import Path
from typing import Iterable

from .averages import VerificationReport
from .errors import (
    ChecksumMismatchError,
    CorruptMagicError,
    StoreIOError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .sieve import PrimeBitmap

MAGIC = b"HLPB"
VERSION = 1
HEADER = struct.Struct("<4sIQQ")
CACHE_ENV = "HLAV_CACHE_DIR"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _atomic_write(path: Path, chunks: Iterable[bytes], mode: str = "wb"):
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    except OSError as exc:
        raise StoreIOError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, mode) as fh:
            for chunk in chunks:
                fh.write(chunk)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise StoreIOError(f"cannot write {path}: {exc}") from exc


def save_bitmap(pb: PrimeBitmap, path) -> None:
    payload = pb.payload()
    header = HEADER.pack(MAGIC, VERSION, pb.limit, fnv1a64(payload))
    _atomic_write(Path(path), [header, payload])


def load_bitmap(path) -> PrimeBitmap:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise StoreIOError(f"cannot read {path}: {exc}") from exc
    if len(data) < 4 or data[:4] != MAGIC:
        raise CorruptMagicError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < HEADER.size:
        raise TruncatedFileError(f"{path}: header truncated ({len(data)} bytes)")
    _, version, limit, checksum = HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: version {version}, expected {VERSION}")
    expected = (limit + 7) // 8
    payload = data[HEADER.size:]
    if len(payload) < expected:
        raise TruncatedFileError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    if len(payload) > expected:
        raise TruncatedFileError(f"{path}: {len(payload) - expected} trailing bytes after payload")
    if fnv1a64(payload) != checksum:
        raise ChecksumMismatchError(f"{path}: payload checksum mismatch")
    return PrimeBitmap.from_payload(limit, payload)


def default_cache_dir() -> Path:
    if sys.platform == "win32":
        base = Path(os.environ.get("LOCALAPPDATA", Path.home() / "AppData" / "Local"))
    elif sys.platform == "darwin":
        base = Path.home() / "Library" / "Caches"
    else:
        base = Path(os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache")
    return base / "hlav"


def resolve_cache_dir(flag: str | os.PathLike | None = None) -> Path:
    """``--cache-dir`` beats ``$HLAV_CACHE_DIR`` beats the platform cache directory."""
    if flag:
        return Path(flag)
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return default_cache_dir()


def bitmap_cache_path(cache_dir, limit: int) -> Path:
    return Path(cache_dir) / f"primes-{limit}.hlpb"


def append_reports(reports: Iterable[VerificationReport], path) -> None:
    """Append reports to a JSON-lines file, one object per line."""
    path = Path(path)
    lines = "".join(json.dumps(r.to_dict(), sort_keys=False) + "\n" for r in reports)
    try:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(lines)
    except OSError as exc:
        raise StoreIOError(f"cannot append to {path}: {exc}") from exc


def load_reports(path) -> list[VerificationReport]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreIOError(f"cannot read {path}: {exc}") from exc
    return [VerificationReport.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
