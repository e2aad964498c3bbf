"""Segmented sieve of Eratosthenes producing a packed prime bitmap.

Integer ``n`` lives at bit ``n - 1`` of a little-endian packed bit array,
so ``n`` sits in byte ``(n - 1) // 8`` at bit ``(n - 1) % 8``.  The same
layout is used on disk by :mod:`hlav.store`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import OutOfRangeError, PreconditionError, ResourceExhaustedError

WORD_BITS = 64
BLOCK_BITS = 1 << 12
_WORDS_PER_BLOCK = BLOCK_BITS // WORD_BITS


@dataclass(frozen=True)
class SieveConfig:
    segment_size: int = 1 << 20
    parallelism: int = 1
    memory_budget: int = 1 << 31  # bytes of packed payload

    def __post_init__(self):
        if self.segment_size < WORD_BITS or self.segment_size % WORD_BITS:
            raise PreconditionError(
                f"segment_size must be a positive multiple of {WORD_BITS}, got {self.segment_size}"
            )
        if self.parallelism < 1:
            raise PreconditionError(f"parallelism must be >= 1, got {self.parallelism}")


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum(dtype=np.int64))


class PrimeBitmap:
    """Read-only prime indicator over ``[1, limit]``.

    Holds the packed bits as 64-bit words (plus one zero guard word so
    unaligned window reads never index past the end) and a running count
    of set bits per 4096-bit block for constant-time ``pi`` queries.
    """

    __slots__ = ("_limit", "_words", "_block_counts")

    def __init__(self, limit: int, words: np.ndarray):
        n_words = limit // WORD_BITS + 2
        if words.dtype != np.uint64 or words.shape != (n_words,):
            raise PreconditionError("word array does not match limit")
        words = words.copy()
        # clear anything past the limit, including the guard word
        words[limit // WORD_BITS + 1:] = 0
        tail = limit % WORD_BITS
        words[limit // WORD_BITS] &= np.uint64((1 << tail) - 1)
        words.flags.writeable = False
        self._limit = limit
        self._words = words
        per_block = np.add.reduceat(
            np.bitwise_count(words).astype(np.int64),
            np.arange(0, n_words, _WORDS_PER_BLOCK),
        )
        counts = np.zeros(len(per_block) + 1, dtype=np.int64)
        np.cumsum(per_block, out=counts[1:])
        counts.flags.writeable = False
        self._block_counts = counts

    @classmethod
    def from_payload(cls, limit: int, payload: bytes) -> "PrimeBitmap":
        n_bytes = (limit + 7) // 8
        if len(payload) != n_bytes:
            raise PreconditionError(f"payload has {len(payload)} bytes, expected {n_bytes}")
        buf = np.zeros((limit // WORD_BITS + 2) * 8, dtype=np.uint8)
        buf[:n_bytes] = np.frombuffer(payload, dtype=np.uint8)
        return cls(limit, buf.view("<u8").astype(np.uint64))

    @property
    def limit(self) -> int:
        return self._limit

    @property
    def words(self) -> np.ndarray:
        return self._words

    @property
    def cumulative_counts(self) -> np.ndarray:
        """Number of primes below bit ``4096 * i`` for each block boundary ``i``."""
        return self._block_counts

    def payload(self) -> bytes:
        """Packed bits trimmed to ``ceil(limit / 8)`` bytes."""
        return self._words.astype("<u8").view(np.uint8)[: (self._limit + 7) // 8].tobytes()

    def __eq__(self, other):
        if not isinstance(other, PrimeBitmap):
            return NotImplemented
        return self._limit == other._limit and np.array_equal(self._words, other._words)

    def __hash__(self):
        return hash((self._limit, self.payload()))

    def __repr__(self):
        return f"PrimeBitmap(limit={self._limit}, primes={self.pi(self._limit)})"

    def is_prime(self, n: int) -> bool:
        if n < 1 or n > self._limit:
            raise OutOfRangeError(f"n={n} outside [1, {self._limit}]")
        i = n - 1
        return bool((int(self._words[i // WORD_BITS]) >> (i % WORD_BITS)) & 1)

    def pi(self, x: int) -> int:
        """Number of primes ``<= x`` for ``0 <= x <= limit``."""
        if x < 0 or x > self._limit:
            raise OutOfRangeError(f"x={x} outside [0, {self._limit}]")
        block, rem = divmod(x, BLOCK_BITS)
        total = int(self._block_counts[block])
        if rem:
            w0 = block * _WORDS_PER_BLOCK
            full, bits = divmod(rem, WORD_BITS)
            total += popcount(self._words[w0:w0 + full])
            if bits:
                total += (int(self._words[w0 + full]) & ((1 << bits) - 1)).bit_count()
        return total

    def count(self, lo: int, hi: int) -> int:
        if not 0 <= lo <= hi:
            raise PreconditionError(f"need 0 <= lo <= hi, got lo={lo}, hi={hi}")
        if hi > self._limit:
            raise OutOfRangeError(f"hi={hi} exceeds limit {self._limit}")
        return self.pi(hi) - self.pi(lo)

    def window_words(self, start: int, length: int) -> np.ndarray:
        """Words whose bit ``j`` is the indicator of ``start + j``, for ``j < length``."""
        if start < 1 or length < 0 or start + length - 1 > self._limit:
            raise OutOfRangeError(
                f"window [{start}, {start + length - 1}] outside [1, {self._limit}]"
            )
        w, b = divmod(start - 1, WORD_BITS)
        nw = (length + WORD_BITS - 1) // WORD_BITS
        src = self._words
        if b == 0:
            out = src[w:w + nw].copy()
        else:
            out = (src[w:w + nw] >> np.uint64(b)) | (src[w + 1:w + nw + 1] << np.uint64(WORD_BITS - b))
        rem = length % WORD_BITS
        if rem and nw:
            out[-1] &= np.uint64((1 << rem) - 1)
        return out

    def bits(self, lo: int, hi: int) -> np.ndarray:
        """Boolean indicator for the integers ``lo..hi`` inclusive."""
        if lo > hi:
            return np.zeros(0, dtype=bool)
        if lo < 1 or hi > self._limit:
            raise OutOfRangeError(f"[{lo}, {hi}] outside [1, {self._limit}]")
        raw = self._words.astype("<u8").view(np.uint8)
        first, last = (lo - 1) // 8, (hi - 1) // 8
        unpacked = np.unpackbits(raw[first:last + 1], bitorder="little").astype(bool)
        off = (lo - 1) - 8 * first
        return unpacked[off:off + hi - lo + 1]

    def primes(self, lo: int = 1, hi: int | None = None) -> np.ndarray:
        hi = self._limit if hi is None else hi
        return np.flatnonzero(self.bits(lo, hi)).astype(np.int64) + lo


def simple_primes(n: int) -> np.ndarray:
    """Primes ``<= n`` from an unsegmented sieve (base primes for segments)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _sieve_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Indicator of primes in ``[lo, hi]``; length rounded up to whole bytes."""
    size = hi - lo + 1
    seg = np.zeros(((size + 7) // 8) * 8, dtype=bool)
    seg[:size] = True
    if lo == 1:
        seg[0] = False
    for p in base:
        p = int(p)
        if p * p > hi:
            break
        start = max(p * p, -(-lo // p) * p)
        seg[start - lo:size:p] = False
    return seg


def build_sieve(limit: int, config: SieveConfig | None = None) -> PrimeBitmap:
    """Sieve ``[1, limit]`` segment by segment.

    Segments are independent and write disjoint byte ranges, so running
    them on several threads gives the same bitmap as running them serially.
    """
    config = config or SieveConfig()
    if limit < 1:
        raise PreconditionError(f"limit must be >= 1, got {limit}")
    if (limit + 7) // 8 > config.memory_budget:
        raise ResourceExhaustedError(
            f"limit {limit} needs {(limit + 7) // 8} bytes, budget is {config.memory_budget}"
        )
    base = simple_primes(math.isqrt(limit))
    n_words = limit // WORD_BITS + 2
    buf = np.zeros(n_words * 8, dtype=np.uint8)
    seg_bits = config.segment_size
    starts = range(1, limit + 1, seg_bits)

    def run(lo: int):
        hi = min(lo + seg_bits - 1, limit)
        packed = np.packbits(_sieve_segment(lo, hi, base), bitorder="little")
        off = (lo - 1) // 8
        buf[off:off + len(packed)] = packed

    if config.parallelism > 1 and len(starts) > 1:
        with ThreadPoolExecutor(config.parallelism) as pool:
            list(pool.map(run, starts))
    else:
        for lo in starts:
            run(lo)
    return PrimeBitmap(limit, buf.view("<u8").astype(np.uint64))


def is_prime(pb: PrimeBitmap, n: int) -> bool:
    return pb.is_prime(n)


def prime_count_range(pb: PrimeBitmap, lo: int, hi: int) -> int:
    """Count primes ``p`` with ``lo < p <= hi``."""
    return pb.count(lo, hi)


@lru_cache(maxsize=8)
def primes_up_to(n: int) -> np.ndarray:
    """Cached array of primes ``<= n`` (used by the Euler products)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    out = build_sieve(n).primes()
    out.flags.writeable = False
    return out
