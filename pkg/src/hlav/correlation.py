"""Shifted-prime coincidence counts and generic correlation sums.

Every count here reduces to one primitive: take the bitmap window for
``(lo, hi]``, AND it with the same window moved up by ``s``, popcount.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidTupleError, PreconditionError
from .sieve import PrimeBitmap, popcount


@dataclass(frozen=True)
class PairCountTable:
    """``counts[k - 1]`` is the number of primes ``p`` in ``(lo, hi]`` with ``p + 2k`` prime."""

    lo: int
    hi: int
    max_shift: int
    counts: tuple[int, ...]

    def count(self, k: int) -> int:
        if not 1 <= k <= len(self.counts):
            raise IndexError(f"k={k} outside 1..{len(self.counts)}")
        return self.counts[k - 1]

    def rows(self):
        """``(2k, count)`` pairs in ascending shift order."""
        return [(2 * k, c) for k, c in enumerate(self.counts, start=1)]


@dataclass(frozen=True)
class TupleSpec:
    shifts: tuple[int, ...]

    def __post_init__(self):
        shifts = tuple(int(s) for s in self.shifts)
        object.__setattr__(self, "shifts", shifts)
        if not shifts:
            raise InvalidTupleError("a tuple needs at least one shift")
        if any(s <= 0 or s % 2 for s in shifts):
            raise InvalidTupleError(f"shifts must be positive and even: {shifts}")
        if any(a >= b for a, b in zip(shifts, shifts[1:])):
            raise InvalidTupleError(f"shifts must be strictly increasing: {shifts}")

    @classmethod
    def from_any(cls, shifts: Iterable[int]) -> "TupleSpec":
        """Sort and deduplicate before validating (for degenerate ordered tuples)."""
        return cls(tuple(sorted(set(int(s) for s in shifts))))

    def __len__(self):
        return len(self.shifts)


@dataclass(frozen=True)
class ArithmeticFunction:
    """A function ``A: [1, domain_limit] -> C``.

    ``batch`` is an optional vectorised form taking an int64 array; when
    given it must agree with ``eval`` pointwise.
    """

    eval: Callable[[int], complex]
    domain_limit: int
    batch: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def values(self, lo: int, hi: int) -> np.ndarray:
        if lo < 1 or hi > self.domain_limit:
            raise DomainError(f"[{lo}, {hi}] outside domain [1, {self.domain_limit}]")
        if self.batch is not None:
            return np.asarray(self.batch(np.arange(lo, hi + 1, dtype=np.int64)), dtype=np.complex128)
        return np.fromiter((complex(self.eval(n)) for n in range(lo, hi + 1)),
                           dtype=np.complex128, count=max(hi - lo + 1, 0))


def constant_function(value: complex, domain_limit: int) -> ArithmeticFunction:
    return ArithmeticFunction(lambda n: value, domain_limit,
                              lambda ns: np.full(len(ns), value, dtype=np.complex128))


def alternating_function(domain_limit: int) -> ArithmeticFunction:
    """``A(n) = (-1)^n``."""
    return ArithmeticFunction(lambda n: -1 if n % 2 else 1, domain_limit,
                              lambda ns: np.where(ns % 2 == 1, -1.0, 1.0))


def prime_indicator(pb: PrimeBitmap) -> ArithmeticFunction:
    def batch(ns):
        if len(ns) == 0:
            return np.zeros(0)
        return pb.bits(1, int(ns.max()))[ns - 1].astype(np.float64)

    return ArithmeticFunction(lambda n: 1 if pb.is_prime(n) else 0, pb.limit, batch)


@dataclass(frozen=True)
class CorrelationSums:
    x: int
    alpha: complex
    alpha_shifts: dict[int, complex]
    alpha_zero: float


def _map(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def coincidence_counts(pb: PrimeBitmap, lo: int, hi: int, shifts: Sequence[int],
                       threads: int = 1) -> list[int]:
    """For each ``s``, the number of ``n`` in ``(lo, hi]`` with ``n`` and ``n + s`` prime.

    Shifts may be odd or zero here; callers enforce evenness where it matters.
    """
    if lo < 0 or lo > hi:
        raise PreconditionError(f"need 0 <= lo <= hi, got lo={lo}, hi={hi}")
    if shifts and hi + max(shifts) > pb.limit:
        raise PreconditionError(
            f"hi + max shift = {hi + max(shifts)} exceeds bitmap limit {pb.limit}"
        )
    length = hi - lo
    if length == 0:
        return [0] * len(shifts)
    base = pb.window_words(lo + 1, length)
    return _map(lambda s: popcount(base & pb.window_words(lo + 1 + s, length)), list(shifts), threads)


def pair_counts(pb: PrimeBitmap, lo: int, hi: int, max_shift: int, threads: int = 1) -> PairCountTable:
    if lo < 0 or lo >= hi:
        raise PreconditionError(f"need 0 <= lo < hi, got lo={lo}, hi={hi}")
    if max_shift < 2 or max_shift % 2:
        raise PreconditionError(f"max_shift must be an even number >= 2, got {max_shift}")
    if hi + max_shift > pb.limit:
        raise PreconditionError(f"hi + max_shift = {hi + max_shift} exceeds bitmap limit {pb.limit}")
    shifts = list(range(2, max_shift + 1, 2))
    return PairCountTable(lo, hi, max_shift, tuple(coincidence_counts(pb, lo, hi, shifts, threads)))


def stride_pair_counts(pb: PrimeBitmap, x: int, m: int, k_max: int, threads: int = 1) -> list[int]:
    """``[pi_{2m}(x), pi_{4m}(x), ..., pi_{2m k_max}(x)]``."""
    if m < 1 or k_max < 0 or x < 0:
        raise PreconditionError(f"need m >= 1, k_max >= 0, x >= 0; got m={m}, k_max={k_max}, x={x}")
    if x + 2 * m * k_max > pb.limit:
        raise PreconditionError(f"x + 2*m*k_max = {x + 2 * m * k_max} exceeds bitmap limit {pb.limit}")
    return coincidence_counts(pb, 0, x, [2 * m * k for k in range(1, k_max + 1)], threads)


def tuple_count(pb: PrimeBitmap, x: int, spec: TupleSpec) -> int:
    if not isinstance(spec, TupleSpec):
        spec = TupleSpec(tuple(spec))
    if x < 0:
        raise PreconditionError(f"x must be >= 0, got {x}")
    if x + spec.shifts[-1] > pb.limit:
        raise PreconditionError(
            f"x + max shift = {x + spec.shifts[-1]} exceeds bitmap limit {pb.limit}"
        )
    if x == 0:
        return 0
    acc = pb.window_words(1, x)
    for s in spec.shifts:
        acc &= pb.window_words(1 + s, x)
    return popcount(acc)


def correlation_sums(A: ArithmeticFunction, x: int, shifts: Iterable[int]) -> CorrelationSums:
    """alpha(x), alpha_k(x) = sum_{n<=x} A(n) conj(A(n+k)), and alpha_0(x)."""
    shifts = sorted(set(int(k) for k in shifts))
    if any(k < 0 for k in shifts):
        raise PreconditionError(f"shifts must be nonnegative: {shifts}")
    top = x + max(shifts, default=0)
    if top > A.domain_limit:
        raise DomainError(f"x + max shift = {top} exceeds domain limit {A.domain_limit}")
    a = A.values(1, top) if top >= 1 else np.zeros(0, dtype=np.complex128)
    head = a[:x]
    alpha = complex(head.sum())
    alpha_shifts = {k: complex(np.sum(head * np.conj(a[k:k + x]))) for k in shifts}
    alpha_zero = float(np.sum(head.real ** 2 + head.imag ** 2))
    return CorrelationSums(x, alpha, alpha_shifts, alpha_zero)
