"""Hardy-Littlewood singular series constants and their shift averages.

All Euler products are split into three parts:

* primes ``p <= K`` (``K`` = tuple size including 0), evaluated directly and
  used to detect a fully covered residue system;
* primes ``K < p <= P`` that divide a shift or a shift difference, where
  ``nu(p) < K`` and the generic factor is corrected by ``(p - nu) / (p - K)``;
* every other prime ``K < p <= P``, whose factor
  ``(1 - K/p) (1 - 1/p)^-K`` only depends on ``K`` and is cached.

Primes above ``P`` are never special (callers must pick ``P`` above every
prime dividing a shift or difference) and are covered by ``tail_bound``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable

import numpy as np

from .correlation import TupleSpec
from .errors import NotPrimeError, PreconditionError, UnsupportedOrderError
from .sieve import primes_up_to

DEFAULT_PRIME_BOUND = 10**6
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SingularValue:
    """Truncated Euler product; the exact constant lies within ``tail_bound`` of ``value``."""

    value: float
    tail_bound: float
    prime_bound: int
    exactly_zero: bool = False


@dataclass(frozen=True)
class TupleConstantSpec:
    shifts: TupleSpec
    nu_table: dict[int, int]

    @classmethod
    def for_shifts(cls, shifts: TupleSpec) -> "TupleConstantSpec":
        k1 = len(shifts) + 1
        return cls(shifts, {p: nu(shifts, p) for p in _small_primes(k1)})

    @property
    def admissible(self) -> bool:
        return all(v < p for p, v in self.nu_table.items())


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def _small_primes(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if _is_prime(p)]


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n >= 1`` in ascending order (trial division)."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _tail_constant(K: int, P: int) -> float:
    """``c`` with ``|log((1-K/p)(1-1/p)^-K)| <= c / p**2`` for every prime ``p > P >= K``."""
    if P >= 2 * K:
        return 4.0 * K * (K - 1) / 3.0
    return (K - 1) * (K + 1) ** 2 / 2.0


def _tail_bound(value: float, K: int, P: int) -> float:
    # sum_{p > P} 1/p^2 < 1/P; the eps term absorbs rounding in the log-sum
    return float(abs(value) * (math.expm1(_tail_constant(K, P) / P) + 64 * _EPS))


@lru_cache(maxsize=64)
def _generic_log_product(K: int, P: int) -> float:
    """``sum log((1 - K/p)(1 - 1/p)^-K)`` over primes ``K < p <= P``."""
    p = primes_up_to(P)
    p = p[p > K].astype(np.float64)
    if K == 2:
        logs = np.log1p(-1.0 / (p - 1.0) ** 2)
    else:
        logs = np.log1p(-K / p) - K * np.log1p(-1.0 / p)
    return math.fsum(logs.tolist())


def twin_half_constant(prime_bound: int) -> SingularValue:
    """Product of ``p(p-2)/(p-1)^2`` over odd primes up to ``prime_bound``."""
    if prime_bound < 3:
        raise PreconditionError(f"prime_bound must be >= 3, got {prime_bound}")
    value = math.exp(_generic_log_product(2, prime_bound))
    return SingularValue(value, _tail_bound(value, 2, prime_bound), prime_bound)


def odd_part_factor(k: int) -> float:
    """``prod (p-1)/(p-2)`` over odd primes ``p | k``, multiplied in ascending order."""
    return math.prod((p - 1) / (p - 2) for p in prime_factors(k) if p > 2)


def pair_constant(k: int, prime_bound: int = DEFAULT_PRIME_BOUND) -> SingularValue:
    """The constant ``C_{2k}`` for the pair ``(p, p + 2k)``."""
    if k < 1:
        raise PreconditionError(f"k must be a positive integer, got {k}")
    odd = [p for p in prime_factors(k) if p > 2]
    need = max([3] + odd)
    if prime_bound < need:
        raise PreconditionError(f"prime_bound must be >= {need} for k={k}, got {prime_bound}")
    half = twin_half_constant(prime_bound)
    corr = odd_part_factor(k)
    return SingularValue(2.0 * half.value * corr, 2.0 * corr * half.tail_bound, prime_bound)


def nu(shifts: TupleSpec | Iterable[int], p: int) -> int:
    """Number of residue classes mod ``p`` met by ``{0} | shifts``."""
    if not _is_prime(p):
        raise NotPrimeError(f"{p} is not prime")
    if not isinstance(shifts, TupleSpec):
        shifts = TupleSpec(tuple(shifts))
    return len({0} | {s % p for s in shifts.shifts})


def _special_primes(shifts: tuple[int, ...]) -> set[int]:
    """Primes dividing some shift or some difference of two shifts."""
    out: set[int] = set()
    for s in shifts:
        out.update(prime_factors(s))
    for a, b in combinations(shifts, 2):
        out.update(prime_factors(b - a))
    return out


def tuple_constant(shifts: TupleSpec | Iterable[int], prime_bound: int = DEFAULT_PRIME_BOUND) -> SingularValue:
    """Singular series of the tuple ``(0, shifts...)``, truncated at ``prime_bound``."""
    if not isinstance(shifts, TupleSpec):
        shifts = TupleSpec(tuple(shifts))
    K = len(shifts) + 1
    special = _special_primes(shifts.shifts)
    need = max([K] + sorted(special))
    if prime_bound < need:
        raise PreconditionError(
            f"prime_bound must be >= {need} for shifts {shifts.shifts}, got {prime_bound}"
        )
    spec = TupleConstantSpec.for_shifts(shifts)
    if not spec.admissible:
        return SingularValue(0.0, 0.0, prime_bound, exactly_zero=True)
    logs = [math.log1p(-v / p) - K * math.log1p(-1.0 / p) for p, v in sorted(spec.nu_table.items())]
    logs.append(_generic_log_product(K, prime_bound))
    for p in sorted(special):
        if p > K:
            logs.append(math.log((p - nu(shifts, p)) / (p - K)))
    value = math.exp(math.fsum(logs))
    return SingularValue(value, _tail_bound(value, K, prime_bound), prime_bound)


def _pair_values(n: int, prime_bound: int) -> list[float]:
    return [pair_constant(k, prime_bound).value for k in range(1, n + 1)]


def gallagher_average(y: int, prime_bound: int = DEFAULT_PRIME_BOUND) -> float:
    """``(2/y) * sum_{2k <= y} C_{2k}``."""
    if y < 2:
        raise PreconditionError(f"y must be >= 2, got {y}")
    return 2.0 / y * math.fsum(_pair_values(y // 2, prime_bound))


def weighted_singular_average(E: float, prime_bound: int = DEFAULT_PRIME_BOUND) -> float:
    """``(1/floor(E)^2) * sum_{1 <= k <= E} (floor(E) - k) C_{2k}``."""
    if E < 1:
        raise PreconditionError(f"E must be >= 1, got {E}")
    F = math.floor(E)
    vals = _pair_values(F, prime_bound)
    return math.fsum((F - k) * c for k, c in enumerate(vals, start=1)) / F**2


def ktuple_gallagher_average(y: int, k: int, prime_bound: int = DEFAULT_PRIME_BOUND) -> float:
    """Mean of the tuple constant over ordered ``(2h_1, ..., 2h_k)`` with each ``2h_i <= y``.

    Ordered tuples with repeated entries are evaluated on their distinct
    shifts (so ``(2h, 2h)`` contributes ``C_{2h}``).
    """
    if k not in (1, 2):
        raise UnsupportedOrderError(f"only k in {{1, 2}} is supported, got k={k}")
    if y < 2:
        raise PreconditionError(f"y must be >= 2, got {y}")
    if k == 1:
        return gallagher_average(y, prime_bound)
    H = y // 2
    terms = []
    for h1 in range(1, H + 1):
        for h2 in range(1, H + 1):
            if h1 == h2:
                terms.append(tuple_constant((2 * h1,), prime_bound).value)
            elif h1 < h2:
                terms.append(2.0 * tuple_constant((2 * h1, 2 * h2), prime_bound).value)
    return (2.0 / y) ** 2 * math.fsum(terms)
