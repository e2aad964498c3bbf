"""Finite-x checks of the averaged prime-pair statements.

Each ``verify_*`` function computes the left-hand side exactly from the
sieve, the asymptotic prediction or lower bound on the right, and returns
a :class:`VerificationReport`.  Nothing here claims an asymptotic holds;
``passed`` only compares against the configured :class:`Thresholds`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .correlation import (
    ArithmeticFunction,
    TupleSpec,
    coincidence_counts,
    correlation_sums,
    pair_counts,
    stride_pair_counts,
    tuple_count,
)
from .errors import DomainError, PreconditionError, UnsupportedOrderError
from .sieve import PrimeBitmap
from .singular import weighted_singular_average


class StatementId(str, Enum):
    THM1_LONG = "THM1_LONG"
    THM1_WINDOW = "THM1_WINDOW"
    THM2_WEIGHTED = "THM2_WEIGHTED"
    COR2_UNWEIGHTED = "COR2_UNWEIGHTED"
    THM3_KTUPLE = "THM3_KTUPLE"
    THM4_STRIDE = "THM4_STRIDE"
    LEMMA1 = "LEMMA1"
    LEMMA2 = "LEMMA2"
    CONJ2_POINT = "CONJ2_POINT"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Thresholds:
    ratio_lo: float = 0.75
    ratio_hi: float = 1.25
    min_margin: float = 0.0


DEFAULT_THRESHOLDS = Thresholds()


@dataclass
class VerificationReport:
    statement_id: StatementId
    x: int
    params: dict
    lhs: float
    rhs: float
    ratio: float | None
    margin: float
    passed: bool | None
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "statement_id": str(self.statement_id),
            "x": self.x,
            "params": dict(self.params),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "margin": self.margin,
            "pass": self.passed,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(StatementId(d["statement_id"]), int(d["x"]), dict(d["params"]),
                   float(d["lhs"]), float(d["rhs"]),
                   None if d["ratio"] is None else float(d["ratio"]),
                   float(d["margin"]), d["pass"], d.get("notes", ""))


@dataclass(frozen=True)
class ShiftSet:
    """A finite set of positive integers, stored sorted."""

    elements: tuple[int, ...]

    def __post_init__(self):
        els = tuple(int(b) for b in self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise PreconditionError("shift set must be nonempty")
        if els[0] < 1 or any(a >= b for a, b in zip(els, els[1:])):
            raise PreconditionError(f"shift set must be distinct, positive and sorted: {els}")

    @classmethod
    def of(cls, values: Iterable[int]) -> "ShiftSet":
        values = [int(v) for v in values]
        if len(set(values)) != len(values):
            raise PreconditionError(f"duplicate elements in {values}")
        return cls(tuple(sorted(values)))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def _as_shift_set(B) -> ShiftSet:
    return B if isinstance(B, ShiftSet) else ShiftSet.of(B)


def _make_report(sid, x, params, lhs, rhs, kind, th: Thresholds, notes="") -> VerificationReport:
    lhs, rhs = float(lhs), float(rhs)
    ratio = lhs / rhs if rhs != 0 else None
    margin = lhs - rhs
    if kind == "asymptotic":
        passed = ratio is not None and th.ratio_lo <= ratio <= th.ratio_hi
        crit = f"pass iff {th.ratio_lo!r} <= ratio <= {th.ratio_hi!r}"
    elif kind == "bound":
        passed = margin >= th.min_margin
        crit = f"pass iff margin >= {th.min_margin!r}"
    else:
        passed = None
        crit = "exploration only, no pass/fail"
    notes = f"{crit}; {notes}" if notes else crit
    return VerificationReport(sid, x, params, lhs, rhs, ratio, margin, passed, notes)


def _need_limit(pb: PrimeBitmap, top: int, what: str):
    if top > pb.limit:
        raise PreconditionError(f"{what} = {top} exceeds bitmap limit {pb.limit}")


def _x_over_log2(x: int) -> float:
    return x / math.log(x) ** 2


def long_average_shift_bound(x: int, theta: float) -> int:
    """``M = floor(x**theta)``."""
    if not 0 < theta < 1:
        raise PreconditionError(f"theta must lie in (0, 1), got {theta}")
    return math.floor(x ** theta)


def verify_long_average(pb: PrimeBitmap, x: int, theta: float,
                        thresholds: Thresholds = DEFAULT_THRESHOLDS, threads: int = 1) -> VerificationReport:
    """(2/M) sum_{2k<=M} pi_{2k}(x) against 2x/ln^2 x, with M = floor(x^theta)."""
    M = long_average_shift_bound(x, theta)
    if M < 2:
        raise PreconditionError(f"M = floor(x^theta) = {M} must be >= 2")
    _need_limit(pb, x + M, "x + M")
    table = pair_counts(pb, 0, x, 2 * (M // 2), threads)
    lhs = 2 * sum(table.counts) / M
    return _make_report(StatementId.THM1_LONG, x, {"theta": theta, "M": M, "shifts": M // 2},
                        lhs, 2 * _x_over_log2(x), "asymptotic", thresholds)


def verify_window_average(pb: PrimeBitmap, x: int, h: int, theta: float,
                          thresholds: Thresholds = DEFAULT_THRESHOLDS, threads: int = 1) -> VerificationReport:
    """(2/M) sum_{2k<=M} (pi_{2k}(x+h) - pi_{2k}(x)) against 2h/ln^2 x."""
    M = long_average_shift_bound(x, theta)
    if M < 2:
        raise PreconditionError(f"M = floor(x^theta) = {M} must be >= 2")
    if not M <= h <= x:
        raise PreconditionError(f"need M <= h <= x, got M={M}, h={h}, x={x}")
    _need_limit(pb, x + h + M, "x + h + M")
    table = pair_counts(pb, x, x + h, 2 * (M // 2), threads)
    lhs = 2 * sum(table.counts) / M
    return _make_report(StatementId.THM1_WINDOW, x, {"theta": theta, "h": h, "M": M},
                        lhs, 2 * h / math.log(x) ** 2, "asymptotic", thresholds)


def _short_params(pb: PrimeBitmap, x: int, C: float, E: float | None) -> tuple[float, int]:
    if x < 3:
        raise PreconditionError(f"x must be >= 3, got {x}")
    if not C > 0.5:
        raise PreconditionError(f"C must exceed 1/2, got {C}")
    logx = math.log(x)
    E = C * logx if E is None else float(E)
    if E < C * logx:
        raise PreconditionError(f"need E >= C ln x = {C * logx!r}, got E={E!r}")
    if E > x / logx ** 2:
        raise PreconditionError(f"need E <= x/ln^2 x = {x / logx ** 2!r}, got E={E!r}")
    F = math.floor(E)
    if F < 1:
        raise PreconditionError(f"floor(E) must be >= 1, got E={E!r}")
    _need_limit(pb, x + 2 * F, "x + 2 floor(E)")
    return E, F


def _short_counts(pb: PrimeBitmap, x: int, F: int, threads: int) -> tuple[int, ...]:
    return pair_counts(pb, 0, x, 2 * F, threads).counts


def verify_weighted_short(pb: PrimeBitmap, x: int, C: float, E: float | None = None,
                          thresholds: Thresholds = DEFAULT_THRESHOLDS, threads: int = 1) -> VerificationReport:
    """Triangular-weight short average against (1 - 1/(2C)) x/ln^2 x.

    ``E`` defaults to ``C ln x``.
    """
    E, F = _short_params(pb, x, C, E)
    counts = _short_counts(pb, x, F, threads)
    lhs = sum((F - k) * c for k, c in enumerate(counts, start=1)) / F ** 2
    rhs = (1 - 1 / (2 * C)) * _x_over_log2(x)
    return _make_report(StatementId.THM2_WEIGHTED, x, {"C": C, "E": E, "floor_E": F},
                        lhs, rhs, "bound", thresholds)


def verify_unweighted_short(pb: PrimeBitmap, x: int, C: float, E: float | None = None,
                            thresholds: Thresholds = DEFAULT_THRESHOLDS, threads: int = 1) -> VerificationReport:
    E, F = _short_params(pb, x, C, E)
    counts = _short_counts(pb, x, F, threads)
    lhs = sum(counts) / F
    rhs = (1 - 1 / (2 * C)) * _x_over_log2(x)
    return _make_report(StatementId.COR2_UNWEIGHTED, x, {"C": C, "E": E, "floor_E": F},
                        lhs, rhs, "bound", thresholds)


def ktuple_weighted_sum(pb: PrimeBitmap, x: int, F: int) -> int:
    """sum over ordered (h1, h2) in [1, F]^2 of (F - max) * pi_{2h1,2h2}(x), repeats deduplicated."""
    total = 0
    for h1 in range(1, F):
        for h2 in range(h1, F):
            w = F - h2
            c = tuple_count(pb, x, TupleSpec.from_any((2 * h1, 2 * h2)))
            total += w * c if h1 == h2 else 2 * w * c
    return total


def verify_ktuple_weighted(pb: PrimeBitmap, x: int, C: float, E: float | None = None, k: int = 2,
                           thresholds: Thresholds = DEFAULT_THRESHOLDS) -> VerificationReport:
    """Hölder-type weighted triple average against (1 - 1/(2C)^2) x/ln^3 x."""
    if k != 2:
        raise UnsupportedOrderError(f"only k=2 is supported, got k={k}")
    E, F = _short_params(pb, x, C, E)
    S = ktuple_weighted_sum(pb, x, F)
    lhs = (k + 1) * S / (2 ** k * F ** (k + 1))
    rhs = (1 - 1 / (2 * C) ** k) * x / math.log(x) ** (k + 1)
    return _make_report(StatementId.THM3_KTUPLE, x, {"C": C, "E": E, "floor_E": F, "k": k},
                        lhs, rhs, "bound", thresholds,
                        "repeated shifts counted on the deduplicated tuple")


def verify_stride(pb: PrimeBitmap, x: int, m: int, h: int,
                  thresholds: Thresholds = DEFAULT_THRESHOLDS, threads: int = 1) -> VerificationReport:
    """Weighted average of pi_{2mk}(x) over k <= M = floor(h/(2m)) against x/ln^2 x.

    The unweighted variant (1/M) sum pi_{2mk}(x) against x/(2 ln^2 x) is
    carried in ``params`` as ``cor3_lhs`` / ``cor3_rhs``.
    """
    if m < 1:
        raise PreconditionError(f"m must be a positive integer, got {m}")
    if x < 3:
        raise PreconditionError(f"x must be >= 3, got {x}")
    M = h // (2 * m)
    if M < 2:
        raise PreconditionError(f"M = floor(h/(2m)) = {M} must be >= 2")
    logx = math.log(x)
    if h < 2 * logx or h > x / logx ** 2:
        raise PreconditionError(f"need 2 ln x <= h <= x/ln^2 x, got h={h}")
    _need_limit(pb, x + 2 * m * M, "x + 2mM")
    counts = stride_pair_counts(pb, x, m, M, threads)
    lhs = sum(2 * (M - k) * c for k, c in enumerate(counts, start=1)) / M ** 2
    cor3_lhs = sum(counts) / M
    cor3_rhs = x / (2 * logx ** 2)
    params = {"m": m, "h": h, "M": M, "cor3_lhs": cor3_lhs, "cor3_rhs": cor3_rhs,
              "cor3_margin": cor3_lhs - cor3_rhs}
    return _make_report(StatementId.THM4_STRIDE, x, params, lhs, x / logx ** 2, "bound", thresholds)


def _lemma1_guard(pb: PrimeBitmap, x: int, B: ShiftSet):
    if x < 3:
        raise PreconditionError(f"x must be >= 3, got {x}")
    bmax = B.elements[-1]
    if bmax > _x_over_log2(x):
        raise PreconditionError(f"max(B) = {bmax} exceeds x/ln^2 x = {_x_over_log2(x)!r}")
    _need_limit(pb, x + bmax, "x + max(B)")


def coincidence_matrix_sums(pb: PrimeBitmap, x: int, B: ShiftSet) -> tuple[int, int]:
    """(diagonal, off-diagonal) parts of sum_{a,b in B} sum_{n<=x} P(n+a) P(n+b)."""
    els = B.elements
    _need_limit(pb, x + els[-1], "x + max(B)")
    diag = sum(pb.count(a, x + a) for a in els)
    off = 0
    for a, b in combinations(els, 2):
        off += 2 * coincidence_counts(pb, a, x + a, [b - a])[0]
    return diag, off


def cauchy_schwarz_identity(pb: PrimeBitmap, x: int, B: Iterable[int]) -> tuple[int, int]:
    """Both sides of sum_n (sum_a P(n+a))^2 = sum_{a,b} sum_n P(n+a) P(n+b), as integers.

    The left side is evaluated pointwise over n, the right side from
    shifted-window popcounts, so agreement checks two separate routes.
    """
    B = _as_shift_set(B)
    ind = pb.bits(1, x + B.elements[-1]).astype(np.int64)
    S = np.zeros(x, dtype=np.int64)
    for a in B:
        S += ind[a:a + x]
    diag, off = coincidence_matrix_sums(pb, x, B)
    return int(np.dot(S, S)), diag + off


def lemma1_margin(pb: PrimeBitmap, x: int, B, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> VerificationReport:
    B = _as_shift_set(B)
    _lemma1_guard(pb, x, B)
    left, right = cauchy_schwarz_identity(pb, x, B)
    diag, off = coincidence_matrix_sums(pb, x, B)
    nB = len(B)
    lhs = off / nB ** 2
    logx = math.log(x)
    rhs = x / logx ** 2 - x / (nB * logx)
    report = _make_report(
        StatementId.LEMMA1, x, {"B": list(B.elements), "identity_holds": left == right},
        lhs, rhs, "bound", thresholds,
        f"lhs uses exact sums over n<=x of P(n+a)P(n+b); each differs from pi_|a-b|(x) "
        f"by at most max(B) = {B.elements[-1]}",
    )
    if left != right:
        report.passed = False
    return report


def _shifted_pair_total(values: np.ndarray, x: int, B: ShiftSet) -> complex:
    total = 0j
    for a in B:
        for b in B:
            if a != b:
                total += complex(np.sum(values[a:a + x] * np.conj(values[b:b + x])))
    return total


def lemma2_margin(A: ArithmeticFunction, x: int, B, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> VerificationReport:
    """Generic Cauchy-Schwarz lower bound for an arithmetic function ``A``.

    lhs = |sum_{a != b} sum_{n<=x} A(n+a) conj(A(n+b))| / |B|^2,
    rhs = |alpha(x)|^2 / x - alpha_0(x) / |B|.
    """
    B = _as_shift_set(B)
    top = x + B.elements[-1]
    if top > A.domain_limit:
        raise DomainError(f"x + max(B) = {top} exceeds domain limit {A.domain_limit}")
    sums = correlation_sums(A, x, [])
    values = A.values(1, top)
    lhs = abs(_shifted_pair_total(values, x, B)) / len(B) ** 2
    rhs = abs(sums.alpha) ** 2 / x - sums.alpha_zero / len(B)
    return _make_report(StatementId.LEMMA2, x,
                        {"B": list(B.elements), "alpha_abs": abs(sums.alpha), "alpha_zero": sums.alpha_zero},
                        lhs, rhs, "bound", thresholds)


_E_RULES = {
    "log2": lambda lx: lx * lx,
    "sqrtlog": lambda lx: lx * math.sqrt(lx),
}


def resolve_E(x: int, rule: str) -> float:
    """E(x) for a named rule, or ``c * ln x`` when ``rule`` is a number ``c``."""
    lx = math.log(x)
    if rule in _E_RULES:
        return _E_RULES[rule](lx)
    try:
        c = float(rule)
    except ValueError:
        raise PreconditionError(f"unknown E rule {rule!r}; use log2, sqrtlog or a number") from None
    if not c > 0:
        raise PreconditionError(f"E multiplier must be positive, got {c}")
    return c * lx


def conjecture2_scan(pb: PrimeBitmap, x_grid: Sequence[int], E_rule: str = "log2",
                     thresholds: Thresholds = DEFAULT_THRESHOLDS, threads: int = 1,
                     prime_bound: int = 10**6) -> list[VerificationReport]:
    """Weighted short average over a grid of x, reported against x/ln^2 x (no pass/fail)."""
    plan = []
    for x in sorted(int(v) for v in x_grid):
        if x < 3:
            raise PreconditionError(f"grid points must be >= 3, got {x}")
        E = resolve_E(x, E_rule)
        F = math.floor(E)
        if F < 1:
            raise PreconditionError(f"floor(E) = {F} < 1 at x={x}")
        _need_limit(pb, x + 2 * F, "x + 2 floor(E)")
        plan.append((x, E, F))
    out = []
    for x, E, F in plan:
        counts = _short_counts(pb, x, F, threads)
        lhs = sum((F - k) * c for k, c in enumerate(counts, start=1)) / F ** 2
        params = {"E_rule": E_rule, "E": E, "floor_E": F,
                  "singular_prediction": weighted_singular_average(F, prime_bound)}
        out.append(_make_report(StatementId.CONJ2_POINT, x, params, lhs, _x_over_log2(x),
                                "explore", thresholds))
    return out
