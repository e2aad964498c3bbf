"""Exit criteria for the build, one test per criterion.

Run ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per criterion is
printed in the terminal summary.
"""
import io
import json
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from hlav import averages as av
from hlav.cli import run
from hlav.correlation import pair_counts
from hlav.errors import ChecksumMismatchError, CorruptMagicError, TruncatedFileError
from hlav.sieve import build_sieve
from hlav.singular import (
    gallagher_average,
    pair_constant,
    tuple_constant,
    twin_half_constant,
    weighted_singular_average,
)
from hlav.store import load_bitmap, save_bitmap

from conftest import naive_pair_count, trial_division_is_prime

GOLDEN = Path(__file__).parent / "golden"


def test_01_sieve_correctness(record_criterion):
    oracle_1e5 = sum(trial_division_is_prime(n) for n in range(1, 10**5 + 1))
    build_sieve(1000)  # warm-up: imports and allocator
    start = time.perf_counter()
    pb = build_sieve(10**6)
    elapsed = time.perf_counter() - start
    pi_1e6 = pb.pi(10**6)
    ok = pi_1e6 == 78498 and pb.pi(10**5) == oracle_1e5 == 9592 and elapsed < 1.0
    record_criterion(1, "pi(10^6) = 78498 in < 1 s", ok, f"(pi={pi_1e6}, {elapsed:.3f}s)")
    assert ok


def test_02_twin_count(record_criterion, pb_million):
    primes = set(pb_million.primes(1, 10**6 + 2).tolist())
    brute = sum(1 for p in primes if p <= 10**6 and p + 2 in primes)
    fast = pair_counts(pb_million, 0, 10**6, 2).count(1)
    ok = fast == brute == 8169
    record_criterion(2, "pi_2(10^6) = 8169", ok, f"(fast={fast}, brute={brute})")
    assert ok


def test_03_fast_path_oracle(record_criterion):
    pb = build_sieve(10**4 + 200)
    primes = [p for p in range(2, 10**4 + 201) if trial_division_is_prime(p)]
    prime_set = set(primes)
    # naive double loop: events[p][k] for p <= 10^4, 2k <= 200, then prefix sums over x
    events = np.zeros((10**4 + 1, 100), dtype=np.int64)
    for p in primes:
        if p > 10**4:
            break
        for k in range(1, 101):
            if p + 2 * k in prime_set:
                events[p, k - 1] += 1
    naive = np.cumsum(events, axis=0)
    mismatches = sum(
        pair_counts(pb, 0, x, 200).counts != tuple(naive[x].tolist()) for x in range(1, 10**4 + 1)
    )
    rng = random.Random(20240601)
    bad_windows = 0
    for _ in range(100):
        lo = rng.randrange(0, 9000)
        hi = rng.randrange(lo + 1, 10**4 + 1)
        M = 2 * rng.randrange(1, 101)
        got = pair_counts(pb, lo, hi, M).counts
        bad_windows += got != tuple(naive_pair_count(prime_set, lo, hi, 2 * k) for k in range(1, M // 2 + 1))
    ok = mismatches == 0 and bad_windows == 0
    record_criterion(3, "word-level pair counts equal naive loop", ok,
                     f"(x mismatches={mismatches}, window mismatches={bad_windows})")
    assert ok


def test_04_coincidence_identity(record_criterion):
    pb = build_sieve(10**4 + 5000)
    rng = random.Random(7)
    failures = 0
    for _ in range(50):
        x = rng.randrange(1, 10**4 + 1)
        B = rng.sample(range(1, 5001), rng.randrange(1, 21))
        left, right = av.cauchy_schwarz_identity(pb, x, B)
        failures += left != right
    ok = failures == 0
    record_criterion(4, "Cauchy-Schwarz expansion identity exact on 50 instances", ok, f"(failures={failures})")
    assert ok


def test_05_singular_series(record_criterion):
    coarse, fine = twin_half_constant(10**6), twin_half_constant(10**7)
    diff = abs(coarse.value - fine.value)
    c2, c6 = pair_constant(1), pair_constant(3)
    zero = tuple_constant((2, 4))
    ok = diff < 1e-6 and diff <= coarse.tail_bound and c6.value / c2.value == 2.0 and zero.exactly_zero
    record_criterion(5, "twin constant stable, tail honest, C_6/C_2 = 2, (2,4) inadmissible", ok,
                     f"(|delta|={diff:.3e}, tail={coarse.tail_bound:.3e})")
    assert ok


def test_06_gallagher(record_criterion):
    g = gallagher_average(10**4)
    w = weighted_singular_average(10**3)
    ok = abs(g - 2) < 0.02 and abs(w - 1) < 0.02
    record_criterion(6, "Gallagher averages near 2 and 1", ok, f"(plain={g:.5f}, weighted={w:.5f})")
    assert ok


def test_07_long_average_trend(record_criterion):
    start = time.perf_counter()
    theta = 0.62
    reports = {}
    for x in (10**4, 10**7):
        pb = build_sieve(x + math.floor(x ** theta))
        reports[x] = av.verify_long_average(pb, x, theta)
    elapsed = time.perf_counter() - start
    r_small, r_big = reports[10**4].ratio, reports[10**7].ratio
    ok = 0.8 <= r_big <= 1.2 and abs(r_big - 1) < abs(r_small - 1) and elapsed < 120
    record_criterion(7, "long-average pair-count ratio trend at theta=0.62", ok,
                     f"(ratio 1e4={r_small:.4f}, 1e7={r_big:.4f}, {elapsed:.1f}s)")
    assert ok


def test_08_weighted_short_bound(record_criterion, pb_million):
    x = 10**6
    rep = av.verify_weighted_short(pb_million, x, 1.0, math.log(x))
    bound = 0.5 * x / math.log(x) ** 2
    ok = rep.rhs == pytest.approx(bound, rel=1e-15) and rep.margin > 0
    record_criterion(8, "weighted short-average margin positive at x=10^6, C=1", ok,
                     f"(lhs={rep.lhs:.1f}, bound={rep.rhs:.1f})")
    assert ok


def test_09_stride_average(record_criterion):
    x = 10**6
    start = time.perf_counter()
    pb = build_sieve(x + 1000)
    rep = av.verify_stride(pb, x, 5, 1000)
    elapsed = time.perf_counter() - start
    ok = rep.lhs > 0.5 * x / math.log(x) ** 2 and elapsed < 10
    record_criterion(9, "stride average exceeds 0.5 x/ln^2 x", ok,
                     f"(lhs={rep.lhs:.1f}, {elapsed:.2f}s)")
    assert ok


def test_10_ktuple_report(record_criterion):
    x = 10**6
    start = time.perf_counter()
    pb = build_sieve(x + 2 * math.floor(math.log(x)))
    rep = av.verify_ktuple_weighted(pb, x, 1.0, math.log(x), 2)
    elapsed = time.perf_counter() - start
    d = rep.to_dict()
    well_formed = (
        d["statement_id"] == "THM3_KTUPLE"
        and all(math.isfinite(d[key]) for key in ("lhs", "rhs", "ratio", "margin"))
        and isinstance(d["pass"], bool)
        and json.loads(json.dumps(d)) == d
    )
    ok = well_formed and elapsed < 60
    record_criterion(10, "weighted 2-tuple report at x=10^6", ok,
                     f"(margin={rep.margin:.2f}, {elapsed:.2f}s)")
    assert ok


def test_11_store_roundtrip(record_criterion, tmp_path):
    identical = True
    for limit in (1, 63, 64, 65, 10**6):
        pb = build_sieve(limit)
        path = tmp_path / f"p{limit}.hlpb"
        save_bitmap(pb, path)
        identical &= load_bitmap(path) == pb and load_bitmap(path).payload() == pb.payload()
    path = tmp_path / f"p{10**6}.hlpb"
    data = bytearray(path.read_bytes())
    rejected = []
    for mutate, error in [
        (lambda d: d.__setitem__(0, d[0] ^ 0xFF), CorruptMagicError),
        (lambda d: d.__delitem__(-1), TruncatedFileError),
        (lambda d: d.__setitem__(-5, d[-5] ^ 0x10), ChecksumMismatchError),
    ]:
        bad = bytearray(data)
        mutate(bad)
        path.write_bytes(bad)
        try:
            load_bitmap(path)
            rejected.append(False)
        except error:
            rejected.append(True)
    ok = identical and all(rejected)
    record_criterion(11, "bitmap store roundtrip and corruption rejection", ok)
    assert ok


def test_12_cli_golden(record_criterion, tmp_path, monkeypatch):
    monkeypatch.setenv("HLAV_CACHE_DIR", str(tmp_path))
    out = io.StringIO()
    code = run(["paircount", "--x", "30", "--max-shift", "6"], stdout=out, stderr=io.StringIO())
    golden_ok = code == 0 and out.getvalue() == (GOLDEN / "paircount_x30_maxshift6.csv").read_text()
    out = io.StringIO()
    code2 = run(["verify", "thm2", "--x", "1000000", "--C", "1.0", "--format", "json"],
                stdout=out, stderr=io.StringIO())
    line = out.getvalue()
    obj = json.loads(line)
    rep = av.VerificationReport.from_dict(obj)
    reparse_ok = (code2 == 0 and line.count("\n") == 1 and rep.to_dict() == obj
                  and json.dumps(rep.to_dict()) + "\n" == line)
    ok = golden_ok and reparse_ok
    record_criterion(12, "CLI golden CSV and JSON report roundtrip", ok)
    assert ok
