import math

import pytest

from hlav.sieve import build_sieve

ACCEPTANCE_LINES = []


def trial_division_is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def naive_pair_count(prime_set, lo, hi, shift):
    """Double loop: primes p in (lo, hi] with p + shift prime."""
    return sum(1 for p in range(lo + 1, hi + 1) if p in prime_set and p + shift in prime_set)


@pytest.fixture(scope="session")
def pb_small():
    return build_sieve(20_000)


@pytest.fixture(scope="session")
def small_prime_set():
    return {n for n in range(2, 20_001) if trial_division_is_prime(n)}


@pytest.fixture(scope="session")
def pb_million():
    return build_sieve(1_010_000)


@pytest.fixture
def record_criterion():
    def record(number, description, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {description} {detail}".rstrip())
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
