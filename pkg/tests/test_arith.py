"""Sieve, table, and progression-sum tests."""

import math

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings
from pytest import approx, raises

from vaughanlab import (
    TableRangeError,
    build_sieve,
    divisors,
    factorize,
    is_squarefree,
    psi_progression,
    theta_progression,
)
from vaughanlab.arith import mu_of, phi_of


def brute_divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def test_build_sieve_rejects_tiny_limit():
    with raises(ValueError):
        build_sieve(1)


def test_spf_is_smallest_prime_factor(tables_small):
    sieve = tables_small.sieve
    for n in range(2, 300):
        p = int(sieve.spf[n])
        assert n % p == 0
        assert all(n % q != 0 for q in range(2, p))
    assert sieve.spf[0] == 0 and sieve.spf[1] == 0


def test_primes_and_is_prime(tables_small):
    sieve = tables_small.sieve
    ps = set(int(p) for p in sieve.primes())
    for n in range(2, 300):
        assert sieve.is_prime(n) == (n in ps)
        assert (n in ps) == all(n % q != 0 for q in range(2, n))
    with raises(TableRangeError):
        sieve.is_prime(10**9)


@settings(deadline=None)
@given(st.integers(1, 2_000))
def test_factorize_reconstructs(tables_small, n):
    fac = factorize(n, tables_small.sieve)
    prod = 1
    for p, e in fac:
        assert tables_small.sieve.is_prime(p)
        assert e >= 1
        prod *= p**e
    assert prod == n
    assert [p for p, _ in fac] == sorted(p for p, _ in fac)


@settings(deadline=None)
@given(st.integers(1, 2_000))
def test_divisors_match_brute_force(tables_small, n):
    assert divisors(n, tables_small.sieve) == brute_divisors(n)


@settings(deadline=None)
@given(st.integers(1, 2_000))
def test_scalar_functions_match_tables(tables_small, n):
    sieve = tables_small.sieve
    assert mu_of(n, sieve) == int(tables_small.mu[n])
    assert phi_of(n, sieve) == int(tables_small.phi[n])
    assert is_squarefree(n, sieve) == (tables_small.mu[n] != 0)


def test_table_spot_values(tables_small):
    t = tables_small
    assert [int(t.mu[n]) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]
    assert [int(t.phi[n]) for n in (1, 2, 12, 97)] == [1, 1, 4, 96]
    assert t.lam[1] == 0.0
    assert t.lam[2] == approx(math.log(2), rel=1e-15)
    assert t.lam[8] == approx(math.log(2), rel=1e-15)
    assert t.lam[9] == approx(math.log(3), rel=1e-15)
    assert t.lam[12] == 0.0
    assert t.theta[2] == approx(math.log(2), rel=1e-15)
    assert t.theta[4] == 0.0 and t.theta[9] == 0.0


@settings(deadline=None)
@given(st.integers(1, 60), st.integers(1, 60))
def test_phi_multiplicative_on_coprime_pairs(tables_small, a, b):
    if math.gcd(a, b) != 1 or a * b > tables_small.limit:
        return
    t = tables_small
    assert int(t.phi[a * b]) == int(t.phi[a]) * int(t.phi[b])
    assert int(t.mu[a * b]) == int(t.mu[a]) * int(t.mu[b])


def test_divisor_sum_identities(tables_small):
    sieve = tables_small.sieve
    for n in range(1, 400):
        ds = divisors(n, sieve)
        assert sum(mu_of(d, sieve) for d in ds) == (1 if n == 1 else 0)
        assert sum(phi_of(d, sieve) for d in ds) == n


def test_progression_frozen_values(tables_1e4):
    assert theta_progression(100, 1, 0, tables_1e4) == approx(83.72839039906393, rel=1e-12)
    assert psi_progression(100, 1, 0, tables_1e4) == approx(94.0453112293574, rel=1e-12)
    assert theta_progression(10, 2, 1, tables_1e4) == approx(4.653960350157523, rel=1e-12)
    assert theta_progression(10_000, 7, 3, tables_1e4) == approx(1677.368091973628, rel=1e-12)
    assert psi_progression(10_000, 7, 3, tables_1e4) == approx(1680.0761421747304, rel=1e-12)


def test_progression_small_closed_forms(tables_small):
    # theta(10, 2, 1) = log 3 + log 5 + log 7 (odd primes up to 10)
    assert theta_progression(10, 2, 1, tables_small) == approx(
        math.log(3) + math.log(5) + math.log(7), rel=1e-14
    )
    # the b = 0 class holds only p = d itself
    assert theta_progression(100, 7, 0, tables_small) == approx(math.log(7), rel=1e-14)
    assert theta_progression(100, 4, 0, tables_small) == 0.0


@settings(deadline=None)
@given(st.integers(1, 50), st.integers(1, 2_000))
def test_progression_partition_over_residues(tables_small, d, x):
    total = sum(theta_progression(x, d, b, tables_small) for b in range(d))
    assert total == approx(theta_progression(x, 1, 0, tables_small), rel=1e-9, abs=1e-9)


@settings(deadline=None)
@given(st.integers(1, 50), st.integers(0, 50), st.integers(1, 2_000))
def test_psi_dominates_theta_per_class(tables_small, d, b, x):
    if b > d:
        return
    assert psi_progression(x, d, b, tables_small) >= theta_progression(x, d, b, tables_small) - 1e-12


def test_residue_normalization_and_errors(tables_small):
    assert theta_progression(100, 6, 6, tables_small) == theta_progression(100, 6, 0, tables_small)
    with raises(ValueError):
        theta_progression(100, 6, 7, tables_small)
    with raises(ValueError):
        theta_progression(100, 0, 0, tables_small)
    with raises(ValueError):
        theta_progression(100, 6, -1, tables_small)
    with raises(TableRangeError):
        theta_progression(10**7, 6, 1, tables_small)
