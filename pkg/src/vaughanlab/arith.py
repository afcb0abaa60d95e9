"""Sieve-backed arithmetic tables.

Provides:
- FactorSieve / build_sieve: smallest-prime-factor table over [2, limit]
- ArithTables / build_tables: von Mangoldt, Mobius, totient and prime-log arrays
- theta_progression / psi_progression: log-weighted prime (power) sums in a
  residue class, theta(x, d, b) = sum of log p over primes p <= x, p = b (mod d)
- factorize / divisors / is_squarefree: exact divisor work backed by the sieve

Tables are built once and then treated as read-only; readers may share them
freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TableRangeError",
    "FactorSieve",
    "ArithTables",
    "build_sieve",
    "build_tables",
    "theta_progression",
    "psi_progression",
    "factorize",
    "divisors",
    "is_squarefree",
    "phi_of",
    "mu_of",
]


class TableRangeError(ValueError):
    """An argument exceeds the range covered by a precomputed table."""


@dataclass
class FactorSieve:
    """Smallest-prime-factor table over [2, limit].

    spf[n] is the smallest prime dividing n, so spf[n] == n exactly when n is
    prime.  Entries 0 and 1 hold the sentinel 0.
    """

    limit: int
    spf: np.ndarray
    _primes: np.ndarray | None = field(default=None, repr=False, compare=False)

    def primes(self) -> np.ndarray:
        """All primes <= limit, ascending, as an int64 array (cached)."""
        if self._primes is None:
            ns = np.arange(self.limit + 1, dtype=np.int64)
            self._primes = ns[(ns >= 2) & (self.spf == ns)]
        return self._primes

    def is_prime(self, n: int) -> bool:
        self._check(n)
        return n >= 2 and int(self.spf[n]) == n

    def _check(self, n: int) -> None:
        if n < 0:
            raise ValueError(f"n must be nonnegative, got {n}")
        if n > self.limit:
            raise TableRangeError(f"n = {n} exceeds sieve limit {self.limit}")


def build_sieve(limit: int) -> FactorSieve:
    """Build the smallest-prime-factor table for [2, limit].

    Args:
        limit: inclusive upper bound, at least 2.

    Returns:
        FactorSieve with spf filled for every n in [2, limit].
    """
    if limit < 2:
        raise ValueError(f"sieve limit must be >= 2, got {limit}")
    if limit >= 2**31:
        raise ValueError(f"sieve limit {limit} too large for int32 table")
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            seg = spf[p * p :: p]
            seg[seg == 0] = p
    # Untouched entries >= 2 have no prime factor <= sqrt(limit): they are prime.
    ns = np.arange(limit + 1, dtype=np.int32)
    rest = spf == 0
    spf[rest] = ns[rest]
    spf[0] = spf[1] = 0
    return FactorSieve(limit=limit, spf=spf)


@dataclass
class ArithTables:
    """Dense arithmetic-function tables over [0, limit].

    Attributes:
        limit: inclusive upper bound shared by all arrays.
        lam: von Mangoldt Lambda(n) as float64 (log p at prime powers, else 0).
        mu: Mobius mu(n) as int8.
        phi: Euler totient phi(n) as int64.
        theta: log n at primes, else 0 (the weight used by theta sums).
        sieve: the FactorSieve the tables were built from.
    """

    limit: int
    lam: np.ndarray
    mu: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    sieve: FactorSieve


def build_tables(sieve: FactorSieve) -> ArithTables:
    """Build Lambda, mu, phi and the prime-log weight from a factor sieve."""
    limit = sieve.limit
    primes = sieve.primes()

    theta = np.zeros(limit + 1, dtype=np.float64)
    theta[primes] = np.log(primes.astype(np.float64))

    lam = theta.copy()
    for p in primes[primes <= math.isqrt(limit)]:
        p = int(p)
        lp = math.log(p)
        pk = p * p
        while pk <= limit:
            lam[pk] = lp
            pk *= p

    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes:
        mu[p::p] *= -1
    for p in primes[primes <= math.isqrt(limit)]:
        sq = int(p) * int(p)
        mu[sq::sq] = 0

    # phi[n] = n * prod_{p | n} (1 - 1/p), applied one prime at a time; each
    # step divides exactly because the p-part of n is still present.
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in primes:
        seg = phi[p::p]
        seg //= int(p)
        seg *= int(p) - 1
    phi[0] = 0

    return ArithTables(limit=limit, lam=lam, mu=mu, phi=phi, theta=theta, sieve=sieve)


def _norm_residue(b: int, d: int) -> int:
    if d < 1:
        raise ValueError(f"modulus must be >= 1, got {d}")
    if not 0 <= b <= d:
        raise ValueError(f"residue must lie in [0, {d}], got {b}")
    return 0 if b == d else b


def _check_x(x: int, tables: ArithTables) -> None:
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x > tables.limit:
        raise TableRangeError(f"x = {x} exceeds table limit {tables.limit}")


def theta_progression(x: int, d: int, b: int, tables: ArithTables) -> float:
    """Sum of log p over primes p <= x with p = b (mod d).

    The residue b may be given in [0, d]; b = d is reduced to 0.
    """
    b = _norm_residue(b, d)
    _check_x(x, tables)
    return float(tables.theta[: x + 1][b::d].sum())


def psi_progression(x: int, d: int, b: int, tables: ArithTables) -> float:
    """Sum of Lambda(n) over n <= x with n = b (mod d)."""
    b = _norm_residue(b, d)
    _check_x(x, tables)
    return float(tables.lam[: x + 1][b::d].sum())


def factorize(n: int, sieve: FactorSieve) -> list[tuple[int, int]]:
    """Prime factorization of n as [(p, exponent)] with p ascending."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > sieve.limit:
        raise TableRangeError(f"n = {n} exceeds sieve limit {sieve.limit}")
    out: list[tuple[int, int]] = []
    while n > 1:
        p = int(sieve.spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def divisors(n: int, sieve: FactorSieve) -> list[int]:
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, e in factorize(n, sieve):
        pk = 1
        new = []
        for _ in range(e):
            pk *= p
            new.extend(d * pk for d in divs)
        divs.extend(new)
    return sorted(divs)


def is_squarefree(n: int, sieve: FactorSieve) -> bool:
    return all(e == 1 for _, e in factorize(n, sieve))


def mu_of(n: int, sieve: FactorSieve) -> int:
    """Mobius function computed from the factorization (no dense table needed)."""
    fac = factorize(n, sieve)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def phi_of(n: int, sieve: FactorSieve) -> int:
    """Euler totient computed from the factorization."""
    out = 1
    for p, e in factorize(n, sieve):
        out *= (p - 1) * p ** (e - 1)
    return out
