"""Truncated Ramanujan-expansion approximation to the von Mangoldt function.

The model value is

    F_R(n) = sum_{r <= R} (mu(r)/phi(r)) * C_r(n),

where C_r(n) is the Ramanujan sum over residues coprime to r.  The r = 1 term
is C_1(n)/phi(1) = 1, so F_R(n) = 1 identically for R < 2.

Two evaluation routes are kept deliberately distinct:

- the fast route rearranges the double sum into divisor form,
      F_R(n) = sum_{d | n, d <= R} d*mu(d)/phi(d) * g_R(d),
      g_R(d) = sum_{h <= R/d, gcd(h, d) = 1} mu(h)^2/phi(h),
  with the g_R(d) weights precomputed once per configuration;
- the naive route evaluates the literal sum over r with one Ramanujan sum per
  term and serves as the independent cross-check.

Also here: progression sums rho(x, d, b) of F_R, the residual
delta(n) = Lambda(n) - F_R(n), the diagnostic oscillating sum rho_star, the
exact Mobius/Ramanujan divisor identity, the squarefree partial sum
sum_{r <= R} mu(r)^2/phi(r), and the exact per-class mean of F_R(n)^2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import (
    ArithTables,
    FactorSieve,
    TableRangeError,
    _check_x,
    _norm_residue,
    divisors,
    factorize,
    is_squarefree,
    mu_of,
    phi_of,
)

__all__ = [
    "FRConfig",
    "ramanujan_sum",
    "ramanujan_sum_oracle",
    "fr_value",
    "fr_value_naive",
    "fr_table_naive",
    "delta_value",
    "rho",
    "rho_star",
    "mobius_cr_identity",
    "verify_mobius_cr_range",
    "mu2_over_phi_sum",
    "fr_square_progression_mean",
    "delta_indicator",
]


def ramanujan_sum(r: int, n: int, sieve: FactorSieve) -> int:
    """Ramanujan sum C_r(n) = sum_{d | gcd(n, r)} d * mu(r/d), exactly.

    gcd(0, r) = r, so C_r(0) = phi(r).
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if r > sieve.limit:
        raise TableRangeError(f"r = {r} exceeds sieve limit {sieve.limit}")
    g = math.gcd(n, r)
    total = 0
    for d in divisors(g, sieve):
        total += d * mu_of(r // d, sieve)
    return total


def ramanujan_sum_oracle(r: int, n: int) -> complex:
    """Definitional exponential sum sum_{b <= r, gcd(b, r) = 1} e(b n / r)."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    total = 0j
    for b in range(1, r + 1):
        if math.gcd(b, r) == 1:
            total += cmath.exp(2j * cmath.pi * ((b * n) % r) / r)
    return total


@dataclass
class FRConfig:
    """Precomputed state for one truncation level R over one table set.

    The divisor-form weights coef[d] = d*mu(d)/phi(d) * g_R(d) are built once;
    the dense value table over [0, tables.limit] is built lazily on first use
    and cached (single-threaded build, read-shared afterwards).
    """

    R: float
    tables: ArithTables
    _coef: np.ndarray = field(init=False, repr=False, compare=False)
    _table: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.R >= 1:
            raise ValueError(f"R must be >= 1, got {self.R}")
        if math.floor(self.R) > self.tables.limit:
            raise TableRangeError(
                f"floor(R) = {math.floor(self.R)} exceeds table limit {self.tables.limit}"
            )
        self.R = float(self.R)
        self._coef = self._build_coef()

    @property
    def r_int(self) -> int:
        return int(math.floor(self.R))

    def _build_coef(self) -> np.ndarray:
        mu = self.tables.mu
        phi = self.tables.phi
        coef = np.zeros(self.r_int + 1, dtype=np.float64)
        for d in range(1, self.r_int + 1):
            if mu[d] == 0:
                continue
            y = int(math.floor(self.R / d))
            hs = np.arange(1, y + 1)
            mask = (mu[hs] != 0) & (np.gcd(hs, d) == 1)
            g = float((1.0 / phi[hs[mask]]).sum())
            coef[d] = d * int(mu[d]) / float(phi[d]) * g
        return coef

    def table(self) -> np.ndarray:
        """Dense F_R values over [0, tables.limit]; index 0 is 0."""
        if self._table is None:
            t = np.zeros(self.tables.limit + 1, dtype=np.float64)
            for d in range(1, self.r_int + 1):
                c = self._coef[d]
                if c != 0.0:
                    t[d::d] += c
            self._table = t
        return self._table


def fr_value(n: int, cfg: FRConfig) -> float:
    """F_R(n) by the divisor-form fast route."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > cfg.tables.limit:
        raise TableRangeError(f"n = {n} exceeds table limit {cfg.tables.limit}")
    s = 0.0
    for d in divisors(n, cfg.tables.sieve):
        if d > cfg.r_int:
            break
        c = cfg._coef[d]
        if c != 0.0:
            s += c
    return float(s)


def fr_value_naive(n: int, cfg: FRConfig) -> float:
    """F_R(n) by the literal sum over r, one Ramanujan sum per term."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    mu = cfg.tables.mu
    phi = cfg.tables.phi
    sieve = cfg.tables.sieve
    s = 0.0
    for r in range(1, cfg.r_int + 1):
        if mu[r] == 0:
            continue
        s += int(mu[r]) / float(phi[r]) * ramanujan_sum(r, n, sieve)
    return s


def fr_table_naive(x: int, cfg: FRConfig) -> np.ndarray:
    """Dense F_R values over [0, x] by the naive route.

    For each r the Ramanujan sum is evaluated on one period 0..r-1 via the
    divisor formula and tiled, so entry n receives exactly the ordered term
    sequence of fr_value_naive(n).
    """
    _check_x(x, cfg.tables)
    mu = cfg.tables.mu
    phi = cfg.tables.phi
    sieve = cfg.tables.sieve
    t = np.zeros(x + 1, dtype=np.float64)
    for r in range(1, cfg.r_int + 1):
        if mu[r] == 0:
            continue
        row = np.array([ramanujan_sum(r, j, sieve) for j in range(r)], dtype=np.float64)
        tiled = np.tile(row, x // r + 1)[: x + 1]
        t += (int(mu[r]) / float(phi[r])) * tiled
    return t


def delta_value(n: int, cfg: FRConfig) -> float:
    """Residual Lambda(n) - F_R(n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > cfg.tables.limit:
        raise TableRangeError(f"n = {n} exceeds table limit {cfg.tables.limit}")
    return float(cfg.tables.lam[n]) - fr_value(n, cfg)


def rho(x: int, d: int, b: int, cfg: FRConfig) -> float:
    """Model progression sum rho(x, d, b) = sum_{n <= x, n = b (mod d)} F_R(n)."""
    b = _norm_residue(b, d)
    _check_x(x, cfg.tables)
    t = cfg.table()
    return float(t[: x + 1][b::d].sum())


def rho_star(x: int, v: int, N: int, cfg: FRConfig) -> float:
    """Oscillating remainder sum over moduli r1 <= R that do not divide v.

    Computes sum_{r1 <= R, r1 not| v} (mu(r1)/phi(r1)) *
    sum_{b1 <= r1, gcd(b1, r1) = 1} sum_{n <= x, n = N (mod v)} e(-b1 n / r1)
    as a literal double sum and returns its real part; the imaginary part must
    vanish to within 1e-6 absolute or an ArithmeticError is raised.
    """
    _check_x(x, cfg.tables)
    if v < 1 or v > cfg.tables.limit or cfg.tables.mu[v] == 0:
        raise ValueError(f"v must be a squarefree modulus within the tables, got {v}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    start = N % v
    if start == 0:
        start = v
    ns = np.arange(start, x + 1, v, dtype=np.int64)
    mu = cfg.tables.mu
    phi = cfg.tables.phi
    total = 0j
    for r1 in range(2, cfg.r_int + 1):
        if v % r1 == 0 or mu[r1] == 0:
            continue
        w = int(mu[r1]) / float(phi[r1])
        res = (ns % r1).astype(np.float64)
        for b1 in range(1, r1 + 1):
            if math.gcd(b1, r1) == 1:
                total += w * np.exp((-2j * np.pi * b1 / r1) * res).sum()
    if abs(total.imag) > 1e-6:
        raise ArithmeticError(f"imaginary part {total.imag} exceeds 1e-6")
    return float(total.real)


def delta_indicator(N: int, v: int) -> int:
    """1 when the class N mod v can contain primes >= v: gcd(N, v) = 1 with gcd(0, v) = v."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if v < 1:
        raise ValueError(f"v must be >= 1, got {v}")
    return 1 if math.gcd(N, v) == 1 else 0


def _cr_by_gcd(v: int, sieve: FactorSieve) -> list[tuple[int, int, int, dict[int, int]]]:
    """Per divisor r | v: (r, mu(r), phi(v)//phi(r), {g | r: C_r at gcd g})."""
    phi_v = phi_of(v, sieve)
    out = []
    for r in divisors(v, sieve):
        mu_r = mu_of(r, sieve)
        cr = {}
        for g in divisors(r, sieve):
            cr[g] = sum(d * mu_of(r // d, sieve) for d in divisors(g, sieve))
        out.append((r, mu_r, phi_v // phi_of(r, sieve), cr))
    return out


def mobius_cr_identity(v: int, N: int, sieve: FactorSieve) -> tuple[Fraction, Fraction]:
    """Exact identity sum_{r | v} mu(r) C_r(N) / phi(r) = (v/phi(v)) * delta(N, v).

    Both sides are computed independently in exact rational arithmetic, the
    left from Ramanujan sums and the right from the closed form; the pair is
    returned after asserting equality.
    """
    if v < 1:
        raise ValueError(f"v must be >= 1, got {v}")
    if not is_squarefree(v, sieve):
        raise ValueError(f"v must be squarefree, got {v}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    phi_v = phi_of(v, sieve)
    num = 0
    for r, mu_r, w_r, cr in _cr_by_gcd(v, sieve):
        num += mu_r * cr[math.gcd(N, r)] * w_r
    lhs = Fraction(num, phi_v)
    rhs = Fraction(v * delta_indicator(N, v), phi_v)
    if lhs != rhs:
        raise ArithmeticError(f"identity failed at v={v}, N={N}: {lhs} != {rhs}")
    return lhs, rhs


def verify_mobius_cr_range(vmax: int, sieve: FactorSieve) -> int:
    """Check the divisor identity for every squarefree v <= vmax, 0 <= N <= v.

    Uses the shared per-divisor Ramanujan-sum tables with a common denominator
    phi(v), so the comparison stays in integer arithmetic.  Returns the number
    of (v, N) pairs checked; raises ArithmeticError on the first failure.
    """
    checked = 0
    for v in range(1, vmax + 1):
        if not is_squarefree(v, sieve):
            continue
        data = _cr_by_gcd(v, sieve)
        for N in range(v + 1):
            num = 0
            for r, mu_r, w_r, cr in data:
                num += mu_r * cr[math.gcd(N, r)] * w_r
            if num != v * delta_indicator(N, v):
                raise ArithmeticError(f"identity failed at v={v}, N={N}")
            checked += 1
    return checked


def mu2_over_phi_sum(R: float, tables: ArithTables) -> float:
    """Compensated partial sum sum_{r <= R} mu(r)^2 / phi(r).

    Grows like log R + gamma + sum_p log p / (p(p-1)) with an O(R^{-1/2}) tail.
    """
    if not R >= 1:
        raise ValueError(f"R must be >= 1, got {R}")
    r_int = int(math.floor(R))
    if r_int > tables.limit:
        raise TableRangeError(f"floor(R) = {r_int} exceeds table limit {tables.limit}")
    idx = np.nonzero(tables.mu[1 : r_int + 1])[0] + 1
    vals = 1.0 / tables.phi[idx]
    return math.fsum(vals)


_CR_PERIOD_CACHE: dict[int, np.ndarray] = {}


def _cr_period(r: int, sieve: FactorSieve) -> np.ndarray:
    """Length-r read-only table of C_r(n) indexed by n mod r."""
    arr = _CR_PERIOD_CACHE.get(r)
    if arr is None:
        arr = np.array([ramanujan_sum(r, n, sieve) for n in range(r)], dtype=np.int64)
        arr.setflags(write=False)
        _CR_PERIOD_CACHE[r] = arr
    return arr


def fr_square_progression_mean(v: int, N: int, cfg: FRConfig) -> float:
    """Exact asymptotic mean of F_R(n)^2 on the class n = N (mod v), scaled so
    sum_{n <= x, n = N (mod v)} F_R(n)^2 ~ (x/v) * (returned value).

    A pair of expansion moduli (r, r1) has a nonzero average on the class only
    when r = g*s and r1 = g*s1 with s, s1 divisors of v (g the gcd); every
    other pair oscillates to zero over a full period.  Surviving pairs are
    averaged exactly, in integer arithmetic, over one period of C_r * C_r1
    restricted to the class.  For v = 1 only the diagonal r = r1 survives and
    the value reduces to mu2_over_phi_sum(R).
    """
    if v < 1:
        raise ValueError(f"v must be >= 1, got {v}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    mu = cfg.tables.mu
    phi = cfg.tables.phi
    sieve = cfg.tables.sieve
    n0 = N % v
    sf = [r for r in range(1, cfg.r_int + 1) if mu[r] != 0]
    weights = {r: int(mu[r]) / float(phi[r]) for r in sf}
    parts: list[float] = []
    for r in sf:
        table_r = _cr_period(r, sieve)
        for r1 in sf:
            g = math.gcd(r, r1)
            if v % (r // g) or v % (r1 // g):
                continue
            period = math.lcm(r, r1, v) // v
            ns = n0 + v * np.arange(period, dtype=np.int64)
            total = int((table_r[ns % r] * _cr_period(r1, sieve)[ns % r1]).sum())
            parts.append(weights[r] * weights[r1] * (total / period))
    return math.fsum(parts)
