"""Number-theoretic primitives: primality, factorization, multiplicative
functions, smoothness tests, primitive roots.

Everything here is a pure function over Python ints.  A prime sieve up to
``SIEVE_LIMIT`` is built lazily on first use and cached immutably, so all
functions are safe for unrestricted concurrent use after warm-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SIEVE_LIMIT = 10**6

# Deterministic Miller-Rabin witnesses, valid for all n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_sieve_primes_cache: np.ndarray | None = None


def sieve_primes(limit: int) -> np.ndarray:
    """Return all primes <= limit as an int64 array (simple Eratosthenes)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def small_primes() -> np.ndarray:
    """The cached prime table up to SIEVE_LIMIT (built once, then immutable)."""
    global _sieve_primes_cache
    if _sieve_primes_cache is None:
        _sieve_primes_cache = sieve_primes(SIEVE_LIMIT)
        _sieve_primes_cache.setflags(write=False)
    return _sieve_primes_cache


def primes_up_to(y: float) -> np.ndarray:
    """Primes p <= y. Falls back to a fresh sieve above the cached limit."""
    if y < 2:
        return np.empty(0, dtype=np.int64)
    n = int(math.floor(y))
    if n <= SIEVE_LIMIT:
        ps = small_primes()
        return ps[: int(np.searchsorted(ps, n, side="right"))]
    return sieve_primes(n)


def is_prime(n: int) -> bool:
    """Deterministic primality test (Miller-Rabin with fixed witness set)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Factorization:
    """Canonical factorization n = prod p^e with strictly increasing primes."""

    prime_powers: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        out = 1
        for p, e in self.prime_powers:
            out *= p**e
        return out

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.prime_powers)

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.prime_powers:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)

    def __post_init__(self) -> None:
        last = 1
        for p, e in self.prime_powers:
            if p <= last or e < 1:
                raise ValueError(f"non-canonical factorization {self.prime_powers}")
            last = p


def factorize(n: int) -> Factorization:
    """Factor n >= 1 by trial division (practical for n up to ~1e12)."""
    if n < 1:
        raise ValueError("factorize requires n >= 1")
    pps: list[tuple[int, int]] = []
    m = n
    for p in small_primes():
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pps.append((p, e))
    if m > 1:
        if is_prime(m):
            pps.append((m, 1))
        else:
            # beyond the sieve and composite: continue trial division on a
            # 6k+-1 wheel (slow path, only hit for m > 1e12 with large factors)
            d = SIEVE_LIMIT + 1
            d += (5 - d % 6) % 6  # align to 6k-1
            step = 2
            while d * d <= m:
                if m % d == 0:
                    e = 0
                    while m % d == 0:
                        m //= d
                        e += 1
                    pps.append((d, e))
                    if m > 1 and is_prime(m):
                        break
                d += step
                step = 6 - step
            if m > 1:
                pps.append((m, 1))
                pps.sort()
    return Factorization(tuple(pps))


@dataclass(frozen=True)
class MultFunctions:
    mobius: int
    phi: int
    lam: float  # von Mangoldt, log p on prime powers
    omega: int  # distinct prime factors
    big_omega: int  # prime factors with multiplicity


def mult_functions(n: int) -> MultFunctions:
    """mu(n), phi(n), Lambda(n), omega(n), Omega(n) from the factorization."""
    fac = factorize(n)
    mob = 0 if any(e > 1 for _, e in fac.prime_powers) else (-1) ** len(fac.prime_powers)
    phi = 1
    for p, e in fac.prime_powers:
        phi *= (p - 1) * p ** (e - 1)
    lam = math.log(fac.prime_powers[0][0]) if len(fac.prime_powers) == 1 else 0.0
    omega = len(fac.prime_powers)
    big_omega = sum(e for _, e in fac.prime_powers)
    return MultFunctions(mob, phi, lam, omega, big_omega)


def mobius(n: int) -> int:
    return mult_functions(n).mobius


def euler_phi(n: int) -> int:
    return mult_functions(n).phi


def largest_prime_factor(n: int) -> int:
    """P+(n), with the convention P+(1) = 1."""
    if n < 1:
        raise ValueError("n >= 1 required")
    if n == 1:
        return 1
    return factorize(n).prime_powers[-1][0]


def smallest_prime_factor(n: int) -> float:
    """P-(n), with the convention P-(1) = +infinity."""
    if n < 1:
        raise ValueError("n >= 1 required")
    if n == 1:
        return math.inf
    return float(factorize(n).prime_powers[0][0])


def is_smooth(n: int, y: float) -> bool:
    """True iff every prime factor of n is <= y (n = 1 counts as smooth)."""
    if n < 1:
        raise ValueError("n >= 1 required")
    m = n
    if m == 1:
        return True
    for p in small_primes():
        p = int(p)
        if p > y:
            return False
        if p * p > m:
            break
        while m % p == 0:
            m //= p
        if m == 1:
            return True
    return m <= y


@lru_cache(maxsize=None)
def primitive_root(q: int) -> int:
    """Smallest generator of (Z/q)* for an odd prime q."""
    if q < 3 or not is_prime(q):
        raise ValueError(f"{q} is not an odd prime")
    qm1 = q - 1
    exps = [qm1 // p for p in factorize(qm1).primes]
    g = 2
    while True:
        if all(pow(g, e, q) != 1 for e in exps):
            return g
        g += 1
