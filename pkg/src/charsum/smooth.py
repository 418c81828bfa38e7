"""Smooth-number counts and sums: Psi(x,y), harmonic sums over y-smooth
integers against the P(u) prediction, rational-phase smooth sums, exact
verification of the divisor/character decomposition and gcd-removal
identities, and the pretentious distance with its minimizing character.

Enumeration of {n <= x : P+(n) <= y} is a depth-first walk over canonical
prime chains (each n is built by multiplying primes in nonincreasing index
order), so memory stays O(pi(y) * log x) and x up to ~1e10 streams through a
compiled kernel without materializing anything.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np
from numba import njit

from . import arith, characters, dickman
from .characters import PrimeContext, SmallCharacter

_STACK_CAP = 1 << 20


@njit(cache=True)
def _weighted_sum_kernel(primes, z, tab1, m1, tab2, m2):
    """sum over y-smooth n <= z of tab1[n % m1] * tab2[n % m2] / n.

    Returns (complex sum, count).  primes must be the ascending primes <= y.
    """
    stack_n = np.empty(_STACK_CAP, dtype=np.int64)
    stack_i = np.empty(_STACK_CAP, dtype=np.int64)
    sp = 0
    stack_n[0] = 1
    stack_i[0] = len(primes) - 1
    sp = 1
    total = 0.0 + 0.0j
    count = 0
    while sp > 0:
        sp -= 1
        n = stack_n[sp]
        i = stack_i[sp]
        total += tab1[n % m1] * tab2[n % m2] / n
        count += 1
        for idx in range(i + 1):
            m = n * primes[idx]
            if m <= z:
                stack_n[sp] = m
                stack_i[sp] = idx
                sp += 1
        if sp + len(primes) >= _STACK_CAP:
            raise MemoryError("smooth enumeration stack overflow")
    return total, count


@njit(cache=True)
def _count_kernel(primes, z):
    stack_n = np.empty(_STACK_CAP, dtype=np.int64)
    stack_i = np.empty(_STACK_CAP, dtype=np.int64)
    stack_n[0] = 1
    stack_i[0] = len(primes) - 1
    sp = 1
    count = 0
    while sp > 0:
        sp -= 1
        n = stack_n[sp]
        i = stack_i[sp]
        count += 1
        for idx in range(i + 1):
            m = n * primes[idx]
            if m <= z:
                stack_n[sp] = m
                stack_i[sp] = idx
                sp += 1
        if sp + len(primes) >= _STACK_CAP:
            raise MemoryError("smooth enumeration stack overflow")
    return count


_ONE = np.ones(1, dtype=np.complex128)


def smooth_weighted_sum(y: float, z: float, tab1=None, tab2=None) -> tuple[complex, int]:
    """sum_{n <= z, P+(n) <= y} w1(n) w2(n) / n with periodic complex weights."""
    if z < 1:
        return 0j, 0
    primes = arith.primes_up_to(y)
    t1 = _ONE if tab1 is None else np.ascontiguousarray(tab1, dtype=np.complex128)
    t2 = _ONE if tab2 is None else np.ascontiguousarray(tab2, dtype=np.complex128)
    total, count = _weighted_sum_kernel(primes, int(z), t1, len(t1), t2, len(t2))
    return complex(total), int(count)


@dataclass(frozen=True)
class SmoothEnumerator:
    """Streaming view of {n <= x : P+(n) <= y}.

    ``ordered=False`` walks prime chains depth-first (memory O(pi(y) log x));
    ``ordered=True`` uses a heap merge and yields in increasing order, at the
    cost of a frontier that can grow with the output size.
    """

    y: float
    x: float
    ordered: bool = False

    def __iter__(self):
        if self.ordered:
            return self._iter_ordered()
        return self._iter_dfs()

    def _iter_dfs(self):
        primes = [int(p) for p in arith.primes_up_to(self.y)]
        limit = int(self.x)
        stack = [(1, len(primes) - 1)]
        while stack:
            n, i = stack.pop()
            yield n
            for idx in range(i + 1):
                m = n * primes[idx]
                if m <= limit:
                    stack.append((m, idx))

    def _iter_ordered(self):
        primes = [int(p) for p in arith.primes_up_to(self.y)]
        limit = int(self.x)
        if limit < 1:
            return
        heap = [(1, len(primes) - 1)]
        while heap:
            n, i = heappop(heap)
            yield n
            for idx in range(i + 1):
                m = n * primes[idx]
                if m <= limit:
                    heappush(heap, (m, idx))


def iter_smooth(x: float, y: float, ordered: bool = False):
    return iter(SmoothEnumerator(y=y, x=x, ordered=ordered))


def psi(x: float, y: float) -> int:
    """Psi(x, y) = #{n <= x : P+(n) <= y}, exact."""
    if x < 1:
        return 0
    if y < 2:
        return 1
    return int(_count_kernel(arith.primes_up_to(y), int(x)))


@dataclass(frozen=True)
class HarmonicCheck:
    value: float
    prediction: float
    gap: float


_default_table: dickman.DickmanTable | None = None


def _table(table: dickman.DickmanTable | None) -> dickman.DickmanTable:
    global _default_table
    if table is not None:
        return table
    if _default_table is None:
        _default_table = dickman.build_table()
    return _default_table


def smooth_harmonic(y: float, u: float, table: dickman.DickmanTable | None = None) -> HarmonicCheck:
    """Exact sum_{n <= y^u, P+(n) <= y} 1/n against P(u) e^gamma log y."""
    z = math.floor(y**u * (1 + 1e-15))
    if z > 10**10:
        raise ValueError("y^u too large to enumerate")
    tab = _table(table)
    total, _ = smooth_weighted_sum(y, z)
    pred = tab.P(min(u, tab.u_max)) * math.exp(dickman.EULER_GAMMA) * math.log(y)
    return HarmonicCheck(value=total.real, prediction=pred, gap=abs(total.real - pred))


@dataclass(frozen=True)
class PhaseSumCheck:
    value: complex
    prediction: complex
    gap: float


def smooth_phase_sum(
    y: float, z: float, a: int, b: int, table: dickman.DickmanTable | None = None
) -> PhaseSumCheck:
    """Exact sum_{n <= z, P+(n) <= y} e(na/b)/n with its rational-phase
    prediction log 1/(1-e(a/b)) + (Lambda(b)/phi(b)) (1 - rho(u)), u = log z/log y."""
    if b < 2 or math.gcd(a, b) != 1:
        raise ValueError("need b >= 2 and gcd(a, b) = 1")
    if z > 10**10:
        raise ValueError("z too large to enumerate")
    tab = _table(table)
    phase = np.exp(2j * np.pi * a * np.arange(b) / b)
    value, _ = smooth_weighted_sum(y, z, tab2=phase)
    mf = arith.mult_functions(b)
    u = math.log(max(z, 2.0)) / math.log(y)
    pred = cmath.log(1.0 / (1.0 - cmath.exp(2j * math.pi * a / b)))
    pred += mf.lam / mf.phi * (1.0 - tab.rho(min(u, tab.u_max)))
    return PhaseSumCheck(value=value, prediction=pred, gap=abs(value - pred))


def verify_divisor_decomposition(
    ctx: PrimeContext, j: int, a: int, b: int, z: float, y: float
) -> float:
    """Residual of the exact divisor/character decomposition

        sum_{1<=|n|<=z, P+(n)<=y} chi(n) e(an/b) / n
          = (2/b) sum_{d | b} chi(b/d) (d/phi(d))
              sum_{psi mod d, chi psibar odd} psibar(a) G(psi)
                sum_{n <= zd/b, P+(n)<=y} chi(n) psibar(n) / n,

    both sides summed directly.  Divisor terms with P+(b/d) > y vanish from
    the left side and are skipped on the right.
    """
    if math.gcd(a, b) != 1:
        raise ValueError("need gcd(a, b) = 1")
    if not 1 <= b <= 1000:
        raise ValueError("b out of range [1, 1000]")
    chi_tab = characters.chi_table(ctx, j)
    par = ctx.parity(j)

    ns = np.arange(b)
    phase = np.exp(2j * np.pi * a * ns / b) - par * np.exp(-2j * np.pi * a * ns / b)
    lhs, _ = smooth_weighted_sum(y, z, tab1=chi_tab, tab2=phase)

    rhs = 0j
    for d in arith.factorize(b).divisors():
        if b // d != 1 and arith.largest_prime_factor(b // d) > y:
            continue
        chi_bd = characters.eval_char(ctx, j, b // d)
        if chi_bd == 0:
            continue
        phi_d = arith.euler_phi(d)
        inner_total = 0j
        for psi in characters.small_characters(d):
            if par * psi.parity() != -1:
                continue
            gs, _ = characters.gauss_sum_small(psi)
            psi_bar = np.conj(psi.values)
            s, _ = smooth_weighted_sum(y, math.floor(z * d / b), tab1=chi_tab, tab2=psi_bar)
            inner_total += np.conj(psi(a)) * gs * s
        rhs += chi_bd * d / phi_d * inner_total
    rhs *= 2.0 / b
    return abs(lhs - rhs)


@dataclass(frozen=True)
class ChangeGcdCheck:
    residual_main: float  # full sum vs Euler-factor times coprime sum
    residual_coprime: float  # coprime sum vs inverse-factor times full sum
    error_scale: float  # (a/phi(a)) sum_{p|a} log p / p


def verify_change_gcd(f_values: np.ndarray, a: int, z: float) -> ChangeGcdCheck:
    """Residuals of both gcd-removal identities for a completely
    multiplicative f given by a periodic value table (period = len table)."""
    f_values = np.asarray(f_values, dtype=np.complex128)
    m = len(f_values)
    zi = int(z)
    fac = arith.factorize(a)
    s_all = 0j
    s_cop = 0j
    chunk = 10**6
    for lo in range(1, zi + 1, chunk):
        n = np.arange(lo, min(lo + chunk, zi + 1), dtype=np.int64)
        terms = f_values[n % m] / n
        s_all += terms.sum()
        mask = np.ones(len(n), dtype=bool)
        for p in fac.primes:
            mask &= n % p != 0
        s_cop += terms[mask].sum()
    euler = 1.0 + 0j
    for p in fac.primes:
        euler *= 1.0 - f_values[p % m] / p
    if a == 1:
        scale = 0.0
    else:
        mf = arith.mult_functions(a)
        scale = a / mf.phi * sum(math.log(p) / p for p in fac.primes)
    return ChangeGcdCheck(
        residual_main=abs(s_all - s_cop / euler),
        residual_coprime=abs(s_cop - euler * s_all),
        error_scale=scale,
    )


def pretentious_distance(
    ctx: PrimeContext, j: int, y: float, psi: SmallCharacter | None = None
) -> tuple[float, float]:
    """D(chi_j, psi; y) and Delta = sum_{p<=y} |1 - chi_j(p)| / (p-1).

    psi defaults to the constant function 1.  Zeros of either character
    contribute a full 1/p to D^2 (the definition taken literally).
    """
    ps = arith.primes_up_to(y)
    if len(ps) == 0:
        return 0.0, 0.0
    chi_p = ctx.chi_values(j, ps)
    if psi is None:
        prod = chi_p
    else:
        prod = chi_p * np.conj(psi.values[ps % psi.modulus])
    d2 = float(np.sum((1.0 - prod.real) / ps))
    delta = float(np.sum(np.abs(1.0 - chi_p) / (ps - 1.0)))
    return math.sqrt(max(d2, 0.0)), delta


def find_pretender(ctx: PrimeContext, j: int, y: float) -> tuple[SmallCharacter, float]:
    """Primitive character of conductor <= log y minimizing D(chi_j, psi; y).

    Ties break toward the smallest conductor, then the smallest label.
    """
    dmax = max(1, int(math.log(y)))
    best = None
    for d in range(1, dmax + 1):
        for psi in characters.small_characters(d):
            if not psi.is_primitive:
                continue
            dist, _ = pretentious_distance(ctx, j, y, psi)
            key = (dist, d, psi.label)
            if best is None or key < best[0]:
                best = (key, psi)
    return best[1], best[0][0]
