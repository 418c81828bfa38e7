"""L(1, chi) for characters mod prime q: a certified series evaluator, the
classical finite closed forms, an all-characters bulk path through three
FFTs, the half-range prefix-sum identity, and values twisted by the
quadratic character mod 3.

The series evaluator sums n <= K*q directly and replaces the tail by its
exact expansion over whole periods: writing n = mq + r,

    sum_{n > Kq} v(n)/n = sum_{t>=1} (-1)^t (T_t / q^{t+1}) zeta(t+1, K),
    T_t = sum_{r=1}^{q} v(r) r^t,

valid because sum_r v(r) = 0 kills the divergent t = 0 term.  Truncating at
t = T leaves a remainder below 2 K^{-(T+1)} (analytically certified), so
nothing depends on the crude |tail| <= 2*max|prefix|/X bound, which would
need astronomically many terms at the tolerances used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .characters import PrimeContext, chi_table, eval_char, gauss_sum
from .scan import prefix_sums_single

EULER_GAMMA = float(np.euler_gamma)

# closed-form normalizations, fixed once against the series evaluator at
# q = 7 (agreement ~1e-15 for all five non-principal characters) and frozen:
#   odd chi:  L(1, chi) = +i pi * G(chi) * sum_a a chibar(a) / q^2
#   even chi: L(1, chi) = -      G(chi) * sum_a chibar(a) log(2 sin(pi a/q)) / q
ODD_SCALE = 1j * math.pi
EVEN_SCALE = -1.0

_SERIES_K = 8
_SERIES_T = 30


@dataclass(frozen=True)
class LValue:
    j: int
    value: complex
    method: str  # oracle | closed_form | bulk
    tail_bound: float


def _series_tail_bound(K: int, T: int) -> float:
    return 2.0 * K ** (-(T + 1)) / ((T + 1) * (T + 2)) * K / (K - 1)


def dirichlet_series_at_1(values: np.ndarray, eps: float = 1e-12) -> tuple[complex, float]:
    """sum_{n>=1} v(n)/n for a period-m table v with sum_r v(r) = 0.

    Returns (value, certified truncation bound <= eps).
    """
    values = np.asarray(values, dtype=np.complex128)
    m = len(values)
    if abs(values.sum()) > 1e-9 * m:
        raise ValueError("periodic mean must vanish for the series to converge")
    if eps < 1e-13:
        raise ValueError("eps below certified floor 1e-13")
    K, T = _SERIES_K, _SERIES_T
    bound = _series_tail_bound(K, T)
    total = 0j
    chunk = 1 << 22
    for lo in range(1, K * m + 1, chunk):
        n = np.arange(lo, min(lo + chunk, K * m + 1), dtype=np.int64)
        total += (values[n % m] / n).sum()
    r = np.arange(1, m + 1, dtype=np.int64)
    v = values[r % m]
    x = r / m
    cur = x.copy()
    for t in range(1, T + 1):
        total += (-1) ** t * (v * cur).sum() / m * zeta(t + 1, K)
        cur *= x
    return complex(total), bound


def l1_series_oracle(ctx: PrimeContext, j: int, eps: float = 1e-12) -> LValue:
    """L(1, chi_j) by direct series with the certified periodic tail."""
    if j % (ctx.q - 1) == 0:
        raise ValueError("L(1, chi_0) diverges")
    value, bound = dirichlet_series_at_1(chi_table(ctx, j), eps)
    return LValue(j=j, value=value, method="oracle", tail_bound=bound)


def l1_closed_form(ctx: PrimeContext, j: int) -> LValue:
    """L(1, chi_j) from the parity-specific finite sum (frozen scales)."""
    if j % (ctx.q - 1) == 0:
        raise ValueError("L(1, chi_0) diverges")
    q = ctx.q
    a = np.arange(1, q)
    chibar = np.conj(chi_table(ctx, j)[1:])
    g = gauss_sum(ctx, j)
    if j % 2 == 1:
        w = (chibar * a).sum()
        value = ODD_SCALE * g * w / q**2
    else:
        v = (chibar * np.log(2.0 * np.sin(np.pi * a / q))).sum()
        value = EVEN_SCALE * g * v / q
    return LValue(j=j, value=complex(value), method="closed_form", tail_bound=0.0)


def l1_all(ctx: PrimeContext) -> np.ndarray:
    """L(1, chi_j) for all j at once (index j; the principal slot is NaN).

    Three length-(q-1) transforms: the Gauss sums, and the odd/even finite
    sums reindexed through the power table.
    """
    q = ctx.q
    L = q - 1
    pow_g = ctx.pow_table()
    g_all = np.fft.ifft(np.exp(2j * np.pi * pow_g / q)) * L
    w_all = np.fft.fft(pow_g.astype(np.float64))
    v_all = np.fft.fft(np.log(2.0 * np.sin(np.pi * pow_g / q)))
    js = np.arange(L)
    odd = js % 2 == 1
    out = np.empty(L, dtype=np.complex128)
    out[odd] = ODD_SCALE * g_all[odd] * w_all[odd] / q**2
    out[~odd] = EVEN_SCALE * g_all[~odd] * v_all[~odd] / q
    out[0] = complex(np.nan, np.nan)
    return out


def half_sum_identity(ctx: PrimeContext, j: int) -> float:
    """|sum_{n <= q/2} chi(n) - (2 - chibar(2)) (G(chi)/(i pi)) L(1, chibar)|
    for odd chi_j, both sides computed independently."""
    if j % 2 == 0:
        raise ValueError("identity holds for odd characters only")
    q = ctx.q
    lhs = prefix_sums_single(ctx, j)[(q - 1) // 2 - 1]
    jc = ctx.conj_index(j)
    lbar = l1_closed_form(ctx, jc).value
    chibar2 = eval_char(ctx, jc, 2)
    rhs = (2.0 - chibar2) * gauss_sum(ctx, j) / (1j * math.pi) * lbar
    return abs(lhs - rhs)


_KRON3 = np.array([0.0, 1.0, -1.0])


def l1_twisted(ctx: PrimeContext, j: int, eps: float = 1e-12) -> complex:
    """L(1, chi_j * (./3)) by the certified series at modulus 3q."""
    if ctx.q == 3:
        raise ValueError("q = 3 would square the twist")
    if j % (ctx.q - 1) == 0:
        raise ValueError("principal character excluded")
    q = ctx.q
    n = np.arange(3 * q, dtype=np.int64)
    values = chi_table(ctx, j)[n % q] * _KRON3[n % 3]
    value, _ = dirichlet_series_at_1(values, eps)
    return value
