"""Empirical survival functions of the scan and L-value statistics, summary
rows, continued-fraction localization of the maximizing points N/q, analyzers
for the structure of the top characters (parity, denominator of the nearby
rational, Euler-product reconstruction of m, pretentious distances), partial
sum predictions from the P(u) machinery, and log(-log) curve offsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import arith, dickman, smooth
from .characters import PrimeContext, eval_char, gauss_sum
from .scan import ScanResult, prefix_sums_single

EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample with survival(tau) = #{v > tau} / denominator."""

    values: np.ndarray
    denominator: float

    def survival(self, tau) -> float | np.ndarray:
        t = np.asarray(tau, dtype=float)
        out = (len(self.values) - np.searchsorted(self.values, t, side="right")) / self.denominator
        return out if np.ndim(tau) else float(out)


def build_distribution(values, denominator: float) -> EmpiricalDistribution:
    if denominator <= 0:
        raise ValueError("denominator must be positive")
    return EmpiricalDistribution(values=np.sort(np.asarray(values, dtype=float)),
                                 denominator=float(denominator))


@dataclass(frozen=True)
class Summary:
    min: float
    mean: float
    q9999: float
    max: float


def summarize(values) -> Summary:
    """min / mean / nearest-rank 0.9999 quantile / max of a sample."""
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        raise ValueError("empty sample")
    rank = max(math.ceil(0.9999 * len(v)), 1)
    return Summary(min=float(v[0]), mean=float(v.mean()), q9999=float(v[rank - 1]), max=float(v[-1]))


@dataclass(frozen=True)
class RationalApprox:
    a: int
    b: int
    b0: int  # b if b prime else 1
    u: float  # |alpha - a/b| = 1/(b e^{tau u}); +inf at exact rationals
    gap: float  # |alpha - a/b|


def rational_approx(alpha: float, B: int, tau: float) -> RationalApprox:
    """Last continued-fraction convergent of alpha with denominator <= B
    (so |alpha - a/b| <= 1/(bB)), plus the closeness exponent u."""
    if B < 2:
        raise ValueError("B >= 2 required")
    if tau <= 0:
        raise ValueError("tau > 0 required")
    frac = Fraction(alpha).limit_denominator(10**15)
    num, den = frac.numerator, frac.denominator
    # convergent recurrence h_n = a_n h_{n-1} + h_{n-2}
    p_prev, q_prev, p_cur, q_cur = 0, 1, 1, 0
    n, d = num, den
    a, b = 0, 1
    while True:
        if d == 0:
            break
        digit, rem = divmod(n, d)
        p_next = digit * p_cur + p_prev
        q_next = digit * q_cur + q_prev
        if q_next > B:
            break
        a, b = p_next, q_next
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_next, q_next
        n, d = d, rem
    gap = abs(alpha - a / b)
    u = math.inf if gap == 0.0 else -math.log(b * gap) / tau
    b0 = b if arith.is_prime(b) else 1
    return RationalApprox(a=a, b=b, b0=b0, u=u, gap=gap)


@dataclass(frozen=True)
class StructureReport:
    q: int
    top_js: np.ndarray
    odd_fraction: float
    b_counts: dict[int, int]  # denominators of N/q over the top set
    b0_counts: dict[int, int]
    even_b_counts: dict[int, int]  # over the top fraction of even characters
    even_modal_b: int | None
    median_gap_odd: float  # median |m - e^{-gamma}(|L| + log 2)| over top odd
    euler_residuals_odd: np.ndarray  # |m - reconstruction| per top odd char
    odd_pretender_trivial_fraction: float
    even_pretender_mod3_fraction: float
    mean_D_odd: float

    def modal_b(self) -> int | None:
        if not self.b_counts:
            return None
        return max(sorted(self.b_counts), key=lambda k: self.b_counts[k])


def _euler_product_m(ctx: PrimeContext, j: int, b0: int, y: float) -> float:
    """e^{-gamma} (b0/phi(b0)) |prod_{p <= y, p != b0} (1 - chi(p)/p)^{-1}|."""
    ps = arith.primes_up_to(y)
    chi_p = ctx.chi_values(j, ps)
    keep = ps != b0
    prod = np.prod(1.0 / (1.0 - chi_p[keep] / ps[keep]))
    scale = 1.0 if b0 == 1 else b0 / (b0 - 1.0)
    return math.exp(-EULER_GAMMA) * scale * abs(prod)


def structure_report(
    ctx: PrimeContext,
    scan_result: ScanResult,
    l1_values: np.ndarray,
    top_fraction: float,
    B: int = 100,
    euler_y: float = 1000.0,
    pretender_offset: float = 2.0,
) -> StructureReport:
    """Structure of the characters in the top ``top_fraction`` by m."""
    if not 0 < top_fraction <= 1:
        raise ValueError("top_fraction in (0, 1] required")
    q = ctx.q
    m = scan_result.m
    k = max(1, int(round(top_fraction * len(m))))
    order = np.argsort(-m, kind="stable")
    top = scan_result.js[order[:k]]
    if len(top) == 0:
        raise ValueError("empty selection")

    parity = np.where(top % 2 == 0, 1, -1)
    odd_fraction = float((parity < 0).mean())

    b_counts: dict[int, int] = {}
    b0_counts: dict[int, int] = {}
    euler_res = []
    gaps_odd = []
    odd_trivial = 0
    odd_total = 0
    d_odd = []
    for j in top:
        j = int(j)
        tau = float(m[j - 1])
        ra = rational_approx(float(scan_result.N[j - 1]) / q, B, tau)
        b_counts[ra.b] = b_counts.get(ra.b, 0) + 1
        b0_counts[ra.b0] = b0_counts.get(ra.b0, 0) + 1
        if j % 2 == 1:  # odd character
            odd_total += 1
            lval = l1_values[j]
            gaps_odd.append(abs(tau - math.exp(-EULER_GAMMA) * (abs(lval) + math.log(2))))
            euler_res.append(abs(tau - _euler_product_m(ctx, j, ra.b0, euler_y)))
            y_pret = math.exp(tau + pretender_offset)
            xi, dmin = smooth.find_pretender(ctx, j, y_pret)
            d_odd.append(dmin)
            if xi.conductor == 1:
                odd_trivial += 1

    # the joint top is dominated by odd characters, so the even side gets
    # its own top-fraction selection
    even_b_counts: dict[int, int] = {}
    even_mod3 = 0
    even_total = 0
    even_mask = scan_result.parity > 0
    m_even = m[even_mask]
    js_even = scan_result.js[even_mask]
    k_even = max(1, int(round(top_fraction * len(m_even))))
    top_even = js_even[np.argsort(-m_even, kind="stable")[:k_even]]
    for j in top_even:
        j = int(j)
        tau = float(m[j - 1])
        ra = rational_approx(float(scan_result.N[j - 1]) / q, B, tau)
        even_total += 1
        even_b_counts[ra.b] = even_b_counts.get(ra.b, 0) + 1
        y_pret = math.exp(math.sqrt(3.0) * tau + pretender_offset)
        xi, _ = smooth.find_pretender(ctx, j, y_pret)
        if xi.conductor == 3:
            even_mod3 += 1
    even_modal = None
    if even_b_counts:
        even_modal = max(sorted(even_b_counts), key=lambda kk: even_b_counts[kk])
    return StructureReport(
        q=q,
        top_js=top,
        odd_fraction=odd_fraction,
        b_counts=b_counts,
        b0_counts=b0_counts,
        even_b_counts=even_b_counts,
        even_modal_b=even_modal,
        median_gap_odd=float(np.median(gaps_odd)) if gaps_odd else math.nan,
        euler_residuals_odd=np.array(euler_res),
        odd_pretender_trivial_fraction=odd_trivial / odd_total if odd_total else math.nan,
        even_pretender_mod3_fraction=even_mod3 / even_total if even_total else math.nan,
        mean_D_odd=float(np.mean(d_odd)) if d_odd else math.nan,
    )


_KRON3 = (0.0, 1.0, -1.0)


@dataclass(frozen=True)
class PartialSumPrediction:
    predicted: complex
    actual: complex
    gap: float
    case: str
    tau: float
    u: float
    pretentious_distance: float


def predicted_partial_sum(
    ctx: PrimeContext,
    j: int,
    beta: float,
    scan_result: ScanResult,
    table: dickman.DickmanTable,
    B: int = 100,
    pretentious_offset: float = 2.0,
) -> PartialSumPrediction:
    """Case formula for the normalized prefix sum at beta vs the exact value.

    Odd characters: actual = e^{-gamma} pi i / G(chi) * sum_{n <= beta q};
    even characters drop the i.  The prediction interpolates between the
    all-smooth mass and its P(u) depletion near low-denominator rationals.
    """
    if not 0 <= beta <= 1:
        raise ValueError("beta in [0, 1] required")
    q = ctx.q
    ex = scan_result.extremum(j)
    tau = ex.m
    odd = j % 2 == 1
    scale_tau = tau if odd else math.sqrt(3.0) * tau

    x = int(beta * q)
    s_beta = 0j if x < 1 else complex(prefix_sums_single(ctx, j)[min(x, q - 1) - 1])
    g = gauss_sum(ctx, j)
    front = math.exp(-EULER_GAMMA) * math.pi * (1j if odd else 1.0)
    actual = front / g * s_beta

    ra_beta = rational_approx(beta, B, scale_tau)
    k_num, ell = ra_beta.a, ra_beta.b
    u = ra_beta.u
    pu = table.P(min(u, table.u_max)) if math.isfinite(u) else 1.0

    dmin, _ = smooth.pretentious_distance(ctx, j, math.exp(scale_tau + pretentious_offset))

    if odd:
        ra_alpha = rational_approx(float(ex.N) / q, B, tau)
        b0 = ra_alpha.b0
        if b0 == 1:
            if ell == 1:
                predicted, case = tau * (1.0 - pu) + 0j, "b0=1, l=1"
            else:
                predicted, case = tau + 0j, "b0=1, l>1"
        else:
            chib = np.conj(eval_char(ctx, j, b0))
            factor = (1.0 - chib) / (b0 - chib)
            v = 0
            ellv = ell
            while ellv % b0 == 0:
                ellv //= b0
                v += 1
            if ell == 1:
                predicted, case = tau * (1.0 - pu) * (1.0 - factor), "b0=b, l=1"
            elif ellv == 1 and v >= 1:  # ell = b0^v
                chib_pow = np.conj(eval_char(ctx, j, pow(b0, v - 1, q)))
                predicted = tau * (1.0 - factor * (1.0 - pu * chib_pow / b0 ** (v - 1)))
                case = f"b0=b, l=b^{v}"
            else:
                predicted, case = tau * (1.0 - factor), "b0=b, other l"
    else:
        v = 0
        ellv = ell
        while ellv % 3 == 0:
            ellv //= 3
            v += 1
        if ellv == 1 and v >= 1:  # ell = 3^v
            chib_pow = np.conj(eval_char(ctx, j, pow(3, v - 1, q)))
            predicted = tau * pu * _KRON3[k_num % 3] * chib_pow / 3 ** (v - 1)
            case = f"even, l=3^{v}"
        else:
            predicted, case = 0j, "even, other l"

    predicted = complex(predicted)
    return PartialSumPrediction(
        predicted=predicted, actual=actual, gap=abs(predicted - actual),
        case=case, tau=tau, u=u, pretentious_distance=dmin,
    )


@dataclass(frozen=True)
class OffsetCurve:
    taus: np.ndarray
    offsets: np.ndarray  # NaN where either survival left (0, 1)
    mean_offset: float
    n_valid: int


def loglog_offset(
    dist_a: EmpiricalDistribution,
    dist_b: EmpiricalDistribution,
    tau_lo: float,
    tau_hi: float,
    n_points: int,
) -> OffsetCurve:
    """log(-log A(tau)) - log(-log B(tau)) on a grid, with its mean over the
    points where both survivals lie strictly inside (0, 1)."""
    taus = np.linspace(tau_lo, tau_hi, n_points)
    sa = np.asarray(dist_a.survival(taus))
    sb = np.asarray(dist_b.survival(taus))
    valid = (sa > 0) & (sa < 1) & (sb > 0) & (sb < 1)
    offs = np.full(n_points, np.nan)
    offs[valid] = np.log(-np.log(sa[valid])) - np.log(-np.log(sb[valid]))
    if not valid.any():
        raise ValueError("no grid point has both survivals inside (0, 1)")
    return OffsetCurve(
        taus=taus, offsets=offs,
        mean_offset=float(np.nanmean(offs)), n_valid=int(valid.sum()),
    )
