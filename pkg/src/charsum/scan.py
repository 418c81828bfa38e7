"""Bulk prefix-sum engine: exact running sums sum_{n<=x} chi_j(n) for every
character mod q, their maxima M with the smallest attaining point N and the
renormalization m = M*pi/(e^gamma sqrt(q)), truncated Fourier approximations
of the prefix sums, and grid maxima of rough-part twisted sums.

Two exact symmetries cut the work to ~q^2/4 table gathers: conjugate pairs
share (M, N) because |conj(S)| = |S|, and the reflection
S(q-1-x) = -chi(-1) S(x) makes the half range x <= (q-1)/2 determine every
maximum together with its smallest attaining point.  Characters are scanned
independently (one accumulator per character, sequential in x), so results
are bitwise reproducible for any thread count or block size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .characters import PrimeContext, gauss_sum

SCAN_MAX_DEFAULT = 2 * 10**6

EULER_GAMMA = float(np.euler_gamma)


class ScanLimitError(ValueError):
    """Raised when a scan would exceed the configured engine limit."""


@dataclass(frozen=True)
class ScanOptions:
    block_size: int = 8192  # characters per kernel dispatch
    accumulation: str = "compensated"  # or "plain"
    fold_symmetry: bool = True
    threads: int | None = None
    scan_max: int = SCAN_MAX_DEFAULT

    def __post_init__(self) -> None:
        if self.accumulation not in ("plain", "compensated"):
            raise ValueError("accumulation must be 'plain' or 'compensated'")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")


@dataclass(frozen=True)
class PrefixExtremum:
    j: int
    M: float
    N: int
    m: float
    parity: int
    tie: bool


@dataclass(frozen=True)
class ScanResult:
    """Per-character extrema for all non-principal j in [1, q-2]."""

    q: int
    js: np.ndarray
    parity: np.ndarray  # chi_j(-1) as +-1
    M: np.ndarray
    N: np.ndarray
    m: np.ndarray
    tie: np.ndarray
    checkpoint_x: np.ndarray | None = None
    checkpoint_abs2: np.ndarray | None = None  # |S_j(x)|^2 at checkpoint_x

    def extremum(self, j: int) -> PrefixExtremum:
        idx = j - 1
        if not 1 <= j <= self.q - 2:
            raise IndexError(f"j = {j} out of range [1, {self.q - 2}]")
        return PrefixExtremum(
            j=j, M=float(self.M[idx]), N=int(self.N[idx]), m=float(self.m[idx]),
            parity=int(self.parity[idx]), tie=bool(self.tie[idx]),
        )


TIE_TOL = 1e-9


@njit(cache=True)
def _prefix_kernel(ind, roots, j, xmax, compensated):
    """Running sums S(x) for x = 1..xmax, same op order as the scan kernel."""
    L = len(roots)
    out = np.empty(xmax, dtype=np.complex128)
    sre = 0.0
    sim = 0.0
    cre = 0.0
    cim = 0.0
    for x in range(1, xmax + 1):
        e = (j * np.int64(ind[x])) % L
        vr = roots[e].real
        vi = roots[e].imag
        if compensated:
            yr = vr - cre
            t = sre + yr
            cre = (t - sre) - yr
            sre = t
            yi = vi - cim
            t2 = sim + yi
            cim = (t2 - sim) - yi
            sim = t2
        else:
            sre += vr
            sim += vi
        out[x - 1] = complex(sre, sim)
    return out


@njit(cache=True, parallel=True)
def _scan_kernel(ind, roots, j_lo, j_hi, xmax, compensated, ckpt_x,
                 out_m2, out_n, out_tie, out_ckpt):
    """Extrema of |S_j(x)|^2 over x <= xmax for j in [j_lo, j_hi)."""
    L = len(roots)
    for jj in prange(j_hi - j_lo):
        j = j_lo + jj
        buf = np.empty(xmax)
        sre = 0.0
        sim = 0.0
        cre = 0.0
        cim = 0.0
        kc = 0
        for x in range(1, xmax + 1):
            e = (j * np.int64(ind[x])) % L
            vr = roots[e].real
            vi = roots[e].imag
            if compensated:
                yr = vr - cre
                t = sre + yr
                cre = (t - sre) - yr
                sre = t
                yi = vi - cim
                t2 = sim + yi
                cim = (t2 - sim) - yi
                sim = t2
            else:
                sre += vr
                sim += vi
            buf[x - 1] = sre * sre + sim * sim
            if kc < len(ckpt_x) and x == ckpt_x[kc]:
                out_ckpt[jj, kc] = buf[x - 1]
                kc += 1
        m2 = -1.0
        nbest = 0
        for x in range(xmax):
            if buf[x] > m2:
                m2 = buf[x]
                nbest = x + 1
        mval = math.sqrt(m2)
        thr = mval - TIE_TOL
        thr = thr * thr if thr > 0.0 else 0.0
        ties = 0
        for x in range(xmax):
            if buf[x] >= thr:
                ties += 1
        out_m2[jj] = m2
        out_n[jj] = nbest
        out_tie[jj] = ties >= 2
    return 0


def prefix_sums_single(ctx: PrimeContext, j: int, accumulation: str = "compensated") -> np.ndarray:
    """Exact running sums S(x), x = 1..q-1; the per-character oracle."""
    if not 0 <= j <= ctx.q - 2:
        raise ValueError(f"j out of range [0, {ctx.q - 2}]")
    return _prefix_kernel(ctx.ind, ctx.roots, j, ctx.q - 1, accumulation == "compensated")


def extrema_from_prefix(S: np.ndarray, half_only: bool = True) -> tuple[float, int, bool]:
    """(M, smallest N, tie flag) from a full prefix-sum sequence.

    With half_only the maximum is taken over x <= (q-1)/2, which determines
    the global maximum and its smallest attaining point exactly: the
    reflection S(q-1-x) = -chi(-1) S(x) mirrors every attaining point in the
    upper half to one at least as small.
    """
    qm1 = len(S) + 1
    xmax = (qm1 - 1) // 2 if half_only else qm1 - 1
    a2 = S.real[:xmax] ** 2 + S.imag[:xmax] ** 2  # same |.|^2 form as the engine
    nbest = int(np.argmax(a2))
    mval = math.sqrt(float(a2[nbest]))
    thr = mval - TIE_TOL
    thr = thr * thr if thr > 0.0 else 0.0
    tie = int(np.count_nonzero(a2 >= thr)) >= 2
    return mval, nbest + 1, tie


def estimate_cost(q: int) -> str:
    adds = (q / 2) ** 2
    mem = 16 * (q // 2)
    return (
        f"full scan at q = {q}: ~{adds:.2e} table gathers and complex "
        f"accumulations (~{adds * 10:.1e} flops), {mem / 1e6:.0f} MB of "
        f"per-worker |S|^2 buffer; refusing (limit {SCAN_MAX_DEFAULT})"
    )


def scan_all(
    ctx: PrimeContext,
    opts: ScanOptions | None = None,
    checkpoints: np.ndarray | None = None,
) -> ScanResult:
    """Extrema (M, smallest N, m, tie) for every non-principal character.

    Optional ``checkpoints`` (x positions <= (q-1)/2, ascending) record
    |S_j(x)|^2 along the way for variance-style diagnostics.
    """
    opts = opts or ScanOptions()
    q = ctx.q
    if q > opts.scan_max:
        raise ScanLimitError(estimate_cost(q))
    if opts.threads is not None:
        # results are per-character deterministic, so clamping is safe
        numba.set_num_threads(min(max(opts.threads, 1), numba.config.NUMBA_NUM_THREADS))
    compensated = opts.accumulation == "compensated"
    ckpt = np.asarray(checkpoints, dtype=np.int64) if checkpoints is not None else np.empty(0, dtype=np.int64)
    if len(ckpt) and (np.any(np.diff(ckpt) <= 0) or ckpt[0] < 1 or ckpt[-1] > (q - 1) // 2):
        raise ValueError("checkpoints must be ascending in [1, (q-1)/2]")

    njs = q - 2  # j in [1, q-2]
    M = np.empty(njs)
    N = np.empty(njs, dtype=np.int64)
    tie = np.zeros(njs, dtype=bool)
    ckpt_abs2 = np.empty((njs, len(ckpt))) if len(ckpt) else None

    if opts.fold_symmetry:
        jmax = (q - 1) // 2
        xmax = (q - 1) // 2
    else:
        jmax = q - 2
        xmax = q - 1
    for lo in range(1, jmax + 1, opts.block_size):
        hi = min(lo + opts.block_size, jmax + 1)
        nb = hi - lo
        out_m2 = np.empty(nb)
        out_n = np.empty(nb, dtype=np.int64)
        out_tie = np.empty(nb, dtype=np.bool_)
        out_ck = np.empty((nb, len(ckpt)))
        _scan_kernel(ctx.ind, ctx.roots, lo, hi, xmax, compensated, ckpt,
                     out_m2, out_n, out_tie, out_ck)
        M[lo - 1 : hi - 1] = np.sqrt(out_m2)
        N[lo - 1 : hi - 1] = out_n
        tie[lo - 1 : hi - 1] = out_tie
        if ckpt_abs2 is not None:
            ckpt_abs2[lo - 1 : hi - 1] = out_ck

    if opts.fold_symmetry:
        # conjugates share M, N, tie: chi_{q-1-j} = conj(chi_j)
        for j in range(1, jmax + 1):
            jc = q - 1 - j
            if jc != j and jc <= njs:
                M[jc - 1] = M[j - 1]
                N[jc - 1] = N[j - 1]
                tie[jc - 1] = tie[j - 1]
                if ckpt_abs2 is not None:
                    ckpt_abs2[jc - 1] = ckpt_abs2[j - 1]

    js = np.arange(1, q - 1, dtype=np.int64)
    parity = np.where(js % 2 == 0, 1, -1).astype(np.int64)
    m = M * math.pi / (math.exp(EULER_GAMMA) * math.sqrt(q))
    return ScanResult(
        q=q, js=js, parity=parity, M=M, N=N, m=m, tie=tie,
        checkpoint_x=ckpt if len(ckpt) else None, checkpoint_abs2=ckpt_abs2,
    )


def polya_truncated(ctx: PrimeContext, j: int, z: float, alpha: float) -> complex:
    """Fourier-truncated approximation of sum_{n <= alpha*q} chi_j(n):

        (G(chi)/2 pi i) sum_{1<=|n|<=z} conj(chi)(n) (1 - e(-n alpha)) / n,

    summed directly over |n| <= z.
    """
    if j % (ctx.q - 1) == 0:
        raise ValueError("principal character excluded")
    if not 1 <= z <= ctx.q:
        raise ValueError("need 1 <= z <= q")
    zi = int(z)
    ns = np.arange(1, zi + 1, dtype=np.int64)
    chibar = np.conj(ctx.chi_values(j, ns))
    par = ctx.parity(j)
    # e(-n alpha) and e(+n alpha), phases reduced mod 1 before scaling
    ph = np.mod(ns * alpha, 1.0)
    em = np.exp(-2j * np.pi * ph)
    ep = np.conj(em)
    terms = chibar / ns * ((1.0 - em) - par * (1.0 - ep))
    total = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return gauss_sum(ctx, j) / (2j * math.pi) * total


_lpf_cache: dict[int, np.ndarray] = {}


def _largest_prime_factor_table(z: int) -> np.ndarray:
    if z not in _lpf_cache:
        lpf = np.zeros(z + 1, dtype=np.int64)
        lpf[1] = 1
        for p in range(2, z + 1):
            if lpf[p] == 0:
                lpf[p::p] = p
        if len(_lpf_cache) > 8:
            _lpf_cache.clear()
        _lpf_cache[z] = lpf
    return _lpf_cache[z]


@dataclass(frozen=True)
class TailMax:
    value: float
    grid_error_bound: float
    terms: int


def _rough_coefficients(ctx: PrimeContext, j: int, y: float, z: float) -> tuple[np.ndarray, np.ndarray]:
    zi = int(z)
    lpf = _largest_prime_factor_table(zi)
    ns = np.nonzero(lpf[: zi + 1] > y)[0]
    return ns, ctx.chi_values(j, ns) / ns


def tail_max(ctx: PrimeContext, j: int, y: float, z: float, R: int) -> TailMax:
    """max over the R-grid of |sum_{n<=z, P+(n)>y} chi_j(n) e(n alpha)/n|.

    Evaluation at alpha = r/R for all r at once is a length-R DFT with the
    coefficients folded in at n mod R; the grid-sampling error is bounded by
    2 pi^2 * (number of terms) / R.
    """
    if not 3 <= y <= z:
        raise ValueError("need 3 <= y <= z")
    if R < 4 * z:
        raise ValueError("grid too small: need R >= 4z")
    ns, coeffs = _rough_coefficients(ctx, j, y, z)
    if len(ns) == 0:
        return TailMax(value=0.0, grid_error_bound=0.0, terms=0)
    A = np.zeros(R, dtype=np.complex128)
    np.add.at(A, ns % R, coeffs)
    vals = np.fft.ifft(A) * R
    return TailMax(
        value=float(np.abs(vals).max()),
        grid_error_bound=2 * math.pi**2 * len(ns) / R,
        terms=len(ns),
    )


def tail_moment(ctx: PrimeContext, k: int, y: float, z: float, R: int) -> float:
    """(1/phi(q)) sum over non-principal j of tail_max(...)^{2k}."""
    if k < 1:
        raise ValueError("k >= 1 required")
    q = ctx.q
    if not 3 <= y <= z:
        raise ValueError("need 3 <= y <= z")
    if R < 4 * z:
        raise ValueError("grid too small: need R >= 4z")
    zi = int(z)
    lpf = _largest_prime_factor_table(zi)
    ns = np.nonzero(lpf[: zi + 1] > y)[0]
    if len(ns) == 0:
        return 0.0
    inv_n = 1.0 / ns
    total = 0.0
    half = (q - 1) // 2
    block = 256
    for lo in range(1, half + 1, block):
        js = np.arange(lo, min(lo + block, half + 1), dtype=np.int64)
        idx = (js[:, None] * ctx.ind[ns][None, :].astype(np.int64)) % (q - 1)
        coeffs = ctx.roots[idx] * inv_n[None, :]
        A = np.zeros((len(js), R), dtype=np.complex128)
        np.add.at(A.T, ns % R, coeffs.T)
        vals = np.fft.ifft(A, axis=1) * R
        smax = np.abs(vals).max(axis=1)
        weights = np.where(js == q - 1 - js, 1.0, 2.0)  # conj pairs share S
        total += float(np.sum(weights * smax ** (2 * k)))
    return total / (q - 1)
