"""Monte Carlo model of character-sum extrema: independent X_p uniform on
the unit circle for p <= y, X_n extended multiplicatively over y-smooth n,
a +-1 coin X_{-1} with X_{-n} = X_{-1} X_n, and the grid maximum

    s = max_alpha | sum_{0 < |n| <= y^u_cut, n smooth} X_n (1 - e(n alpha)) / n |,

renormalized to m = s / (2 e^gamma).  Sampling is counter-based: sample k of
a run with seed s draws from an RNG keyed by (s, k), so any execution order
or parallel split reproduces identical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from numba import njit

from . import arith, smooth

EULER_GAMMA = float(np.euler_gamma)
TAIL_BOUND_LIMIT = 0.05


def _fft_friendly(n: int) -> int:
    """Smallest length >= n of the form 2^a * {1, 3, 5} (fast pocketfft plans)."""
    best = None
    for mult in (1, 3, 5):
        a = 0
        while mult << a < n:
            a += 1
        cand = mult << a
        if best is None or cand < best:
            best = cand
    return best


@njit(cache=True)
def _grid_max_kernel(f, c0, x_minus):
    """argmax over r of |(1 - x) c0 - f[r] + x f[(R-r) % R]|^2, fused."""
    r = len(f)
    base = (1.0 - x_minus) * c0
    best = -1.0
    bestr = 0
    for i in range(r):
        v = base - f[i] + x_minus * f[(r - i) % r]
        a2 = v.real * v.real + v.imag * v.imag
        if a2 > best:
            best = a2
            bestr = i
    return math.sqrt(best), bestr


@dataclass(frozen=True)
class ModelConfig:
    y: float = 20.0
    u_cut: float = 4.0
    grid_size: int | None = None  # defaults to the next fast length >= 4 y^u_cut
    samples: int = 10_000
    seed: int = 0

    @property
    def cutoff(self) -> int:
        return int(self.y**self.u_cut)

    @property
    def R(self) -> int:
        if self.grid_size is not None:
            return self.grid_size
        return _fft_friendly(4 * self.cutoff)

    def validate(self) -> None:
        if self.y < 3:
            raise ValueError("y >= 3 required")
        if self.u_cut < 1:
            raise ValueError("u_cut >= 1 required")
        if self.samples < 1:
            raise ValueError("samples >= 1 required")
        if self.R < 4 * self.cutoff:
            raise ValueError(f"grid_size must be >= 4 y^u_cut = {4 * self.cutoff}")
        tb = tail_bound(self)
        if tb > TAIL_BOUND_LIMIT:
            raise ValueError(
                f"truncation tail bound {tb:.4f} exceeds {TAIL_BOUND_LIMIT}; "
                "raise u_cut or lower y"
            )


@dataclass(frozen=True)
class ModelSample:
    s_value: float
    m_value: float
    argmax_alpha: float
    tail_bound: float


@njit(cache=True)
def _multiplicative_fill(parent, prime_idx, xp, out):
    out[0] = 1.0 + 0.0j
    for i in range(1, len(out)):
        out[i] = out[parent[i]] * xp[prime_idx[i]]
    return 0


@lru_cache(maxsize=8)
def _smooth_structure(y: float, cutoff: int):
    """(n, parent index, prime index) for y-smooth n <= cutoff, parents first."""
    primes = [int(p) for p in arith.primes_up_to(y)]
    ns = [1]
    parent = [0]
    pidx = [0]
    stack = [(1, len(primes) - 1, 0)]
    while stack:
        n, i, me = stack.pop()
        for idx in range(i + 1):
            m = n * primes[idx]
            if m <= cutoff:
                ns.append(m)
                parent.append(me)
                pidx.append(idx)
                stack.append((m, idx, len(ns) - 1))
    return (
        np.array(ns, dtype=np.int64),
        np.array(parent, dtype=np.int64),
        np.array(pidx, dtype=np.int64),
        np.array(primes, dtype=np.int64),
    )


@lru_cache(maxsize=8)
def tail_bound(cfg: ModelConfig) -> float:
    """2 * sum_{n > y^u_cut, n y-smooth} 1/n, computed exactly via the Euler
    product minus the enumerated head."""
    full = 1.0
    for p in arith.primes_up_to(cfg.y):
        full *= 1.0 / (1.0 - 1.0 / p)
    head, _ = smooth.smooth_weighted_sum(cfg.y, cfg.cutoff)
    return 2.0 * (full - head.real)


def _draw_units(cfg: ModelConfig, sample_index: int, force_unit: bool, conjugate: bool):
    _, _, _, primes = _smooth_structure(cfg.y, cfg.cutoff)
    if force_unit:
        return np.ones(len(primes), dtype=np.complex128), 1.0
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, sample_index)))
    xp = np.exp(2j * np.pi * rng.random(len(primes)))
    x_minus = -1.0 if rng.random() < 0.5 else 1.0
    if conjugate:
        xp = np.conj(xp)
    return xp, x_minus


_BATCH = 4


def _sample_batch(
    cfg: ModelConfig, indices, force_unit: bool, conjugate: bool,
    coeff: np.ndarray | None = None,
) -> list[ModelSample]:
    """Draw a batch of samples with one multi-row FFT dispatch.

    ``coeff`` may be a reusable (len(indices), R) buffer whose entries
    outside the smooth positions are already zero.
    """
    ns, parent, pidx, _ = _smooth_structure(cfg.y, cfg.cutoff)
    r = cfg.R
    tb = tail_bound(cfg)
    if coeff is None:
        coeff = np.zeros((len(indices), r), dtype=np.complex128)
    xms = np.empty(len(indices))
    c0s = np.empty(len(indices), dtype=np.complex128)
    xn = np.empty(len(ns), dtype=np.complex128)
    for row, k in enumerate(indices):
        xp, x_minus = _draw_units(cfg, int(k), force_unit, conjugate)
        _multiplicative_fill(parent, pidx, xp, xn)
        terms = xn / ns
        coeff[row, ns] = terms
        xms[row] = x_minus
        c0s[row] = terms.sum()
    fs = sfft.ifft(coeff[: len(indices)], axis=1, workers=2)
    out = []
    for row in range(len(indices)):
        # ifft is unscaled (divided by r), so rescale the fused maximum once
        s, best = _grid_max_kernel(fs[row], complex(c0s[row]) / r, xms[row])
        s *= r
        out.append(
            ModelSample(
                s_value=s,
                m_value=s / (2.0 * math.exp(EULER_GAMMA)),
                argmax_alpha=best / r,
                tail_bound=tb,
            )
        )
    return out


def draw_sample(
    cfg: ModelConfig,
    sample_index: int,
    force_unit: bool = False,
    conjugate: bool = False,
) -> ModelSample:
    """One model draw; (seed, sample_index) fully determines the result."""
    cfg.validate()
    return _sample_batch(cfg, [sample_index], force_unit, conjugate)[0]


def sample_many(cfg: ModelConfig, indices=None) -> np.ndarray:
    """m-values for samples [0, cfg.samples) (or the given indices)."""
    cfg.validate()
    if indices is None:
        indices = range(cfg.samples)
    indices = list(indices)
    out = np.empty(len(indices))
    buf = np.zeros((min(_BATCH, max(len(indices), 1)), cfg.R), dtype=np.complex128)
    pos = 0
    for lo in range(0, len(indices), _BATCH):
        chunk = indices[lo : lo + _BATCH]
        batch = _sample_batch(cfg, chunk, False, False, coeff=buf[: len(chunk)])
        for s in batch:
            out[pos] = s.m_value
            pos += 1
    return out


@dataclass(frozen=True)
class PhiEstimate:
    taus: np.ndarray
    phi: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    samples: int


def estimate_phi(m_values: np.ndarray, taus) -> PhiEstimate:
    """Survival estimates P(m > tau) with normal-approximation 95% bands."""
    taus = np.asarray(taus, dtype=float)
    if np.any(np.diff(taus) < 0):
        raise ValueError("taus must be sorted ascending")
    m_values = np.asarray(m_values, dtype=float)
    n = len(m_values)
    srt = np.sort(m_values)
    phi = 1.0 - np.searchsorted(srt, taus, side="right") / n
    half = 1.96 * np.sqrt(np.maximum(phi * (1.0 - phi), 0.0) / n)
    return PhiEstimate(
        taus=taus, phi=phi,
        ci_lo=np.maximum(phi - half, 0.0), ci_hi=np.minimum(phi + half, 1.0),
        samples=n,
    )


def ks_distance(m_a: np.ndarray, denom_a: float, m_b: np.ndarray, denom_b: float, taus) -> float:
    """sup over the tau grid of |survival_a - survival_b| with explicit
    denominators (phi(q) on the character side, sample count on the model)."""
    taus = np.asarray(taus, dtype=float)
    sa = np.sort(np.asarray(m_a, dtype=float))
    sb = np.sort(np.asarray(m_b, dtype=float))
    surv_a = (len(sa) - np.searchsorted(sa, taus, side="right")) / denom_a
    surv_b = (len(sb) - np.searchsorted(sb, taus, side="right")) / denom_b
    return float(np.abs(surv_a - surv_b).max())


def compare_to_q(cfg: ModelConfig, scan_m: np.ndarray, q: int, taus) -> float:
    """KS-style distance between the character survival (denominator phi(q))
    and the model survival at the given tau grid."""
    m_model = sample_many(cfg)
    return ks_distance(scan_m, q - 1, m_model, len(m_model), taus)
