"""Dirichlet characters mod an odd prime q, parametrized by discrete logs.

A ``PrimeContext`` holds the full index table ``ind`` with g^ind(n) = n mod q
for the smallest primitive root g, so the character group is addressed by an
integer j in [0, q-2]:

    chi_j(n) = e(2*pi*i * j * ind(n) / (q-1)),   chi_j(n) = 0 when q | n.

j = 0 is the principal character, the conjugate of j is q-1-j, and the parity
is chi_j(-1) = (-1)^j.  Characters of small composite moduli (needed for
divisor decompositions and Gauss-sum identities) are enumerated separately as
``SmallCharacter`` value tables with exact root-of-unity exponents.
"""

from __future__ import annotations

import math
import os
import struct
import zlib
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import arith

MAX_CONTEXT_Q = 2 * 10**7

_CACHE_MAGIC = b"CSIX"
_CACHE_VERSION = 1
CACHE_ENV_VAR = "CHARSUM_CACHE_DIR"


@dataclass(frozen=True)
class PrimeContext:
    """Immutable evaluation context for the character group mod prime q."""

    q: int
    g: int
    ind: np.ndarray  # int32, length q; ind[n] = discrete log of n, ind[0] = -1
    roots: np.ndarray = field(repr=False, default=None)  # e(k/(q-1)), length q-1

    @property
    def order(self) -> int:
        return self.q - 1

    def conj_index(self, j: int) -> int:
        return (self.q - 1 - j) % (self.q - 1)

    def parity(self, j: int) -> int:
        """chi_j(-1) as +-1."""
        return -1 if j % 2 else 1

    def chi(self, j: int, n: int) -> complex:
        return eval_char(self, j, n)

    def chi_values(self, j: int, ns: np.ndarray) -> np.ndarray:
        """Vectorized chi_j over an integer array (zeros at multiples of q)."""
        ns = np.asarray(ns)
        nm = np.mod(ns, self.q)
        out = np.zeros(ns.shape, dtype=np.complex128)
        nz = nm != 0
        idx = (np.int64(j) * self.ind[nm[nz]].astype(np.int64)) % (self.q - 1)
        out[nz] = self.roots[idx]
        return out

    def pow_table(self) -> np.ndarray:
        """pow[k] = g^k mod q for k in [0, q-2] (inverse of ind)."""
        pow_g = np.empty(self.q - 1, dtype=np.int64)
        pow_g[self.ind[1:].astype(np.int64)] = np.arange(1, self.q, dtype=np.int64)
        return pow_g


def _conjugate_symmetric_roots(L: int) -> np.ndarray:
    """e(k/L) for k in [0, L) with roots[L-k] = conj(roots[k]) bitwise.

    The exact mirror symmetry makes conjugate-character evaluations bitwise
    conjugate, so extrema derived by conjugate pairing match direct scans.
    """
    roots = np.empty(L, dtype=np.complex128)
    roots[0] = 1.0
    half = np.arange(1, L // 2 + 1)
    roots[half] = np.exp(2j * np.pi * half / L)
    if L % 2 == 0:
        roots[L // 2] = -1.0
    roots[L - half[:-1] if L % 2 == 0 else L - half] = np.conj(
        roots[half[:-1] if L % 2 == 0 else half]
    )
    return roots


def _build_index_table(q: int, g: int) -> np.ndarray:
    """Index table by repeated doubling of the power sequence (vectorized)."""
    pows = np.ones(1, dtype=np.int64)
    while len(pows) < q - 1:
        gk = pow(g, len(pows), q)
        pows = np.concatenate([pows, (pows * gk) % q])
    pows = pows[: q - 1]
    ind = np.full(q, -1, dtype=np.int32)
    ind[pows] = np.arange(q - 1, dtype=np.int32)
    return ind


def _cache_path(q: int) -> str | None:
    cache_dir = os.environ.get(CACHE_ENV_VAR)
    if not cache_dir:
        return None
    return os.path.join(cache_dir, f"ind_{q}.bin")


def _cache_load(path: str, q: int) -> tuple[int, np.ndarray] | None:
    try:
        with open(path, "rb") as fh:
            header = fh.read(28)
            if len(header) != 28:
                return None
            magic, version, hq, hg, crc = struct.unpack("<4sIQQI", header)
            if magic != _CACHE_MAGIC or version != _CACHE_VERSION or hq != q:
                return None
            raw = fh.read(4 * q)
        if len(raw) != 4 * q or zlib.crc32(raw) != crc:
            return None
        return int(hg), np.frombuffer(raw, dtype=np.int32).copy()
    except OSError:
        return None


def _cache_store(path: str, q: int, g: int, ind: np.ndarray) -> None:
    raw = ind.astype(np.int32).tobytes()
    header = struct.pack("<4sIQQI", _CACHE_MAGIC, _CACHE_VERSION, q, g, zlib.crc32(raw))
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(raw)
    os.replace(tmp, path)


def build_context(q: int, max_q: int = MAX_CONTEXT_Q) -> PrimeContext:
    """Build the discrete-log context for an odd prime q (O(q) time/space)."""
    if q > max_q:
        raise ValueError(f"q = {q} exceeds the context limit {max_q}")
    if q < 3 or q % 2 == 0 or not arith.is_prime(q):
        raise ValueError(f"q = {q} is not an odd prime")
    path = _cache_path(q)
    cached = _cache_load(path, q) if path else None
    if cached is not None:
        g, ind = cached
    else:
        g = arith.primitive_root(q)
        ind = _build_index_table(q, g)
        if path:
            _cache_store(path, q, g, ind)
    roots = _conjugate_symmetric_roots(q - 1)
    ind.setflags(write=False)
    roots.setflags(write=False)
    return PrimeContext(q=q, g=g, ind=ind, roots=roots)


def chi_table(ctx: PrimeContext, j: int) -> np.ndarray:
    """Value table of chi_j on residues [0, q): tab[n % q] = chi_j(n)."""
    tab = np.zeros(ctx.q, dtype=np.complex128)
    tab[1:] = ctx.roots[(np.int64(j) * ctx.ind[1:].astype(np.int64)) % (ctx.q - 1)]
    return tab


def eval_char(ctx: PrimeContext, j: int, n: int) -> complex:
    """chi_j(n); n is reduced mod q, multiples of q give 0."""
    nm = n % ctx.q
    if nm == 0:
        return 0j
    return complex(ctx.roots[(j * int(ctx.ind[nm])) % (ctx.q - 1)])


def gauss_sum(ctx: PrimeContext, j: int) -> complex:
    """G(chi_j) = sum_n chi_j(n) e(n/q), direct compensated summation."""
    q = ctx.q
    ns = np.arange(1, q, dtype=np.int64)
    vals = ctx.roots[(np.int64(j) * ctx.ind[1:].astype(np.int64)) % (q - 1)]
    e = np.exp(2j * np.pi * ns / q)
    terms = vals * e
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def gauss_sums_all(ctx: PrimeContext) -> np.ndarray:
    """All Gauss sums at once: the DFT of k -> e(g^k / q), indexed by j.

    G(chi_j) = sum_k e(g^k/q) e(+2*pi*i*j*k/(q-1)), an inverse-sign DFT of
    length q-1 (arbitrary composite length; pocketfft handles any L in
    O(L log L)).
    """
    q = ctx.q
    w = np.exp(2j * np.pi * ctx.pow_table() / q)
    return np.fft.ifft(w) * (q - 1)


# ---------------------------------------------------------------------------
# characters of small composite moduli
# ---------------------------------------------------------------------------

MAX_SMALL_MODULUS = 10**4


@dataclass(frozen=True)
class SmallCharacter:
    """A Dirichlet character mod d <= 1e4 as an exact value table.

    ``exponents[n]`` is the numerator of the value exponent over ``order_den``
    (so the value at n is e(exponents[n]/order_den)), with -1 at non-coprime
    residues.  Equality tests and identity checks use the exponents; the
    complex table is a cache for numerics.
    """

    modulus: int
    label: int
    exponents: np.ndarray  # int64, length modulus, -1 at (n,d) > 1
    order_den: int
    values: np.ndarray = field(repr=False, default=None)
    conductor: int = 0
    is_primitive: bool = False

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])

    @property
    def is_principal(self) -> bool:
        return self.conductor == 1

    def parity(self) -> int:
        """Value at -1 as +-1."""
        v = self.values[(self.modulus - 1) % self.modulus] if self.modulus > 1 else 1.0
        return -1 if np.real(v) < 0 else 1

    def value_table(self) -> np.ndarray:
        return self.values

    def same_values(self, other: "SmallCharacter") -> bool:
        return self.modulus == other.modulus and bool(
            np.array_equal(self.exponents * other.order_den, other.exponents * self.order_den)
        )


def _odd_prime_power_generator(p: int, e: int) -> int:
    """Generator of the cyclic group (Z/p^e)* for odd p."""
    g = arith.primitive_root(p)
    if e >= 2 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _component_structure(p: int, e: int) -> list[tuple[int, int]]:
    """Cyclic decomposition of (Z/p^e)* as a list of (generator, order)."""
    m = p**e
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            return [(3, 2)]
        return [(m - 1, 2), (5, 2 ** (e - 2))]
    return [(_odd_prime_power_generator(p, e), (p - 1) * p ** (e - 1))]


def _dlog_table(g: int, s: int, m: int) -> np.ndarray:
    table = np.full(m, -1, dtype=np.int64)
    cur = 1
    for k in range(s):
        table[cur] = k
        cur = cur * g % m
    return table


def _component_conductor(p: int, e: int, orders: list[int], exps: list[int]) -> int:
    """Conductor contribution of the p-part from component exponents."""
    if p != 2:
        s = orders[0]
        t = exps[0]
        m = s // math.gcd(s, t) if t else 1
        if m == 1:
            return 1
        a = 0
        while m % p == 0:
            m //= p
            a += 1
        return p ** (a + 1)
    if e == 1:
        return 1
    if e == 2:
        return 4 if exps[0] else 1
    t_neg, t5 = exps
    s5 = orders[1]
    m5 = s5 // math.gcd(s5, t5) if t5 else 1
    if m5 > 1:
        a = m5.bit_length() - 1
        return 2 ** (a + 2)
    return 4 if t_neg else 1


@lru_cache(maxsize=256)
def small_characters(d: int) -> tuple[SmallCharacter, ...]:
    """All phi(d) characters mod d, with conductor and primitivity marked.

    Built from the CRT decomposition of (Z/d)*; enumeration order is the
    row-major product over component exponents, so labels are reproducible.
    Each character carries a full length-d value table, so materializing the
    group costs O(phi(d) * d); fine for the divisor moduli and conductor
    searches this serves, but keep d modest.
    """
    if not 1 <= d <= MAX_SMALL_MODULUS:
        raise ValueError(f"modulus {d} out of range [1, {MAX_SMALL_MODULUS}]")
    if d == 1:
        exps = np.zeros(1, dtype=np.int64)
        vals = np.ones(1, dtype=np.complex128)
        return (
            SmallCharacter(
                modulus=1, label=0, exponents=exps, order_den=1, values=vals,
                conductor=1, is_primitive=True,
            ),
        )

    fac = arith.factorize(d)
    comp_meta = []  # (p, e, m=p^e, [(gen, order)], [dlog tables])
    all_orders: list[int] = []
    for p, e in fac.prime_powers:
        m = p**e
        gens = _component_structure(p, e)
        dlogs = []
        base = np.zeros(m, dtype=np.int64)
        if len(gens) == 2:
            # 2^e, e >= 3: joint log over <-1> x <5>
            g1, s1 = gens[0]
            g2, s2 = gens[1]
            log1 = np.full(m, -1, dtype=np.int64)
            log2 = np.full(m, -1, dtype=np.int64)
            for a in range(s1):
                for b in range(s2):
                    r = pow(g1, a, m) * pow(g2, b, m) % m
                    log1[r] = a
                    log2[r] = b
            dlogs = [log1, log2]
        elif len(gens) == 1:
            g1, s1 = gens[0]
            dlogs = [_dlog_table(g1, s1, m)]
        comp_meta.append((p, e, m, gens, dlogs))
        all_orders.extend(s for _, s in gens)

    l_exp = 1
    for s in all_orders:
        l_exp = l_exp * s // math.gcd(l_exp, s)

    coprime = np.array([n for n in range(d) if math.gcd(n, d) == 1], dtype=np.int64)

    # per-component discrete logs of every coprime residue
    comp_logs = []  # aligned with all_orders
    for p, e, m, gens, dlogs in comp_meta:
        res = coprime % m
        for table in dlogs:
            comp_logs.append(table[res])

    out = []
    label = 0
    from itertools import product

    for exps_tuple in product(*(range(s) for s in all_orders)):
        exponent = np.full(d, -1, dtype=np.int64)
        acc = np.zeros(len(coprime), dtype=np.int64)
        for t, s, logs in zip(exps_tuple, all_orders, comp_logs):
            acc += t * logs * (l_exp // s)
        exponent[coprime] = acc % l_exp
        values = np.zeros(d, dtype=np.complex128)
        values[coprime] = np.exp(2j * np.pi * exponent[coprime] / l_exp)

        cond = 1
        pos = 0
        for p, e, m, gens, dlogs in comp_meta:
            k = len(gens)
            orders_p = [s for _, s in gens]
            exps_p = list(exps_tuple[pos : pos + k])
            cond *= _component_conductor(p, e, orders_p, exps_p)
            pos += k

        out.append(
            SmallCharacter(
                modulus=d, label=label, exponents=exponent, order_den=l_exp,
                values=values, conductor=cond, is_primitive=(cond == d),
            )
        )
        label += 1
    return tuple(out)


def induced_primitive(psi: SmallCharacter) -> SmallCharacter:
    """The primitive character mod conductor(psi) that induces psi."""
    d, d1 = psi.modulus, psi.conductor
    if d1 == d:
        return psi
    candidates = [c for c in small_characters(d1) if c.conductor == d1]
    for cand in candidates:
        ok = True
        for n in range(1, d1 + 1):
            if math.gcd(n, d1) != 1:
                continue
            # lift n to a residue coprime to d in the same class mod d1
            m = n
            while math.gcd(m, d) != 1:
                m += d1
            lhs = cand.exponents[n % d1] * psi.order_den
            rhs = psi.exponents[m % d] * cand.order_den
            if lhs != rhs:
                ok = False
                break
        if ok:
            return cand
    raise RuntimeError(f"no inducing primitive character found for {psi}")


def gauss_sum_small(psi: SmallCharacter) -> tuple[complex, float]:
    """Direct G(psi) plus the residual of the induced-character identity

        G(psi) = mu(d/d1) psi1(d/d1) G(psi1),

    where psi1 mod d1 is the primitive character inducing psi.
    """
    d = psi.modulus
    ns = np.arange(1, d + 1)
    terms = psi.values[ns % d] * np.exp(2j * np.pi * ns / d)
    g_direct = complex(math.fsum(terms.real), math.fsum(terms.imag))

    psi1 = induced_primitive(psi)
    d1 = psi1.modulus
    ns1 = np.arange(1, d1 + 1)
    terms1 = psi1.values[ns1 % d1] * np.exp(2j * np.pi * ns1 / d1)
    g1 = complex(math.fsum(terms1.real), math.fsum(terms1.imag))
    predicted = arith.mobius(d // d1) * psi1(d // d1) * g1
    return g_direct, abs(g_direct - predicted)
