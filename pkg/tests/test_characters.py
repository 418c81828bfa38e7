import math
import os

import numpy as np
import pytest

from charsum import arith, characters as ch


def test_context_examples():
    ctx5 = ch.build_context(5)
    assert ctx5.g == 2
    assert list(ctx5.ind[1:]) == [0, 1, 3, 2]
    ctx7 = ch.build_context(7)
    assert ctx7.g == 3
    assert ctx7.ind[6] == 3  # ind(-1) = (q-1)/2
    ctx3 = ch.build_context(3)
    assert ctx3.g == 2 and ctx3.ind[2] == 1


def test_context_rejects_bad_modulus():
    for bad in (4, 9, 15, 2):
        with pytest.raises(ValueError):
            ch.build_context(bad)
    with pytest.raises(ValueError):
        ch.build_context(10007, max_q=10000)


def test_index_table_is_bijection():
    for q in (5, 7, 101, 1009):
        ctx = ch.build_context(q)
        assert ctx.ind[0] == -1
        assert sorted(ctx.ind[1:]) == list(range(q - 1))
        assert ctx.ind[1] == 0 and ctx.ind[ctx.g] == 1
        assert ctx.ind[q - 1] == (q - 1) // 2


def test_eval_char_examples():
    ctx5 = ch.build_context(5)
    assert ch.eval_char(ctx5, 1, 2) == pytest.approx(1j, abs=1e-14)
    assert ch.eval_char(ctx5, 0, 3) == 1
    assert ch.eval_char(ctx5, 2, 10) == 0
    ctx7 = ch.build_context(7)
    assert ch.eval_char(ctx7, 3, 3) == pytest.approx(-1, abs=1e-14)


def test_multiplicativity_random_triples():
    rng = np.random.default_rng(3)
    for q in (101, 1009):
        ctx = ch.build_context(q)
        js = rng.integers(0, q - 1, size=10_000)
        ms = rng.integers(1, 5 * q, size=10_000)
        ns = rng.integers(1, 5 * q, size=10_000)
        for j in np.unique(js):
            sel = js == j
            lhs = ctx.chi_values(int(j), ms[sel] * ns[sel])
            rhs = ctx.chi_values(int(j), ms[sel]) * ctx.chi_values(int(j), ns[sel])
            assert np.abs(lhs - rhs).max() <= 1e-12


def test_parity_and_conjugation():
    ctx = ch.build_context(101)
    for j in range(0, 100):
        val = ch.eval_char(ctx, j, 100)  # chi(-1)
        assert val == pytest.approx((-1) ** j, abs=1e-12)
        for n in (2, 3, 55):
            assert ch.eval_char(ctx, ctx.conj_index(j), n) == pytest.approx(
                np.conj(ch.eval_char(ctx, j, n)), abs=1e-13
            )


def test_orthogonality_sampled():
    for q in (11, 61, 199):
        ctx = ch.build_context(q)
        js = np.arange(q - 1)
        for m, n in ((2, 2), (3, 5), (7, 7 + q), (4, 9)):
            total = sum(
                ch.eval_char(ctx, int(j), m) * np.conj(ch.eval_char(ctx, int(j), n)) for j in js
            )
            expect = (q - 1.0) if (m - n) % q == 0 else 0.0
            assert total == pytest.approx(expect, abs=1e-9)


def test_gauss_sum_examples():
    ctx5 = ch.build_context(5)
    assert ch.gauss_sum(ctx5, 2) == pytest.approx(math.sqrt(5), abs=1e-12)
    assert ch.gauss_sum(ctx5, 0) == pytest.approx(-1, abs=1e-12)
    ctx7 = ch.build_context(7)
    assert ch.gauss_sum(ctx7, 3) == pytest.approx(1j * math.sqrt(7), abs=1e-12)


def test_gauss_sums_bulk_matches_direct():
    for q in (5, 101):
        ctx = ch.build_context(q)
        bulk = ch.gauss_sums_all(ctx)
        for j in range(q - 1):
            assert abs(bulk[j] - ch.gauss_sum(ctx, j)) <= 1e-10
        assert abs(bulk[0] - (-1)) <= 1e-10
        assert np.abs(np.abs(bulk[1:]) - math.sqrt(q)).max() <= 1e-9 * math.sqrt(q)


def test_gauss_sum_conjugation_identity():
    # G(conj chi) = chi(-1) conj(G(chi))
    for q in (11, 101, 997):
        ctx = ch.build_context(q)
        bulk = ch.gauss_sums_all(ctx)
        for j in range(1, q - 1):
            lhs = bulk[ctx.conj_index(j)]
            rhs = (-1) ** j * np.conj(bulk[j])
            assert abs(lhs - rhs) <= 1e-9 * math.sqrt(q)


def test_small_characters_examples():
    cs1 = ch.small_characters(1)
    assert len(cs1) == 1 and cs1[0](7) == 1 and cs1[0].is_primitive
    cs4 = ch.small_characters(4)
    assert sorted(c.conductor for c in cs4) == [1, 4]
    cs12 = ch.small_characters(12)
    assert sorted(c.conductor for c in cs12) == [1, 3, 4, 12]
    with pytest.raises(ValueError):
        ch.small_characters(0)


def test_small_characters_group_structure():
    for d in (5, 8, 9, 16, 24, 36, 45):
        chars = ch.small_characters(d)
        assert len(chars) == arith.euler_phi(d)
        for c in chars:
            for n in range(1, 2 * d):
                for m in range(1, 8):
                    assert c(n * m) == pytest.approx(c(n) * c(m), abs=1e-12)
            # values are 0 exactly at non-coprime residues
            for n in range(d):
                if math.gcd(n, d) > 1:
                    assert c(n) == 0


def test_small_character_brute_force_homomorphisms_d12():
    # all 4 homomorphisms of (Z/12)* ~ Z/2 x Z/2 appear exactly once
    chars = ch.small_characters(12)
    sigs = sorted((round(c(5).real), round(c(7).real)) for c in chars)
    assert sigs == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def test_gauss_sum_small_identity():
    worst = 0.0
    for d in range(1, 61):
        for psi in ch.small_characters(d):
            _, res = ch.gauss_sum_small(psi)
            worst = max(worst, res)
    assert worst <= 1e-12


def test_gauss_sum_small_examples():
    quad5 = next(c for c in ch.small_characters(5) if c.is_primitive and c.parity() == 1
                 and np.isclose(c(4).real, 1.0))
    g, res = ch.gauss_sum_small(quad5)
    assert res == 0.0  # d = d1, identity is the value itself
    assert g == pytest.approx(math.sqrt(5), abs=1e-12)
    principal6 = next(c for c in ch.small_characters(6) if c.is_principal)
    g6, res6 = ch.gauss_sum_small(principal6)
    assert g6 == pytest.approx(arith.mobius(6), abs=1e-12)
    assert res6 <= 1e-12
    quad10 = next(c for c in ch.small_characters(10) if c.conductor == 5
                  and np.allclose(c(9), 1.0))
    _, res10 = ch.gauss_sum_small(quad10)
    assert res10 <= 1e-12


def test_index_cache_roundtrip(tmp_path, monkeypatch):
    monkeypatch.setenv(ch.CACHE_ENV_VAR, str(tmp_path))
    ctx1 = ch.build_context(101)
    cache_file = tmp_path / "ind_101.bin"
    assert cache_file.exists()
    ctx2 = ch.build_context(101)
    assert ctx2.g == ctx1.g
    assert np.array_equal(ctx1.ind, ctx2.ind)
    # corrupt the table: checksum must reject and rebuild correctly
    raw = bytearray(cache_file.read_bytes())
    raw[-1] ^= 0xFF
    cache_file.write_bytes(bytes(raw))
    ctx3 = ch.build_context(101)
    assert np.array_equal(ctx3.ind, ctx1.ind)
