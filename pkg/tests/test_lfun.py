import math

import numpy as np
import pytest

from charsum import characters as ch, lfun


def test_series_oracle_classical_values():
    ctx3 = ch.build_context(3)
    v = lfun.l1_series_oracle(ctx3, 1)
    assert v.value == pytest.approx(math.pi / (3 * math.sqrt(3)), abs=1e-12)
    assert v.tail_bound <= 1e-12
    ctx5 = ch.build_context(5)
    v5 = lfun.l1_series_oracle(ctx5, 2)
    golden = (1 + math.sqrt(5)) / 2
    assert v5.value == pytest.approx(2 / math.sqrt(5) * math.log(golden), abs=1e-12)


def test_series_oracle_rejects_principal(ctx101):
    with pytest.raises(ValueError):
        lfun.l1_series_oracle(ctx101, 0)
    with pytest.raises(ValueError):
        lfun.l1_closed_form(ctx101, 0)
    with pytest.raises(ValueError):
        lfun.dirichlet_series_at_1(np.ones(4))


def test_closed_form_matches_oracle_q7_and_q101(ctx7, ctx101):
    for ctx in (ctx7, ctx101):
        for j in range(1, ctx.q - 1):
            c = lfun.l1_closed_form(ctx, j).value
            o = lfun.l1_series_oracle(ctx, j).value
            assert abs(c - o) <= 1e-9


def test_bulk_matches_closed_form(ctx101, ctx1009):
    for ctx in (ctx101, ctx1009):
        bulk = lfun.l1_all(ctx)
        assert np.isnan(bulk[0].real)
        step = 1 if ctx.q < 500 else 37
        for j in range(1, ctx.q - 1, step):
            assert abs(bulk[j] - lfun.l1_closed_form(ctx, j).value) <= 1e-9


def test_bulk_conjugation_symmetry(ctx1009):
    bulk = lfun.l1_all(ctx1009)
    q = 1009
    js = np.arange(1, q - 1)
    assert np.abs(bulk[q - 1 - js] - np.conj(bulk[js])).max() <= 1e-12


def test_half_sum_identity_small_q():
    for q in (5, 7, 11):
        ctx = ch.build_context(q)
        for j in range(1, q - 1, 2):
            assert lfun.half_sum_identity(ctx, j) <= 1e-10
        with pytest.raises(ValueError):
            lfun.half_sum_identity(ctx, 2)


def test_twisted_value(ctx7):
    tw = lfun.l1_twisted(ctx7, 2)
    # long direct partial sum as an independent check (tail ~ periodic sum
    # of modulus-21 character over 1e6 terms)
    n = np.arange(1, 10**6 + 1)
    kron3 = np.array([0.0, 1.0, -1.0])
    tab = ch.chi_table(ctx7, 2)
    partial = (tab[n % 7] * kron3[n % 3] / n).sum()
    assert abs(tw - partial) <= 1e-3
    assert lfun.l1_twisted(ctx7, 2) == pytest.approx(np.conj(lfun.l1_twisted(ctx7, 4)), abs=1e-13)
    with pytest.raises(ValueError):
        lfun.l1_twisted(ch.build_context(3), 1)
    with pytest.raises(ValueError):
        lfun.l1_twisted(ctx7, 0)


def test_mertens_band(ctx1009, ctx10007, l1_10007):
    # max |L(1, chi)| <= e^gamma (log log q + C) with C <= 5
    for q, l1 in ((1009, lfun.l1_all(ctx1009)), (10007, l1_10007)):
        top = np.nanmax(np.abs(l1[1:]))
        c = top / math.exp(np.euler_gamma) - math.log(math.log(q))
        assert c <= 5.0


def test_method_agreement_q1009(ctx1009):
    bulk = lfun.l1_all(ctx1009)
    for j in (1, 2, 503, 504, 1006):
        o = lfun.l1_series_oracle(ctx1009, j, 1e-11).value
        c = lfun.l1_closed_form(ctx1009, j).value
        assert abs(o - c) <= 1e-9
        assert abs(bulk[j] - c) <= 1e-9
