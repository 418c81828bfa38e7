import math

import numpy as np
import pytest

from charsum import characters as ch, scan


def test_prefix_sums_examples():
    ctx5 = ch.build_context(5)
    assert np.allclose(scan.prefix_sums_single(ctx5, 1), [1, 1 + 1j, 1, 0], atol=1e-14)
    ctx7 = ch.build_context(7)
    assert np.allclose(scan.prefix_sums_single(ctx7, 3), [1, 2, 1, 2, 1, 0], atol=1e-14)


def test_full_character_sum_vanishes(ctx1009):
    for j in (1, 17, 500):
        assert abs(scan.prefix_sums_single(ctx1009, j)[-1]) <= 1e-11


def test_scan_examples():
    res5 = scan.scan_all(ch.build_context(5))
    e1, e2, e3 = res5.extremum(1), res5.extremum(2), res5.extremum(3)
    assert e1.M == pytest.approx(math.sqrt(2), abs=1e-14) and e1.N == 2
    assert e2.M == pytest.approx(1.0, abs=1e-14) and e2.N == 1
    assert (e3.M, e3.N) == (e1.M, e1.N)
    # |S| = 1 recurs only at the mirror point x = 3, which the canonical
    # half-range scan does not count as a genuine tie
    assert not e2.tie
    res7 = scan.scan_all(ch.build_context(7))
    e = res7.extremum(3)
    assert e.M == 2.0 and e.N == 2
    assert e.m == pytest.approx(2 * math.pi / (math.exp(np.euler_gamma) * math.sqrt(7)), rel=1e-14)


def test_tie_flag_semantics():
    # genuine ties inside the half range are flagged
    s = np.array([1.0 + 0j, 1j, 0.25, 0.5, 0.1, 0.0])
    m, n, tie = scan.extrema_from_prefix(s, half_only=False)
    assert m == 1.0 and n == 1 and tie
    s2 = np.array([0.5 + 0j, 1j, 0.25, 0.5, 0.1, 0.0])
    _, n2, tie2 = scan.extrema_from_prefix(s2, half_only=False)
    assert n2 == 2 and not tie2


def test_scan_matches_prefix_oracle_exactly():
    for q in (5, 7, 11, 101):
        ctx = ch.build_context(q)
        res = scan.scan_all(ctx)
        for j in range(1, q - 1):
            m, n, tie = scan.extrema_from_prefix(scan.prefix_sums_single(ctx, j))
            ex = res.extremum(j)
            assert (m, n, tie) == (ex.M, ex.N, ex.tie)


def test_reflection_and_conjugation(ctx1009):
    q = 1009
    res = scan.scan_all(ctx1009)
    x = np.arange(1, q - 1)
    for j in (1, 2, 351, 504):
        S = scan.prefix_sums_single(ctx1009, j)
        par = ctx1009.parity(j)
        assert np.abs(S[q - 2 - x] - (-par) * S[x - 1]).max() <= 1e-9
        exc = res.extremum(ctx1009.conj_index(j))
        ex = res.extremum(j)
        assert (exc.M, exc.N) == (ex.M, ex.N)
        # half-range maximum equals the full-range maximum up to reflection noise
        m_half, _, _ = scan.extrema_from_prefix(S, half_only=True)
        m_full, _, _ = scan.extrema_from_prefix(S, half_only=False)
        assert abs(m_half - m_full) <= 1e-9


def test_scan_determinism(ctx1009):
    r1 = scan.scan_all(ctx1009, scan.ScanOptions(threads=1))
    r8 = scan.scan_all(ctx1009, scan.ScanOptions(threads=8))
    rb = scan.scan_all(ctx1009, scan.ScanOptions(block_size=97))
    for other in (r8, rb):
        assert np.array_equal(r1.M, other.M)
        assert np.array_equal(r1.N, other.N)
        assert np.array_equal(r1.tie, other.tie)
    rp = scan.scan_all(ctx1009, scan.ScanOptions(accumulation="plain"))
    assert np.abs(rp.M - r1.M).max() <= 1e-8
    assert np.array_equal(rp.N, r1.N)
    rn = scan.scan_all(ctx1009, scan.ScanOptions(fold_symmetry=False))
    assert np.abs(rn.M - r1.M).max() <= 1e-8


def test_scan_refusal():
    with pytest.raises(scan.ScanLimitError, match="refusing"):
        scan.scan_all(ch.build_context(2000003, max_q=3 * 10**6))
    with pytest.raises(ValueError):
        scan.ScanOptions(accumulation="bogus")


def test_checkpoints(ctx1009):
    q = 1009
    xs = np.array([101, 252, 504])
    res = scan.scan_all(ctx1009, checkpoints=xs)
    for j in (1, 5, 700):
        S = scan.prefix_sums_single(ctx1009, j)
        want = np.abs(S[xs - 1]) ** 2
        assert np.allclose(res.checkpoint_abs2[j - 1], want, rtol=1e-12)
    with pytest.raises(ValueError):
        scan.scan_all(ctx1009, checkpoints=np.array([q]))


def test_polya_truncated_exact_zero_cases(ctx101):
    for j in (1, 7, 50):
        for z in (5, 40, 101):
            assert scan.polya_truncated(ctx101, j, z, 0.0) == 0
            assert scan.polya_truncated(ctx101, j, z, 1.0) == 0
    with pytest.raises(ValueError):
        scan.polya_truncated(ctx101, 0, 10, 0.3)


def test_polya_truncated_accuracy(ctx1009):
    q = 1009
    z = math.ceil(q ** (11 / 21))
    S = {}
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(10):
        j = int(rng.integers(1, q - 1))
        alpha = float(rng.random())
        approx = scan.polya_truncated(ctx1009, j, z, alpha)
        if j not in S:
            S[j] = scan.prefix_sums_single(ctx1009, j)
        x = int(alpha * q)
        exact = S[j][x - 1] if x >= 1 else 0j
        worst = max(worst, abs(approx - exact))
    assert worst <= 10 * (1 + q * math.log(q) / z)
    # with z close to q the truncation error is small outright
    j = 5
    Sj = scan.prefix_sums_single(ctx1009, j)
    for alpha in (0.37, 0.5, 0.81):
        approx = scan.polya_truncated(ctx1009, j, q - 1, alpha)
        assert abs(approx - Sj[int(alpha * q) - 1]) <= 5.0


def test_tail_max(ctx101):
    t_empty = scan.tail_max(ctx101, 7, 50, 50, 400)
    assert t_empty.value == 0.0 and t_empty.terms == 0
    t1 = scan.tail_max(ctx101, 7, 5, 50, 400)
    t2 = scan.tail_max(ctx101, 7, 5, 50, 4000)
    assert abs(t1.value - t2.value) <= t1.grid_error_bound
    # triangle inequality: sum of 1/n over the rough set
    ns = [n for n in range(1, 51) if max(
        (p for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47) if n % p == 0),
        default=1) > 5]
    bound = sum(1 / n for n in ns)
    assert t2.value <= bound + 1e-9
    with pytest.raises(ValueError):
        scan.tail_max(ctx101, 7, 5, 50, 100)


def test_tail_moment(ctx10007):
    q = 10007
    z = q ** (11 / 21)
    vals = [scan.tail_moment(ctx10007, 3, 20.0, zz, 4096) for zz in (60.0, 90.0, z)]
    assert vals[0] <= vals[1] <= vals[2]  # nondecreasing in z
    assert scan.tail_moment(ctx10007, 3, 50.0, 50.0, 4096) == 0.0  # y = z empty
    with pytest.raises(ValueError):
        scan.tail_moment(ctx10007, 0, 20.0, z, 4096)


def test_variance_identity(ctx10007, scan10007):
    # (1/phi(q)) sum_j |S_j(x)|^2 with x = floor(alpha q) stays within 5%
    # of alpha(1-alpha) q; positions above (q-1)/2 map through reflection
    q = 10007
    alphas = [0.1, 0.25, 0.5, 0.75, 0.9]
    xs = sorted({min(int(a * q), q - 1 - int(a * q)) for a in alphas})
    res = scan.scan_all(ctx10007, checkpoints=np.array(xs))
    for a in alphas:
        x = int(a * q)
        xref = min(x, q - 1 - x)
        col = xs.index(xref)
        mean_sq = res.checkpoint_abs2[:, col].sum() / (q - 1)
        assert mean_sq == pytest.approx(a * (1 - a) * q, rel=0.05)
