"""Structured matrix constructions against raw index formulas."""

import numpy as np
import pytest

from ttsvd import (
    GeneratorSpec,
    build_generator,
    exchange_matrix_tt,
    full_toeplitz_tt,
    hankel_submatrix_tt,
    hankel_tt,
    hilbert_submatrix_tt,
    identity_scaled,
    matrix_tt_matmul,
    matrix_tt_norm,
    matrix_tt_round,
    prescribed_svd_matrix,
    random_block_tt,
    random_vector_tt,
    shift_transpose_tt,
    shift_tt,
    toeplitz_tt,
    tridiagonal_tt,
    tt_reconstruct,
    tt_svd_compress,
    tt_to_vector,
)


def _dense_upper_toeplitz(s_vec):
    m = len(s_vec)
    t = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            t[i, j] = s_vec[j - i - 1]
    return t


def _dense_hankel(s_vec):
    m = len(s_vec)
    h = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i + j <= m - 2:
                h[i, j] = s_vec[m - 2 - i - j]
    return h


def test_toeplitz_entries_and_preround_ranks():
    for seed in range(20):
        n = 4
        rank = 2 + seed % 2
        s = random_vector_tt(n, rank, seed)
        t = toeplitz_tt(s)
        ref = _dense_upper_toeplitz(tt_to_vector(s))
        got = tt_reconstruct(t)
        assert np.linalg.norm(got - ref) <= 1e-12 * max(np.linalg.norm(ref), 1)
        r = max(s.ranks)
        assert t.ranks[1:-1] == [2 * rs for rs in s.ranks[1:-1]], (
            f"seed {seed}: expected doubled bond ranks, got {t.ranks}"
        )
        assert r <= rank


def test_hankel_entries_and_preround_ranks():
    for seed in range(20):
        n = 4
        s = random_vector_tt(n, 2, seed + 100)
        h = hankel_tt(s)
        ref = _dense_hankel(tt_to_vector(s))
        got = tt_reconstruct(h)
        assert np.linalg.norm(got - ref) <= 1e-12 * max(np.linalg.norm(ref), 1)
        assert h.ranks[1:-1] == [2 * rs for rs in s.ranks[1:-1]]


def test_hankel_submatrix_keeps_first_half_columns():
    s = random_vector_tt(4, 2, 3)
    full = tt_reconstruct(hankel_tt(s))
    sub = hankel_submatrix_tt(s)
    assert sub.n_rows == 16 and sub.n_cols == 8
    assert np.allclose(tt_reconstruct(sub), full[:, :8], atol=1e-12)


def test_shift_matrices():
    n = 4
    m = 2**n
    s = tt_reconstruct(shift_tt(n))
    ref = np.diag(np.ones(m - 1), k=1)
    assert np.array_equal(s, ref)
    assert np.array_equal(tt_reconstruct(shift_transpose_tt(n)), ref.T)
    # nilpotent of order 2^n, checked in TT arithmetic by repeated squaring
    p = shift_tt(n)
    for _ in range(n):
        p = matrix_tt_round(matrix_tt_matmul(p, p), 1e-14)
    assert matrix_tt_norm(p) < 1e-12


def test_exchange_and_scaled_identity():
    n = 3
    m = 2**n
    j = tt_reconstruct(exchange_matrix_tt(n))
    assert np.array_equal(j, np.eye(m)[:, ::-1])
    assert np.allclose(tt_reconstruct(identity_scaled(n, -1.5)), -1.5 * np.eye(m))


def test_tridiagonal_entries():
    n = 4
    m = 2**n
    rng = np.random.default_rng(7)
    diags = [tt_svd_compress(rng.standard_normal((2,) * n), 0.0) for _ in range(3)]
    a, b, c = diags
    t = tridiagonal_tt(a, b, c)
    av, bv, cv = (tt_to_vector(x) for x in diags)
    ref = np.diag(bv)
    for i in range(m - 1):
        ref[i + 1, i] = av[i]
        ref[i, i + 1] = cv[i + 1]
    assert np.linalg.norm(tt_reconstruct(t) - ref) <= 1e-10 * np.linalg.norm(ref)


def test_tridiagonal_ignores_unused_boundary_entries():
    n = 3
    rng = np.random.default_rng(8)
    base = rng.standard_normal((2,) * n)
    a = tt_svd_compress(base, 0.0)
    b = tt_svd_compress(rng.standard_normal((2,) * n), 0.0)
    c1 = rng.standard_normal((2,) * n)
    c2 = c1.copy()
    c2[0, 0, 0] += 10.0  # first entry of the superdiagonal vector is never read
    t1 = tridiagonal_tt(a, b, tt_svd_compress(c1, 0.0))
    t2 = tridiagonal_tt(a, b, tt_svd_compress(c2, 0.0))
    assert np.allclose(tt_reconstruct(t1), tt_reconstruct(t2), atol=1e-10)


def test_full_toeplitz_entries():
    n = 3
    m = 2**n
    x = random_vector_tt(n + 1, 2, 5)
    xv = tt_to_vector(x)
    t = full_toeplitz_tt(x, delta=1e-13)
    ref = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            ref[i, j] = xv[m - 1 - (j - i)]
    assert np.linalg.norm(tt_reconstruct(t) - ref) <= 1e-10 * np.linalg.norm(ref)


def test_full_toeplitz_last_entry_unused():
    n = 3
    rng = np.random.default_rng(9)
    base = rng.standard_normal(2 ** (n + 1))
    other = base.copy()
    other[-1] = 99.0
    t1 = full_toeplitz_tt(tt_svd_compress(base.reshape((2,) * (n + 1), order="F"), 0.0))
    t2 = full_toeplitz_tt(tt_svd_compress(other.reshape((2,) * (n + 1), order="F"), 0.0))
    assert np.allclose(tt_reconstruct(t1), tt_reconstruct(t2), atol=1e-10)


def test_hilbert_submatrix_entries_and_budget():
    n = 6
    rows, cols = 2**n, 2 ** (n - 1)
    h = hilbert_submatrix_tt(n, 1e-10)
    assert h.n_rows == rows and h.n_cols == cols
    ref = 1.0 / (np.arange(rows)[:, None] + np.arange(cols)[None, :] + 1.0)
    err = np.linalg.norm(tt_reconstruct(h) - ref)
    assert err <= 1e-10 * np.linalg.norm(ref)
    with pytest.raises(ValueError):
        hilbert_submatrix_tt(23, 1e-8)
    with pytest.raises(ValueError):
        hilbert_submatrix_tt(8, 1e-8, max_n=6)
    with pytest.raises(ValueError):
        hilbert_submatrix_tt(6, 0.0)


def test_prescribed_svd_matrix_exact_construction():
    n = 8
    beta = 0.5
    a, u0, v0, spectrum = prescribed_svd_matrix(n, beta, k0=12, rank=3, seed=4)
    assert np.allclose(spectrum, beta ** np.arange(12), atol=0)
    ud = tt_reconstruct(u0)
    vd = tt_reconstruct(v0)
    assert np.allclose(ud.T @ ud, np.eye(12), atol=1e-12)
    assert np.allclose(vd.T @ vd, np.eye(12), atol=1e-12)
    ad = tt_reconstruct(a)
    assert np.allclose(ad, ud @ np.diag(spectrum) @ vd.T, atol=1e-12)
    s = np.linalg.svd(ad, compute_uv=False)
    assert np.max(np.abs(s[:12] - spectrum)) < 1e-9
    with pytest.raises(ValueError):
        prescribed_svd_matrix(4, 1.5)
    with pytest.raises(ValueError):
        prescribed_svd_matrix(3, 0.5, k0=100)


def test_random_vector_tt_profile_and_determinism():
    x = random_vector_tt([2] * 4, 5, 11)
    y = random_vector_tt([2] * 4, 5, 11)
    for cx, cy in zip(x.cores, y.cores):
        assert np.array_equal(cx, cy)
    assert x.ranks == [1, 2, 4, 2, 1]  # clipped at the mode-product caps
    assert abs(np.linalg.norm(tt_to_vector(x)) - 1.0) < 1e-12


def test_random_block_tt_minimal_feasible_profile():
    u = random_block_tt([2] * 10, 10, 1, 0)
    assert u.block_position == 9
    assert u.ranks == [1, 1, 1, 1, 1, 1, 1, 2, 3, 5, 1]
    ud = tt_reconstruct(u)
    assert np.allclose(ud.T @ ud, np.eye(10), atol=1e-12)
    assert u.orth[:9] == ["L"] * 9
    v = random_block_tt([2] * 10, 10, 1, 0)
    for cu, cv in zip(u.cores, v.cores):
        assert np.array_equal(cu, cv)
    with pytest.raises(ValueError):
        random_block_tt([2] * 3, 9, 1, 0)  # k exceeds the full dimension


def test_build_generator_dispatch():
    mat, info = build_generator(GeneratorSpec("toeplitz", 4, {"rank": 2, "seed": 1}))
    assert mat.n_rows == 16
    ref = _dense_upper_toeplitz(tt_to_vector(info["s"]))
    assert np.allclose(tt_reconstruct(mat), ref, atol=1e-11)

    mat, _ = build_generator(GeneratorSpec("shift", 3))
    assert np.array_equal(tt_reconstruct(mat), np.diag(np.ones(7), k=1))

    mat, info = build_generator(GeneratorSpec("prescribed_svd", 5, {"beta": 0.4, "k0": 6, "rank": 2}))
    assert np.allclose(info["spectrum"], 0.4 ** np.arange(6))

    mat, info = build_generator(GeneratorSpec("tridiagonal", 3, {"seed": 2}))
    assert mat.n_rows == 8

    mat, _ = build_generator(GeneratorSpec("hilbert_submatrix", 5, {"delta": 1e-8}))
    assert mat.n_rows == 32 and mat.n_cols == 16

    with pytest.raises(ValueError):
        GeneratorSpec("perm", 3)
    with pytest.raises(ValueError):
        GeneratorSpec("toeplitz", 0)
    with pytest.raises(ValueError):
        build_generator(GeneratorSpec("random_tt", 3))
