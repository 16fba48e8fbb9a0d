"""Explicit TT constructions for structured test matrices.

All generators work on quantized chains (every mode size 2) and return exact
TT representations wherever the structure permits: triangular Toeplitz and
Hankel matrices from a generating vector via a carry-channel core mixing,
shift matrices, tridiagonal matrices assembled from shift and diagonal
pieces, a Hilbert-like submatrix via Hankel assembly of a compressed
reciprocal vector, and random matrices with a prescribed singular spectrum.

Index conventions (1-based in the formulas, 0-based in code):

* upper-triangular Toeplitz   t_{ij} = s_{j-i}            for j > i
* upper anti-triangular Hankel h_{ij} = s_{2^N+1-i-j}     for i + j <= 2^N
* full Toeplitz               a_{ij} = x_{2^N+i-j}
* Hilbert submatrix           h_{ij} = 1 / (i+j-1),       2^N x 2^{N-1}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dense import dense_qr
from .tt import (
    BlockTT,
    MatrixTT,
    VectorTT,
    _rf,
    diag_embed,
    left_orthogonalize_through,
    matrix_tt_add,
    matrix_tt_matmul,
    matrix_tt_round,
    matrix_tt_transpose,
    matvec_tt,
    tt_entry,
    tt_last_mode_slice,
    tt_norm,
    tt_reverse,
    tt_round,
    tt_scale,
    tt_svd_compress,
)


@dataclass
class GeneratorSpec:
    """Declarative description of one structured test matrix."""

    kind: str
    n: int
    params: dict = field(default_factory=dict)

    _KINDS = (
        "toeplitz",
        "hankel",
        "hankel_submatrix",
        "shift",
        "shift_transpose",
        "tridiagonal",
        "hilbert_submatrix",
        "prescribed_svd",
        "random_tt",
    )

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("chain length must be positive")


# ---------------------------------------------------------------------------
# carry-channel block tables for triangular Toeplitz / Hankel mixing
#
# Each chain core of the generating vector is mixed with a (k, c_out, c_in)
# table of 2x2 blocks.  The carry channel c tracks whether the running
# difference j - i still owes a borrow; injecting c = 1 at the first core and
# demanding c = 0 after the last yields exactly the strictly-upper Toeplitz
# selection t_{ij} = s_{j-i}.

_I2 = np.eye(2)
_J = np.array([[0.0, 1.0], [0.0, 0.0]])  # picks (i,j) = (1,2): j - i bit pattern 1
_K = np.array([[0.0, 0.0], [1.0, 0.0]])  # picks (i,j) = (2,1): borrow case
_P = np.array([[0.0, 1.0], [1.0, 0.0]])  # 2x2 exchange


def _toeplitz_block_table() -> np.ndarray:
    m = np.zeros((2, 2, 2, 2, 2))  # (k, c_out, c_in, i, j)
    m[0, 0, 0] = _I2
    m[0, 0, 1] = _J
    m[0, 1, 1] = _K
    m[1, 0, 0] = _J
    m[1, 1, 0] = _K
    m[1, 1, 1] = _I2
    return m


def _hankel_block_table() -> np.ndarray:
    # right-multiplying every block by the 2x2 exchange flips the column bit,
    # turning the Toeplitz selection into the anti-triangular Hankel one
    return _toeplitz_block_table() @ _P


def _mixed_matrix_tt(s: VectorTT, table: np.ndarray) -> MatrixTT:
    if any(i != 2 for i in s.mode_sizes):
        raise ValueError("generating vector must have mode sizes 2")
    n = s.n_cores
    cores = []
    for m in range(n):
        c = s.cores[m]
        r, _, r2 = c.shape
        g = np.einsum("akb,kpqij->aqijbp", c, table, optimize=True)
        g = _rf(g, (r * 2, 2, 2, r2 * 2))
        if m == 0:
            g = g[r:, :, :, :].reshape(1, 2, 2, r2 * 2)  # inject carry c_in = 1
        if m == n - 1:
            g = g[:, :, :, :r2]  # demand carry c_out = 0
            g = g.reshape(g.shape[0], 2, 2, 1)
        cores.append(g)
    return MatrixTT(cores)


def toeplitz_tt(s: VectorTT) -> MatrixTT:
    """Strictly upper-triangular Toeplitz matrix t_{ij} = s_{j-i} (j > i).

    Exact; interior output ranks are exactly twice the ranks of ``s``.  The
    last entry of ``s`` is never referenced by the matrix.
    """
    return _mixed_matrix_tt(s, _toeplitz_block_table())


def hankel_tt(s: VectorTT) -> MatrixTT:
    """Upper anti-triangular Hankel matrix h_{ij} = s_{2^N+1-i-j} (i+j <= 2^N).

    Exact; interior output ranks are exactly twice the ranks of ``s``.
    """
    return _mixed_matrix_tt(s, _hankel_block_table())


def _restrict_first_half_columns(a: MatrixTT) -> MatrixTT:
    """Keep columns 1..2^{N-1} and fold the freed row mode into core N-1.

    The first half of the column range is exactly the slice where the slowest
    column bit is 0, so the last core loses its column mode and its row mode
    is merged (faster-first) into the previous core's row mode.
    """
    if a.n_cores < 2:
        raise ValueError("need at least two cores to restrict and fold")
    cores = [c.copy() for c in a.cores]
    last = cores[-1][:, :, 0, :]  # (r, i_N, 1)
    g = np.tensordot(cores[-2], last, axes=(3, 0))  # (r, i, j, i_N, 1)
    g = g.transpose(0, 1, 3, 2, 4)
    r, i, i2, j, _ = g.shape
    cores = cores[:-2] + [_rf(g, (r, i * i2, j, 1))]
    return MatrixTT(cores)


def hankel_submatrix_tt(s: VectorTT, keep: str = "first_half") -> MatrixTT:
    """The 2^N x 2^{N-1} left-column block of the Hankel matrix of ``s``."""
    if keep != "first_half":
        raise ValueError(f"unsupported column restriction {keep!r}")
    return _restrict_first_half_columns(hankel_tt(s))


def _e1_chain(n: int) -> VectorTT:
    core = np.zeros((1, 2, 1))
    core[0, 0, 0] = 1.0
    return VectorTT([core.copy() for _ in range(n)])


def shift_tt(n: int) -> MatrixTT:
    """2^n x 2^n shift matrix F with ones on the first superdiagonal; ranks <= 2."""
    return toeplitz_tt(_e1_chain(n))


def shift_transpose_tt(n: int) -> MatrixTT:
    return matrix_tt_transpose(shift_tt(n))


def exchange_matrix_tt(n: int) -> MatrixTT:
    """Rank-1 exchange (anti-identity) matrix: flips every index bit."""
    core = _P[np.newaxis, :, :, np.newaxis]
    return MatrixTT([core.copy() for _ in range(n)])


def _flip_both(a: MatrixTT) -> MatrixTT:
    """Reverse both the global row and column index of a MatrixTT."""
    return MatrixTT([c[:, ::-1, ::-1, :].copy() for c in a.cores])


def tridiagonal_tt(a: VectorTT, b: VectorTT, c: VectorTT,
                   delta: float | None = 1e-13) -> MatrixTT:
    """Tridiagonal matrix with subdiagonal a, diagonal b, superdiagonal c.

    Entry (m+1, m) = a_m, entry (m, m) = b_m, entry (m, m+1) = c_{m+1};
    assembled as F^T diag(a) + diag(b) + F diag(c) and rounded at ``delta``
    (pass None to keep the raw sum, whose ranks are bounded by
    2 R_a + R_b + 2 R_c).
    """
    if not (a.mode_sizes == b.mode_sizes == c.mode_sizes):
        raise ValueError("tridiagonal diagonals must share mode sizes")
    n = a.n_cores
    lower = matrix_tt_matmul(shift_transpose_tt(n), diag_embed(a))
    upper = matrix_tt_matmul(shift_tt(n), diag_embed(c))
    total = matrix_tt_add(matrix_tt_add(lower, diag_embed(b)), upper)
    if delta is None:
        return total
    return matrix_tt_round(total, delta)


def full_toeplitz_tt(x: VectorTT, delta: float | None = 1e-13) -> MatrixTT:
    """Full (two-sided) Toeplitz matrix a_{ij} = x_{2^N + i - j}.

    ``x`` must have N+1 cores (length 2^{N+1}); its very last entry is never
    referenced.  Assembled from two strictly-triangular pieces plus the
    diagonal and rounded at ``delta`` (None keeps the raw sum).
    """
    if any(i != 2 for i in x.mode_sizes):
        raise ValueError("generating vector must have mode sizes 2")
    if x.n_cores < 2:
        raise ValueError("need length >= 4 (at least two cores)")
    n = x.n_cores - 1
    first = tt_last_mode_slice(x, 0)   # entries x_1 .. x_{2^N}
    second = tt_last_mode_slice(x, 1)  # entries x_{2^N+1} .. x_{2^{N+1}}
    # superdiagonal generator: sup_d = x_{2^N - d}, reached by reversing the
    # first half and shifting one step forward
    sup = tt_round(matvec_tt(shift_tt(n), tt_reverse(first)), 1e-14)
    upper = toeplitz_tt(sup)
    lower = matrix_tt_transpose(toeplitz_tt(second))
    x_mid = tt_entry(x, [1] * n + [0])  # x_{2^N}
    ident = identity_scaled(n, x_mid)
    total = matrix_tt_add(matrix_tt_add(upper, lower), ident)
    if delta is None:
        return total
    return matrix_tt_round(total, delta)


def identity_scaled(n: int, alpha: float) -> MatrixTT:
    core = np.eye(2)[np.newaxis, :, :, np.newaxis]
    cores = [core.copy() for _ in range(n)]
    cores[0] = cores[0] * float(alpha)
    return MatrixTT(cores)


def hilbert_submatrix_tt(n: int, delta: float, max_n: int = 22) -> MatrixTT:
    """2^n x 2^{n-1} matrix with entries 1/(i+j-1), built via Hankel assembly.

    The reciprocal generating vector is formed densely (length 2^{n+1}) and
    TT-compressed, which caps the feasible ``n`` (default 22).  The result
    matches the exact matrix to an error controlled by ``delta`` relative to
    the matrix norm; compression and final rounding use delta/10 internally
    to leave headroom for the assembly steps.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if n > max_n:
        raise ValueError(
            f"n={n} exceeds the dense generating-vector budget (max_n={max_n})"
        )
    if delta <= 0:
        raise ValueError("delta must be positive")
    length = 2 ** (n + 1)
    g = np.empty(length)
    g[0] = 1.0  # placeholder, never referenced by the matrix
    g[1:] = 1.0 / np.arange(1.0, length)
    g_tt = tt_svd_compress(_rf(g, [2] * (n + 1)), delta * 0.1)

    first = tt_last_mode_slice(g_tt, 0)   # g_m for m = 1..2^n  (g_m = 1/(m-1))
    second = tt_last_mode_slice(g_tt, 1)  # g_{2^n + m} for m = 1..2^n
    # upper anti-triangle: s_d = g_{2^n+1-d} = 1/(2^n - d)
    s_up = tt_reverse(first)
    # lower anti-triangle (after flipping both indices): s'_d = g_{2^n+1+d}
    s_lo = tt_round(matvec_tt(shift_tt(n), second), 1e-14)
    upper = hankel_tt(s_up)
    lower = _flip_both(hankel_tt(s_lo))
    mid = float(g[2 ** n])  # value 1/2^n on the central anti-diagonal
    anti = exchange_matrix_tt(n)
    anti.cores[0] = anti.cores[0] * mid
    total = matrix_tt_add(matrix_tt_add(upper, lower), anti)
    return matrix_tt_round(_restrict_first_half_columns(total), delta * 0.1)


# ---------------------------------------------------------------------------
# random chains


def _as_modes(modes) -> list[int]:
    if np.isscalar(modes):
        return [2] * int(modes)
    return [int(m) for m in modes]


def _vector_rank_profile(modes: list[int], requested) -> list[int]:
    n = len(modes)
    if np.isscalar(requested):
        requested = [int(requested)] * (n - 1)
    requested = [int(r) for r in requested]
    if len(requested) != n - 1:
        raise ValueError("need one interior rank per bond")
    prof = []
    for bond in range(1, n):
        cap = min(math.prod(modes[:bond]), math.prod(modes[bond:]))
        prof.append(max(1, min(requested[bond - 1], cap)))
    return [1] + prof + [1]


def random_vector_tt(modes, ranks, seed) -> VectorTT:
    """Unit-norm VectorTT with standard-normal cores, then left-orthogonalized.

    ``modes`` is either the chain length (all mode sizes 2) or an explicit
    list of mode sizes; ``ranks`` is one interior rank per bond or a single
    value, clipped to what the mode sizes can support.
    """
    modes = _as_modes(modes)
    n = len(modes)
    rng = np.random.default_rng(seed)
    prof = _vector_rank_profile(modes, ranks)
    cores = [
        rng.standard_normal((prof[m], modes[m], prof[m + 1])) for m in range(n)
    ]
    x = left_orthogonalize_through(VectorTT(cores), n - 1)
    nrm = tt_norm(x)
    if nrm == 0.0:
        raise ValueError("degenerate random chain")
    return tt_scale(x, 1.0 / nrm)


def _block_rank_profile(modes: list[int], k: int, requested) -> list[int]:
    """Feasible bond ranks for K orthonormal columns with the block core last.

    Each bond must carry at least ceil(K / prod of later mode sizes) and can
    carry at most min(prod of earlier mode sizes, K * prod of later sizes).
    """
    n = len(modes)
    if np.isscalar(requested):
        requested = [int(requested)] * (n - 1)
    requested = [int(r) for r in requested]
    if len(requested) != n - 1:
        raise ValueError("need one interior rank per bond")
    prof = []
    for bond in range(1, n):
        later = math.prod(modes[bond:])
        earlier = math.prod(modes[:bond])
        floor = math.ceil(k / later)
        cap = min(earlier, k * later)
        r = max(requested[bond - 1], floor)
        prof.append(max(1, min(r, cap)))
    return [1] + prof + [1]


def random_block_tt(modes, k: int, ranks, seed) -> BlockTT:
    """BlockTT with K dense-orthonormal columns, block core at the last position.

    Cores are drawn standard-normal at the feasibility-clipped rank profile,
    the chain is left-orthogonalized, and the block core is orthonormalized
    column-wise by a QR factorization.
    """
    modes = _as_modes(modes)
    n = len(modes)
    if k < 1 or k > math.prod(modes):
        raise ValueError("block size k out of range")
    rng = np.random.default_rng(seed)
    prof = _block_rank_profile(modes, k, ranks)
    cores = [
        rng.standard_normal((prof[m], modes[m], prof[m + 1]))
        for m in range(n - 1)
    ]
    block = rng.standard_normal((prof[n - 1], k, modes[n - 1], 1))
    chain = BlockTT(cores + [block], n - 1)
    chain = left_orthogonalize_through(chain, n - 1)
    bc = chain.cores[-1]
    r, _, i, _ = bc.shape
    m = _rf(bc.transpose(0, 2, 3, 1), (r * i, k))
    q, _ = dense_qr(m)
    chain.cores[-1] = _rf(q, (r, i, 1, k)).transpose(0, 3, 1, 2)
    chain.orth[-1] = None
    return chain


# ---------------------------------------------------------------------------
# prescribed-spectrum random matrices


def prescribed_svd_matrix(n: int, beta: float, k0: int = 25, rank: int = 5,
                          seed=0):
    """Random 2^n x 2^n matrix with singular values beta**(k-1), k = 1..k0.

    Returns ``(a, u0, v0, spectrum)``: the matrix in TT form, the two random
    orthonormal factors as BlockTTs, and the spectrum array.  Core m < n-1 of
    ``a`` mixes the factor cores as a Kronecker product; the last core also
    contracts the spectrum over the block mode, so the reconstruction equals
    u0 @ diag(spectrum) @ v0.T exactly.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly between 0 and 1")
    if k0 < 1 or k0 > 2 ** n:
        raise ValueError("k0 out of range")
    ss = np.random.SeedSequence(seed).spawn(2)
    u0 = random_block_tt(n, k0, rank, ss[0])
    v0 = random_block_tt(n, k0, rank, ss[1])
    spectrum = beta ** np.arange(k0, dtype=float)
    cores = []
    for m in range(n - 1):
        cu, cv = u0.cores[m], v0.cores[m]
        ru, i, ru2 = cu.shape
        rv, j, rv2 = cv.shape
        g = np.einsum("aib,cjd->acijbd", cu, cv, optimize=True)
        cores.append(_rf(g, (ru * rv, i, j, ru2 * rv2)))
    bu, bv = u0.cores[-1], v0.cores[-1]
    g = np.einsum("akib,ckjd,k->acijbd", bu, bv, spectrum, optimize=True)
    cores.append(_rf(g, (bu.shape[0] * bv.shape[0], bu.shape[2], bv.shape[2], 1)))
    return MatrixTT(cores), u0, v0, spectrum


# ---------------------------------------------------------------------------
# declarative dispatch (used by the experiment driver)


def build_generator(spec: GeneratorSpec):
    """Materialize a GeneratorSpec.

    Returns ``(matrix, info)`` where ``info`` carries kind-specific extras
    (for prescribed_svd: the factors and true spectrum).
    """
    kind, n, p = spec.kind, spec.n, dict(spec.params)
    if kind in ("toeplitz", "hankel", "hankel_submatrix"):
        s = p.get("s")
        if s is None:
            s = random_vector_tt(n, p.get("rank", 5), p.get("seed", 0))
        fn = {"toeplitz": toeplitz_tt, "hankel": hankel_tt,
              "hankel_submatrix": hankel_submatrix_tt}[kind]
        return fn(s), {"s": s}
    if kind == "shift":
        return shift_tt(n), {}
    if kind == "shift_transpose":
        return shift_transpose_tt(n), {}
    if kind == "tridiagonal":
        seed = p.get("seed", 0)
        rank = p.get("rank", 5)
        if "a" in p:
            a, b, c = p["a"], p["b"], p["c"]
        else:
            ss = np.random.SeedSequence(seed).spawn(3)
            a = random_vector_tt(n, rank, ss[0])
            b = random_vector_tt(n, rank, ss[1])
            c = random_vector_tt(n, rank, ss[2])
        return tridiagonal_tt(a, b, c), {"a": a, "b": b, "c": c}
    if kind == "hilbert_submatrix":
        mat = hilbert_submatrix_tt(n, p.get("delta", 1e-8),
                                   max_n=p.get("max_n", 22))
        return mat, {}
    if kind == "prescribed_svd":
        a, u0, v0, spectrum = prescribed_svd_matrix(
            n, p["beta"], k0=p.get("k0", 25), rank=p.get("rank", 5),
            seed=p.get("seed", 0))
        return a, {"u0": u0, "v0": v0, "spectrum": spectrum}
    raise ValueError(f"generator kind {kind!r} has no matrix form")
