"""Sweep solvers for the K dominant singular triplets of a TT matrix.

Two families are implemented on shared machinery:

* ``als_svd`` / ``mals_svd`` optimize left and right singular chains U, V
  simultaneously.  Each micro-iteration solves a local SVD of the projected
  matrix A_bar (single core, or a merged core pair for the MALS variant),
  writes the solution into the block core, splits it with a truncated SVD
  that adapts the bond rank, and updates the environments incrementally.
* ``als_eig_baseline`` / ``mals_eig_baseline`` run the same sweeps on the
  Gram matrix A^T A with a single chain V, then recover U = A V Sigma^{-1}.

The local problems are solved densely below a size crossover and otherwise
by a block Krylov iteration on the symmetric embedding [[0, A], [A^T, 0]]
(or on the projected Gram matrix directly), with full reorthogonalization,
deterministic seeded starts warm-started from the current block core, and
Rayleigh-Ritz extraction of the K largest (positive) pairs.

Rank floors: truncated splits keep at least enough rank that the next local
problem can still hold K orthonormal columns (mirroring the minimal-rank
initialization rule); without this, aggressive first-sweep truncation could
make an end-of-chain local problem infeasible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .environments import (
    Environment,
    _matvec_als,
    _matvec_mals,
    _rmatvec_als,
    _rmatvec_mals,
    dense_local_matrix_als,
    dense_local_matrix_mals,
    env_init,
    env_update_left,
    env_update_right,
    environment_deviation,
)
from .generators import random_block_tt
from .tt import (
    BlockTT,
    MatrixTT,
    _rf,
    block_tt_add,
    block_tt_matvec,
    block_tt_round,
    block_tt_scale_columns,
    matrix_tt_matmul,
    matrix_tt_round,
    matrix_tt_transpose,
    merge_cores,
    split_block_core_als,
    split_block_core_mals,
    tt_norm,
)


class LocalSolverError(RuntimeError):
    """The iterative local solver failed; the sweep driver may restart."""


@dataclass
class SolverConfig:
    """Knobs for the sweep drivers.

    ``delta0`` defaults to epsilon / sqrt(N-1) at run time; the first half
    sweep of every attempt truncates at ``first_halfsweep_delta_factor``
    times the working delta, and each restart shrinks the working delta by
    ``restart_delta_shrink`` and reseeds the initial chains.
    ``allow_k1_als`` exists only so tests can push k=1 through the
    single-core path to observe the rank freeze; normal use requires k >= 2
    there.
    """

    k: int
    epsilon: float = 1e-8
    delta0: float | None = None
    first_halfsweep_delta_factor: float = 100.0
    max_full_sweeps: int = 20
    max_restarts: int = 2
    restart_delta_shrink: float = 0.1
    seed: int = 0
    local_tol: float = 1e-10
    local_max_iter: int = 400
    dense_crossover: int = 600
    max_rank: int | None = None
    residual_delta: float | None = None
    track_env_consistency: bool = False
    on_micro_iteration: Callable | None = None
    allow_k1_als: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("block size k must be at least 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.delta0 is not None and self.delta0 < 0:
            raise ValueError("delta0 must be nonnegative")
        if self.first_halfsweep_delta_factor <= 0:
            raise ValueError("first_halfsweep_delta_factor must be positive")
        if self.max_full_sweeps < 1:
            raise ValueError("need at least one sweep")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be nonnegative")
        if not 0 < self.restart_delta_shrink <= 1:
            raise ValueError("restart_delta_shrink must lie in (0, 1]")
        if self.dense_crossover < 0:
            raise ValueError("dense_crossover must be nonnegative")


@dataclass
class SweepReport:
    """Execution trace of one solver run (all attempts included).

    ``micro`` holds one record per micro-iteration: position, direction,
    bond ranks after the split, the current Sigma estimate, and the local
    solver's iteration count (0 = dense direct solve).  ``residual_history``
    has one entry per completed full sweep.  ``sweeps_used`` counts sweeps
    of the attempt that produced the returned iterate; ``total_sweeps``
    counts across restarts.
    """

    solver: str = ""
    k: int = 0
    micro: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    sweeps_used: int = 0
    total_sweeps: int = 0
    restarts_used: int = 0
    wall_time_s: float = 0.0
    termination: str = ""
    delta_final: float = 0.0
    env_consistency_max: float | None = None

    def to_json(self) -> dict:
        return {
            "solver": self.solver,
            "k": self.k,
            "micro_iterations": self.micro,
            "residual_history": self.residual_history,
            "sweeps_used": self.sweeps_used,
            "total_sweeps": self.total_sweeps,
            "restarts_used": self.restarts_used,
            "wall_time_s": self.wall_time_s,
            "termination": self.termination,
            "delta_final": self.delta_final,
            "env_consistency_max": self.env_consistency_max,
        }


def init_block_tt(modes, k: int, seed) -> BlockTT:
    """Random start chain at the minimal feasible ranks.

    The bond ranks follow the ceiling rule R_n = ceil(K / (I_{n+1} ... I_N))
    exactly (requesting rank 1 everywhere and letting the feasibility floor
    take over); cores left of the block are left-orthogonal and the block
    core has orthonormal columns.
    """
    return random_block_tt(modes, k, 1, seed)


# ---------------------------------------------------------------------------
# local solvers


def _sign_fix_pair(u_loc: np.ndarray, v_loc: np.ndarray) -> None:
    for i in range(u_loc.shape[1]):
        j = int(np.argmax(np.abs(u_loc[:, i])))
        if u_loc[j, i] < 0:
            u_loc[:, i] *= -1.0
            v_loc[:, i] *= -1.0


def _sign_fix_single(v_loc: np.ndarray) -> None:
    for i in range(v_loc.shape[1]):
        j = int(np.argmax(np.abs(v_loc[:, i])))
        if v_loc[j, i] < 0:
            v_loc[:, i] *= -1.0


def dense_block_svd(abar: np.ndarray, k: int):
    """Top-K singular triplets of a dense matrix, sign-fixed."""
    u, s, vt = np.linalg.svd(np.asarray(abar, dtype=float), full_matrices=False)
    u = u[:, :k].copy()
    v = vt[:k].T.copy()
    s = s[:k].copy()
    _sign_fix_pair(u, v)
    return u, s, v


def dense_block_eig(bbar: np.ndarray, k: int):
    """K algebraically largest eigenpairs of a (symmetrized) dense matrix."""
    h = 0.5 * (bbar + bbar.T)
    lam, vecs = np.linalg.eigh(h)
    order = np.argsort(-lam, kind="stable")[:k]
    lam = lam[order].copy()
    v = vecs[:, order].copy()
    _sign_fix_single(v)
    return lam, v


def _orthonormalize_block(w: np.ndarray, basis: np.ndarray,
                          rng: np.random.Generator) -> np.ndarray:
    """Orthonormalize w against the basis (twice) and internally.

    Columns swallowed by the basis (their norm collapses relative to what
    they came in with, the usual sign of Krylov saturation) and columns
    that collapse during the QR step are replaced with fresh random
    directions orthogonal to everything kept so far, so the returned block
    always spans new orthonormal directions.
    """
    dim = w.shape[0]
    w = np.array(w, dtype=float)
    orig = np.linalg.norm(w, axis=0)
    for _ in range(2):
        if basis.shape[1]:
            w -= basis @ (basis.T @ w)
    norms = np.linalg.norm(w, axis=0)
    for idx in np.nonzero(norms <= 1e-10 * np.maximum(orig, 1e-300))[0]:
        vec = rng.standard_normal(dim)
        for _ in range(2):
            if basis.shape[1]:
                vec -= basis @ (basis.T @ vec)
        w[:, idx] = vec
    q, r = np.linalg.qr(w)
    d = np.abs(np.diagonal(r))
    ref = float(d.max()) if d.size else 0.0
    bad = d <= 1e-10 * max(ref, 1e-300)
    if np.any(bad):
        for idx in np.nonzero(bad)[0]:
            vec = rng.standard_normal(dim)
            if basis.shape[1]:
                vec -= basis @ (basis.T @ vec)
            vec -= q @ (q.T @ vec)
            nrm = float(np.linalg.norm(vec))
            if nrm > 0:
                q[:, idx] = vec / nrm
        q, _ = np.linalg.qr(q)
        if basis.shape[1]:
            q -= basis @ (basis.T @ q)
            q, _ = np.linalg.qr(q)
    return q


def _krylov_symmetric(apply_op, dim: int, k: int, tol: float, max_iter: int,
                      seed, start, positive_only: bool):
    """Block Krylov + Rayleigh-Ritz for a symmetric operator.

    Extraction starts once the basis holds at least min(2k+4, dim) vectors;
    the K kept pairs are the largest positive Ritz values (falling back to
    the largest remaining ones if fewer than K are positive), with ties
    broken by Ritz index order.  Returns (theta, vectors, iterations).
    """
    rng = np.random.default_rng(seed)
    block = min(k, dim)
    if start is not None and start.shape == (dim, block):
        w = np.asarray(start, dtype=float)
    else:
        w = rng.standard_normal((dim, block))
    basis = np.empty((dim, 0))
    bbasis = np.empty((dim, 0))
    ritz_target = min(2 * k + 4, dim)
    for it in range(1, max_iter + 1):
        width = min(w.shape[1], dim - basis.shape[1])
        if width > 0:
            qblk = _orthonormalize_block(w[:, :width], basis, rng)
            bq = apply_op(qblk)
            basis = np.hstack([basis, qblk])
            bbasis = np.hstack([bbasis, bq])
        full = basis.shape[1] >= dim
        if full or basis.shape[1] >= ritz_target:
            h = basis.T @ bbasis
            h = 0.5 * (h + h.T)
            theta, y = np.linalg.eigh(h)
            order = np.argsort(-theta, kind="stable")
            if positive_only:
                sel = [i for i in order if theta[i] > 0][:k]
                if len(sel) < k:
                    chosen = set(sel)
                    sel += [i for i in order if i not in chosen][: k - len(sel)]
            else:
                sel = list(order[:k])
            theta_k = theta[sel]
            z = basis @ y[:, sel]
            bz = bbasis @ y[:, sel]
            resid = np.linalg.norm(bz - z * theta_k[np.newaxis, :], axis=0)
            scale = max(float(np.max(np.abs(theta_k))), 1e-300)
            if full or bool(np.all(resid <= tol * scale)):
                return theta_k, z, it
        w = bq
    raise LocalSolverError(
        f"block Krylov solver did not converge in {max_iter} iterations"
    )


def krylov_block_svd(matvec, rmatvec, p: int, q: int, k: int, tol: float = 1e-10,
                     max_iter: int = 400, seed=0, start=None):
    """Matrix-free top-K singular triplets via the symmetric embedding.

    The operator [[0, A], [A^T, 0]] has eigenvalues {+-sigma_i} plus zeros,
    so the K largest positive Ritz values approximate the dominant singular
    values and each Ritz vector carries (u_i, v_i)/sqrt(2) in its halves.
    """
    if k > min(p, q):
        raise ValueError(f"cannot take {k} triplets from a {p} x {q} problem")
    dim = p + q

    def apply_b(blockm):
        out = np.empty_like(blockm)
        for c in range(blockm.shape[1]):
            out[:p, c] = matvec(blockm[p:, c])
            out[p:, c] = rmatvec(blockm[:p, c])
        return out

    theta, z, iters = _krylov_symmetric(apply_b, dim, k, tol, max_iter, seed,
                                        start, positive_only=True)
    rng = np.random.default_rng(seed)
    u = z[:p].copy() * math.sqrt(2.0)
    v = z[p:].copy() * math.sqrt(2.0)
    sigma = np.maximum(theta, 0.0)
    scale = float(sigma[0]) if sigma.size and sigma[0] > 0 else 1.0
    # Halves of positive-sigma Ritz pairs come out orthonormal on their own
    # (u_i . u_j = v_i . v_j must cancel in the embedding); zero-sigma columns
    # mix the two null spaces arbitrarily, so those are re-orthogonalized
    # against every earlier column (sigma is nonincreasing, so all columns
    # after the first zero one are zero too).
    for arr in (u, v):
        for c in range(k):
            if sigma[c] <= 1e-10 * scale:
                for _ in range(2):
                    arr[:, c] -= arr[:, :c] @ (arr[:, :c].T @ arr[:, c])
            nrm = float(np.linalg.norm(arr[:, c]))
            if nrm < 1e-8:
                vec = rng.standard_normal(arr.shape[0])
                for _ in range(2):
                    vec -= arr[:, :c] @ (arr[:, :c].T @ vec)
                arr[:, c] = vec / float(np.linalg.norm(vec))
            else:
                arr[:, c] /= nrm
    _sign_fix_pair(u, v)
    return u, sigma, v, iters


def krylov_block_eig(matvec, dim: int, k: int, tol: float = 1e-10,
                     max_iter: int = 400, seed=0, start=None):
    """Matrix-free K algebraically largest eigenpairs of a symmetric map."""
    if k > dim:
        raise ValueError(f"cannot take {k} eigenpairs from dimension {dim}")

    def apply_op(blockm):
        out = np.empty_like(blockm)
        for c in range(blockm.shape[1]):
            out[:, c] = matvec(blockm[:, c])
        return out

    theta, z, iters = _krylov_symmetric(apply_op, dim, k, tol, max_iter, seed,
                                        start, positive_only=False)
    z = z.copy()
    _sign_fix_single(z)
    return theta, z, iters


def local_block_svd(matvec, rmatvec, p: int, q: int, k: int, tol: float = 1e-10,
                    max_iter: int = 400, seed=0, start=None,
                    dense_builder=None, crossover: int = 600):
    """K dominant singular triplets of the projected local matrix.

    Below the size crossover (and when a dense materializer is supplied) the
    matrix is contracted explicitly and decomposed directly; otherwise the
    matrix-free block Krylov solver runs on the symmetric embedding.
    Returns (U_loc, Sigma, V_loc, iterations).
    """
    if k > min(p, q):
        raise ValueError(f"cannot take {k} triplets from a {p} x {q} problem")
    if dense_builder is not None and p + q <= crossover:
        u, s, v = dense_block_svd(dense_builder(), k)
        return u, s, v, 0
    return krylov_block_svd(matvec, rmatvec, p, q, k, tol=tol,
                            max_iter=max_iter, seed=seed, start=start)


def local_block_eig(matvec, dim: int, k: int, tol: float = 1e-10,
                    max_iter: int = 400, seed=0, start=None,
                    dense_builder=None, crossover: int = 600):
    """K largest eigenpairs of the projected Gram matrix; see local_block_svd."""
    if k > dim:
        raise ValueError(f"cannot take {k} eigenpairs from dimension {dim}")
    if dense_builder is not None and dim <= crossover:
        lam, v = dense_block_eig(dense_builder(), k)
        return lam, v, 0
    return krylov_block_eig(matvec, dim, k, tol=tol, max_iter=max_iter,
                            seed=seed, start=start)


# ---------------------------------------------------------------------------
# residuals


def residual(a: MatrixTT, u: BlockTT, v: BlockTT, sigma, delta: float) -> float:
    """Relative residual ||A^T U - V Sigma||_F / ||Sigma||_F in TT arithmetic.

    A^T U is evaluated exactly and rounded once at ``delta``; the difference
    norm is taken through an orthogonalization pass, which keeps tiny
    residuals resolvable (a Gram-trace norm bottoms out near sqrt(machine
    epsilon) relative to ||Sigma||).
    """
    sig = np.asarray(sigma, dtype=float)
    signorm = float(np.linalg.norm(sig))
    if signorm == 0.0:
        raise ValueError("residual is undefined for an all-zero spectrum")
    w = block_tt_round(block_tt_matvec(matrix_tt_transpose(a), u), delta)
    d = block_tt_add(w, block_tt_scale_columns(v, -sig))
    return tt_norm(d) / signorm


def _gram_residual(bmat: MatrixTT, v: BlockTT, sigma: np.ndarray,
                   delta: float) -> float:
    """Stopping metric ||B V pinv(Sigma) - V Sigma||_F / ||Sigma||_F for B = A^T A."""
    signorm = float(np.linalg.norm(sigma))
    if signorm == 0.0:
        raise ValueError("residual is undefined for an all-zero spectrum")
    smax = float(sigma.max())
    pinv = np.where(sigma > 1e-14 * smax, 1.0 / np.where(sigma > 0, sigma, 1.0), 0.0)
    w = block_tt_round(block_tt_matvec(bmat, v), delta)
    d = block_tt_add(block_tt_scale_columns(w, pinv),
                     block_tt_scale_columns(v, -sigma))
    return tt_norm(d) / signorm


# ---------------------------------------------------------------------------
# sweep mechanics shared by the SVD drivers


def _block_as_local(chain: BlockTT, p: int) -> np.ndarray:
    """Block core at p in solver layout, flattened to (local size, K)."""
    bc = chain.cores[p]
    r, k, i, r2 = bc.shape
    return _rf(bc.transpose(0, 2, 3, 1), (r * i * r2, k))


def _min_keep_r2l(chain: BlockTT, p: int, k: int, pair: bool) -> int:
    """Rank floor so the next right-to-left local problem can hold K columns."""
    if pair:
        if p - 2 < 0:
            return 1
        prev = chain.cores[p - 2]
        cap = prev.shape[0] * prev.shape[1] * chain.cores[p - 1].shape[1]
    else:
        prev = chain.cores[p - 1]
        cap = prev.shape[0] * prev.shape[1]
    return max(1, math.ceil(k / max(cap, 1)))


def _min_keep_l2r(chain: BlockTT, p: int, k: int, pair: bool) -> int:
    """Rank floor so the next left-to-right local problem can hold K columns."""
    if pair:
        if p + 2 >= chain.n_cores:
            return 1
        nxt = chain.cores[p + 2]
        cap = chain.cores[p + 1].shape[1] * nxt.shape[1] * nxt.shape[2]
    else:
        nxt = chain.cores[p + 1]
        cap = nxt.shape[1] * nxt.shape[2]
    return max(1, math.ceil(k / max(cap, 1)))


def _apply_split_r2l_als(chain: BlockTT, p: int, local4: np.ndarray,
                         delta: float, max_rank, min_keep: int) -> int:
    carry, core, rank = split_block_core_als(local4, "right_to_left", delta,
                                             max_rank=max_rank,
                                             min_keep=min_keep)
    chain.cores[p] = core
    chain.orth[p] = "R"
    nb = np.tensordot(chain.cores[p - 1], carry, axes=(2, 0))
    chain.cores[p - 1] = nb.transpose(0, 2, 1, 3)
    chain.orth[p - 1] = None
    chain.block_position = p - 1
    return rank


def _apply_split_l2r_als(chain: BlockTT, p: int, local4: np.ndarray,
                         delta: float, max_rank, min_keep: int) -> int:
    core, carry, rank = split_block_core_als(local4, "left_to_right", delta,
                                             max_rank=max_rank,
                                             min_keep=min_keep)
    chain.cores[p] = core
    chain.orth[p] = "L"
    chain.cores[p + 1] = np.tensordot(carry, chain.cores[p + 1], axes=(1, 0))
    chain.orth[p + 1] = None
    chain.block_position = p + 1
    return rank


def _apply_split_r2l_mals(chain: BlockTT, q: int, local5: np.ndarray,
                          delta: float, max_rank, min_keep: int) -> int:
    block, core, rank = split_block_core_mals(local5, "right_to_left", delta,
                                              max_rank=max_rank,
                                              min_keep=min_keep)
    chain.cores[q] = block
    chain.cores[q + 1] = core
    chain.orth[q + 1] = "R"
    chain.orth[q] = None
    chain.block_position = q
    return rank


def _apply_split_l2r_mals(chain: BlockTT, q: int, local5: np.ndarray,
                          delta: float, max_rank, min_keep: int) -> int:
    core, block, rank = split_block_core_mals(local5, "left_to_right", delta,
                                              max_rank=max_rank,
                                              min_keep=min_keep)
    chain.cores[q] = core
    chain.cores[q + 1] = block
    chain.orth[q] = "L"
    chain.orth[q + 1] = None
    chain.block_position = q + 1
    return rank


def _svd_half_sweep(a: MatrixTT, u: BlockTT, v: BlockTT, env: Environment,
                    cfg: SolverConfig, delta: float,
                    rng: np.random.Generator, report: SweepReport,
                    pair: bool, direction: str):
    n = a.n_cores
    sigma = None
    r2l = direction == "right_to_left"
    positions = range(n - 1, 0, -1) if r2l else range(0, n - 1)
    for p in positions:
        if pair:
            q = p - 1 if r2l else p
            left, right = env.lefts[q], env.rights[q + 1]
            a1, a2 = a.cores[q], a.cores[q + 1]
            i1, i2 = a1.shape[1], a2.shape[1]
            j1, j2 = a1.shape[2], a2.shape[2]
            p_sz = left.shape[0] * i1 * i2 * right.shape[0]
            q_sz = left.shape[2] * j1 * j2 * right.shape[2]

            def mv(y, left=left, right=right, a1=a1, a2=a2, j1=j1, j2=j2):
                y5 = _rf(y, (left.shape[2], j1, j2, right.shape[2]))
                return _matvec_mals(left, a1, a2, right, y5).ravel(order="F")

            def rmv(x, left=left, right=right, a1=a1, a2=a2, i1=i1, i2=i2):
                x5 = _rf(x, (left.shape[0], i1, i2, right.shape[0]))
                return _rmatvec_mals(left, a1, a2, right, x5).ravel(order="F")

            def builder(env=env, a1=a1, a2=a2, q=q):
                return dense_local_matrix_mals(env, a1, a2, q)

            start = np.vstack([
                _rf(merge_cores(u, q + 1), (p_sz, cfg.k)),
                _rf(merge_cores(v, q + 1), (q_sz, cfg.k)),
            ]) / math.sqrt(2.0)
        else:
            left, right = env.lefts[p], env.rights[p]
            acore = a.cores[p]
            i_sz, j_sz = acore.shape[1], acore.shape[2]
            p_sz = left.shape[0] * i_sz * right.shape[0]
            q_sz = left.shape[2] * j_sz * right.shape[2]

            def mv(y, left=left, right=right, acore=acore, j_sz=j_sz):
                y3 = _rf(y, (left.shape[2], j_sz, right.shape[2]))
                return _matvec_als(left, acore, right, y3).ravel(order="F")

            def rmv(x, left=left, right=right, acore=acore, i_sz=i_sz):
                x3 = _rf(x, (left.shape[0], i_sz, right.shape[0]))
                return _rmatvec_als(left, acore, right, x3).ravel(order="F")

            def builder(env=env, acore=acore, p=p):
                return dense_local_matrix_als(env, acore, p)

            start = np.vstack([_block_as_local(u, p),
                               _block_as_local(v, p)]) / math.sqrt(2.0)

        seed = int(rng.integers(0, 2**63 - 1))
        u_loc, sig, v_loc, iters = local_block_svd(
            mv, rmv, p_sz, q_sz, cfg.k, tol=cfg.local_tol,
            max_iter=cfg.local_max_iter, seed=seed, start=start,
            dense_builder=builder, crossover=cfg.dense_crossover)
        sigma = np.asarray(sig, dtype=float)

        if pair:
            ul = _rf(u_loc, (left.shape[0], i1, i2, right.shape[0], cfg.k))
            vl = _rf(v_loc, (left.shape[2], j1, j2, right.shape[2], cfg.k))
            if r2l:
                _apply_split_r2l_mals(u, q, ul, delta, cfg.max_rank,
                                      _min_keep_r2l(u, q + 1, cfg.k, True))
                _apply_split_r2l_mals(v, q, vl, delta, cfg.max_rank,
                                      _min_keep_r2l(v, q + 1, cfg.k, True))
                env_update_right(env, u, a, v, q + 1)
            else:
                _apply_split_l2r_mals(u, q, ul, delta, cfg.max_rank,
                                      _min_keep_l2r(u, q, cfg.k, True))
                _apply_split_l2r_mals(v, q, vl, delta, cfg.max_rank,
                                      _min_keep_l2r(v, q, cfg.k, True))
                env_update_left(env, u, a, v, q)
        else:
            ul = _rf(u_loc, (left.shape[0], i_sz, right.shape[0], cfg.k))
            vl = _rf(v_loc, (left.shape[2], j_sz, right.shape[2], cfg.k))
            if cfg.on_micro_iteration is not None:
                u_cb, v_cb = u.copy(), v.copy()
                u_cb.cores[p] = ul.transpose(0, 3, 1, 2)
                v_cb.cores[p] = vl.transpose(0, 3, 1, 2)
                cfg.on_micro_iteration(
                    {"position": p, "direction": direction,
                     "sigma": [float(s) for s in sigma]}, u_cb, v_cb)
            if r2l:
                _apply_split_r2l_als(u, p, ul, delta, cfg.max_rank,
                                     _min_keep_r2l(u, p, cfg.k, False))
                _apply_split_r2l_als(v, p, vl, delta, cfg.max_rank,
                                     _min_keep_r2l(v, p, cfg.k, False))
                env_update_right(env, u, a, v, p)
            else:
                _apply_split_l2r_als(u, p, ul, delta, cfg.max_rank,
                                     _min_keep_l2r(u, p, cfg.k, False))
                _apply_split_l2r_als(v, p, vl, delta, cfg.max_rank,
                                     _min_keep_l2r(v, p, cfg.k, False))
                env_update_left(env, u, a, v, p)

        if pair and cfg.on_micro_iteration is not None:
            cfg.on_micro_iteration(
                {"position": p, "direction": direction,
                 "sigma": [float(s) for s in sigma]}, u.copy(), v.copy())

        report.micro.append({
            "position": int(p),
            "direction": direction,
            "ranks_u": [int(r) for r in u.ranks],
            "ranks_v": [int(r) for r in v.ranks],
            "sigma": [float(s) for s in sigma],
            "local_iterations": int(iters),
        })
    return sigma


def _track_env(report: SweepReport, cfg: SolverConfig, env: Environment,
               u: BlockTT, a: MatrixTT, v: BlockTT) -> None:
    if not cfg.track_env_consistency:
        return
    dev = environment_deviation(env, u, a, v, u.block_position)
    report.env_consistency_max = max(report.env_consistency_max or 0.0, dev)


def _svd_driver(a: MatrixTT, cfg: SolverConfig, pair: bool, name: str):
    n = a.n_cores
    if n < 2:
        raise ValueError("sweep solvers need at least two cores")
    if cfg.k > min(a.n_rows, a.n_cols):
        raise ValueError("block size k exceeds the matrix dimensions")
    delta0 = cfg.delta0 if cfg.delta0 is not None else cfg.epsilon / math.sqrt(n - 1)
    rdelta = cfg.residual_delta if cfg.residual_delta is not None else cfg.epsilon / 10
    report = SweepReport(solver=name, k=cfg.k)
    if cfg.track_env_consistency:
        report.env_consistency_max = 0.0
    t0 = time.perf_counter()
    best = None
    termination = "sweep-limit"
    u = v = None
    sigma = np.zeros(cfg.k)

    for attempt in range(cfg.max_restarts + 1):
        delta = delta0 * (cfg.restart_delta_shrink ** attempt)
        report.delta_final = delta
        ss = np.random.SeedSequence([int(cfg.seed), attempt]).spawn(3)
        u = init_block_tt(a.row_sizes, cfg.k, ss[0])
        v = init_block_tt(a.col_sizes, cfg.k, ss[1])
        rng = np.random.default_rng(ss[2])
        env = env_init(u, a, v)
        converged = False
        sweeps_this = 0
        for sweep in range(cfg.max_full_sweeps):
            d_first = delta * (cfg.first_halfsweep_delta_factor if sweep == 0 else 1.0)
            try:
                _svd_half_sweep(a, u, v, env, cfg, d_first, rng, report,
                                pair, "right_to_left")
                _track_env(report, cfg, env, u, a, v)
                sigma = _svd_half_sweep(a, u, v, env, cfg, delta, rng, report,
                                        pair, "left_to_right")
                _track_env(report, cfg, env, u, a, v)
            except LocalSolverError:
                break
            sweeps_this += 1
            report.total_sweeps += 1
            r = residual(a, u, v, sigma, rdelta)
            report.residual_history.append(
                {"attempt": int(attempt), "sweep": int(sweep),
                 "residual": float(r)})
            if best is None or r < best[0]:
                best = (r, sigma.copy(), u.copy(), v.copy(), sweeps_this)
            if r < cfg.epsilon:
                converged = True
                break
        report.sweeps_used = sweeps_this
        if converged:
            termination = "converged"
            break
        if attempt < cfg.max_restarts:
            report.restarts_used += 1
            continue
        termination = "restarted" if report.restarts_used else "sweep-limit"

    if termination != "converged" and best is not None:
        _, sigma, u, v, report.sweeps_used = best
    report.termination = termination
    report.wall_time_s = time.perf_counter() - t0
    return sigma, u, v, report


def als_svd(a: MatrixTT, cfg: SolverConfig):
    """Single-core sweeps over (U, V); returns (Sigma, U, V, report).

    Requires k >= 2: with a single column the truncated splits can never
    grow a bond past its current value, so ranks would stay frozen.
    """
    if cfg.k < 2 and not cfg.allow_k1_als:
        raise ValueError(
            "single-core sweeps cannot adapt ranks at k=1; use k >= 2 "
            "or the merged-core solver"
        )
    return _svd_driver(a, cfg, pair=False, name="als_svd")


def mals_svd(a: MatrixTT, cfg: SolverConfig):
    """Merged-core sweeps over (U, V); rank-adaptive even at k=1."""
    return _svd_driver(a, cfg, pair=True, name="mals_svd")


# ---------------------------------------------------------------------------
# Gram-matrix baseline drivers


def _eig_half_sweep(bmat: MatrixTT, v: BlockTT, env: Environment,
                    cfg: SolverConfig, delta: float,
                    rng: np.random.Generator, report: SweepReport,
                    pair: bool, direction: str):
    n = bmat.n_cores
    lam = None
    r2l = direction == "right_to_left"
    positions = range(n - 1, 0, -1) if r2l else range(0, n - 1)
    for p in positions:
        if pair:
            q = p - 1 if r2l else p
            left, right = env.lefts[q], env.rights[q + 1]
            b1, b2 = bmat.cores[q], bmat.cores[q + 1]
            j1, j2 = b1.shape[2], b2.shape[2]
            dim = left.shape[2] * j1 * j2 * right.shape[2]

            def mv(y, left=left, right=right, b1=b1, b2=b2, j1=j1, j2=j2):
                y5 = _rf(y, (left.shape[2], j1, j2, right.shape[2]))
                return _matvec_mals(left, b1, b2, right, y5).ravel(order="F")

            def builder(env=env, b1=b1, b2=b2, q=q):
                return dense_local_matrix_mals(env, b1, b2, q)

            start = _rf(merge_cores(v, q + 1), (dim, cfg.k))
        else:
            left, right = env.lefts[p], env.rights[p]
            bcore = bmat.cores[p]
            j_sz = bcore.shape[2]
            dim = left.shape[2] * j_sz * right.shape[2]

            def mv(y, left=left, right=right, bcore=bcore, j_sz=j_sz):
                y3 = _rf(y, (left.shape[2], j_sz, right.shape[2]))
                return _matvec_als(left, bcore, right, y3).ravel(order="F")

            def builder(env=env, bcore=bcore, p=p):
                return dense_local_matrix_als(env, bcore, p)

            start = _block_as_local(v, p)

        seed = int(rng.integers(0, 2**63 - 1))
        lam, v_loc, iters = local_block_eig(
            mv, dim, cfg.k, tol=cfg.local_tol, max_iter=cfg.local_max_iter,
            seed=seed, start=start, dense_builder=builder,
            crossover=cfg.dense_crossover)
        lam = np.asarray(lam, dtype=float)
        sigma_now = np.sqrt(np.maximum(lam, 0.0))

        if pair:
            vl = _rf(v_loc, (left.shape[2], j1, j2, right.shape[2], cfg.k))
            if r2l:
                _apply_split_r2l_mals(v, q, vl, delta, cfg.max_rank,
                                      _min_keep_r2l(v, q + 1, cfg.k, True))
                env_update_right(env, v, bmat, v, q + 1)
            else:
                _apply_split_l2r_mals(v, q, vl, delta, cfg.max_rank,
                                      _min_keep_l2r(v, q, cfg.k, True))
                env_update_left(env, v, bmat, v, q)
        else:
            vl = _rf(v_loc, (left.shape[2], j_sz, right.shape[2], cfg.k))
            if r2l:
                _apply_split_r2l_als(v, p, vl, delta, cfg.max_rank,
                                     _min_keep_r2l(v, p, cfg.k, False))
                env_update_right(env, v, bmat, v, p)
            else:
                _apply_split_l2r_als(v, p, vl, delta, cfg.max_rank,
                                     _min_keep_l2r(v, p, cfg.k, False))
                env_update_left(env, v, bmat, v, p)

        report.micro.append({
            "position": int(p),
            "direction": direction,
            "ranks_u": None,
            "ranks_v": [int(r) for r in v.ranks],
            "sigma": [float(s) for s in sigma_now],
            "local_iterations": int(iters),
        })
    return lam


def _eig_driver(a: MatrixTT, cfg: SolverConfig, pair: bool, name: str):
    n = a.n_cores
    if n < 2:
        raise ValueError("sweep solvers need at least two cores")
    if cfg.k > min(a.n_rows, a.n_cols):
        raise ValueError("block size k exceeds the matrix dimensions")
    rdelta = cfg.residual_delta if cfg.residual_delta is not None else cfg.epsilon / 10
    bmat = matrix_tt_round(matrix_tt_matmul(matrix_tt_transpose(a), a), rdelta)
    delta0 = cfg.delta0 if cfg.delta0 is not None else cfg.epsilon / math.sqrt(n - 1)
    report = SweepReport(solver=name, k=cfg.k)
    if cfg.track_env_consistency:
        report.env_consistency_max = 0.0
    t0 = time.perf_counter()
    best = None
    termination = "sweep-limit"
    v = None
    sigma = np.zeros(cfg.k)

    for attempt in range(cfg.max_restarts + 1):
        delta = delta0 * (cfg.restart_delta_shrink ** attempt)
        report.delta_final = delta
        ss = np.random.SeedSequence([int(cfg.seed), attempt]).spawn(2)
        v = init_block_tt(a.col_sizes, cfg.k, ss[0])
        rng = np.random.default_rng(ss[1])
        env = env_init(v, bmat, v)
        converged = False
        sweeps_this = 0
        for sweep in range(cfg.max_full_sweeps):
            d_first = delta * (cfg.first_halfsweep_delta_factor if sweep == 0 else 1.0)
            try:
                _eig_half_sweep(bmat, v, env, cfg, d_first, rng, report,
                                pair, "right_to_left")
                _track_env(report, cfg, env, v, bmat, v)
                lam = _eig_half_sweep(bmat, v, env, cfg, delta, rng, report,
                                      pair, "left_to_right")
                _track_env(report, cfg, env, v, bmat, v)
            except LocalSolverError:
                break
            sigma = np.sqrt(np.maximum(np.asarray(lam, dtype=float), 0.0))
            sweeps_this += 1
            report.total_sweeps += 1
            r = _gram_residual(bmat, v, sigma, rdelta)
            report.residual_history.append(
                {"attempt": int(attempt), "sweep": int(sweep),
                 "residual": float(r)})
            if best is None or r < best[0]:
                best = (r, sigma.copy(), v.copy(), sweeps_this)
            if r < cfg.epsilon:
                converged = True
                break
        report.sweeps_used = sweeps_this
        if converged:
            termination = "converged"
            break
        if attempt < cfg.max_restarts:
            report.restarts_used += 1
            continue
        termination = "restarted" if report.restarts_used else "sweep-limit"

    if termination != "converged" and best is not None:
        _, sigma, v, report.sweeps_used = best
    report.termination = termination

    smax = float(sigma.max()) if sigma.size else 0.0
    if smax == 0.0 or float(sigma.min()) < 1e-13 * smax:
        raise ValueError(
            "spectrum estimate is numerically singular; recovering left "
            "vectors from the Gram route needs an invertible Sigma, and the "
            "transposed-Gram recovery is not implemented"
        )
    u = block_tt_round(
        block_tt_scale_columns(block_tt_matvec(a, v), 1.0 / sigma), rdelta)
    report.wall_time_s = time.perf_counter() - t0
    return sigma, u, v, report


def als_eig_baseline(a: MatrixTT, cfg: SolverConfig):
    """Gram-matrix baseline with single-core sweeps; returns (Sigma, U, V, report)."""
    if cfg.k < 2:
        raise ValueError("the single-core Gram baseline needs k >= 2")
    return _eig_driver(a, cfg, pair=False, name="als_eig")


def mals_eig_baseline(a: MatrixTT, cfg: SolverConfig):
    """Gram-matrix baseline with merged-core sweeps; rank-adaptive at k=1."""
    return _eig_driver(a, cfg, pair=True, name="mals_eig")
