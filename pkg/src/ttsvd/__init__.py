"""Tensor-train toolkit for dominant singular triplets of huge structured
matrices, with block-TT sweep solvers and an experiment harness."""

from .counting import MacCounter, count_macs
from .dense import SvdFactors, dense_qr, dense_svd, truncated_svd
from .environments import (
    Environment,
    dense_local_matrix_als,
    dense_local_matrix_mals,
    env_init,
    env_update_left,
    env_update_right,
    environment_deviation,
    projected_matvec_als,
    projected_matvec_mals,
    projected_rmatvec_als,
    projected_rmatvec_mals,
    recompute_environment,
)
from .generators import (
    GeneratorSpec,
    build_generator,
    exchange_matrix_tt,
    full_toeplitz_tt,
    hankel_submatrix_tt,
    hankel_tt,
    hilbert_submatrix_tt,
    identity_scaled,
    prescribed_svd_matrix,
    random_block_tt,
    random_vector_tt,
    shift_transpose_tt,
    shift_tt,
    toeplitz_tt,
    tridiagonal_tt,
)
from .serialization import load_tt, save_tt
from .solver import (
    LocalSolverError,
    SolverConfig,
    SweepReport,
    als_eig_baseline,
    als_svd,
    init_block_tt,
    local_block_eig,
    local_block_svd,
    mals_eig_baseline,
    mals_svd,
    residual,
)
from .tt import (
    BlockTT,
    MatrixTT,
    VectorTT,
    block_tt_add,
    block_tt_column,
    block_tt_gram,
    block_tt_matvec,
    block_tt_round,
    block_tt_scale_columns,
    diag_embed,
    identity_matrix_tt,
    left_orthogonalize_through,
    matrix_tt_add,
    matrix_tt_matmul,
    matrix_tt_norm,
    matrix_tt_round,
    matrix_tt_transpose,
    matvec_tt,
    merge_cores,
    right_orthogonalize_through,
    split_block_core_als,
    split_block_core_mals,
    tt_add,
    tt_entry,
    tt_inner,
    tt_norm,
    tt_reconstruct,
    tt_round,
    tt_scale,
    tt_svd_compress,
    tt_to_vector,
)

__version__ = "0.1.0"
