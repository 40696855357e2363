"""PSD testing with matrix-vector and vector-matrix-vector queries."""

from ._psdprobe import (
    ConfigError,
    ContractViolation,
    DenseOperator,
    EigenEstimate,
    PsdFit,
    Verdict,
    adaptive_l2_tester,
    bilinear_sketch_tester,
    family_spectrum,
    krylov_tester,
    nonadaptive_l1_tester,
    nonadaptive_mv_tester,
    oja_l1_tester,
    psd_rank_k_fit,
    rotated_diag,
    run_experiment,
    top_eigs_signed,
    wishart,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "DenseOperator",
    "EigenEstimate",
    "PsdFit",
    "Verdict",
    "adaptive_l2_tester",
    "bilinear_sketch_tester",
    "family_spectrum",
    "krylov_tester",
    "nonadaptive_l1_tester",
    "nonadaptive_mv_tester",
    "oja_l1_tester",
    "psd_rank_k_fit",
    "rotated_diag",
    "run_experiment",
    "top_eigs_signed",
    "wishart",
]
