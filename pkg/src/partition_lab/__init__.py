"""Exchangeable partitions, deletion kernels, and regenerative interval sets."""

from .core import (
    Composition,
    ConvergenceError,
    ExtParams,
    FrequencyVector,
    IntervalSet,
    MalformedPartitionError,
    ParameterError,
    RankedFrequencies,
    ResidualFractions,
    ResidualPickError,
    SetPartition,
    UnsupportedKernelError,
    canonicalize,
    delete_block,
    partition_from_assignment,
    rank,
    stick_breaking,
)
from .deletion import (
    DecrementMatrix,
    bulk_delete,
    decrement_entry,
    decrement_matrix,
    deletion_kernel,
    f1_consistency,
    tau_delete,
)
from .eppf import (
    BetaParams,
    addition_residual,
    derived_eppf,
    eppf,
    eppf_from_moments,
    factorization_check,
    first_color_count_law,
    first_color_tail,
    q_first_block,
    rising_factorial,
    stick_fraction_law,
)
from .oracle import (
    ExactLaw,
    chi_square,
    deletion_law_check,
    enumerate_partitions,
    exact_law,
    ks_two_sample,
    leem_check,
    record_independence_residual,
    tau_regen_check,
    xi_order_enumeration_residual,
)
from .regen import (
    LevyImageMeasure,
    SubordinatorPath,
    compound_poisson_set,
    crossbreed_set,
    decrement_from_phi,
    laplace_exponent,
    leftmost_delete,
    leftmost_deletion_counts,
    ordered_arrangement,
    phi_nm,
    stick_breaking_set,
)
from .samplers import (
    RngHandle,
    XiOrder,
    arrangement_from_ranks,
    crp_assignments,
    crp_sample,
    gem_sample,
    order_probability,
    paintbox_sample,
    right_record_count,
    size_biased_pick,
    tau_biased_perm,
    tau_biased_pick,
    tau_perm_probability,
    tau_pick_law,
    xi_order,
)

__version__ = "0.1.0"

__all__ = [
    "BetaParams",
    "Composition",
    "ConvergenceError",
    "DecrementMatrix",
    "ExactLaw",
    "ExtParams",
    "FrequencyVector",
    "IntervalSet",
    "LevyImageMeasure",
    "MalformedPartitionError",
    "ParameterError",
    "RankedFrequencies",
    "ResidualFractions",
    "ResidualPickError",
    "RngHandle",
    "SetPartition",
    "SubordinatorPath",
    "UnsupportedKernelError",
    "XiOrder",
    "addition_residual",
    "arrangement_from_ranks",
    "bulk_delete",
    "canonicalize",
    "chi_square",
    "compound_poisson_set",
    "crossbreed_set",
    "crp_assignments",
    "crp_sample",
    "decrement_entry",
    "decrement_from_phi",
    "decrement_matrix",
    "delete_block",
    "deletion_kernel",
    "deletion_law_check",
    "derived_eppf",
    "enumerate_partitions",
    "eppf",
    "eppf_from_moments",
    "exact_law",
    "f1_consistency",
    "factorization_check",
    "first_color_count_law",
    "first_color_tail",
    "gem_sample",
    "ks_two_sample",
    "laplace_exponent",
    "leem_check",
    "leftmost_delete",
    "leftmost_deletion_counts",
    "order_probability",
    "ordered_arrangement",
    "paintbox_sample",
    "partition_from_assignment",
    "phi_nm",
    "q_first_block",
    "rank",
    "record_independence_residual",
    "right_record_count",
    "rising_factorial",
    "size_biased_pick",
    "stick_breaking",
    "stick_breaking_set",
    "stick_fraction_law",
    "tau_biased_perm",
    "tau_biased_pick",
    "tau_delete",
    "tau_perm_probability",
    "tau_pick_law",
    "tau_regen_check",
    "xi_order",
    "xi_order_enumeration_residual",
]
