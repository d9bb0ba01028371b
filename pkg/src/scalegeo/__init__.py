"""Weighted sequence spaces at finite truncation: weight-function algebra,
block-reversal permutations, wild permutation families, and spectral
invariants of Gram-matrix pencils."""

from .errors import (
    BlockOverflow,
    CapacityExceeded,
    ConvergenceFailure,
    IndexOutOfRange,
    InvalidBoundaries,
    ModelMismatch,
    NotPositiveDefinite,
    ScaleGeoError,
    ScanCapExceeded,
    StateMismatch,
    WitnessNotFoundBelowCap,
)
from .permutation import (
    Permutation,
    apply,
    block_reversal,
    compose,
    finite_support,
    identity,
    invert,
    jsigma_matrix,
)
from .spectral import (
    ClaimReport,
    GramPairTrunc,
    InvariantTable,
    IsoCandidate,
    MultReport,
    ScaleTupleTrunc,
    anm_operator,
    build_product_scale,
    canonical_weight,
    check_multiplicativity,
    claim_check,
    generalized_eigh,
    invariant_table,
    make_diagonal_tuple,
    make_gram_pair,
    make_gram_tuple,
    make_iso_candidate,
    pair_gram,
    read_matrix,
    scale_isometry,
    splice_tuple,
)
from .weightfn import (
    DivergingSeq,
    EquivVerdict,
    ProductSeq,
    PushforwardSeq,
    SymbolicWeight,
    TableSeq,
    TableWeight,
    Weight,
    equiv_check,
    eval,
    exponential,
    inclusion_tail_norm,
    min_product,
    power,
    power_log,
    product,
    pushforward,
    rearrange_prefix,
    running_max_table,
    seq_product,
    shift,
    table,
    table_seq,
    weight_from_json,
    weight_to_json,
)
from .wildperm import (
    Caps,
    Certificate,
    StepReport,
    WildRecursionState,
    WildSet,
    Witness,
    build_sigma,
    divergence_witness,
    grow_wild_set,
    next_boundary,
    verify_step4,
    verify_step5,
    wp_prefix,
    wp_value,
)

__version__ = "0.1.0"
