"""Subgroup graphs for surface groups with boundary.

Builds folded labeled graphs for finitely generated subgroups, extends
them to finite-index covers that keep chosen words outside the subgroup,
controls the resulting index through boundary wrapping, and verifies the
finished certificates independently.
"""
from .alphabet import (
    Letter,
    SurfaceBasis,
    Word,
    WordParseError,
    boundary_word,
    cyclic_reduce,
    format_word,
    free_reduce,
    is_peripheral,
    parse_word,
)
from .stallings import (
    DisconnectedGraphError,
    InternalInvariantError,
    LabeledGraph,
    NotFoldedError,
    XiLoopPresent,
    XiPath,
    canonicalize,
    fold,
    graph_from_json_dict,
    graph_to_dot,
    graph_to_json_dict,
    has_xi_loop,
    maximal_xi_paths,
    member,
    missing_label_tally,
    traces,
    wedge_from_words,
)
from .extend import (
    NotSeparableHere,
    PeripheralSubgroup,
    SeparabilityCertificate,
    complete_b1,
    complete_b2,
    complete_b3,
    operation1,
    operation2,
    operation3,
    operation4,
    separate,
)
from .verify import (
    CheckReport,
    NotConnected,
    NotRegular,
    PermutationRep,
    brute_force_separate,
    check_separability,
    check_wrap,
    index_of,
    is_good_extension,
    is_perfect_extension,
    kernel_name,
    to_permutation_rep,
    word_cycle_structure,
)
from .wrap import (
    NTooSmall,
    OmegaBlock,
    PeripheralContent,
    WrapCertificate,
    WrapSpec,
    adjust_wrapping,
    build_g0,
    build_omega,
    locate_phi,
    splice_omega,
    z_word,
)

__all__ = [
    "Letter",
    "SurfaceBasis",
    "Word",
    "WordParseError",
    "boundary_word",
    "cyclic_reduce",
    "format_word",
    "free_reduce",
    "is_peripheral",
    "parse_word",
    "DisconnectedGraphError",
    "InternalInvariantError",
    "LabeledGraph",
    "NotFoldedError",
    "XiLoopPresent",
    "XiPath",
    "canonicalize",
    "fold",
    "graph_from_json_dict",
    "graph_to_dot",
    "graph_to_json_dict",
    "has_xi_loop",
    "maximal_xi_paths",
    "member",
    "missing_label_tally",
    "traces",
    "wedge_from_words",
    "NotSeparableHere",
    "PeripheralSubgroup",
    "SeparabilityCertificate",
    "complete_b1",
    "complete_b2",
    "complete_b3",
    "operation1",
    "operation2",
    "operation3",
    "operation4",
    "separate",
    "CheckReport",
    "NotConnected",
    "NotRegular",
    "PermutationRep",
    "brute_force_separate",
    "check_separability",
    "check_wrap",
    "index_of",
    "is_good_extension",
    "is_perfect_extension",
    "kernel_name",
    "to_permutation_rep",
    "word_cycle_structure",
    "NTooSmall",
    "OmegaBlock",
    "PeripheralContent",
    "WrapCertificate",
    "WrapSpec",
    "adjust_wrapping",
    "build_g0",
    "build_omega",
    "locate_phi",
    "splice_omega",
    "z_word",
]
