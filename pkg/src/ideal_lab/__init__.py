"""Finite-scale laboratory for ideal convergence driven by partition regular maps."""

from .combinatorics import (
    CANONICAL_TREE,
    IndexDomain,
    IndexSet,
    TreeBijection,
    VerySparseSet,
    certify_very_sparse,
    fs,
    fs_values,
    generate_very_sparse,
    pairs,
    support,
    tree_index,
    tree_seq,
)
from .convergence import (
    DEFAULT_LADDER,
    ClusterWitness,
    IdealLimitWitness,
    LimitWitness,
    SequenceWindow,
    convert_ideal_to_rho_witness,
    find_cluster_witness,
    find_ideal_limit_witness,
    find_limit_witness,
    layered_sequence,
    nu2_sequence,
)
from .errors import BoundError, ConstructionError, DomainError, IdealLabError, NotFound, NotRepresentableError
from .partition_regular import FS, IDENT, PAIRS, PartitionRegularMap, apply, check_axiom_R, positivity_search
from .realization import (
    RealizationKind,
    branch_limit_witness,
    build_realized_sequence,
    claim1_witness,
    claim3_refute,
    descend,
    explain_limit,
)
from .souslin import SouslinScheme, cantor, finite_set, parse_scheme, rationals, singleton

__version__ = "0.1.0"
