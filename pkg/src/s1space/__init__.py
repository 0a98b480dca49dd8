"""Dyadic-tree vectors, the S^p norms, Baire-1 elements and their measures,
antichain decompositions and block-family embeddings."""
from .baire import BaireOneElement, BranchSpec, BranchTail, b1_norm, distance_to_s1, partial_sum, tail_norm
from .decomposition import DominationCert, WeightAssignment, brute_decompose, decompose, dominate_with_c
from .embedding import (
    ContinuationRule,
    ProjectionSpec,
    TreeFamily,
    apply_projection,
    blockify,
    build_projection,
    certify_equivalence,
    dense_subtree_search,
    nonsep_certificate,
    run_tg_demo,
)
from .errors import ParseError, S1Error, VerificationError
from .generators import GenConfig, batch
from .measures import AtomicMeasure, ldom_threshold, measure_distance, measure_of, singular_separation
from .tree import ROOT, ClopenSet, Node, SubtreeMap, validate_subtree
from .vectors import SignedFunctional, TreeVector, brute_norm, norm, norm_sp

__version__ = "0.1.0"
