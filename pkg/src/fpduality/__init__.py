"""Forbidden-patterns problems over finite relational structures.

Core pieces: the (coloured) structure model, homomorphism search and cores,
the forbidden-patterns decision oracle, exact tree-depth machinery, truncated
products, the two universal-template constructions with a duality
verification harness, and a primitive MMSNP compiler.
"""

from .relstruct import (
    ColouredStructure,
    Signature,
    Structure,
    as_coloured,
    canonical_form,
    components,
    decode_graph,
    degree,
    diameter,
    disjoint_union,
    encode_graph,
    gaifman,
    induced,
    is_isomorphic,
    symmetric_closure,
    tuple_set,
)
from .hom import check_hom, core, enumerate_homs, find_hom, is_core
from .patterns import Pattern, Problem, builtin, decide_fpp, is_valid, params
from .treedepth import (
    Partition,
    RootedForest,
    closure,
    find_ltd_partition,
    grad,
    is_elimination_tree,
    is_uniformly_k_sparse,
    tree_depth,
    verify_ltd_partition,
)
from .products import (
    TruncatedProduct,
    assemble_partial_homs,
    coordinate_projection,
    iterated_truncated_product,
    product,
    truncated_product,
)
from .universal import (
    UniversalTemplate,
    bounded_degree_universal,
    embed_into_universal,
    enumerate_valid_cores,
    hom_to_low_td_template,
    lemma_ball_map,
    low_td_universal,
    verify_duality,
    witness_gn,
    x_param,
)
from .mmsnp import (
    Sentence,
    encode_fpp2,
    interpret_tr,
    is_primitive,
    parse,
    problem_to_sentence,
    render,
    sentence_to_problem,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
