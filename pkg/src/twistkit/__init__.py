"""Exact computational homological algebra: A-infinity functors, twisting cochains,
twisted tensor products, Volodin and Whitehead validators, flat superconnections."""

from .exactlin import Mat, rank_kernel, rref, snf, solve
from .complexes import ChainComplex, GradedMap, GradedModule, format_homology, homology, mapping_cone
from .simplicial import FiniteCategory, OrderedSimplicialComplex, poset_category
from .ainfty import AInftyFunctor, check_ainfty, dualize_ainfty, em_transfer
from .twisting import (
    TwistingCochain,
    check_twisting,
    euler_class,
    fiber_degree_spectral_sequence,
    twisted_tensor_product,
)

__version__ = "0.1.0"

__all__ = [
    "Mat", "rank_kernel", "rref", "snf", "solve",
    "ChainComplex", "GradedMap", "GradedModule", "format_homology", "homology", "mapping_cone",
    "FiniteCategory", "OrderedSimplicialComplex", "poset_category",
    "AInftyFunctor", "check_ainfty", "dualize_ainfty", "em_transfer",
    "TwistingCochain", "check_twisting", "euler_class", "fiber_degree_spectral_sequence",
    "twisted_tensor_product",
]
