"""Sparse flat testing, oracles and local correction for generalized Reed-Muller codes."""

from .affine import AffineMap, FlatBasis, ZoomSpec, identity_padded, sample_uniform
from .errors import BudgetExceeded, GRMError, InvalidParameters, NotFound
from .gf import FieldSpec, field_new, parse_field
from .mpoly import EvalTable, MPoly, compose_affine, extend, inner_product, interpolate
from .oracle import distance_to_code, exact_degree, random_codeword
from .tester import (
    RMParams,
    TesterSpec,
    build_P,
    build_spec,
    derive_params,
    estimate_rejection,
    run_flat_test,
    run_sparse_test,
    tilde_f,
)

__all__ = [
    "AffineMap", "FlatBasis", "ZoomSpec", "identity_padded", "sample_uniform",
    "BudgetExceeded", "GRMError", "InvalidParameters", "NotFound",
    "FieldSpec", "field_new", "parse_field",
    "EvalTable", "MPoly", "compose_affine", "extend", "inner_product", "interpolate",
    "distance_to_code", "exact_degree", "random_codeword",
    "RMParams", "TesterSpec", "build_P", "build_spec", "derive_params",
    "estimate_rejection", "run_flat_test", "run_sparse_test", "tilde_f",
]
