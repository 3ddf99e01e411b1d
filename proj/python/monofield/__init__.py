"""Monotone scalar fields on planar grids.

Thin python surface over the C++ core: builtin analytic fields, Lebesgue
monotonicity certification, level-set extraction and classification, the
co-area check, discrete p-energies, and the approximation pipeline.
"""

from ._core import (
    MonofieldError,
    ScalarField,
    approximate,
    builtin_field,
    coarea_check,
    extract_level_set,
    field_from_json,
    field_from_values,
    is_monotone,
    is_strictly_monotone,
    local_extremal_values,
    lp_grad_distance,
    p_energy,
    select_regular_levels,
    sup_distance,
)

__all__ = [
    "MonofieldError",
    "ScalarField",
    "approximate",
    "builtin_field",
    "coarea_check",
    "extract_level_set",
    "field_from_json",
    "field_from_values",
    "is_monotone",
    "is_strictly_monotone",
    "local_extremal_values",
    "lp_grad_distance",
    "p_energy",
    "select_regular_levels",
    "sup_distance",
]
