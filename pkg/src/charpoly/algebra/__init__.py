"""Exact algebraic machinery: Grassmann integration, exterior products of
operators, the partition-sum builder for the representation's numerator, and
the unitary-group integral check."""

from .grassmann import (
    GrassmannElement,
    psi,
    psi_bar,
    scalar,
    grassmann_multiply,
    grassmann_exp,
    berezin_integrate_full,
    bilinear_form,
    hubbard_stratonovich_check,
    hubbard_stratonovich_grassmann_check,
)
from .exterior import (
    ExteriorOperator,
    multi_indices,
    wedge_operators,
    wedge_power,
    compound_matrix,
    build_A2m,
    partitions_weighted,
)
from .hciz import HcizReport, hciz_closed_form, haar_unitaries, hciz_check

__all__ = [
    "GrassmannElement",
    "psi",
    "psi_bar",
    "scalar",
    "grassmann_multiply",
    "grassmann_exp",
    "berezin_integrate_full",
    "bilinear_form",
    "hubbard_stratonovich_check",
    "hubbard_stratonovich_grassmann_check",
    "ExteriorOperator",
    "multi_indices",
    "wedge_operators",
    "wedge_power",
    "compound_matrix",
    "build_A2m",
    "partitions_weighted",
    "HcizReport",
    "hciz_closed_form",
    "haar_unitaries",
    "hciz_check",
]
