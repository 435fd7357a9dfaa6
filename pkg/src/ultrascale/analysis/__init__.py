"""Ultrametric valuation and p-adic structures."""

from ultrascale.analysis.padic_tree import (
    PadicNumber,
    UltrametricTreeNode,
    build_tree,
    default_monna_ratio,
    monna_map,
    padic_expand,
    padic_valuation,
    sup_norm,
)
from ultrascale.analysis.valuation import (
    InfinitesimalFamily,
    ValuationEstimate,
    ValuationForm,
    deformed_variable,
    extended_norm,
    infinitesimal_shift,
    ultrametric_check,
    valuate,
    valuation_form_eval,
)

__all__ = [
    "InfinitesimalFamily",
    "PadicNumber",
    "UltrametricTreeNode",
    "ValuationEstimate",
    "ValuationForm",
    "build_tree",
    "default_monna_ratio",
    "deformed_variable",
    "extended_norm",
    "infinitesimal_shift",
    "monna_map",
    "padic_expand",
    "padic_valuation",
    "sup_norm",
    "ultrametric_check",
    "valuate",
    "valuation_form_eval",
]
