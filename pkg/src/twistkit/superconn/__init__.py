"""Flat superconnections: exact superform algebra and numeric Chen transport."""

from .forms import (
    FlatnessReport,
    FormError,
    Poly,
    PolyForm,
    SuperconnectionData,
    SuperForm,
    TildeReport,
    VForm,
    check_flatness,
    exterior_d,
    superconnection_apply,
    tilde_apply,
    tilde_check,
    wedge,
)
from .registry import FAMILIES, Family, family_names, make_family, parse_params
from .transport import (
    STANDARD_TRIANGLE,
    ChainMapReport,
    HomotopyReport,
    Psi2Result,
    TransportError,
    TransportResult,
    check_chain_map,
    check_homotopy,
    homotopy_convergence,
    numeric_flatness,
    psi2_quadrature,
    segment_transport,
    table_csv,
    transport,
    transport_convergence,
)

__all__ = [
    "Poly", "PolyForm", "SuperForm", "VForm", "SuperconnectionData", "FormError",
    "FlatnessReport", "TildeReport", "wedge", "exterior_d", "check_flatness",
    "tilde_check", "tilde_apply", "superconnection_apply",
    "Family", "FAMILIES", "make_family", "family_names", "parse_params",
    "TransportError", "TransportResult", "ChainMapReport", "Psi2Result", "HomotopyReport",
    "transport", "segment_transport", "check_chain_map", "numeric_flatness",
    "psi2_quadrature", "check_homotopy", "transport_convergence", "homotopy_convergence",
    "table_csv", "STANDARD_TRIANGLE",
]
