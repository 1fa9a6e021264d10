"""Causal geometry of two flag manifolds: the Lagrangian Grassmannian and the Einstein universe.

Both models share an affine chart with an invariant cone. On top of that the
package provides diamonds, photons, photon-chain metrics and the extremal-point
checks that recognize a diamond from a membership oracle.
"""

from __future__ import annotations

from .causal_core import (
    Diamond,
    DualPoint,
    OracleDomain,
    Relation,
    causal_relation,
    diamond_contains,
    domain_from_json,
    dual_sample,
    is_dually_convex_probe,
    model_from_spec,
    order_axioms_check,
    to_standard,
)
from .common import Cone
from .ein_model import EinModel, EinPoint, lightlike_directions, psi
from .errors import (
    BudgetExceeded,
    ChartOverflow,
    DegeneratePairError,
    DomainError,
    NonTransverseQuadruple,
    NotConjugate,
    NotConjugateDirection,
    OnPhotonError,
    ShilovError,
    UndefinedInputError,
)
from .lag_model import LagModel, LagPoint, rank_one_decompose
from .metrics import (
    Budget,
    Chain,
    DualSet,
    MetricBracket,
    build_chain,
    caratheodory,
    chain_length,
    cross_ratio_rho,
    k_one_chain,
    kobayashi,
    projection_identity_check,
)
from .photons import (
    IntersectionPoly,
    Photon,
    are_conjugate,
    intersect_Z,
    intersection_poly,
    interval_in_domain,
    is_split,
    mobius_uplus_check,
    param,
    photon_through,
)
from .projline import ProjInterval, ProjPoint, cross_ratio, hilbert_dist
from .rigidity_checks import (
    ExtremalReport,
    Side,
    count_components,
    is_R_extremal,
    is_strongly_extremal,
    levi_transitivity_check,
    recover_diamond,
    strongly_extremal,
    visual_probe,
)

__version__ = "0.1.0"

__all__ = [
    "are_conjugate",
    "Budget",
    "BudgetExceeded",
    "build_chain",
    "caratheodory",
    "causal_relation",
    "Chain",
    "chain_length",
    "ChartOverflow",
    "Cone",
    "count_components",
    "cross_ratio",
    "cross_ratio_rho",
    "DegeneratePairError",
    "Diamond",
    "diamond_contains",
    "domain_from_json",
    "DomainError",
    "dual_sample",
    "DualPoint",
    "DualSet",
    "EinModel",
    "EinPoint",
    "ExtremalReport",
    "hilbert_dist",
    "intersect_Z",
    "intersection_poly",
    "IntersectionPoly",
    "interval_in_domain",
    "is_dually_convex_probe",
    "is_R_extremal",
    "is_split",
    "is_strongly_extremal",
    "k_one_chain",
    "kobayashi",
    "LagModel",
    "LagPoint",
    "levi_transitivity_check",
    "lightlike_directions",
    "MetricBracket",
    "mobius_uplus_check",
    "model_from_spec",
    "NonTransverseQuadruple",
    "NotConjugate",
    "NotConjugateDirection",
    "OnPhotonError",
    "OracleDomain",
    "order_axioms_check",
    "param",
    "Photon",
    "photon_through",
    "projection_identity_check",
    "ProjInterval",
    "ProjPoint",
    "psi",
    "rank_one_decompose",
    "recover_diamond",
    "Relation",
    "ShilovError",
    "Side",
    "strongly_extremal",
    "to_standard",
    "UndefinedInputError",
    "visual_probe",
]
