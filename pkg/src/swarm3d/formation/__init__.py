"""Formation algorithms: symmetry breaking, target embedding, matching."""

from .common import Analysis, ChoiceSeed, MoveSet, analyze
from .embed import EmbeddedTarget, ReferencePolygon, embed_target, reference_polygon
from .matching import Matching, match_assign, match_orbit
from .pf import Feasibility, feasible, has_multiplicity, naive_targets, psi_pf_step
from .psisym import (
    go_to_center_step,
    is_regular_polygon,
    psi_sym_step,
    psi_sym_terminal,
    reference_prism,
)

__all__ = [
    "Analysis",
    "ChoiceSeed",
    "EmbeddedTarget",
    "Feasibility",
    "Matching",
    "MoveSet",
    "ReferencePolygon",
    "analyze",
    "embed_target",
    "feasible",
    "go_to_center_step",
    "has_multiplicity",
    "is_regular_polygon",
    "match_assign",
    "match_orbit",
    "naive_targets",
    "psi_pf_step",
    "psi_sym_step",
    "psi_sym_terminal",
    "reference_polygon",
    "reference_prism",
]
