"""Pattern formation by fully synchronous oblivious robots in 3D space."""

from .formation import embed_target, feasible, go_to_center_step, match_assign, psi_pf_step, psi_sym_step
from .geom3 import DEFAULT_TOL, Tolerance, similar, smallest_enclosing_ball
from .sim import SimConfig, Trace, run, verify
from .symmetry import GroupKind, LocalFrame, decompose, detect_rotation_group, frame_group, symmetricity

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "GroupKind",
    "LocalFrame",
    "SimConfig",
    "Tolerance",
    "Trace",
    "decompose",
    "detect_rotation_group",
    "embed_target",
    "feasible",
    "frame_group",
    "go_to_center_step",
    "match_assign",
    "psi_pf_step",
    "psi_sym_step",
    "run",
    "similar",
    "smallest_enclosing_ball",
    "symmetricity",
    "verify",
]
