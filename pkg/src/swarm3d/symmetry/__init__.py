"""Rotation groups of point sets and of local-frame arrangements."""

from .detect import Arrangement, Axis, LocalFrame, detect_rotation_group, frame_group, group_acts, world_frames
from .embeddings import Embedding, enumerate_embeddings
from .groups import C, D, I, O, T, GroupKind, canonical_elements, is_proper_subgroup, is_subgroup, maximal_kinds
from .symmetricity import (
    SymmetricitySet,
    free_embeddings,
    random_frame,
    symmetric_frame_assignment,
    symmetricity,
    symmetricity_multiset,
)
from .views import OrbitDecomposition, decompose, local_view, orbits, view_key

__all__ = [
    "Arrangement",
    "Axis",
    "C",
    "D",
    "Embedding",
    "GroupKind",
    "I",
    "LocalFrame",
    "O",
    "OrbitDecomposition",
    "SymmetricitySet",
    "T",
    "canonical_elements",
    "decompose",
    "detect_rotation_group",
    "enumerate_embeddings",
    "frame_group",
    "free_embeddings",
    "group_acts",
    "is_proper_subgroup",
    "is_subgroup",
    "local_view",
    "maximal_kinds",
    "orbits",
    "random_frame",
    "symmetric_frame_assignment",
    "symmetricity",
    "symmetricity_multiset",
    "view_key",
    "world_frames",
]
