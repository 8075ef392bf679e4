"""Supremal free-boundary analysis on convex domains."""

from .geometry import (
    Ball,
    ConvexDomain,
    ParallelSetProfile,
    Polygon,
    Rectangle,
    build_profile,
    distance_to_boundary,
    domain_from_spec,
    equal_volume_ball,
    inner_parallel_body,
    load_domain_file,
    profile_at,
    singular_radius,
)

__all__ = [
    "Ball",
    "ConvexDomain",
    "ParallelSetProfile",
    "Polygon",
    "Rectangle",
    "build_profile",
    "distance_to_boundary",
    "domain_from_spec",
    "equal_volume_ball",
    "inner_parallel_body",
    "load_domain_file",
    "profile_at",
    "singular_radius",
]

__version__ = "0.1.0"
