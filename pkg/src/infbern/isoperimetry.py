"""Shape comparisons: the threshold weight is minimal on balls of the same
volume, with a margin certified through the parallel-volume upper bound
r * |Omega| * (1 - (r/n) * |bd Omega| / |Omega|)^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from . import bernoulli
from .errors import GeometryInconsistencyError
from .geometry import (
    ConvexDomain,
    ParallelSetProfile,
    Polygon,
    build_profile,
    unit_ball_volume,
)


def ball_lambda_infinity(n: int, radius: float) -> float:
    """Closed-form threshold weight of an n-ball."""
    kn = unit_ball_volume(n)
    return (n + 1) ** (n + 1) / (kn * n ** n * radius ** (n + 1))


def isoperimetric_deficit(domain: ConvexDomain) -> float:
    """Scale-free roundness defect |bd|^n / (n^n k_n |Omega|^(n-1)) - 1."""
    n = domain.dimension
    kn = unit_ball_volume(n)
    return (domain.boundary_measure ** n
            / (n ** n * kn * domain.volume ** (n - 1)) - 1.0)


@dataclass(frozen=True)
class IsoperimetricRecord:
    descriptor: str
    n_vertices: int
    area: float
    perimeter: float
    lambda_inf: float
    lambda_inf_ball: float
    gap: float
    deficit: float
    phi_margin: float


def phi_bound_check(profile: ParallelSetProfile) -> float:
    """Minimum margin of the parallel-volume bound over the sample grid.

    bound(r) = r|Omega|(1 - (r/n) |bd|/|Omega|)^n dominates r*V(r) for every
    convex domain; a margin below -1e-8 flags broken profile data.
    """
    r = profile.r_grid
    dom = profile.domain
    base = 1.0 - (r / dom.dimension) * dom.boundary_measure / dom.volume
    bound = r * dom.volume * np.maximum(base, 0.0) ** dom.dimension
    margin = float((bound - r * profile.volume(r)).min())
    if margin < -1e-8:
        raise GeometryInconsistencyError(
            f"parallel-volume bound violated by {margin:.3e}"
        )
    return margin


def compare_with_ball(domain: ConvexDomain, samples: int = 512,
                      descriptor: str = "",
                      profile: ParallelSetProfile | None = None) -> IsoperimetricRecord:
    """Threshold weight of the domain against its equal-volume ball."""
    if profile is None:
        profile = build_profile(domain, samples)
    lam_inf = bernoulli.lambda_infinity(profile)
    n = domain.dimension
    radius = (domain.volume / unit_ball_volume(n)) ** (1.0 / n)
    lam_ball = ball_lambda_infinity(n, radius)
    n_vertices = len(domain.vertices) if isinstance(domain, Polygon) else 0
    return IsoperimetricRecord(
        descriptor=descriptor or type(domain).__name__.lower(),
        n_vertices=n_vertices,
        area=domain.volume,
        perimeter=domain.boundary_measure,
        lambda_inf=lam_inf,
        lambda_inf_ball=lam_ball,
        gap=lam_inf - lam_ball,
        deficit=isoperimetric_deficit(domain),
        phi_margin=phi_bound_check(profile),
    )


def random_convex_polygon(rng: np.random.Generator,
                          min_vertices: int = 6,
                          max_vertices: int = 24) -> Polygon:
    """Convex hull of points drawn uniformly on the unit disk, redrawn until
    the hull vertex count lands in the requested band."""
    for _ in range(1000):
        m = int(rng.integers(8, 201))
        ang = rng.uniform(0.0, 2 * math.pi, m)
        rad = np.sqrt(rng.uniform(0.0, 1.0, m))
        pts = np.column_stack((rad * np.cos(ang), rad * np.sin(ang)))
        hull = ConvexHull(pts)
        if min_vertices <= len(hull.vertices) <= max_vertices:
            try:
                return Polygon(pts[hull.vertices])
            except Exception:
                continue
    raise GeometryInconsistencyError("random polygon generation stalled")


def batch_isoperimetric(seed: int, count: int,
                        samples: int = 512) -> list[IsoperimetricRecord]:
    """Seeded batch of random convex polygons, each compared with its ball.

    Every gap must clear -1e-6; a violation would contradict the minimality
    of the ball and points to a broken profile.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    records = []
    for i in range(count):
        poly = random_convex_polygon(rng)
        rec = compare_with_ball(poly, samples, descriptor=f"poly{i:04d}")
        if rec.gap < -1e-6:
            raise GeometryInconsistencyError(
                f"{rec.descriptor}: threshold below the ball value "
                f"by {-rec.gap:.3e}"
            )
        records.append(rec)
    return records


def regular_polygon(k: int, circumradius: float = 1.0) -> Polygon:
    ang = 2 * math.pi * np.arange(k) / k
    return Polygon(np.column_stack((circumradius * np.cos(ang),
                                    circumradius * np.sin(ang))))
