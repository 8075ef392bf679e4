"""Explicit minimizers on grids: distance cones and infinity-harmonic
potentials of the annulus between a convex domain and its erosion.

The potential solver is a wide-stencil fixed point: every interior node
carries K directional arms of radius rho = (a few cells); an arm either ends
at a bilinear interpolation point inside the annulus or is clipped at the
exact sub-cell crossing of the outer boundary (value 1) or the eroded core
(value 0). The relaxation

    w(x) <- (M * t_min + m * t_max) / (t_max + t_min)

with M/m the extreme arm values and t_max/t_min their arm lengths is the
median-of-extrema update adapted to unequal arms; it is monotone and its
fixed point converges to the infinity-harmonic potential. A posteriori the
field is certified against the two-sided distance bounds, so the scheme
never has to be trusted blindly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import bernoulli
from .errors import (
    DomainError,
    NotApplicableError,
    SolverDivergenceError,
)
from .geometry import (
    Ball,
    ConvexDomain,
    Polygon,
    Rectangle,
    as_polygon,
    distance_to_boundary,
    inner_parallel_body,
)

N_DIRECTIONS = 16
_SWEEP_CAP = 1_000_000


class NodeLabel(IntEnum):
    EXTERIOR = 0
    OUTER_BOUNDARY = 1
    INTERIOR = 2
    CORE = 3


@dataclass
class SolveStats:
    sweeps: int = 0
    final_update: float = 0.0
    stencil_radius: float = 0.0
    directions: int = N_DIRECTIONS


@dataclass
class GridField:
    """Scalar field on a uniform grid over a domain's bounding box.

    values[i, j] is the node at (x0 + j*h, y0 + i*h); exterior nodes hold
    NaN. labels uses NodeLabel codes.
    """

    domain: ConvexDomain
    r: float
    h: float
    x0: float
    y0: float
    values: np.ndarray
    labels: np.ndarray
    solve_stats: SolveStats = field(default_factory=SolveStats)

    @property
    def bbox(self):
        ny, nx = self.values.shape
        return (self.x0, self.y0,
                self.x0 + (nx - 1) * self.h, self.y0 + (ny - 1) * self.h)

    def node_coords(self):
        ny, nx = self.values.shape
        xs = self.x0 + self.h * np.arange(nx)
        ys = self.y0 + self.h * np.arange(ny)
        return np.meshgrid(xs, ys)

    def interior_points(self):
        xx, yy = self.node_coords()
        sel = self.labels == NodeLabel.INTERIOR
        return np.column_stack((xx[sel], yy[sel])), sel

    def discrete_lipschitz(self) -> float:
        """Max difference quotient over adjacent non-exterior node pairs."""
        w = np.where(self.labels == NodeLabel.EXTERIOR, np.nan, self.values)
        best = 0.0
        for di, dj in ((0, 1), (1, 0), (1, 1), (1, -1)):
            a = w[max(di, 0):w.shape[0] + min(di, 0), max(dj, 0):w.shape[1] + min(dj, 0)]
            b = w[max(-di, 0):w.shape[0] + min(-di, 0), max(-dj, 0):w.shape[1] + min(-dj, 0)]
            q = np.abs(a - b) / (self.h * math.hypot(di, dj))
            if np.isfinite(q).any():
                best = max(best, float(np.nanmax(q)))
        return best

    def to_csv(self, path) -> None:
        """Row-major matrix with a sidecar header line."""
        x0, y0, x1, y1 = self.bbox
        with open(path, "w", newline="\n") as fh:
            fh.write(f"h={self.h:.9g} bbox={x0:.9g},{y0:.9g},{x1:.9g},{y1:.9g}\n")
            for row in self.values:
                fh.write(",".join("nan" if not np.isfinite(v) else f"{v:.9g}"
                                  for v in row) + "\n")


@dataclass
class RegionMask:
    """Boolean node membership on the same grid geometry as a GridField."""

    h: float
    x0: float
    y0: float
    mask: np.ndarray


def _require_planar(domain: ConvexDomain) -> None:
    if isinstance(domain, Ball) and domain.n != 2:
        raise DomainError("grid operations support planar domains only")
    if not isinstance(domain, (Ball, Rectangle, Polygon)):
        raise DomainError(f"unsupported domain type {type(domain).__name__}")


def _grid_geometry(domain: ConvexDomain, h: float):
    if isinstance(domain, Ball):
        x0, y0, x1, y1 = -domain.radius, -domain.radius, domain.radius, domain.radius
    elif isinstance(domain, Rectangle):
        x0, y0, x1, y1 = 0.0, 0.0, domain.a, domain.b
    else:
        lo = domain.vertices.min(axis=0)
        hi = domain.vertices.max(axis=0)
        x0, y0, x1, y1 = lo[0], lo[1], hi[0], hi[1]
    nx = int(math.ceil((x1 - x0) / h - 1e-9)) + 1
    ny = int(math.ceil((y1 - y0) / h - 1e-9)) + 1
    xs = x0 + h * np.arange(nx)
    ys = y0 + h * np.arange(ny)
    return x0, y0, xs, ys


def _label_grid(domain: ConvexDomain, r: float, h: float):
    x0, y0, xs, ys = _grid_geometry(domain, h)
    xx, yy = np.meshgrid(xs, ys)
    pts = np.column_stack((xx.ravel(), yy.ravel()))
    dist = distance_to_boundary(domain, pts).reshape(xx.shape)

    scale = max(abs(v) for v in (xs[0], xs[-1], ys[0], ys[-1])) or 1.0
    atol = 1e-9 * scale
    if isinstance(domain, Ball):
        sgn = domain.radius - np.hypot(xx, yy)
    elif isinstance(domain, Rectangle):
        sgn = np.minimum.reduce([xx, domain.a - xx, yy, domain.b - yy])
    else:
        sgn = domain.line_distances(pts).min(axis=1).reshape(xx.shape)

    labels = np.full(xx.shape, NodeLabel.EXTERIOR, dtype=np.int8)
    labels[np.abs(sgn) <= atol] = NodeLabel.OUTER_BOUNDARY
    inside = sgn > atol
    labels[inside & (dist < r)] = NodeLabel.INTERIOR
    labels[inside & (dist >= r)] = NodeLabel.CORE
    return x0, y0, xx, yy, dist, labels


def cone_solution(domain: ConvexDomain, r: float, h: float) -> GridField:
    """Nodewise [1 - dist(x, boundary)/r]_+ on the domain grid."""
    _require_planar(domain)
    if not (0 < r <= domain.inradius * (1 + 1e-12)):
        raise DomainError(f"cone slope radius {r} outside (0, inradius]")
    if h <= 0:
        raise DomainError(f"grid spacing must be > 0, got {h}")
    x0, y0, _, _, dist, labels = _label_grid(domain, r, h)
    values = np.maximum(1.0 - dist / r, 0.0)
    values[labels == NodeLabel.OUTER_BOUNDARY] = 1.0
    values[labels == NodeLabel.EXTERIOR] = np.nan
    return GridField(domain, r, h, x0, y0, values, labels)


def _ball_arm_exits(pts, dirs, R, r):
    """Per (node, direction): exit length and exit value for an annulus."""
    b = pts @ dirs.T                       # (N, K)
    rr2 = (pts ** 2).sum(axis=1)[:, None]  # |x|^2
    t_out = -b + np.sqrt(np.maximum(b * b - (rr2 - R * R), 0.0))
    disc = b * b - (rr2 - (R - r) ** 2)
    with np.errstate(invalid="ignore"):
        t_core = -b - np.sqrt(disc)
    t_core = np.where((disc >= 0) & (t_core > 0), t_core, np.inf)
    hits_core = t_core <= t_out
    return np.where(hits_core, t_core, t_out), np.where(hits_core, 0.0, 1.0)


def _polygon_arm_exits(pts, dirs, poly: Polygon, r):
    """Same as _ball_arm_exits for a polygon eroded by r."""
    anchors, normals = poly.vertices, poly._normals
    alpha = np.einsum("pez,ez->pe", pts[:, None, :] - anchors[None, :, :],
                      normals)                        # (N, E) line distances
    t_exit = np.empty((len(pts), len(dirs)))
    val = np.empty_like(t_exit)
    for k, u in enumerate(dirs):
        beta = normals @ u                            # (E,)
        neg = beta < 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t_out = np.where(neg[None, :], alpha / -beta[None, :], np.inf)
        t_out = t_out.min(axis=1)
        # First entry into the core {all line distances >= r}: intersect the
        # per-edge half-line constraints alpha_e + beta_e * t >= r.
        lo = np.zeros(len(pts))
        hi = np.full(len(pts), np.inf)
        for e in range(len(anchors)):
            be = beta[e]
            if be > 1e-15:
                lo = np.maximum(lo, (r - alpha[:, e]) / be)
            elif be < -1e-15:
                hi = np.minimum(hi, (r - alpha[:, e]) / be)
            else:
                hi = np.where(alpha[:, e] >= r, hi, -np.inf)
        t_core = np.where(lo <= hi, lo, np.inf)
        hits_core = t_core <= t_out
        t_exit[:, k] = np.where(hits_core, t_core, t_out)
        val[:, k] = np.where(hits_core, 0.0, 1.0)
    return t_exit, val


def infinity_potential(domain: ConvexDomain, r: float, h: float,
                       tol: float = 1e-8,
                       max_sweeps: int = _SWEEP_CAP) -> GridField:
    """Discrete infinity-harmonic potential of the annulus at erosion r.

    Boundary data: 1 on the domain boundary, 0 on the eroded core. Starts
    from the distance cone (already exact on the projection-segment region)
    and relaxes until the largest nodal update drops below tol.
    """
    _require_planar(domain)
    if not (0 < r < domain.inradius):
        raise DomainError(f"need 0 < r < inradius, got r={r}")
    if h <= 0 or r / h < 8:
        raise DomainError(
            f"grid too coarse: annulus spans {r / h:.2f} cells, need >= 8"
        )

    x0, y0, xx, yy, dist, labels = _label_grid(domain, r, h)
    ny, nx = xx.shape
    interior = labels == NodeLabel.INTERIOR
    pts = np.column_stack((xx[interior], yy[interior]))

    cells = min(max(int(round(r / (3 * h))), 2), 8)
    rho = cells * h
    ang = 2 * np.pi * np.arange(N_DIRECTIONS) / N_DIRECTIONS
    dirs = np.column_stack((np.cos(ang), np.sin(ang)))

    if isinstance(domain, Ball):
        t_exit, exit_val = _ball_arm_exits(pts, dirs, domain.radius, r)
    else:
        t_exit, exit_val = _polygon_arm_exits(pts, dirs, as_polygon(domain), r)

    clipped = t_exit < rho * (1 - 1e-12)
    t_arm = np.where(clipped, t_exit, rho)

    # Bilinear stencils for the unclipped arm endpoints.
    ends = pts[:, None, :] + rho * dirs[None, :, :]
    gx = np.clip((ends[..., 0] - x0) / h, 0, nx - 1 - 1e-9)
    gy = np.clip((ends[..., 1] - y0) / h, 0, ny - 1 - 1e-9)
    ix, iy = gx.astype(np.int64), gy.astype(np.int64)
    fx, fy = gx - ix, gy - iy
    base = iy * nx + ix
    idx = np.stack([base, base + 1, base + nx, base + nx + 1], axis=-1)
    wts = np.stack([(1 - fx) * (1 - fy), fx * (1 - fy),
                    (1 - fx) * fy, fx * fy], axis=-1)

    # Work array: exterior and outer-boundary nodes read as 1 (ghost value
    # within one cell of the boundary), core as 0.
    work = np.maximum(1.0 - dist / r, 0.0)
    work[labels == NodeLabel.CORE] = 0.0
    work[(labels == NodeLabel.OUTER_BOUNDARY) |
         (labels == NodeLabel.EXTERIOR)] = 1.0
    flat = work.ravel()
    int_flat = np.flatnonzero(interior.ravel())
    w_int = flat[int_flat].copy()

    stats = SolveStats(stencil_radius=rho)
    rows = np.arange(len(w_int))
    delta = np.inf
    for sweep in range(1, max_sweeps + 1):
        arm_vals = np.where(clipped, exit_val, (flat[idx] * wts).sum(axis=-1))
        # Pair the steepest-ascent arm with the steepest-descent arm (not
        # the extreme values: with unequal arm lengths the nearest of two
        # tied endpoints must win, or clipped boundary arcs get misweighted).
        slopes = (arm_vals - w_int[:, None]) / t_arm
        k_up = slopes.argmax(axis=1)
        k_dn = slopes.argmin(axis=1)
        big, small = arm_vals[rows, k_up], arm_vals[rows, k_dn]
        t_big, t_small = t_arm[rows, k_up], t_arm[rows, k_dn]
        new = (big * t_small + small * t_big) / (t_big + t_small)
        delta = float(np.abs(new - w_int).max()) if len(new) else 0.0
        w_int = new
        flat[int_flat] = w_int
        if delta < tol:
            stats.sweeps = sweep
            stats.final_update = delta
            break
    else:
        raise SolverDivergenceError(
            f"potential solve did not reach tol={tol} in {max_sweeps} sweeps "
            f"(last update {delta:.3e}); stencil may be under-resolved"
        )

    values = work.copy()
    values[labels == NodeLabel.EXTERIOR] = np.nan
    values[labels == NodeLabel.OUTER_BOUNDARY] = 1.0
    out = GridField(domain, r, h, x0, y0, values, labels, stats)
    return out


def d_hat_mask(domain: ConvexDomain, r: float, h: float) -> RegionMask:
    """Nodes lying on an open segment from the eroded boundary to one of its
    nearest points on the domain boundary.

    For a ball every annulus point qualifies (radial segments). For polygons
    the vertex fans drop out: their points project to corners whose inward
    offset leaves the eroded set.
    """
    _require_planar(domain)
    if not (0 < r < domain.inradius):
        raise DomainError(f"need 0 < r < inradius, got r={r}")
    x0, y0, xx, yy, dist, labels = _label_grid(domain, r, h)
    interior = labels == NodeLabel.INTERIOR
    if isinstance(domain, Ball):
        return RegionMask(h, x0, y0, interior.copy())

    poly = as_polygon(domain)
    anchors, normals = poly.vertices, poly._normals
    edges = np.roll(anchors, -1, axis=0) - anchors
    lens = np.hypot(edges[:, 0], edges[:, 1])
    tangents = edges / lens[:, None]

    pts = np.column_stack((xx[interior], yy[interior]))
    d = dist[interior]
    rel = pts[:, None, :] - anchors[None, :, :]
    alpha = np.einsum("pez,ez->pe", rel, normals)
    s = np.einsum("pez,ez->pe", rel, tangents)

    span = poly.vertices.max(axis=0) - poly.vertices.min(axis=0)
    tol = 1e-9 * float(np.hypot(span[0], span[1]))
    near = np.abs(alpha - d[:, None]) <= tol            # minimizing edge
    on_seg = (s >= -tol) & (s <= lens[None, :] + tol)   # foot inside edge

    # Inward point at distance r along this edge's normal must still be at
    # distance >= r from every edge line, i.e. sit on the eroded boundary.
    feet = pts[:, None, :] - alpha[..., None] * normals[None, :, :]
    y_pts = feet + r * normals[None, :, :]
    ydist = np.einsum("pfez,ez->pfe",
                      y_pts[:, :, None, :] - anchors[None, None, :, :],
                      normals)
    y_ok = (ydist.min(axis=2) >= r - tol)

    member = (near & on_seg & y_ok).any(axis=1)
    mask = np.zeros(xx.shape, dtype=bool)
    mask[interior] = member
    return RegionMask(h, x0, y0, mask)


def _dist_to_polygon_boundary(pts: np.ndarray, poly: Polygon) -> np.ndarray:
    a = poly.vertices
    b = np.roll(a, -1, axis=0)
    ab = b - a
    ab2 = (ab ** 2).sum(axis=1)
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pez,ez->pe", rel, ab) / ab2[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[..., None] * ab[None, :, :]
    return np.linalg.norm(pts[:, None, :] - proj, axis=2).min(axis=1)


@dataclass(frozen=True)
class SandwichReport:
    """A-posteriori certificate of a potential field against the exact
    two-sided distance bounds, with equality checked on the projection
    region."""

    max_lower_violation: float
    max_upper_violation: float
    max_dhat_gap: float
    tolerance: float
    h: float
    r: float


def sandwich_report(field: GridField, mask: RegionMask | None = None) -> SandwichReport:
    domain, r, h = field.domain, field.r, field.h
    pts, sel = field.interior_points()
    w = field.values[sel]
    d = distance_to_boundary(domain, pts)
    lower = np.maximum(1.0 - d / r, 0.0)
    if isinstance(domain, Ball):
        core_dist = np.abs(np.linalg.norm(pts, axis=1) - (domain.radius - r))
    else:
        # Erode the polygon view: the Rectangle erosion type normalizes the
        # anchor to the origin, which would misplace the core as a set.
        core = inner_parallel_body(as_polygon(domain), r)
        core_dist = _dist_to_polygon_boundary(pts, core)
    upper = core_dist / r

    lo_viol = float(np.maximum(lower - w, 0.0).max(initial=0.0))
    up_viol = float(np.maximum(w - upper, 0.0).max(initial=0.0))
    if mask is None:
        mask = d_hat_mask(domain, r, h)
    in_hat = mask.mask[sel]
    gap = float(np.abs(w[in_hat] - lower[in_hat]).max(initial=0.0))
    return SandwichReport(lo_viol, up_viol, gap, (4.0 / r) * h, h, r)


@dataclass(frozen=True)
class Q1Answer:
    """Which minimizer of the supremal problem solves the overdetermined
    boundary-value problem, and at what slope."""

    slope: float
    r_lambda: float
    v_equals_w: bool
    description: str


def q1_answer(analysis: bernoulli.BernoulliAnalysis, lam: float,
              tie_rtol: float = 1e-9) -> Q1Answer:
    """Slope 1/r_lambda of the unique infinity-harmonic minimizer.

    Defined for weights at or above the threshold; below it no non-constant
    minimizer exists and NotApplicableError is raised.
    """
    if lam < analysis.lambda_star * (1 - tie_rtol):
        raise NotApplicableError(
            f"weight {lam} below threshold {analysis.lambda_star}: "
            "no non-constant minimizer"
        )
    cls = bernoulli.classify(analysis, lam, tie_rtol)
    r_lam = cls.r_lambda
    veq = cls.kind is bernoulli.SolutionKind.NONCONSTANT_UNIQUE
    desc = (f"potential of the annulus at erosion {r_lam:.9g} solves the "
            f"slope-{1.0 / r_lam:.9g} boundary-value problem")
    if veq:
        desc += "; it coincides with the distance cone"
    return Q1Answer(1.0 / r_lam, r_lam, veq, desc)


@dataclass(frozen=True)
class Q2Answer:
    """Whether the slope-lam boundary-value solution minimizes the supremal
    energy for some weight."""

    exists: bool
    weight: float | None
    v_equals_w: bool


def q2_answer(analysis: bernoulli.BernoulliAnalysis, lam: float,
              tie_rtol: float = 1e-9) -> Q2Answer:
    """Correspondence from slopes to weights.

    Requires lam >= 1/inradius (below, the boundary-value problem has no
    non-trivial solution at all). The match exists iff lam >= 1/r_star; the
    potential agrees with the cone iff additionally lam >= 1/r_sing, with
    1/r_sing read as +inf when r_sing = 0.
    """
    R = analysis.profile.R_Omega
    if lam < (1.0 / R) * (1 - tie_rtol):
        raise DomainError(
            f"slope {lam} < 1/inradius {1.0 / R}: no non-trivial solutions"
        )
    lam_min = 1.0 / analysis.r_star
    exists = lam >= lam_min * (1 - tie_rtol)
    if not exists:
        return Q2Answer(False, None, False)
    r = 1.0 / lam
    weight = 1.0 / (r * r * analysis.profile.perimeter(r))
    if analysis.r_sing > 0:
        veq = lam >= max(lam_min, 1.0 / analysis.r_sing) * (1 - tie_rtol)
    else:
        veq = False
    return Q2Answer(True, weight, veq)
