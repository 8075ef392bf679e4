"""Convex domains and their inner parallel bodies.

Supported domains: n-dimensional balls (centered at the origin),
axis-aligned planar rectangles (0,a) x (0,b), and strictly convex planar
polygons. For each domain the module computes erosions (inner parallel
bodies), volume/perimeter profiles, boundary distance fields, the singular
radius, and the equal-volume ball.

Polygon erosion uses half-plane intersection: every edge line is translated
inward by r and the polygon is clipped against each translated half-plane in
turn. This is robust under edge vanishing and costs O(k^2) per erosion for a
k-gon.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    DomainError,
    EmptyInteriorError,
    GeometryInconsistencyError,
)

# Relative tolerances for polygon degeneracy cleanup (scaled by diameter).
_EDGE_TOL = 1e-12
_CROSS_TOL = 1e-12
# Fractional inset used when sampling profiles right below the inradius.
_END_INSET = 1e-9


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in dimension n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


class ConvexDomain:
    """Common interface: inradius, volume, boundary measure, membership."""

    dimension: int

    @property
    def inradius(self) -> float:
        raise NotImplementedError

    @property
    def volume(self) -> float:
        raise NotImplementedError

    @property
    def boundary_measure(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(ConvexDomain):
    """Open ball of radius `radius` centered at the origin, dimension n >= 2."""

    n: int
    radius: float

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"ball dimension must be >= 2, got {self.n}")
        if not (self.radius > 0):
            raise DomainError(f"ball radius must be > 0, got {self.radius}")

    @property
    def dimension(self) -> int:
        return self.n

    @property
    def inradius(self) -> float:
        return self.radius

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.n) * self.radius ** self.n

    @property
    def boundary_measure(self) -> float:
        return self.n * unit_ball_volume(self.n) * self.radius ** (self.n - 1)


@dataclass(frozen=True)
class Rectangle(ConvexDomain):
    """Axis-aligned open rectangle (0,a) x (0,b) with a >= b > 0."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.b > 0):
            raise DomainError(f"rectangle sides must be positive, got b={self.b}")
        if self.a < self.b:
            raise DomainError(
                f"rectangle expects a >= b, got a={self.a}, b={self.b}"
            )

    @property
    def dimension(self) -> int:
        return 2

    @property
    def inradius(self) -> float:
        return self.b / 2

    @property
    def volume(self) -> float:
        return self.a * self.b

    @property
    def boundary_measure(self) -> float:
        return 2 * (self.a + self.b)


def _signed_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _perimeter(verts: np.ndarray) -> float:
    d = np.roll(verts, -1, axis=0) - verts
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def _cleanup_vertices(verts: np.ndarray) -> np.ndarray:
    """Drop duplicate and collinear vertices; error on reflex corners.

    Edges shorter than _EDGE_TOL * diameter and corner cross products below
    _CROSS_TOL * diameter^2 are collapsed so that downstream shoelace and
    perimeter sums do not run on cancellation-dominated data.
    """
    verts = np.asarray(verts, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
        raise DomainError("polygon needs at least 3 planar vertices")
    if _signed_area(verts) < 0:
        verts = verts[::-1]
    span = verts.max(axis=0) - verts.min(axis=0)
    diam = float(np.hypot(span[0], span[1]))
    if diam <= 0:
        raise DomainError("polygon vertices are all coincident")
    len_tol = _EDGE_TOL * diam
    cross_tol = _CROSS_TOL * diam * diam

    changed = True
    while changed and len(verts) >= 3:
        changed = False
        # Short edges first.
        nxt = np.roll(verts, -1, axis=0)
        elen = np.hypot(*(nxt - verts).T)
        keep = elen > len_tol
        if not keep.all():
            verts = verts[keep]
            changed = True
            continue
        # Collinear corners: drop the middle vertex.
        prv = np.roll(verts, 1, axis=0)
        e_in = verts - prv
        e_out = nxt - verts
        cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
        if (cross < -cross_tol).any():
            raise DomainError("polygon is not convex")
        flat = cross <= cross_tol
        if flat.any():
            verts = verts[~flat]
            changed = True
    if len(verts) < 3:
        raise DomainError("polygon degenerates after cleanup")
    return verts


class Polygon(ConvexDomain):
    """Strictly convex planar polygon, vertices stored counterclockwise."""

    def __init__(self, vertices):
        self.vertices = _cleanup_vertices(vertices)
        self.vertices.setflags(write=False)
        self._area = _signed_area(self.vertices)
        self._perimeter = _perimeter(self.vertices)
        d = np.roll(self.vertices, -1, axis=0) - self.vertices
        elen = np.hypot(d[:, 0], d[:, 1])
        # Unit inward (left) normals of the CCW edge loop.
        self._normals = np.column_stack((-d[:, 1], d[:, 0])) / elen[:, None]
        self._inradius = None

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices)"

    @property
    def dimension(self) -> int:
        return 2

    @property
    def volume(self) -> float:
        return self._area

    @property
    def boundary_measure(self) -> float:
        return self._perimeter

    @property
    def inradius(self) -> float:
        if self._inradius is None:
            self._inradius = _polygon_inradius(self)
        return self._inradius

    def line_distances(self, points: np.ndarray) -> np.ndarray:
        """Signed distances (points, edges) to every edge line; >=0 inside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.einsum("pke,ke->pk",
                         pts[:, None, :] - self.vertices[None, :, :],
                         self._normals)


def _clip_halfplane(pts: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Clip a convex CCW vertex loop against {x : x . normal >= offset}."""
    k = len(pts)
    if k == 0:
        return pts
    d = pts @ normal - offset
    keep = d >= 0.0
    if keep.all():
        return pts
    if not keep.any():
        return np.empty((0, 2))
    nxt = np.roll(pts, -1, axis=0)
    dn = np.roll(d, -1)
    crossing = ((d > 0.0) & (dn < 0.0)) | ((d < 0.0) & (dn > 0.0))
    denom = np.where(crossing, d - dn, 1.0)
    t = (d / denom)[:, None]
    cuts = pts + t * (nxt - pts)
    # Emit, per edge i: vertex i if kept, then the crossing point if any.
    out = np.empty((2 * k, 2))
    emit = np.zeros(2 * k, dtype=bool)
    out[0::2], emit[0::2] = pts, keep
    out[1::2], emit[1::2] = cuts, crossing
    return out[emit]


def _erode_raw(poly: Polygon, r: float) -> np.ndarray:
    """Vertex loop of the r-erosion, without Polygon-level cleanup."""
    pts = poly.vertices
    for anchor, normal in zip(poly.vertices, poly._normals):
        offset = float(anchor @ normal) + r
        pts = _clip_halfplane(pts, normal, offset)
        if len(pts) < 3:
            return np.empty((0, 2))
    return pts


def _dedupe_loop(pts: np.ndarray, tol: float) -> np.ndarray:
    if len(pts) == 0:
        return pts
    d = np.roll(pts, -1, axis=0) - pts
    keep = np.hypot(d[:, 0], d[:, 1]) > tol
    return pts[keep]


def _polygon_inradius(poly: Polygon) -> float:
    """Largest r with nonempty r-erosion, by bisection on clip feasibility.

    The inscribed ball fits inside the polygon, so r <= sqrt(area/pi) gives
    a guaranteed upper bracket.
    """
    hi = math.sqrt(poly.volume / math.pi) * (1 + 1e-9)
    lo = 0.0
    # Emptiness is decided by whether any vertices survive the clip chain:
    # sliver areas underflow shoelace roundoff long before the clip empties.
    for _ in range(200):
        if hi - lo <= 1e-12 * hi:
            break
        mid = 0.5 * (lo + hi)
        if len(_erode_raw(poly, mid)) >= 3:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def as_polygon(domain: ConvexDomain) -> Polygon:
    """Polygon view of a planar domain (identity for Polygon)."""
    if isinstance(domain, Polygon):
        return domain
    if isinstance(domain, Rectangle):
        a, b = domain.a, domain.b
        return Polygon([[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]])
    raise DomainError(f"no polygon view for {type(domain).__name__}")


def inner_parallel_body(domain: ConvexDomain, r: float) -> ConvexDomain:
    """The set of interior points at boundary distance greater than r.

    Ball(n,R) -> Ball(n,R-r); Rectangle(a,b) -> Rectangle(a-2r,b-2r);
    Polygon -> half-plane intersection with all edge lines moved inward by r.
    """
    if r < 0:
        raise DomainError(f"erosion radius must be >= 0, got {r}")
    if r >= domain.inradius:
        raise EmptyInteriorError(
            f"erosion radius {r} >= inradius {domain.inradius}"
        )
    if r == 0:
        return domain
    if isinstance(domain, Ball):
        return Ball(domain.n, domain.radius - r)
    if isinstance(domain, Rectangle):
        return Rectangle(domain.a - 2 * r, domain.b - 2 * r)
    if isinstance(domain, Polygon):
        pts = _erode_raw(domain, r)
        if len(pts) < 3:
            raise EmptyInteriorError(f"erosion at r={r} is numerically empty")
        try:
            return Polygon(pts)
        except DomainError as exc:
            raise EmptyInteriorError(
                f"erosion at r={r} degenerates: {exc}"
            ) from exc
    raise DomainError(f"unsupported domain type {type(domain).__name__}")


def profile_at(domain: ConvexDomain, r: float) -> tuple[float, float]:
    """(volume, boundary measure) of the inner parallel body at radius r."""
    if r < 0:
        raise DomainError(f"radius must be >= 0, got {r}")
    if r >= domain.inradius:
        raise EmptyInteriorError(f"radius {r} >= inradius {domain.inradius}")
    if isinstance(domain, Ball):
        n, rr = domain.n, domain.radius - r
        kn = unit_ball_volume(n)
        return kn * rr ** n, n * kn * rr ** (n - 1)
    if isinstance(domain, Rectangle):
        a, b = domain.a - 2 * r, domain.b - 2 * r
        return a * b, 2 * (a + b)
    if isinstance(domain, Polygon):
        if r == 0:
            return domain.volume, domain.boundary_measure
        pts = _erode_raw(domain, r)
        span = domain.vertices.max(axis=0) - domain.vertices.min(axis=0)
        pts = _dedupe_loop(pts, 1e-14 * float(np.hypot(span[0], span[1])))
        if len(pts) < 3:
            return 0.0, 0.0
        return max(_signed_area(pts), 0.0), _perimeter(pts)
    raise DomainError(f"unsupported domain type {type(domain).__name__}")


def distance_to_boundary(domain: ConvexDomain, point) -> float | np.ndarray:
    """Distance from a point to the domain boundary, 0 outside the closure.

    Exact closed forms for Ball and Rectangle; for a Polygon the minimum of
    the signed edge-line distances, which is the true boundary distance on
    convex interiors.
    """
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if isinstance(domain, Ball):
        d = domain.radius - np.linalg.norm(pts, axis=1)
    elif isinstance(domain, Rectangle):
        d = np.minimum.reduce([
            pts[:, 0], domain.a - pts[:, 0], pts[:, 1], domain.b - pts[:, 1]
        ])
    elif isinstance(domain, Polygon):
        d = domain.line_distances(pts).min(axis=1)
    else:
        raise DomainError(f"unsupported domain type {type(domain).__name__}")
    d = np.maximum(d, 0.0)
    return float(d[0]) if single else d


def singular_radius(domain: ConvexDomain) -> float:
    """Distance from the set of boundary-distance kinks to the boundary.

    For a ball the distance function is smooth away from the center, so the
    value is the full radius. Rectangles and polygons have kink branches
    reaching into every vertex, giving 0.
    """
    if isinstance(domain, Ball):
        return domain.radius
    if isinstance(domain, (Rectangle, Polygon)):
        return 0.0
    raise DomainError(f"unsupported domain type {type(domain).__name__}")


def equal_volume_ball(domain: ConvexDomain) -> Ball:
    """Ball with the same volume (dimension matches the domain)."""
    n = domain.dimension
    return Ball(n, (domain.volume / unit_ball_volume(n)) ** (1.0 / n))


class ParallelSetProfile:
    """Map r -> (V(r), P(r)) for the parallel bodies of a convex domain.

    Analytic mode evaluates closed forms (Ball, Rectangle); sampled mode
    interpolates exact erosion samples with shape-preserving cubics. The
    sample grid clusters near the inradius, where P/V blows up and root
    finders need resolution.
    """

    def __init__(self, domain: ConvexDomain, mode: str, samples: int,
                 r_grid=None, v_grid=None, p_grid=None):
        self.domain = domain
        self.mode = mode
        self.samples = samples
        self.R_Omega = domain.inradius
        self.n = domain.dimension
        if mode == "sampled":
            self.r_grid = r_grid
            self.v_grid = v_grid
            self.p_grid = p_grid
            self._v_interp = PchipInterpolator(r_grid, v_grid)
            self._p_interp = PchipInterpolator(r_grid, p_grid)
        else:
            m = max(samples, 64)
            self.r_grid = self.R_Omega * np.sin(0.5 * np.pi * np.linspace(0, 1, m))
            self.v_grid = self.volume(self.r_grid)
            self.p_grid = self.perimeter(self.r_grid)

    def volume(self, r):
        r = np.clip(np.asarray(r, dtype=float), 0.0, self.R_Omega)
        if self.mode == "sampled":
            out = np.maximum(self._v_interp(r), 0.0)
        elif isinstance(self.domain, Ball):
            d = self.domain
            out = unit_ball_volume(d.n) * (d.radius - r) ** d.n
        else:
            d = self.domain
            out = (d.a - 2 * r) * (d.b - 2 * r)
        return out if np.ndim(r) else float(out)

    def perimeter(self, r):
        r = np.clip(np.asarray(r, dtype=float), 0.0, self.R_Omega)
        if self.mode == "sampled":
            out = np.maximum(self._p_interp(r), 0.0)
        elif isinstance(self.domain, Ball):
            d = self.domain
            kn = unit_ball_volume(d.n)
            out = d.n * kn * (d.radius - r) ** (d.n - 1)
        else:
            d = self.domain
            out = 2 * (d.a + d.b - 4 * r)
        return out if np.ndim(r) else float(out)

    def psi(self, r):
        """Boundary-measure-to-volume ratio P(r)/V(r)."""
        with np.errstate(divide="ignore"):
            return self.perimeter(r) / self.volume(r)

    def phi(self, r):
        """The product r * V(r); maximized where psi(r) = 1/r."""
        return np.asarray(r) * self.volume(r) if np.ndim(r) else r * self.volume(r)

    def check(self) -> None:
        """Validate monotonicity and root-concavity along the sample grid.

        Raises GeometryInconsistencyError when the samples cannot have come
        from a convex erosion (within floating-point slack).
        """
        r, v = self.r_grid, self.v_grid
        if abs(v[0] - self.domain.volume) > 1e-9 * self.domain.volume:
            raise GeometryInconsistencyError("V(0) does not match |Omega|")
        if abs(self.p_grid[0] - self.domain.boundary_measure) > \
                1e-9 * self.domain.boundary_measure:
            raise GeometryInconsistencyError("P(0) does not match |bd Omega|")
        if not (np.diff(v) < 0).all():
            raise GeometryInconsistencyError("V is not strictly decreasing")
        if self.volume(self.R_Omega) > 1e-9 * self.domain.volume:
            raise GeometryInconsistencyError("V(R_Omega) is not ~0")
        gamma = v ** (1.0 / self.n)
        dr = np.diff(r)
        slopes = np.diff(gamma) / dr
        # Shoelace roundoff dominates the slope differences deep in the
        # clustered tail where V underflows; widen the slack accordingly.
        if self.mode == "sampled":
            verts = self.domain.vertices
            span = verts.max(axis=0) - verts.min(axis=0)
            eps_area = 64 * np.finfo(float).eps * float(span @ span)
        else:
            eps_area = 16 * np.finfo(float).eps * self.domain.volume
        with np.errstate(divide="ignore", over="ignore"):
            eg = eps_area / (self.n * np.maximum(gamma, 1e-300) ** (self.n - 1))
        noise = np.nan_to_num((eg[:-1] + eg[1:]) / dr, posinf=np.inf)
        if not (np.diff(slopes) <= 1e-8 + noise[:-1] + noise[1:]).all():
            raise GeometryInconsistencyError(
                "V^(1/n) fails concavity along samples (broken erosion)"
            )
        with np.errstate(divide="ignore", invalid="ignore"):
            psi = self.p_grid / v
        finite = np.isfinite(psi)
        if not (np.diff(psi[finite]) >= -1e-8).all():
            raise GeometryInconsistencyError("psi is not nondecreasing")


def build_profile(domain: ConvexDomain, samples: int = 1024) -> ParallelSetProfile:
    """Profile of a domain; analytic for Ball/Rectangle, sampled for Polygon."""
    if samples < 64:
        raise DomainError(f"need at least 64 samples, got {samples}")
    if isinstance(domain, (Ball, Rectangle)):
        prof = ParallelSetProfile(domain, "analytic", samples)
        prof.check()
        return prof
    if not isinstance(domain, Polygon):
        raise DomainError(f"unsupported domain type {type(domain).__name__}")

    R = domain.inradius
    t = np.linspace(0.0, 1.0, samples)
    r_grid = R * np.sin(0.5 * np.pi * t)
    r_grid[-1] = R * (1.0 - _END_INSET)
    vals = np.array([profile_at(domain, r) for r in r_grid])
    v_grid, p_grid = vals[:, 0], vals[:, 1]
    # Exact endpoint: the erosion empties at the inradius. The boundary
    # measure extends continuously (nonzero for non-tangential polygons).
    if samples >= 2:
        slope = (p_grid[-1] - p_grid[-2]) / (r_grid[-1] - r_grid[-2])
        p_end = max(p_grid[-1] + slope * (R - r_grid[-1]), 0.0)
    else:
        p_end = 0.0
    r_grid = np.append(r_grid, R)
    v_grid = np.append(v_grid, 0.0)
    p_grid = np.append(p_grid, p_end)
    # Collapse roundoff ties in the deeply clustered tail.
    keep = np.ones(len(r_grid), dtype=bool)
    keep[1:] = (np.diff(v_grid) < 0) & (np.diff(r_grid) > 0)
    prof = ParallelSetProfile(domain, "sampled", samples,
                              r_grid[keep], v_grid[keep], p_grid[keep])
    prof.check()
    return prof


# --- Domain specification files -------------------------------------------

def domain_from_spec(spec: dict) -> ConvexDomain:
    """Build a domain from its dict form.

    Recognized shapes: {"type":"ball","n":2,"radius":1.0},
    {"type":"rectangle","a":2.0,"b":1.0},
    {"type":"polygon","vertices":[[x,y],...]}.
    """
    try:
        kind = spec["type"]
    except (TypeError, KeyError):
        raise DomainError("domain spec needs a 'type' field") from None
    try:
        if kind == "ball":
            return Ball(int(spec["n"]), float(spec["radius"]))
        if kind == "rectangle":
            return Rectangle(float(spec["a"]), float(spec["b"]))
        if kind == "polygon":
            return Polygon(spec["vertices"])
    except KeyError as exc:
        raise DomainError(f"domain spec missing field {exc}") from None
    raise DomainError(f"unknown domain type {kind!r}")


def load_domain_file(path) -> ConvexDomain:
    """Parse a JSON domain specification file."""
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read domain file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"domain file is not valid JSON: {exc}") from exc
    return domain_from_spec(spec)
