import json
import math

import numpy as np
import pytest

from infbern import (
    Ball,
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
from infbern.errors import (
    DomainError,
    EmptyInteriorError,
    GeometryInconsistencyError,
)
from infbern.geometry import ParallelSetProfile

from conftest import UNIT_SQUARE, random_convex_vertices


def regular_hexagon(inradius=1.0):
    # Circumradius of a regular hexagon is inradius / cos(pi/6).
    rc = inradius / math.cos(math.pi / 6)
    ang = math.pi / 6 + np.arange(6) * math.pi / 3
    return Polygon(np.column_stack((rc * np.cos(ang), rc * np.sin(ang))))


class TestDomainTypes:
    def test_ball_measures(self):
        b = Ball(3, 2.0)
        assert b.inradius == 2.0
        assert b.volume == pytest.approx(4 / 3 * math.pi * 8)
        assert b.boundary_measure == pytest.approx(4 * math.pi * 4)

    def test_rectangle_measures(self):
        r = Rectangle(2.0, 1.0)
        assert r.inradius == 0.5
        assert r.volume == 2.0
        assert r.boundary_measure == 6.0

    def test_invalid_domains(self):
        with pytest.raises(DomainError):
            Ball(1, 1.0)
        with pytest.raises(DomainError):
            Ball(2, 0.0)
        with pytest.raises(DomainError):
            Rectangle(1.0, 2.0)  # expects a >= b
        with pytest.raises(DomainError):
            Polygon([[0, 0], [1, 0]])

    def test_polygon_orientation_normalized(self):
        cw = Polygon([[0, 0], [0, 1], [1, 1], [1, 0]])
        ccw = Polygon(UNIT_SQUARE)
        assert cw.volume == pytest.approx(1.0)
        assert np.allclose(sorted(map(tuple, cw.vertices)),
                           sorted(map(tuple, ccw.vertices)))

    def test_polygon_cleanup_collinear_and_duplicates(self):
        p = Polygon([[0, 0], [0.5, 0], [1, 0], [1, 0], [1, 1], [0, 1]])
        assert len(p.vertices) == 4
        assert p.volume == pytest.approx(1.0)

    def test_polygon_reflex_rejected(self):
        with pytest.raises(DomainError):
            Polygon([[0, 0], [1, 0], [0.4, 0.4], [0, 1]])

    def test_polygon_inradius_square(self, square):
        assert square.inradius == pytest.approx(0.5, abs=1e-12)

    def test_polygon_inradius_hexagon(self):
        assert regular_hexagon(1.0).inradius == pytest.approx(1.0, abs=1e-11)

    def test_rectangle_polygon_profiles_identical(self):
        rect = build_profile(Rectangle(2.0, 1.0))
        poly = build_profile(Polygon([[0, 0], [2, 0], [2, 1], [0, 1]]), 256)
        shared = poly.r_grid[poly.r_grid < 0.5]
        assert np.abs(poly.volume(shared) - rect.volume(shared)).max() < 1e-12
        assert np.abs(poly.perimeter(shared) - rect.perimeter(shared)).max() < 1e-12


class TestInnerParallelBody:
    def test_ball_identity_at_zero(self):
        assert inner_parallel_body(Ball(2, 1.0), 0.0) == Ball(2, 1.0)

    def test_ball_shrinks(self):
        assert inner_parallel_body(Ball(3, 1.0), 0.25) == Ball(3, 0.75)

    def test_rectangle_closed_form(self):
        assert inner_parallel_body(Rectangle(2, 1), 0.25) == Rectangle(1.5, 0.5)

    def test_hexagon_similarity(self):
        # Tangential polygons erode by scaling vertices toward the incenter
        # with ratio (1 - r / inradius); independent of the clip chain.
        hexg = regular_hexagon(1.0)
        eroded = inner_parallel_body(hexg, 0.5)
        expect = 0.5 * hexg.vertices
        got = np.array(sorted(map(tuple, np.round(eroded.vertices, 12))))
        want = np.array(sorted(map(tuple, np.round(expect, 12))))
        assert got.shape == want.shape
        assert np.abs(got - want).max() < 1e-9
        assert eroded.volume == pytest.approx(0.25 * hexg.volume, rel=1e-12)

    def test_errors(self, square):
        with pytest.raises(DomainError):
            inner_parallel_body(square, -0.1)
        with pytest.raises(EmptyInteriorError):
            inner_parallel_body(square, 0.5)
        with pytest.raises(EmptyInteriorError):
            inner_parallel_body(Ball(2, 1.0), 1.5)

    def test_edge_vanishing(self):
        # A sliver corner cut disappears under erosion.
        p = Polygon([[0, 0], [1, 0], [1, 0.9], [0.9, 1.0], [0, 1]])
        eroded = inner_parallel_body(p, 0.3)
        assert len(eroded.vertices) == 4

    def test_erosion_semigroup(self, rng):
        for _ in range(10):
            poly = Polygon(random_convex_vertices(rng))
            R = poly.inradius
            r, s = rng.uniform(0.05, 0.4, 2) * R
            two_step = inner_parallel_body(inner_parallel_body(poly, r), s)
            one_step = inner_parallel_body(poly, r + s)
            a = np.array(sorted(map(tuple, np.round(two_step.vertices, 9))))
            b = np.array(sorted(map(tuple, np.round(one_step.vertices, 9))))
            assert a.shape == b.shape
            assert np.abs(a - b).max() < 1e-9


class TestProfileAt:
    def test_circle(self):
        v, p = profile_at(Ball(2, 1.0), 2 / 3)
        assert v == pytest.approx(math.pi / 9, rel=1e-14)
        assert p == pytest.approx(2 * math.pi / 3, rel=1e-14)

    def test_square_ratio(self, square):
        # psi(1/6) = 2(a+b-4r)/((a-2r)(b-2r)) = 6 for the unit square.
        v, p = profile_at(square, 1 / 6)
        assert v == pytest.approx(4 / 9, rel=1e-12)
        assert p == pytest.approx(8 / 3, rel=1e-12)
        assert p / v == pytest.approx(6.0, rel=1e-12)

    def test_sphere(self):
        k3 = 4 * math.pi / 3
        v, p = profile_at(Ball(3, 1.0), 0.5)
        assert v == pytest.approx(k3 * 0.125, rel=1e-14)
        assert p == pytest.approx(3 * k3 * 0.25, rel=1e-14)


class TestBuildProfile:
    def test_ball_analytic(self):
        prof = build_profile(Ball(2, 1.0), 256)
        r = np.linspace(0, 1, 33)
        assert np.allclose(prof.volume(r), math.pi * (1 - r) ** 2)

    def test_square_matches_rectangle_on_shared_grid(self, square):
        poly = build_profile(square, 512)
        rect = build_profile(Rectangle(1.0, 1.0), 512)
        shared = poly.r_grid[poly.r_grid <= rect.R_Omega]
        assert np.abs(poly.volume(shared) - rect.volume(shared)).max() < 1e-10
        assert np.abs(poly.perimeter(shared) - rect.perimeter(shared)).max() < 1e-10

    def test_random_polygon_psi_monotone(self, rng):
        poly = Polygon(random_convex_vertices(rng, 24))
        prof = build_profile(poly, 256)
        with np.errstate(divide="ignore", invalid="ignore"):
            psi = prof.p_grid / prof.v_grid
        psi = psi[np.isfinite(psi)]
        assert (np.diff(psi) >= -1e-8).all()

    def test_too_few_samples(self, square):
        with pytest.raises(DomainError):
            build_profile(square, 32)

    def test_corrupted_profile_rejected(self, square):
        prof = build_profile(square, 128)
        v_bad = prof.v_grid.copy()
        v_bad[40] = v_bad[38]  # breaks strict decrease
        with pytest.raises(GeometryInconsistencyError):
            ParallelSetProfile(square, "sampled", 128,
                               prof.r_grid, v_bad, prof.p_grid).check()

    def test_concavity_certificate(self, square_profile, disk_profile):
        # Strict tolerance holds wherever the shoelace roundoff (abs ~1e-16)
        # stays below it; the deeply clustered tail has V ~ 1e-12 and below.
        for prof in (square_profile, disk_profile):
            gamma = prof.v_grid ** (1.0 / prof.n)
            keep = prof.v_grid > 1e-5 * prof.domain.volume
            slopes = np.diff(gamma[keep]) / np.diff(prof.r_grid[keep])
            assert (np.diff(slopes) <= 1e-8).all()

    def test_perimeter_is_volume_derivative(self, square_profile):
        for prof in (build_profile(Ball(2, 1.0)), build_profile(Ball(3, 1.0)),
                     build_profile(Rectangle(2.0, 1.0)), square_profile):
            keep = prof.v_grid > 1e-5 * prof.domain.volume
            r, v = prof.r_grid[keep], prof.v_grid[keep]
            slopes = -np.diff(v) / np.diff(r)
            mid = 0.5 * (r[1:] + r[:-1])
            err = np.abs(slopes - prof.perimeter(mid))
            spacing = np.diff(r)
            assert (err <= spacing * prof.domain.boundary_measure + 1e-9).all()


class TestDistance:
    def test_examples(self, square):
        assert distance_to_boundary(Ball(2, 1.0), [0.0, 0.0]) == 1.0
        assert distance_to_boundary(Rectangle(2, 1), [1.0, 0.5]) == 0.5
        assert distance_to_boundary(square, [0.25, 0.5]) == 0.25

    def test_exterior_clamps_to_zero(self, square):
        assert distance_to_boundary(square, [2.0, 2.0]) == 0.0
        assert distance_to_boundary(Ball(2, 1.0), [3.0, 0.0]) == 0.0

    def test_membership_equivalence(self, rng):
        # d(x) > r exactly when x lies in the erosion at r.
        poly = Polygon(random_convex_vertices(rng))
        R = poly.inradius
        lo = poly.vertices.min(axis=0)
        hi = poly.vertices.max(axis=0)
        pts = rng.uniform(lo, hi, size=(400, 2))
        r = 0.3 * R
        eroded = inner_parallel_body(poly, r)
        d = distance_to_boundary(poly, pts)
        inside = eroded.line_distances(pts).min(axis=1) > 0
        sure = np.abs(d - r) > 1e-9
        assert ((d > r) == inside)[sure].all()


class TestSingularRadius:
    def test_values(self, square):
        assert singular_radius(Ball(2, 0.7)) == 0.7
        assert singular_radius(square) == 0.0
        assert singular_radius(Rectangle(3, 1)) == 0.0


class TestEqualVolumeBall:
    def test_values(self, square):
        assert equal_volume_ball(Ball(2, 1.0)) == Ball(2, 1.0)
        assert equal_volume_ball(square).radius == pytest.approx(1 / math.sqrt(math.pi))
        assert equal_volume_ball(Rectangle(2, 1)).radius == pytest.approx(
            math.sqrt(2 / math.pi))
        assert equal_volume_ball(Ball(3, 2.0)).radius == pytest.approx(2.0)


class TestDomainFiles:
    def test_round_trip(self, tmp_path):
        specs = [
            {"type": "ball", "n": 2, "radius": 1.0},
            {"type": "rectangle", "a": 2.0, "b": 1.0},
            {"type": "polygon", "vertices": UNIT_SQUARE},
        ]
        for spec in specs:
            path = tmp_path / "dom.json"
            path.write_text(json.dumps(spec))
            dom = load_domain_file(path)
            assert dom.volume > 0

    def test_bad_specs(self, tmp_path):
        with pytest.raises(DomainError):
            domain_from_spec({"type": "torus"})
        with pytest.raises(DomainError):
            domain_from_spec({"type": "ball", "n": 2})
        with pytest.raises(DomainError):
            domain_from_spec({})
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(DomainError):
            load_domain_file(bad)
