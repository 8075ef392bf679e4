import math

import numpy as np
import pytest

from infbern import Ball, Polygon, Rectangle, build_profile
from infbern import bernoulli as bn
from infbern import solutions as sol
from infbern.errors import (
    DomainError,
    NotApplicableError,
    SolverDivergenceError,
)

PI = math.pi


def node_value(field, x, y):
    j = int(round((x - field.x0) / field.h))
    i = int(round((y - field.y0) / field.h))
    return field.values[i, j]


def mask_at(mask, x, y):
    j = int(round((x - mask.x0) / mask.h))
    i = int(round((y - mask.y0) / mask.h))
    return bool(mask.mask[i, j])


class TestConeSolution:
    def test_vanishes_at_incenter(self):
        f = sol.cone_solution(Ball(2, 1.0), 1.0, 1 / 64)
        assert node_value(f, 0.0, 0.0) == 0.0

    def test_linear_ramp(self):
        # dist = 1/6 at |x| = 5/6, slope 3 -> value 1/2.
        f = sol.cone_solution(Ball(2, 1.0), 1 / 3, 1 / 96)
        assert node_value(f, 5 / 6, 0.0) == pytest.approx(0.5, abs=1e-12)

    def test_square_center_in_core(self, square):
        f = sol.cone_solution(square, 1 / 6, 1 / 64)
        assert node_value(f, 0.5, 0.5) == 0.0

    def test_values_in_unit_interval(self, square):
        f = sol.cone_solution(square, 1 / 6, 1 / 64)
        vals = f.values[np.isfinite(f.values)]
        assert vals.min() >= 0.0 and vals.max() <= 1.0

    def test_positivity_set_is_annulus(self, square):
        f = sol.cone_solution(square, 1 / 6, 1 / 64)
        pos = np.nan_to_num(f.values, nan=0.0) > 0
        expected = (f.labels == sol.NodeLabel.INTERIOR) | \
                   (f.labels == sol.NodeLabel.OUTER_BOUNDARY)
        assert (pos == expected).all()

    def test_discrete_lipschitz_is_slope(self, square):
        for dom, r in ((square, 1 / 6), (Ball(2, 1.0), 1 / 3)):
            f = sol.cone_solution(dom, r, 1 / 64)
            assert f.discrete_lipschitz() == pytest.approx(1 / r, rel=1e-9)

    def test_rejects_bad_radius(self, square):
        with pytest.raises(DomainError):
            sol.cone_solution(square, 0.7, 1 / 64)
        with pytest.raises(DomainError):
            sol.cone_solution(square, 0.0, 1 / 64)
        with pytest.raises(DomainError):
            sol.cone_solution(Ball(3, 1.0), 0.3, 1 / 64)


class TestGridField:
    def test_csv_header_and_nans(self, tmp_path, square):
        f = sol.cone_solution(square, 1 / 6, 1 / 8)
        path = tmp_path / "field.csv"
        f.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "h=0.125 bbox=0,0,1,1"
        assert len(lines) == 1 + f.values.shape[0]
        disk_field = sol.cone_solution(Ball(2, 1.0), 0.5, 1 / 4)
        path2 = tmp_path / "disk.csv"
        disk_field.to_csv(path2)
        assert "nan" in path2.read_text()

    def test_labels_partition(self):
        f = sol.cone_solution(Ball(2, 1.0), 1 / 3, 1 / 32)
        labs = f.labels
        d = np.hypot(*np.meshgrid(
            f.x0 + f.h * np.arange(f.values.shape[1]),
            f.y0 + f.h * np.arange(f.values.shape[0])))
        assert (labs[d > 1 + 1e-9] == sol.NodeLabel.EXTERIOR).all()
        core = labs == sol.NodeLabel.CORE
        assert (d[core] <= 2 / 3 + 1e-9).all()


class TestInfinityPotential:
    def test_disk_matches_cone_everywhere(self):
        # Radial cones are already infinity harmonic in the annulus.
        h = 1 / 128
        r = 1 / 3
        w = sol.infinity_potential(Ball(2, 1.0), r, h)
        pts, selm = w.interior_points()
        d = 1.0 - np.linalg.norm(pts, axis=1)
        gap = np.abs(w.values[selm] - (1 - d / r))
        assert gap.max() <= 4 * (1 / r) * h

    def test_square_sandwich(self, square):
        h = 1 / 128
        w = sol.infinity_potential(square, 1 / 6, h)
        rep = sol.sandwich_report(w)
        assert rep.tolerance == pytest.approx(24 * h)
        assert rep.max_lower_violation <= rep.tolerance
        assert rep.max_upper_violation <= rep.tolerance
        assert rep.max_dhat_gap <= rep.tolerance

    def test_range_and_boundary_values(self, square):
        w = sol.infinity_potential(square, 1 / 6, 1 / 64)
        vals = w.values[np.isfinite(w.values)]
        assert vals.min() >= 0.0 and vals.max() <= 1.0
        assert (w.values[w.labels == sol.NodeLabel.CORE] == 0.0).all()
        assert (w.values[w.labels == sol.NodeLabel.OUTER_BOUNDARY] == 1.0).all()

    def test_deterministic(self, square):
        a = sol.infinity_potential(square, 1 / 6, 1 / 64)
        b = sol.infinity_potential(square, 1 / 6, 1 / 64)
        assert np.array_equal(a.values, b.values, equal_nan=True)

    def test_aml_lipschitz_desk_scale(self):
        # The potential is never steeper than the cone beyond the scheme's
        # one-cell error margin (frozen at this resolution); the scale-free
        # bound slope*sqrt(2) covers diagonal quotients across the core rim.
        disk = Ball(2, 1.0)
        prof = build_profile(disk)
        r3 = bn.find_r_lambda(prof, 3.0)
        h = 1 / 128
        w = sol.infinity_potential(disk, r3, h)
        v = sol.cone_solution(disk, r3, h)
        assert w.discrete_lipschitz() <= v.discrete_lipschitz() + 0.35
        assert w.discrete_lipschitz() <= math.sqrt(2) * (1 / r3) * 1.02

    def test_energy_optimality_witness(self):
        # Discrete energy (Lipschitz + weight * positivity area) of cone and
        # potential both land on the closed-form minimum.
        disk = Ball(2, 1.0)
        prof = build_profile(disk)
        r3 = bn.find_r_lambda(prof, 3.0)
        m3 = bn.m_lambda(prof, 3.0)
        h = 1 / 128
        w = sol.infinity_potential(disk, r3, h)
        v = sol.cone_solution(disk, r3, h)

        def energy(f):
            pos = (np.nan_to_num(f.values, nan=0.0) > 0) & \
                  (f.labels == sol.NodeLabel.INTERIOR)
            return f.discrete_lipschitz() + 3.0 * pos.sum() * h * h

        assert energy(v) == pytest.approx(m3, abs=0.05)
        assert abs(energy(w) - energy(v)) <= 0.4

    def test_rectangle_domain(self):
        rect = Rectangle(2.0, 1.0)
        w = sol.infinity_potential(rect, 0.2, 1 / 64)
        rep = sol.sandwich_report(w)
        assert rep.max_lower_violation <= rep.tolerance
        assert rep.max_upper_violation <= rep.tolerance
        assert rep.max_dhat_gap <= rep.tolerance

    def test_grid_too_coarse(self, square):
        with pytest.raises(DomainError):
            sol.infinity_potential(square, 1 / 6, 1 / 32)

    def test_divergence_error(self, square):
        with pytest.raises(SolverDivergenceError):
            sol.infinity_potential(square, 1 / 6, 1 / 64, tol=1e-30,
                                   max_sweeps=3)

    def test_bad_radius(self, square):
        with pytest.raises(DomainError):
            sol.infinity_potential(square, 0.6, 1 / 64)


class TestDHatMask:
    def test_ball_covers_annulus(self):
        m = sol.d_hat_mask(Ball(2, 1.0), 0.4, 1 / 64)
        f = sol.cone_solution(Ball(2, 1.0), 0.4, 1 / 64)
        assert (m.mask == (f.labels == sol.NodeLabel.INTERIOR)).all()

    def test_square_corner_fan_excluded(self, square):
        m = sol.d_hat_mask(square, 1 / 6, 1 / 64)
        assert not mask_at(m, 3 / 64, 3 / 64)   # ~(0.047, 0.047) corner fan
        assert mask_at(m, 0.5, 3 / 64)          # edge-normal strip

    def test_square_fans_are_corner_squares(self, square):
        r = 1 / 6
        m = sol.d_hat_mask(square, r, 1 / 128)
        f = sol.cone_solution(square, r, 1 / 128)
        xx, yy = f.node_coords()
        interior = f.labels == sol.NodeLabel.INTERIOR
        near = np.minimum(np.minimum(xx, 1 - xx), np.minimum(yy, 1 - yy))
        fan = interior & (np.minimum(xx, 1 - xx) < r) & \
            (np.minimum(yy, 1 - yy) < r)
        tol = 1.5 * (1 / 128)
        clear = np.abs(np.minimum(xx, 1 - xx) - r) > tol
        clear &= np.abs(np.minimum(yy, 1 - yy) - r) > tol
        sel = interior & clear & (near > 1e-9)
        assert (m.mask[sel] == ~fan[sel]).all()

    def test_subset_of_annulus(self, square):
        m = sol.d_hat_mask(square, 1 / 6, 1 / 64)
        f = sol.cone_solution(square, 1 / 6, 1 / 64)
        assert not (m.mask & (f.labels != sol.NodeLabel.INTERIOR)).any()

    def test_rectangle_strip(self):
        m = sol.d_hat_mask(Rectangle(2.0, 1.0), 0.2, 1 / 64)
        assert mask_at(m, 1.0, 0.1)
        assert not mask_at(m, 0.05, 0.05)


class TestQ1:
    def test_disk_at_threshold(self, disk_analysis):
        ans = sol.q1_answer(disk_analysis, disk_analysis.lambda_star)
        assert ans.slope == pytest.approx(3.0, abs=1e-8)
        assert ans.v_equals_w is False

    def test_disk_above_threshold(self, disk_analysis):
        ans = sol.q1_answer(disk_analysis, 3.0)
        assert ans.slope == pytest.approx(3.7107788172, abs=1e-6)
        assert ans.v_equals_w is True

    def test_square_at_threshold(self, square_analysis):
        ans = sol.q1_answer(square_analysis, square_analysis.lambda_star)
        assert ans.slope == pytest.approx(6.0, abs=1e-4)
        assert ans.v_equals_w is False

    def test_below_threshold_raises(self, disk_analysis):
        with pytest.raises(NotApplicableError):
            sol.q1_answer(disk_analysis, 1.0)


class TestQ2:
    def test_disk_below_cone_slope(self, disk_analysis):
        ans = sol.q2_answer(disk_analysis, 2.9)
        assert ans.exists is False

    def test_disk_above(self, disk_analysis):
        ans = sol.q2_answer(disk_analysis, 4.0)
        assert ans.exists is True
        assert ans.v_equals_w is True
        # matching weight puts the critical radius at 1/slope
        r = bn.find_r_lambda(disk_analysis.profile, ans.weight)
        assert r == pytest.approx(0.25, abs=1e-9)

    def test_square_never_coincides(self, square_analysis):
        ans = sol.q2_answer(square_analysis, 100.0)
        assert ans.exists is True
        assert ans.v_equals_w is False

    def test_below_inradius_slope_raises(self, disk_analysis):
        with pytest.raises(DomainError):
            sol.q2_answer(disk_analysis, 0.9)
