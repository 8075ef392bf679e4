"""Threshold constants and energy landscape of the supremal free-boundary
problem on a convex domain.

Everything here is driven by the parallel-set profile r -> (V(r), P(r)).
The cone competitor with slope 1/r has energy gap

    f_L(r) = 1/r - L * V(r),      f_L'(r) = -1/r**2 + L * P(r)

against the constant competitor. The machinery below locates:

* r_star, the unique radius with P/V = 1/r (also the argmax of r*V(r)),
* lambda_star = 1/(r_star * V(r_star)), the threshold weight above which a
  non-constant minimizer exists,
* lambda_prime < lambda_star, where f_L first develops a critical point,
* r_lambda and rho_lambda, the smallest/largest roots of f_L' = 0,
* mu_lambda = min f_L and m_lambda, the minimum energy itself.

Root brackets come from monotonicity facts that hold for every convex
domain (P/V increasing, (L*P)^(1/(n-1)) concave vs r^(-2/(n-1)) convex), so
plain bisection is guaranteed to converge; correctness over speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DomainError,
    GeometryInconsistencyError,
    NoRootError,
    ProfileResolutionError,
)
from .geometry import ParallelSetProfile, singular_radius

_MAX_BISECT = 200

# CLI-facing override for the bisection tolerance; None keeps the
# mode-based defaults.
ROOT_RTOL_OVERRIDE: float | None = None


def _rtol(profile: ParallelSetProfile) -> float:
    if ROOT_RTOL_OVERRIDE is not None:
        return ROOT_RTOL_OVERRIDE
    return 1e-12 if profile.mode == "analytic" else 1e-8


def f_lambda(profile: ParallelSetProfile, lam: float, r):
    """Energy gap 1/r - lam * V(r) between the slope-1/r cone and u == 1."""
    if lam < 0:
        raise DomainError(f"weight must be >= 0, got {lam}")
    r_arr = np.asarray(r, dtype=float)
    if (r_arr <= 0).any():
        raise DomainError("f_lambda needs r > 0")
    out = 1.0 / r_arr - lam * profile.volume(r_arr)
    return out if np.ndim(r) else float(out)


def f_lambda_derivative(profile: ParallelSetProfile, lam: float, r):
    """Companion derivative -1/r**2 + lam * P(r)."""
    if lam < 0:
        raise DomainError(f"weight must be >= 0, got {lam}")
    r_arr = np.asarray(r, dtype=float)
    if (r_arr <= 0).any():
        raise DomainError("f_lambda_derivative needs r > 0")
    out = -1.0 / r_arr ** 2 + lam * profile.perimeter(r_arr)
    return out if np.ndim(r) else float(out)


def _critical_gap(profile, lam, r):
    """(lam*P)^(1/(n-1)) - r^(-2/(n-1)): same sign as f_lambda', concave in r.

    Concavity (boundary-measure root concave by Brunn-Minkowski, power of r
    convex) makes the maximum unimodal and the two roots bracketable.
    """
    q = 1.0 / (profile.n - 1)
    r = np.asarray(r, dtype=float)
    return (lam * profile.perimeter(r)) ** q - r ** (-2.0 * q)


def _argmax_concave(fun, lo, hi, coarse=4096, refine=2):
    """Argmax of a concave-ish scalar map via grid scan plus zoomed rescans."""
    grid = np.linspace(lo, hi, coarse)
    vals = fun(grid)
    i = int(np.argmax(vals))
    for _ in range(refine):
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, len(grid) - 1)]
        grid = np.linspace(a, b, 65)
        vals = fun(grid)
        i = int(np.argmax(vals))
    # Golden-section polish inside the final cell.
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(80):
        if b - a < 1e-14 * max(abs(a), abs(b), 1.0):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, float(fun(x))


def _bisect(fun, lo, hi, rtol):
    flo = fun(lo)
    for _ in range(_MAX_BISECT):
        if hi - lo <= rtol * hi:
            break
        mid = 0.5 * (lo + hi)
        if (fun(mid) < 0) == (flo < 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_r_star(profile: ParallelSetProfile) -> float:
    """The unique radius where P(r)/V(r) = 1/r.

    Bisection on r*P(r) - V(r), which changes sign exactly once on
    (0, R_Omega); the result is cross-checked against the argmax of
    r * V(r), which the same radius must maximize.
    """
    R = profile.R_Omega
    lo, hi = R * 1e-12, R * (1 - 1e-12)
    t = lambda r: r * profile.perimeter(r) - profile.volume(r)
    if not (t(lo) < 0 and t(hi) > 0):
        raise ProfileResolutionError(
            "no sign change for r*P - V on the profile grid; refine samples"
        )
    r_star = _bisect(t, lo, hi, _rtol(profile))

    r_max, _ = _argmax_concave(lambda r: r * profile.volume(r), lo, hi)
    if profile.mode == "analytic":
        if abs(r_star - r_max) > 1e-8 * R:
            raise GeometryInconsistencyError(
                f"r_star cross-check failed: root {r_star} vs argmax {r_max}"
            )
    else:
        i = int(np.searchsorted(profile.r_grid, r_star))
        i = min(max(i, 1), len(profile.r_grid) - 1)
        spacing = profile.r_grid[i] - profile.r_grid[i - 1]
        if abs(r_star - r_max) > 2 * spacing + 1e-8 * R:
            raise GeometryInconsistencyError(
                f"r_star cross-check failed: root {r_star} vs argmax {r_max}"
            )
    return r_star


def lambda_infinity(profile: ParallelSetProfile) -> float:
    """Threshold weight 1/(r_star * V(r_star))."""
    r_star = find_r_star(profile)
    return 1.0 / (r_star * profile.volume(r_star))


def _max_critical_gap(profile, lam):
    R = profile.R_Omega
    return _argmax_concave(lambda r: _critical_gap(profile, lam, r),
                           R * 1e-9, R * (1 - 1e-12))


def lambda_prime(profile: ParallelSetProfile) -> float:
    """The weight at which f_lambda' first acquires a (double) root.

    Outer bisection over the weight of max_r of the critical gap, which is
    increasing in the weight and crosses zero exactly at the flex threshold.
    """
    lam_hi = lambda_infinity(profile)
    lam_lo = lam_hi * 1e-8
    h = lambda lam: _max_critical_gap(profile, lam)[1]
    if h(lam_lo) >= 0:
        raise GeometryInconsistencyError("critical gap positive at tiny weight")
    hi_val = h(lam_hi)
    while hi_val < 0:
        lam_hi *= 2
        hi_val = h(lam_hi)
        if lam_hi > 1e12 * lam_lo:
            raise GeometryInconsistencyError("no flex threshold found")
    lo, hi = lam_lo, lam_hi
    for _ in range(_MAX_BISECT):
        if hi - lo <= _rtol(profile) * hi:
            break
        mid = 0.5 * (lo + hi)
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_r_lambda(profile: ParallelSetProfile, lam: float) -> float:
    """Smallest root of 1/r**2 = lam * P(r): the local minimizer of f_lambda.

    Defined for lam >= lambda_prime; raises NoRootError below. Strictly
    decreasing in lam.
    """
    if lam <= 0:
        raise DomainError(f"weight must be > 0, got {lam}")
    R = profile.R_Omega
    r_max, g_max = _max_critical_gap(profile, lam)
    if g_max < 0:
        scale = r_max ** (-2.0 / (profile.n - 1))
        if g_max > -1e-9 * scale:
            return r_max  # double root at the flex weight
        raise NoRootError(f"no critical point: weight {lam} below threshold")
    g = lambda r: _critical_gap(profile, lam, r)
    lo = R * 1e-12
    if g(lo) >= 0:
        raise GeometryInconsistencyError("critical gap positive near r=0")
    return _bisect(g, lo, r_max, _rtol(profile))


def find_rho_lambda(profile: ParallelSetProfile, lam: float) -> float:
    """Largest root of 1/r**2 = lam * P(r): the local maximizer of f_lambda.

    Equals find_r_lambda exactly at the flex weight and is nondecreasing in
    lam. When the boundary measure does not vanish at the inradius (long
    rectangles at large weights), f_lambda' can stay positive all the way to
    R_Omega; the supremum of the increasing region, R_Omega, is returned.
    """
    if lam <= 0:
        raise DomainError(f"weight must be > 0, got {lam}")
    R = profile.R_Omega
    r_max, g_max = _max_critical_gap(profile, lam)
    if g_max < 0:
        scale = r_max ** (-2.0 / (profile.n - 1))
        if g_max > -1e-9 * scale:
            return r_max
        raise NoRootError(f"no critical point: weight {lam} below threshold")
    g = lambda r: _critical_gap(profile, lam, r)
    hi = R * (1 - 1e-12)
    if g(hi) >= 0:
        return R
    return _bisect(g, r_max, hi, _rtol(profile))


def mu_lambda(profile: ParallelSetProfile, lam: float) -> float:
    """Minimum of f_lambda over (0, R_Omega].

    Equals 1/R_Omega below the flex threshold; above it the interior local
    minimum competes with the right endpoint.
    """
    if lam <= 0:
        raise DomainError(f"weight must be > 0, got {lam}")
    end_val = 1.0 / profile.R_Omega
    try:
        r_lam = find_r_lambda(profile, lam)
    except NoRootError:
        return end_val
    return min(end_val, f_lambda(profile, lam, r_lam))


def m_lambda(profile: ParallelSetProfile, lam: float) -> float:
    """Minimum energy of the free-boundary problem at weight lam.

    lam * |Omega| up to the threshold weight; beyond it the optimal cone
    pays 1/r_lambda for its slope plus lam times its positivity set.
    """
    if lam <= 0:
        raise DomainError(f"weight must be > 0, got {lam}")
    vol = profile.domain.volume
    if lam <= lambda_infinity(profile):
        return lam * vol
    r_lam = find_r_lambda(profile, lam)
    return 1.0 / r_lam + lam * (vol - profile.volume(r_lam))


class SolutionKind(Enum):
    ONLY_CONSTANT = "OnlyConstant"
    CONSTANT_AND_NONCONSTANT = "ConstantAndNonconstant"
    NONCONSTANT_UNIQUE = "NonconstantUnique"
    NONCONSTANT_MULTIPLE = "NonconstantMultiple"


@dataclass(frozen=True)
class SolutionClassification:
    kind: SolutionKind
    r_lambda: float | None
    m_lambda: float


@dataclass(frozen=True)
class BernoulliAnalysis:
    """All threshold constants of one domain, computed once and shared."""

    profile: ParallelSetProfile
    r_star: float
    lambda_star: float
    lambda_prime: float
    r_sing: float
    phi_max: float


def analyze(profile: ParallelSetProfile) -> BernoulliAnalysis:
    r_star = find_r_star(profile)
    lam_star = 1.0 / (r_star * profile.volume(r_star))
    lam_prime = lambda_prime(profile)
    if not (0 < lam_prime < lam_star):
        raise GeometryInconsistencyError(
            f"threshold ordering violated: {lam_prime} vs {lam_star}"
        )
    return BernoulliAnalysis(
        profile=profile,
        r_star=r_star,
        lambda_star=lam_star,
        lambda_prime=lam_prime,
        r_sing=singular_radius(profile.domain),
        phi_max=r_star * profile.volume(r_star),
    )


def classify(analysis: BernoulliAnalysis, lam: float,
             tie_rtol: float = 1e-9) -> SolutionClassification:
    """Existence/uniqueness class of minimizers at weight lam.

    Below the threshold only the constant solves; at the threshold the cone
    v_{r_star} joins it; above, the cone v_{r_lambda} is the unique solution
    exactly when r_lambda <= r_sing (kink-free positivity annulus),
    otherwise the smooth potential provides a second minimizer.

    Weights within tie_rtol (relative) of the threshold are treated as equal
    to it; exact float equality would be meaningless for sampled profiles.
    """
    if lam <= 0:
        raise DomainError(f"weight must be > 0, got {lam}")
    profile = analysis.profile
    lam_star = analysis.lambda_star
    if lam < lam_star * (1 - tie_rtol):
        return SolutionClassification(SolutionKind.ONLY_CONSTANT, None,
                                      m_lambda(profile, lam))
    if lam <= lam_star * (1 + tie_rtol):
        return SolutionClassification(SolutionKind.CONSTANT_AND_NONCONSTANT,
                                      analysis.r_star,
                                      lam * profile.domain.volume)
    r_lam = find_r_lambda(profile, lam)
    m_val = 1.0 / r_lam + lam * (profile.domain.volume - profile.volume(r_lam))
    if r_lam <= analysis.r_sing + 1e-12 * profile.R_Omega:
        kind = SolutionKind.NONCONSTANT_UNIQUE
    else:
        kind = SolutionKind.NONCONSTANT_MULTIPLE
    return SolutionClassification(kind, r_lam, m_val)
