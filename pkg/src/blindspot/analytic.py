"""Closed-form and quadrature evaluation of blind-spot probabilities.

The area of the line-of-sight cell around the target follows the
Poisson-Voronoi cell-area law with parameter ``lambda0 / 4``, approximated
by a three-parameter (generalised) Gamma density. All blind-spot
probabilities are Poisson lower tails ``P(N <= k_min - 1)`` of the number of
visible anchors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special


class NumericalError(RuntimeError):
    """A quadrature or root search failed to converge."""


@dataclass(frozen=True)
class GammaFitConstants:
    a: float = 1.07950
    b: float = 3.03226
    c: float = 3.31122

    @property
    def shape(self) -> float:
        return self.c / self.a

    @property
    def log_norm(self) -> float:
        # log of a * b^(c/a) / Gamma(c/a)
        return math.log(self.a) + self.shape * math.log(self.b) - math.lgamma(self.shape)


GAMMA_FIT = GammaFitConstants()

QUAD_EPSREL = 1e-8
TAIL_MASS = 1e-12


def _check_k(k_min: int) -> int:
    if int(k_min) != k_min or k_min < 1:
        raise ValueError(f"k_min must be an integer >= 1, got {k_min}")
    return int(k_min)


def poisson_lower_tail(mean: float, k_min: int = 3) -> float:
    """P(Poisson(mean) <= k_min - 1), accumulated in log space."""
    k_min = _check_k(k_min)
    if mean < 0 or math.isnan(mean):
        raise ValueError(f"Poisson mean must be >= 0, got {mean}")
    if mean == 0:
        return 1.0
    if math.isinf(mean):
        return 0.0
    log_m = math.log(mean)
    logs = [k * log_m - mean - math.lgamma(k + 1) for k in range(k_min)]
    top = max(logs)
    total = top + math.log(math.fsum(math.exp(v - top) for v in logs))
    return min(1.0, math.exp(total))


def conditional_blindspot(lam: float, area: float, k_min: int = 3) -> float:
    """Blind-spot probability given the visible area: fewer than ``k_min`` anchors in it."""
    if lam < 0 or area < 0:
        raise ValueError("lam and area must be >= 0")
    return poisson_lower_tail(lam * area, k_min)


def _log_unit_pdf(u):
    # density of the normalised area u = (lambda0 / 4) * A
    g = GAMMA_FIT
    return g.log_norm + (g.c - 1.0) * np.log(u) - g.b * u**g.a


def gamma_cell_area_pdf(area, lambda0: float):
    """Gamma-fit density of the LoS cell area at obstacle intensity ``lambda0``."""
    if not lambda0 > 0:
        raise ValueError(f"lambda0 must be > 0, got {lambda0}")
    scale = lambda0 / 4.0
    a = np.asarray(area, dtype=float)
    out = np.zeros_like(a)
    pos = a > 0
    out[pos] = scale * np.exp(_log_unit_pdf(scale * a[pos]))
    return float(out) if out.ndim == 0 else out


def gamma_cell_area_cdf(area, lambda0: float):
    if not lambda0 > 0:
        raise ValueError(f"lambda0 must be > 0, got {lambda0}")
    g = GAMMA_FIT
    u = np.clip(np.asarray(area, dtype=float) * (lambda0 / 4.0), 0.0, None)
    out = special.gammainc(g.shape, g.b * u**g.a)
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def unit_area_cutoff(tail_mass: float = TAIL_MASS) -> float:
    """Normalised area beyond which the Gamma fit has mass below ``tail_mass``."""
    g = GAMMA_FIT
    x = special.gammainccinv(g.shape, tail_mass)
    return (x / g.b) ** (1.0 / g.a)


@lru_cache(maxsize=4096)
def _asymptotic_from_ratio(ratio: float, k_min: int) -> float:
    m = 4.0 * ratio  # mean anchor count per unit normalised area
    u_max = unit_area_cutoff()

    def integrand(u):
        if u <= 0:
            return 0.0
        return poisson_lower_tail(m * u, k_min) * math.exp(float(_log_unit_pdf(u)))

    # the Poisson factor drops over u ~ k_min / m; give quad that breakpoint
    knee = min(k_min / m, 0.5 * u_max)
    value, abserr, info, *rest = integrate.quad(
        integrand, 0.0, u_max, epsabs=1e-14, epsrel=QUAD_EPSREL, limit=500,
        points=[knee], full_output=1,
    )
    if rest:
        raise NumericalError(f"quadrature did not converge for lam/lam0={ratio}: {rest[0]}")
    return min(1.0, max(0.0, value))


def asymptotic_blindspot(lam: float, lam0: float, k_min: int = 3) -> float:
    """Blind-spot probability under infinitely long obstacles.

    Depends on the intensities only through ``lam / lam0``.
    """
    k_min = _check_k(k_min)
    if not (lam >= 0 and math.isfinite(lam)):
        raise ValueError(f"lam must be finite and >= 0, got {lam}")
    if not lam0 > 0:
        raise ValueError(f"lam0 must be > 0, got {lam0}")
    if lam == 0:
        return 1.0
    return _asymptotic_from_ratio(lam / lam0, k_min)


def visibility_probability(r: float, lam0: float) -> float:
    """Probability that a point at distance ``r`` sees the origin past every line."""
    if r < 0 or lam0 < 0:
        raise ValueError("r and lam0 must be >= 0")
    return math.exp(-lam0 * math.pi * r * r / 4.0)


def min_lambda0_for_delta(R: float, delta: float) -> float:
    """Smallest line intensity with ``visibility_probability(R, .) <= delta``."""
    if not R > 0:
        raise ValueError(f"R must be > 0, got {R}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return -4.0 * math.log(delta) / (math.pi * R * R)


def containment_met(lam0: float, R: float, delta: float) -> bool:
    return visibility_probability(R, lam0) < delta


def mean_visible_area_lines(lam: float, lam0: float, R: float) -> tuple[float, float]:
    """Mean LoS area inside the disk of radius ``R`` under independent blocking.

    Returns ``(E[A], lam * E[A])``. ``lam0 = 0`` gives the obstacle-free limit.
    """
    if lam < 0 or lam0 < 0 or not R > 0:
        raise ValueError("need lam >= 0, lam0 >= 0, R > 0")
    if lam0 == 0:
        area = math.pi * R * R
    else:
        area = -4.0 / lam0 * math.expm1(-lam0 * math.pi * R * R / 4.0)
    return area, lam * area


def independent_blindspot_lines(lam: float, lam0: float, R: float, k_min: int = 3) -> float:
    """Blind-spot probability if each anchor were blocked independently.

    Uses the Poisson tail at mean ``lam * E[A]``; the squared term carries
    the factor ``lam`` like every other term of the Poisson CDF.
    """
    _, mean = mean_visible_area_lines(lam, lam0, R)
    return poisson_lower_tail(mean, k_min)


def independent_blindspot_segments(
    lam: float, lam0: float, L: float, R: float, k_min: int = 3, *, mean_Bv: float
) -> float:
    """Independent-blocking blind-spot probability for length-``L`` obstacles.

    ``mean_Bv`` is the mean unshadowed area, estimated by simulation;
    ``lam0`` and ``L`` are carried for bookkeeping only.
    """
    if not 0 <= mean_Bv <= math.pi * R * R:
        raise ValueError(f"mean_Bv must lie in [0, pi R^2], got {mean_Bv}")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    return poisson_lower_tail(lam * mean_Bv, k_min)


def design_anchor_intensity(
    lam0: float, epsilon: float, k_min: int = 3, max_iter: int = 200
) -> float:
    """Anchor intensity at which the asymptotic blind-spot probability drops to ``epsilon``.

    Returns the upper end of the final bisection bracket, so the achieved
    probability is at most ``epsilon``.
    """
    if not lam0 > 0:
        raise ValueError(f"lam0 must be > 0, got {lam0}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    k_min = _check_k(k_min)

    def b(x):
        return asymptotic_blindspot(x, lam0, k_min)

    lo, hi = 0.0, lam0
    for _ in range(max_iter):
        if b(hi) < epsilon:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericalError("could not bracket the design intensity")

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-14 * hi:
            break
        if b(mid) < epsilon:
            hi = mid
        else:
            lo = mid
    achieved = b(hi)
    if not (epsilon - 1e-6 <= achieved <= epsilon):
        raise NumericalError(f"bisection ended at b_as={achieved} for epsilon={epsilon}")
    return hi
