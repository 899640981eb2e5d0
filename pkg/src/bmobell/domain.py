"""Moment domain geometry.

Coordinates are x = (x1, x2, x3) = (mean, second moment, p-th absolute
moment) of a function whose mean oscillation is bounded by eps.  The 2d
carrier is the parabolic strip x1^2 <= x2 <= x1^2 + eps^2; the reachable
x3 values form an interval between two explicit envelope surfaces built
from tangent chords of the lower parabola.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError
from .specfn import k_fn, m_fn

# absolute slack applied to every inequality test on moment coordinates
MEMBERSHIP_TOL = 1e-12


class Regime(enum.Enum):
    MAX = "max"
    MIN = "min"
    DEGENERATE = "degenerate"


class Region(enum.Enum):
    XI_ZERO = "XiZero"
    XI_PLUS = "XiPlus"
    XI_MINUS = "XiMinus"
    SKELETON = "Skeleton"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class Params:
    """Exponent pair and oscillation scale for one Bellman problem.

    p = 2 is rejected outright: the second moment coordinate makes that
    case trivial and every formula below divides by quantities that vanish
    there.
    """

    p: float
    r: float
    eps: float = 1.0

    def __post_init__(self):
        if not self.p >= 1:
            raise DomainError(f"p must be >= 1, got {self.p}")
        if self.p == 2:
            raise DomainError("p = 2 is degenerate in the base exponent and is not supported")
        if not self.r >= 1:
            raise DomainError(f"r must be >= 1, got {self.r}")
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")

    @property
    def regime(self) -> Regime:
        s = (self.r - 2.0) * (self.p - self.r)
        if s < 0:
            return Regime.MAX
        if s > 0:
            return Regime.MIN
        return Regime.DEGENERATE


def omega2_contains(eps: float, x1: float, x2: float, tol: float = MEMBERSHIP_TOL) -> bool:
    """Whether (x1, x2) lies in the parabolic strip of width eps^2."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    return x1 * x1 - tol <= x2 <= x1 * x1 + eps * eps + tol


def tangent_params(eps: float, x1: float, x2: float) -> tuple[float, float]:
    """Chord parameters (u_plus, u_minus) of the two extreme tangent chords
    through (x1, x2).

    u_plus tags the forward chord from (u, u^2) to (u+eps, (u+eps)^2+eps^2),
    u_minus the backward one.  Both satisfy u_plus <= x1 <= u_minus.
    """
    if not omega2_contains(eps, x1, x2):
        raise DomainError(f"point ({x1}, {x2}) outside the strip for eps = {eps}")
    disc = eps * eps - (x2 - x1 * x1)
    d = math.sqrt(min(max(disc, 0.0), eps * eps))
    return x1 - eps + d, x1 + eps - d


def a_m(p: float, eps: float, x1: float, x2: float) -> float:
    """Envelope surface built from the outward transform m.

    Tangent chord extension u^p + m(u)(x1-u) away from the centre, matched
    across the central triangle by the ray value m(0) * x2 / (2 eps).
    Even in x1.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    a1 = abs(x1)
    up, _ = tangent_params(eps, a1, x2)
    if up > 0.0:
        return up ** p + m_fn(p, eps, up) * (a1 - up)
    return m_fn(p, eps, 0.0) * x2 / (2.0 * eps)


def a_k(p: float, eps: float, x1: float, x2: float) -> float:
    """Envelope surface built from the backward transform k.

    Below the level x2 = eps^2 it is the pure power cup x2^(p/2); above,
    the backward tangent chord extension u^p + k(u)(x1-u).  Even in x1.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    a1 = abs(x1)
    _, um = tangent_params(eps, a1, x2)
    if x2 <= eps * eps:
        return x2 ** (p / 2.0)
    return um ** p + k_fn(p, eps, um) * (a1 - um)


def bellman2d(params: Params, x1: float, x2: float, side: str) -> float:
    """Upper or lower extremal p-th moment over the strip point (x1, x2).

    For p > 2 the m-surface dominates the k-surface; for p < 2 the roles
    swap.
    """
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")
    m_is_upper = params.p > 2
    want_m = (side == "upper") == m_is_upper
    if want_m:
        return a_m(params.p, params.eps, x1, x2)
    return a_k(params.p, params.eps, x1, x2)


def omega3_contains(params: Params, x, tol: float = MEMBERSHIP_TOL) -> bool:
    """Whether x = (x1, x2, x3) is a reachable moment triple."""
    x1, x2, x3 = (float(v) for v in x)
    if not omega2_contains(params.eps, x1, x2, tol):
        return False
    lo = bellman2d(params, x1, x2, "lower")
    hi = bellman2d(params, x1, x2, "upper")
    return lo - tol <= x3 <= hi + tol


def transition_level(params: Params, x2: float) -> float:
    """x3 level of the flat transition leaf at chord parameter eps."""
    p, eps = params.p, params.eps
    return eps ** p + (x2 - eps * eps) * m_fn(p, eps, eps) / (4.0 * eps)


def classify(params: Params, x, tol: float = MEMBERSHIP_TOL) -> Region:
    """Assign x to its foliation region.

    Skeleton points (x2 = x1^2) are tagged first; the central region
    XI_ZERO collects everything on its side of the transition leaf, ties
    included; the rest splits by the sign of x1.
    """
    x1, x2, x3 = (float(v) for v in x)
    if not omega3_contains(params, x, tol):
        return Region.OUTSIDE
    if x2 - x1 * x1 <= tol:
        return Region.SKELETON
    p, eps = params.p, params.eps
    if abs(x1) <= 2.0 * eps + tol and x2 >= 4.0 * eps * abs(x1) - 3.0 * eps * eps - tol:
        if (p - 2.0) * (x3 - transition_level(params, x2)) >= -tol:
            return Region.XI_ZERO
    if x1 >= 0.0:
        return Region.XI_PLUS
    return Region.XI_MINUS
