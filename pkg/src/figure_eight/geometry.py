"""Planar geometric primitives: wedge products, signed curvature, tangent
lines, line intersections, the splitting predicate and the tangent-sweep
formula used by the lobe-convexity certification.

Sign conventions: wedge((x,y),(u,v)) = x*v - y*u, so a counterclockwise unit
circle has curvature +1.  All operations are pure functions on values and are
safe to call from any number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class AtInfinity:
    """Sentinel for a tangent line parallel to the reference line: the
    intersection point exists only projectively."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "AT_INFINITY"


AT_INFINITY = AtInfinity()

# |signed distance| below COLLINEAR_RTOL * (input scale) counts as "on the line"
COLLINEAR_RTOL = 1e-10

# directions u, v are parallel when |u ^ v| <= PARALLEL_RTOL * |u| * |v|
PARALLEL_RTOL = 1e-12


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class Line2:
    """Line through `point` with direction `direction` (need not be unit)."""

    point: Vec2
    direction: Vec2

    def __post_init__(self):
        if self.direction.x == 0.0 and self.direction.y == 0.0:
            raise ValueError("Line2 direction must be nonzero")


def wedge(u: Vec2, v: Vec2) -> float:
    """Planar wedge product x*v.y - y*v.x (twice the signed triangle area)."""
    return u.x * v.y - u.y * v.x


def curvature(vel: Vec2, acc: Vec2) -> float:
    """Signed curvature of a parameterized curve from velocity and acceleration.

    kappa = (vx*ay - vy*ax) / |v|^3.  Positive for counterclockwise motion.
    Raises ValueError on zero speed (degenerate parameterization).
    """
    speed = vel.norm()
    if speed == 0.0:
        raise ValueError("curvature undefined at zero speed (degenerate parameterization)")
    return wedge(vel, acc) / speed**3


def signed_distance(line: Line2, p: Vec2) -> float:
    """Perpendicular signed distance of p from the line (left of direction > 0)."""
    d = line.direction
    return wedge(d, p - line.point) / d.norm()


class SplitResult(Enum):
    SPLIT = "split"
    SAME_SIDE = "same_side"
    ON_LINE = "on_line"


def splits(line: Line2, p1: Vec2, p2: Vec2, tol: float | None = None) -> SplitResult:
    """Classify two points against a line: strictly opposite open half-planes
    (SPLIT), same closed side (SAME_SIDE), or either within the collinearity
    band (ON_LINE).

    The default band is COLLINEAR_RTOL times the scale of the inputs.
    """
    d1 = signed_distance(line, p1)
    d2 = signed_distance(line, p2)
    if tol is None:
        scale = max((p1 - line.point).norm(), (p2 - line.point).norm(), 1e-300)
        tol = COLLINEAR_RTOL * scale
    if abs(d1) <= tol or abs(d2) <= tol:
        return SplitResult.ON_LINE
    if d1 * d2 < 0.0:
        return SplitResult.SPLIT
    return SplitResult.SAME_SIDE


def _frame_coords(m: Line2, p: Vec2) -> tuple[float, float]:
    """Coordinates of p in the right-handed frame where m is the y-axis.

    x' is the perpendicular offset from m, y' the arc-length coordinate
    along m's (normalized) direction.
    """
    d = m.direction
    dn = d.norm()
    dx, dy = d.x / dn, d.y / dn
    rel = p - m.point
    return rel.x * dy - rel.y * dx, rel.x * dx + rel.y * dy


def tangent_line_intersection_param(curve_point: Vec2, curve_vel: Vec2, m: Line2):
    """Arc-length coordinate along m of the intersection of m with the tangent
    line at curve_point (direction curve_vel).

    Returns AT_INFINITY when the tangent is parallel to m.  In the frame where
    m is the y-axis this is p = -(x*vy' - y*vx') / vx'.
    """
    x, y = _frame_coords(m, curve_point)
    vx, vy = _frame_coords(m, m.point + curve_vel)
    if abs(vx) <= PARALLEL_RTOL * math.hypot(vx, vy):
        return AT_INFINITY
    return -(x * vy - y * vx) / vx


def dP_dt(curve_point: Vec2, vel: Vec2, acc: Vec2, m: Line2):
    """Velocity of the tangent/m intersection point along m.

    Equals -(v^3 * x / vx^2) * kappa in the frame where m is the y-axis; its
    sign certifies monotone sweep of the intersection for convex arcs.
    Returns AT_INFINITY at instants of parallelism.
    """
    speed = vel.norm()
    if speed == 0.0:
        raise ValueError("dP_dt undefined at zero speed (degenerate parameterization)")
    x, _ = _frame_coords(m, curve_point)
    vx, vy = _frame_coords(m, m.point + vel)
    if abs(vx) <= PARALLEL_RTOL * speed:
        return AT_INFINITY
    kappa = curvature(vel, acc)
    return -(speed**3) * x * kappa / vx**2


def line_intersection(l1: Line2, l2: Line2) -> Vec2 | None:
    """Intersection point of two lines, or None when they are parallel."""
    d1, d2 = l1.direction, l2.direction
    denom = wedge(d1, d2)
    if abs(denom) <= PARALLEL_RTOL * d1.norm() * d2.norm():
        return None
    s = wedge(l2.point - l1.point, d2) / denom
    return l1.point + s * d1

def concurrency_residual(l1: Line2, l2: Line2, l3: Line2) -> float:
    """Distance-based test that three lines meet in one point (or are all
    parallel): 0 exactly at concurrency, otherwise the smallest distance from
    a pairwise intersection to the remaining line, minimized over orderings.
    """
    lines = (l1, l2, l3)
    best = None
    for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        p = line_intersection(lines[i], lines[j])
        if p is None:
            continue
        d = abs(signed_distance(lines[k], p))
        if best is None or d < best:
            best = d
    if best is None:
        # all three mutually parallel: coincident at infinity by convention
        return 0.0
    return best
