"""Heisenberg group arithmetic on R^3 and the two metrics used everywhere else.

Points are triples (x, y, t). The group product twists the vertical
coordinate by twice the signed area of the horizontal parallelogram:

    (x, y, t) * (x', y', t') = (x + x', y + y', t + t' + 2(x y' - x' y))

and the homogeneous metric is the fourth-root gauge

    d_H(p, q)^4 = ((x - x')^2 + (y - y')^2)^2 + (t - t' - 2(x' y - x y'))^2

with p = (x, y, t) unprimed and q primed.  With this pairing d_H is exactly
the gauge norm of q^{-1} * p, so left invariance and scaling under the
anisotropic dilation (x, y, t) -> (lx, ly, l^2 t) hold to machine precision.

The horizontal plane through p = (x0, y0, t0) is the affine plane

    t0 - t - 2(x y0 - y x0) = 0

whose Euclidean point-plane distance carries the normalization
1 / sqrt(1 + 4(x0^2 + y0^2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class MetricKind(Enum):
    EUCLIDEAN = "euclidean"
    HEISENBERG = "heisenberg"


@dataclass(frozen=True, slots=True)
class Point:
    """A point of the group, coordinates (x, y, t). Coordinates must be finite."""

    x: float
    y: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.t)):
            raise ValueError(f"non-finite point coordinates: ({self.x}, {self.y}, {self.t})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.t], dtype=float)

    @staticmethod
    def from_array(a) -> "Point":
        return Point(float(a[0]), float(a[1]), float(a[2]))


ORIGIN = Point(0.0, 0.0, 0.0)


@dataclass(frozen=True, slots=True)
class HorizontalPlane:
    """The horizontal plane through its base point."""

    base: Point

    def normal_scale(self) -> float:
        """sqrt(1 + 4(x0^2 + y0^2)), the Euclidean norm of the plane normal."""
        b = self.base
        return math.sqrt(1.0 + 4.0 * (b.x * b.x + b.y * b.y))


def group_mul(p: Point, q: Point) -> Point:
    """Group product p * q (non-commutative)."""
    return Point(
        p.x + q.x,
        p.y + q.y,
        p.t + q.t + 2.0 * (p.x * q.y - q.x * p.y),
    )


def group_inv(p: Point) -> Point:
    """Group inverse; coordinate negation, since the twist vanishes on (p, p^-1)."""
    return Point(-p.x, -p.y, -p.t)


def dilate(p: Point, lam: float) -> Point:
    """Anisotropic dilation (lx, ly, l^2 t). Requires lam > 0."""
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError(f"dilation factor must be positive and finite, got {lam}")
    return Point(lam * p.x, lam * p.y, lam * lam * p.t)


def _twist(p: Point, q: Point) -> float:
    # t - t' - 2(x'y - xy'); equals minus the residual of q against the plane at p
    return p.t - q.t - 2.0 * (q.x * p.y - p.x * q.y)


def dist(p: Point, q: Point, metric: MetricKind) -> float:
    """Distance between p and q in the requested metric."""
    if metric is MetricKind.EUCLIDEAN:
        return math.hypot(p.x - q.x, p.y - q.y, p.t - q.t)
    dx = p.x - q.x
    dy = p.y - q.y
    horiz = dx * dx + dy * dy
    tw = _twist(p, q)
    return (horiz * horiz + tw * tw) ** 0.25


def plane_residual(q: Point, plane: HorizontalPlane) -> float:
    """Signed defining expression t0 - t - 2(x*y0 - y*x0); zero iff q lies on the plane."""
    b = plane.base
    return b.t - q.t - 2.0 * (q.x * b.y - q.y * b.x)


def dist_to_plane(q: Point, plane: HorizontalPlane) -> float:
    """Euclidean distance from q to the plane."""
    return abs(plane_residual(q, plane)) / plane.normal_scale()


def in_neighborhood(q: Point, plane: HorizontalPlane, rho: float) -> bool:
    """Membership in the closed Euclidean rho-neighborhood of the plane."""
    if rho < 0.0 or not math.isfinite(rho):
        raise ValueError(f"neighborhood radius must be >= 0, got {rho}")
    return dist_to_plane(q, plane) <= rho


def beta_minus(s: float) -> float:
    """Lower dimension-comparison bound max{s, 2s - 2}."""
    if s < 0.0:
        raise ValueError(f"exponent must be >= 0, got {s}")
    return max(s, 2.0 * s - 2.0)


def beta_plus(s: float) -> float:
    """Upper dimension-comparison bound min{2s, s + 1}."""
    if s < 0.0:
        raise ValueError(f"exponent must be >= 0, got {s}")
    return min(2.0 * s, s + 1.0)


# ---------------------------------------------------------------------------
# vectorized forms; these are the single source of the same formulas for the
# array-heavy modules (covering counts, density probes)

def as_points_array(points) -> np.ndarray:
    a = np.asarray(points, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, 3)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array of points, got shape {a.shape}")
    return a


def dist_many(points, p: Point, metric: MetricKind) -> np.ndarray:
    """Distances from each row of `points` to the single point p."""
    a = as_points_array(points)
    dx = a[:, 0] - p.x
    dy = a[:, 1] - p.y
    if metric is MetricKind.EUCLIDEAN:
        dt = a[:, 2] - p.t
        return np.sqrt(dx * dx + dy * dy + dt * dt)
    horiz = dx * dx + dy * dy
    tw = a[:, 2] - p.t - 2.0 * (p.x * a[:, 1] - a[:, 0] * p.y)
    return (horiz * horiz + tw * tw) ** 0.25


def dist_pairs(P, Q, metric: MetricKind) -> np.ndarray:
    """Row-wise distances between two (n, 3) arrays."""
    P = as_points_array(P)
    Q = as_points_array(Q)
    dx = P[:, 0] - Q[:, 0]
    dy = P[:, 1] - Q[:, 1]
    if metric is MetricKind.EUCLIDEAN:
        dt = P[:, 2] - Q[:, 2]
        return np.sqrt(dx * dx + dy * dy + dt * dt)
    horiz = dx * dx + dy * dy
    tw = P[:, 2] - Q[:, 2] - 2.0 * (Q[:, 0] * P[:, 1] - P[:, 0] * Q[:, 1])
    return (horiz * horiz + tw * tw) ** 0.25


def plane_dist_many(points, plane: HorizontalPlane) -> np.ndarray:
    """Euclidean distances from each row of `points` to the plane."""
    a = as_points_array(points)
    b = plane.base
    res = b.t - a[:, 2] - 2.0 * (a[:, 0] * b.y - a[:, 1] * b.x)
    return np.abs(res) / plane.normal_scale()


def group_mul_many(p: Point, points) -> np.ndarray:
    """Left translation p * q for each row q of `points`."""
    a = as_points_array(points)
    out = np.empty_like(a)
    out[:, 0] = p.x + a[:, 0]
    out[:, 1] = p.y + a[:, 1]
    out[:, 2] = p.t + a[:, 2] + 2.0 * (p.x * a[:, 1] - a[:, 0] * p.y)
    return out


def dilate_many(points, lam: float) -> np.ndarray:
    if not lam > 0.0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    a = as_points_array(points)
    out = np.empty_like(a)
    out[:, 0] = lam * a[:, 0]
    out[:, 1] = lam * a[:, 1]
    out[:, 2] = (lam * lam) * a[:, 2]
    return out
