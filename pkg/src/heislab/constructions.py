"""Constructions of the fractal point clouds: alternating rectangle families in
the vertical plane {y=0}, the Heisenberg square and Cantor iterated function
systems, and the vertical product set, all with exact per-piece measure weights.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hgeom import ORIGIN, Point, dilate_many, group_mul, group_mul_many, dilate

MAX_POINTS = 10**7


class ResourceLimitError(Exception):
    """A construction would exceed the point / rectangle budget."""


@dataclass(frozen=True, slots=True)
class Rect2:
    """Axis-aligned rectangle [a, b] x [c, d] in the (x, t) chart of {y = 0}."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a < self.b and self.c < self.d):
            raise ValueError(f"degenerate rectangle [{self.a},{self.b}]x[{self.c},{self.d}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def height(self) -> float:
        return self.d - self.c

    def center(self) -> Point:
        return Point(0.5 * (self.a + self.b), 0.0, 0.5 * (self.c + self.d))

    def contains(self, other: "Rect2") -> bool:
        return self.a <= other.a and other.b <= self.b and self.c <= other.c and other.d <= self.d


@dataclass(slots=True)
class RectFamily:
    """One generation of the rectangle construction: all rects share side lengths h x v."""

    level: int
    rects: list[Rect2]
    h: float
    v: float

    def __post_init__(self):
        for r in self.rects:
            if r.width != self.h or r.height != self.v:
                raise ValueError("rectangle side lengths disagree with the family's h, v")

    def as_array(self) -> np.ndarray:
        """(n, 4) array of [a, b, c, d] rows."""
        return np.array([[r.a, r.b, r.c, r.d] for r in self.rects], dtype=float)


@dataclass(frozen=True, slots=True)
class Example1:
    """Alternating-rows recipe with doubly exponential side shrinking:
    n_k = 2^(2^(k-1) - 1), lambda_k = 2^(-3 * 2^(k-1)); level 0 is the
    half-split of the unit square, giving h_k = 2^(-2^k)."""

    def base(self) -> list[Rect2]:
        return subdivide_rect(Rect2(0.0, 1.0, 0.0, 1.0), 1, 0.5)

    def schedule(self, k: int) -> tuple[int, float]:
        return 2 ** (2 ** (k - 1) - 1), 2.0 ** (-3 * 2 ** (k - 1))

    def kind(self) -> str:
        return "ex1"


@dataclass(frozen=True, slots=True)
class Example2:
    """Single-split recipe with quadratically flat rectangles past the switch:
    n_k = 1, lambda_k = 1/2 while 2^k <= 34M, then lambda_k = 34M * 2^(-k-1).
    Levels count subdivisions of the unit square, so h_k = 2^(-k) and,
    once 2^k > 34M, v_k = 34M * 4^(-k)."""

    M: float

    def __post_init__(self):
        if not (self.M > 1.0 and math.isfinite(self.M)):
            raise ValueError(f"M must be finite and > 1, got {self.M}")

    def base(self) -> list[Rect2]:
        return [Rect2(0.0, 1.0, 0.0, 1.0)]

    def schedule(self, k: int) -> tuple[int, float]:
        if 2**k <= 34 * self.M:
            return 1, 0.5
        return 1, 34.0 * self.M * 2.0 ** (-k - 1)

    def kind(self) -> str:
        return "ex2"

    def switch_level(self) -> int:
        """First level k with 2^k > 34M (flat closed forms hold from here on)."""
        k = 1
        while 2**k <= 34 * self.M:
            k += 1
        return k


ExampleParams = Example1 | Example2


def subdivide_rect(rect: Rect2, n: int, lam: float) -> list[Rect2]:
    """Split rect into 2n children of width (b-a)/(2n) and height lam*(b-a):
    n along the bottom edge at even offsets, n along the top edge at odd offsets."""
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not (0.0 < lam <= 0.5):
        raise ValueError(f"lambda must lie in (0, 1/2], got {lam}")
    w = rect.width
    child_h = lam * w
    if child_h > rect.height:
        raise ValueError(
            f"children of height {child_h} do not fit inside a rectangle of height {rect.height}"
        )
    step = w / (2 * n)
    out = []
    for i in range(n):
        x0 = rect.a + 2 * i * step
        out.append(Rect2(x0, x0 + step, rect.c, rect.c + child_h))
    for i in range(n):
        x0 = rect.a + (2 * i + 1) * step
        out.append(Rect2(x0, x0 + step, rect.d - child_h, rect.d))
    return out


def _family_size(params: ExampleParams, k: int) -> int:
    count = len(params.base())
    for j in range(1, k + 1):
        n, _ = params.schedule(j)
        count *= 2 * n
    return count


def build_family(params: ExampleParams, k: int) -> RectFamily:
    """Apply the recipe's subdivision schedule k times starting from its base family."""
    if k < 0:
        raise ValueError(f"level must be >= 0, got {k}")
    size = _family_size(params, k)
    if size > MAX_POINTS:
        raise ResourceLimitError(
            f"level {k} would need {size} rectangles (limit {MAX_POINTS})"
        )
    rects = params.base()
    h = rects[0].width
    v = rects[0].height
    for j in range(1, k + 1):
        n, lam = params.schedule(j)
        child_h = lam * h
        rects = [child for r in rects for child in subdivide_rect(r, n, lam)]
        v = child_h
        h = h / (2 * n)
    return RectFamily(level=k, rects=rects, h=h, v=v)


def level_sides(params: ExampleParams, k: int) -> tuple[float, float]:
    """Side lengths (h, v) of the level-k family without building rectangles."""
    base = params.base()
    h, v = base[0].width, base[0].height
    for j in range(1, k + 1):
        n, lam = params.schedule(j)
        v = lam * h
        h = h / (2 * n)
    return h, v


@dataclass(slots=True)
class WeightedCloud:
    """Finite prefractal approximation: points, per-point measure weights, and
    provenance metadata. `err_xy` and `err_t` bound the horizontal and vertical
    distance from each point to the piece of the true set it represents;
    `placement_error` is the combined Euclidean bound."""

    points: np.ndarray
    weights: np.ndarray
    total_mass: float
    level: int
    source: dict
    h: float | None = None
    v: float | None = None
    err_xy: float = 0.0
    err_t: float = 0.0

    @property
    def placement_error(self) -> float:
        return math.hypot(self.err_xy, self.err_t)

    def __post_init__(self):
        self.points = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        self.weights = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError(f"points must be (n, 3), got {self.points.shape}")
        if self.weights.shape != (self.points.shape[0],):
            raise ValueError("one weight per point required")
        if not np.isfinite(self.points).all() or not np.isfinite(self.weights).all():
            raise ValueError("non-finite cloud data")
        if (self.weights < 0).any():
            raise ValueError("weights must be nonnegative")
        total = float(self.weights.sum())
        if abs(total - self.total_mass) > 1e-9 * max(abs(self.total_mass), 1e-300):
            raise ValueError(
                f"weights sum to {total}, declared total_mass {self.total_mass}"
            )

    def __len__(self) -> int:
        return self.points.shape[0]


def family_cloud(family: RectFamily, samples_per_rect: int, kind: str = "rects",
                 extra_source: dict | None = None) -> WeightedCloud:
    """One midline strip of points per rectangle: x on the midpoint grid of
    [a, b], t at the rectangle center, embedded as (x, 0, t), each carrying
    weight h / samples_per_rect so a rectangle's mass is exactly h."""
    if samples_per_rect < 1:
        raise ValueError(f"samples_per_rect must be >= 1, got {samples_per_rect}")
    arr = family.as_array()
    n = arr.shape[0]
    m = samples_per_rect
    if n * m > MAX_POINTS:
        raise ResourceLimitError(f"{n * m} cloud points exceed the {MAX_POINTS} limit")
    frac = (np.arange(m) + 0.5) / m
    x = arr[:, 0:1] + frac[None, :] * (arr[:, 1:2] - arr[:, 0:1])
    t = np.repeat(0.5 * (arr[:, 2] + arr[:, 3]), m)
    pts = np.column_stack([x.reshape(-1), np.zeros(n * m), t])
    w = np.full(n * m, family.h / m)
    source = {"kind": kind, "level": family.level, "samples_per_rect": m}
    if extra_source:
        source.update(extra_source)
    spacing = family.h / m
    return WeightedCloud(
        points=pts,
        weights=w,
        total_mass=n * family.h,
        level=family.level,
        source=source,
        h=family.h,
        v=family.v,
        err_xy=0.5 * spacing,
        err_t=0.5 * family.v,
    )


def example_cloud(params: ExampleParams, level: int, samples_per_rect: int = 1) -> WeightedCloud:
    family = build_family(params, level)
    extra = {"M": params.M} if isinstance(params, Example2) else None
    return family_cloud(family, samples_per_rect, kind=params.kind(), extra_source=extra)


def segment_cloud(axis: str, lo: float, hi: float, n: int) -> WeightedCloud:
    """Uniform mass on an axis-aligned segment, midpoint grid, density one."""
    if axis not in ("x", "t"):
        raise ValueError(f"axis must be 'x' or 't', got {axis!r}")
    if not lo < hi:
        raise ValueError("need lo < hi")
    if n < 1 or n > MAX_POINTS:
        raise ValueError(f"bad point count {n}")
    grid = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    pts = np.zeros((n, 3))
    pts[:, 0 if axis == "x" else 2] = grid
    length = hi - lo
    spacing = 0.5 * length / n
    return WeightedCloud(
        points=pts,
        weights=np.full(n, length / n),
        total_mass=length,
        level=0,
        source={"kind": f"{axis}seg", "lo": lo, "hi": hi, "n": n},
        err_xy=spacing if axis == "x" else 0.0,
        err_t=spacing if axis == "t" else 0.0,
    )


# ---------------------------------------------------------------------------
# iterated function systems

@dataclass(frozen=True, slots=True)
class IFSMapH:
    """Left translation composed with a dilation; a similarity of ratio `ratio`
    for the homogeneous metric."""

    translation: Point
    ratio: float

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise ValueError(f"contraction ratio must lie in (0, 1), got {self.ratio}")

    def apply(self, p: Point) -> Point:
        return group_mul(self.translation, dilate(p, self.ratio))

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        return group_mul_many(self.translation, dilate_many(points, self.ratio))


@dataclass(frozen=True, slots=True)
class AxisContraction:
    """Affine contraction t -> ratio * t + offset acting on the t-axis."""

    ratio: float
    offset: float

    def apply_t(self, t: float) -> float:
        return self.ratio * t + self.offset

    def apply(self, p: Point) -> Point:
        if p.x != 0.0 or p.y != 0.0:
            raise ValueError("axis contraction applied off the t-axis")
        return Point(0.0, 0.0, self.apply_t(p.t))

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        if np.any(points[:, 0] != 0.0) or np.any(points[:, 1] != 0.0):
            raise ValueError("axis contraction applied off the t-axis")
        out = points.copy()
        out[:, 2] = self.ratio * out[:, 2] + self.offset
        return out


@dataclass(frozen=True, slots=True)
class CantorParams:
    """Parameters of the symmetric Cantor set on the t-axis with Euclidean
    dimension d: two maps of ratio 2^(-1/d), so that 2 * ratio^d = 1."""

    d: float
    ratio: float

    def __post_init__(self):
        if not (0.0 < self.d < 1.0):
            raise ValueError(f"d must lie in (0, 1), got {self.d}")
        if abs(2.0 * self.ratio**self.d - 1.0) > 1e-12:
            raise ValueError("ratio does not satisfy 2 * ratio^d = 1")


def hsquare_ifs() -> list[IFSMapH]:
    """The four ratio-1/2 similarities whose attractor projects onto [0,1]^2:
    horizontal lifts of (x, y) -> ((x, y) + v_j) / 2 with v_j the unit-square
    corners, lift constants chosen zero."""
    corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    return [IFSMapH(Point(cx / 2.0, cy / 2.0, 0.0), 0.5) for cx, cy in corners]


def cantor_ifs(d: float) -> tuple[CantorParams, tuple[AxisContraction, AxisContraction]]:
    """Maps t -> r t and t -> r t + (1 - r) with r = 2^(-1/d); the attractor is
    the symmetric Cantor set in [0, 1] on the t-axis."""
    if not (0.0 < d < 1.0):
        raise ValueError(f"d must lie in (0, 1), got {d}")
    r = 2.0 ** (-1.0 / d)
    params = CantorParams(d=d, ratio=r)
    return params, (AxisContraction(r, 0.0), AxisContraction(r, 1.0 - r))


def ifs_cloud(maps, depth: int, seed_point: Point = ORIGIN, *,
              source: dict | None = None, err_xy: float = 0.0,
              err_t: float = 0.0) -> WeightedCloud:
    """Full address enumeration to the given depth: one point per length-`depth`
    word, uniform weights (len(maps))^(-depth). Point order is word-lexicographic
    with the outermost map as the most significant digit."""
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    count = len(maps) ** depth
    if count > MAX_POINTS:
        raise ResourceLimitError(f"depth {depth} needs {count} points (limit {MAX_POINTS})")
    pts = seed_point.as_array().reshape(1, 3)
    for _ in range(depth):
        pts = np.vstack([m.apply_many(pts) for m in maps])
    w = np.full(count, float(len(maps)) ** (-depth))
    return WeightedCloud(
        points=pts,
        weights=w,
        total_mass=1.0,
        level=depth,
        source=source or {"kind": "ifs", "depth": depth},
        err_xy=err_xy,
        err_t=err_t,
    )


def _hsquare_cell_extents(depth: int, hull_xy: float, hull_t: float) -> tuple[float, float]:
    # per ratio-1/2 lift step the t-extent obeys T -> T/4 + 2*|q|_max*X, X -> X/2
    X, T = hull_xy, hull_t
    for _ in range(depth):
        T = 0.25 * T + 2.0 * 0.5 * math.sqrt(2.0) * X
        X = 0.5 * X
    return X, T


def hsquare_cloud(depth: int) -> WeightedCloud:
    """Depth-`depth` address cloud of the Heisenberg square attractor."""
    cloud = ifs_cloud(hsquare_ifs(), depth, ORIGIN,
                      source={"kind": "hsquare", "depth": depth})
    t_span = float(cloud.points[:, 2].max() - cloud.points[:, 2].min()) if len(cloud) > 1 else 1.0
    X, T = _hsquare_cell_extents(depth, math.sqrt(2.0), t_span + 1.0)
    cloud.err_xy = 0.5 * X
    cloud.err_t = 0.5 * T
    return cloud


def cantor_cloud(d: float, depth: int) -> WeightedCloud:
    """Depth-`depth` address cloud of the t-axis Cantor set with dimension d."""
    params, maps = cantor_ifs(d)
    return ifs_cloud(maps, depth, ORIGIN,
                     source={"kind": "cantor", "d": d, "depth": depth},
                     err_t=0.5 * params.ratio**depth)


def product_cloud(qh: WeightedCloud, cantor: WeightedCloud) -> WeightedCloud:
    """Vertical product {(x, y, t + t')}: every pair of a base point and a
    t-axis point, with product weights."""
    if np.any(cantor.points[:, 0] != 0.0) or np.any(cantor.points[:, 1] != 0.0):
        raise ValueError("second factor must lie on the t-axis")
    n, m = len(qh), len(cantor)
    if n * m > MAX_POINTS:
        raise ResourceLimitError(f"product needs {n * m} points (limit {MAX_POINTS})")
    pts = np.repeat(qh.points, m, axis=0)
    pts[:, 2] += np.tile(cantor.points[:, 2], n)
    w = (qh.weights[:, None] * cantor.weights[None, :]).reshape(-1)
    d = cantor.source.get("d")
    return WeightedCloud(
        points=pts,
        weights=w,
        total_mass=qh.total_mass * cantor.total_mass,
        level=qh.level,
        source={
            "kind": "fs",
            "d": d,
            "qh_depth": qh.source.get("depth", qh.level),
            "cantor_depth": cantor.source.get("depth", cantor.level),
        },
        err_xy=qh.err_xy + cantor.err_xy,
        err_t=qh.err_t + cantor.err_t,
    )


def expected_dims(source: dict) -> tuple[float | None, float]:
    """Analytically known (Euclidean, Heisenberg) dimension targets for a
    construction descriptor; the Euclidean entry is None where not asserted."""
    kind = source.get("kind")
    if kind in ("ex1", "ex2"):
        return 1.0, 1.0
    if kind == "tseg":
        return 1.0, 2.0
    if kind == "xseg":
        return 1.0, 1.0
    if kind == "cantor":
        d = float(source["d"])
        return d, 2.0 * d
    if kind == "hsquare":
        return None, 2.0
    if kind == "fs":
        d = float(source["d"])
        return 2.0 + d, 2.0 + 2.0 * d
    raise ValueError(f"unknown construction descriptor {source!r}")


# ---------------------------------------------------------------------------
# serialization: CSV for points, JSON sidecar for metadata

def sidecar_path(path) -> Path:
    path = Path(path)
    if path.suffix == ".csv":
        return path.with_suffix(".meta.json")
    return Path(str(path) + ".meta.json")


def save_cloud(cloud: WeightedCloud, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "t", "weight"])
        for (x, y, t), w in zip(cloud.points, cloud.weights):
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(t)), repr(float(w))])
    tmp.replace(path)
    meta = {
        "source": cloud.source,
        "level": cloud.level,
        "total_mass": cloud.total_mass,
        "h": cloud.h,
        "v": cloud.v,
        "vertical_placement_error": (cloud.v / 2.0) if cloud.v is not None else None,
        "placement_error": cloud.placement_error,
        "err_xy": cloud.err_xy,
        "err_t": cloud.err_t,
    }
    mpath = sidecar_path(path)
    mtmp = mpath.with_name(mpath.name + ".tmp")
    mtmp.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    mtmp.replace(mpath)


def load_cloud(path) -> WeightedCloud:
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "y", "t", "weight"]:
            raise ValueError(f"unexpected CSV header {header}")
        for row in reader:
            rows.append([float(v) for v in row])
    data = np.asarray(rows, dtype=float)
    mpath = sidecar_path(path)
    if mpath.exists():
        meta = json.loads(mpath.read_text())
    else:
        meta = {"source": {"kind": "unknown"}, "level": 0, "total_mass": float(data[:, 3].sum()),
                "h": None, "v": None}
    return WeightedCloud(
        points=data[:, :3],
        weights=data[:, 3],
        total_mass=float(meta["total_mass"]),
        level=int(meta["level"]),
        source=meta["source"],
        h=meta.get("h"),
        v=meta.get("v"),
        err_xy=float(meta.get("err_xy") or 0.0),
        err_t=float(meta.get("err_t") or 0.0),
    )
