"""Metric-generic covering counts, log-log scaling-exponent fits, and the
numerical two-metric comparison.

Covering uses greedy nets in the metric itself rather than axis-aligned boxes:
equal-size boxes are not uniformly comparable to anisotropic balls away from
the t-axis, because left translation shears the vertical coordinate.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constructions import WeightedCloud
from .hgeom import MetricKind, beta_minus, beta_plus, dist_pairs


@dataclass(frozen=True, slots=True)
class NetCount:
    delta: float
    count: int


@dataclass(slots=True)
class DimensionEstimate:
    slope: float
    intercept: float
    r_squared: float
    counts: list[NetCount]
    metric: MetricKind
    dropped: list[NetCount] = field(default_factory=list)


@dataclass(frozen=True, slots=True)
class ComparisonReport:
    R: float
    sup_ratio_lower: float   # max of d_E / d_H
    sup_ratio_upper: float   # max of d_H / sqrt(d_E)
    samples: int
    seed: int


def worker_count() -> int:
    env = os.environ.get("HEISLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _pair_dist(points: np.ndarray, idx: np.ndarray, q: np.ndarray, metric: MetricKind) -> np.ndarray:
    sub = points[idx]
    dx = sub[:, 0] - q[0]
    dy = sub[:, 1] - q[1]
    if metric is MetricKind.EUCLIDEAN:
        dt = sub[:, 2] - q[2]
        return np.sqrt(dx * dx + dy * dy + dt * dt)
    horiz = dx * dx + dy * dy
    tw = sub[:, 2] - q[2] - 2.0 * (q[0] * sub[:, 1] - sub[:, 0] * q[1])
    return (horiz * horiz + tw * tw) ** 0.25


def _greedy_scan(points: np.ndarray, delta: float, metric: MetricKind) -> np.ndarray:
    """Shrinking sweep: the first uncovered point in stored order becomes a
    center and covers everything within delta. Equivalent to scanning points
    in order and keeping those farther than delta from every kept center."""
    n = points.shape[0]
    alive = np.arange(n)
    centers = []
    while alive.size:
        c = alive[0]
        centers.append(int(c))
        d = _pair_dist(points, alive, points[c], metric)
        alive = alive[d > delta]
    return np.asarray(centers, dtype=np.int64)


def _greedy_hash(points: np.ndarray, delta: float, metric: MetricKind) -> np.ndarray:
    """Same output as the scan, accelerated by a lattice of side delta in x, y
    and, for the anisotropic metric, delta^2 + 4*B*delta in t (B the largest
    |x|, |y| in the cloud, bounding the shear of the twist term), so covered
    pairs always share neighboring cells. The lattice only filters candidates;
    exact distance decides coverage."""
    n = points.shape[0]
    if metric is MetricKind.EUCLIDEAN:
        t_side = delta
    else:
        B = float(np.abs(points[:, :2]).max()) if n else 0.0
        t_side = (delta * delta + 4.0 * B * delta) * (1.0 + 1e-9)
    ix = np.floor(points[:, 0] / delta).astype(np.int64)
    iy = np.floor(points[:, 1] / delta).astype(np.int64)
    iz = np.floor(points[:, 2] / t_side).astype(np.int64)
    ix -= ix.min()
    iy -= iy.min()
    iz -= iz.min()
    # pad the strides so out-of-range neighbor keys cannot alias real cells
    ny = int(iy.max()) + 3
    nz = int(iz.max()) + 3
    key = (ix * ny + iy) * nz + iz
    order = np.argsort(key, kind="stable")
    sorted_keys = key[order]
    uniq, starts = np.unique(sorted_keys, return_index=True)
    bounds = np.append(starts, n)
    cells = {int(k): order[a:b] for k, a, b in zip(uniq, bounds[:-1], bounds[1:])}
    offsets = [(dx * ny + dy) * nz + dz
               for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)]
    covered = np.zeros(n, dtype=bool)
    centers: list[int] = []
    cursor = 0
    while cursor < n:
        if covered[cursor]:
            cursor += 1
            continue
        c = cursor
        centers.append(c)
        base = int(key[c])
        cand = [cells[k] for k in (base + off for off in offsets) if k in cells]
        idx = cand[0] if len(cand) == 1 else np.concatenate(cand)
        d = _pair_dist(points, idx, points[c], metric)
        covered[idx[d <= delta]] = True
    return np.asarray(centers, dtype=np.int64)


def greedy_net(cloud: WeightedCloud, delta: float, metric: MetricKind,
               strategy: str = "auto") -> tuple[NetCount, np.ndarray]:
    """Greedy net of the cloud support at scale delta: returns the count and
    the center indices. Centers are pairwise more than delta apart and every
    point lies within delta of a center."""
    if not (delta > 0.0 and math.isfinite(delta)):
        raise ValueError(f"delta must be positive, got {delta}")
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    if strategy == "auto":
        # the cover sweep costs O(centers * n); the lattice walk costs O(n)
        # plus the grid build, which only pays off beyond small clouds
        strategy = "hash" if len(cloud) > 50_000 else "scan"
    if strategy == "scan":
        centers = _greedy_scan(cloud.points, delta, metric)
    elif strategy == "hash":
        centers = _greedy_hash(cloud.points, delta, metric)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return NetCount(delta=delta, count=int(centers.size)), centers


def net_counts(cloud: WeightedCloud, deltas, metric: MetricKind,
               strategy: str = "auto") -> list[NetCount]:
    """One net per delta; deltas must be strictly positive and strictly decreasing."""
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas):
        raise ValueError("deltas must be strictly positive")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    workers = min(worker_count(), len(deltas))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda d: greedy_net(cloud, d, metric, strategy)[0], deltas))
        return results
    return [greedy_net(cloud, d, metric, strategy)[0] for d in deltas]


def estimate_dimension(counts: list[NetCount], metric: MetricKind = MetricKind.EUCLIDEAN,
                       drop_extremes: bool | None = None) -> DimensionEstimate:
    """Least-squares slope of log(count) against log(1/delta). By default the
    largest and smallest delta are dropped as plateau and saturation guards
    whenever at least five scales are available."""
    if len(counts) < 3:
        raise ValueError(f"need at least 3 scales, got {len(counts)}")
    if drop_extremes is None:
        drop_extremes = len(counts) >= 5
    ordered = sorted(counts, key=lambda c: -c.delta)
    if drop_extremes:
        dropped = [ordered[0], ordered[-1]]
        used = ordered[1:-1]
    else:
        dropped = []
        used = ordered
    x = np.log(1.0 / np.array([c.delta for c in used]))
    y = np.log(np.array([c.count for c in used], dtype=float))
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    sxy = float(((x - xm) * (y - ym)).sum())
    slope = sxy / sxx
    intercept = ym - slope * xm
    syy = float(((y - ym) ** 2).sum())
    r2 = 1.0 if syy == 0.0 else (sxy * sxy) / (sxx * syy)
    return DimensionEstimate(slope=slope, intercept=intercept, r_squared=r2,
                             counts=used, metric=metric, dropped=dropped)


def delta_ladder(delta_max: float, delta_min: float, per_decade: int = 8) -> list[float]:
    """Log-uniform descending deltas, about per_decade scales per decade."""
    if not (0.0 < delta_min < delta_max):
        raise ValueError("need 0 < delta_min < delta_max")
    decades = math.log10(delta_max / delta_min)
    n = max(3, int(round(per_decade * decades)) + 1)
    return list(np.geomspace(delta_max, delta_min, n))


def compare_on_pairs(P, Q) -> tuple[float, float]:
    """Observed sup of d_E/d_H and of d_H/sqrt(d_E) over row-wise pairs."""
    dE = dist_pairs(P, Q, MetricKind.EUCLIDEAN)
    dH = dist_pairs(P, Q, MetricKind.HEISENBERG)
    nz = (dE > 0) & (dH > 0)
    if not nz.any():
        raise ValueError("no distinct pairs supplied")
    return float((dE[nz] / dH[nz]).max()), float((dH[nz] / np.sqrt(dE[nz])).max())


def _ball_samples(rng: np.random.Generator, R: float, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    rad = R * rng.random(n) ** (1.0 / 3.0)
    return v * rad[:, None]


def fit_metric_comparison(R: float, samples: int, seed: int) -> ComparisonReport:
    """Draw seeded uniform pairs in the Euclidean R-ball and report the two
    observed comparison ratios."""
    if not R > 0:
        raise ValueError("R must be positive")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    P = _ball_samples(rng, R, samples)
    Q = _ball_samples(rng, R, samples)
    lower, upper = compare_on_pairs(P, Q)
    return ComparisonReport(R=R, sup_ratio_lower=lower, sup_ratio_upper=upper,
                            samples=samples, seed=seed)


@dataclass(frozen=True, slots=True)
class InequalityVerdict:
    ok: bool
    lower_margin: float   # dimH - beta_minus(dimE); negative means below the band
    upper_margin: float   # beta_plus(dimE) - dimH; negative means above the band
    beta_lower: float
    beta_upper: float
    tol: float


def check_dimension_inequalities(dimE: float, dimH: float, tol: float) -> InequalityVerdict:
    """Whether the estimated pair sits inside the comparison band
    [beta_minus(dimE), beta_plus(dimE)] up to tol."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    lo = beta_minus(dimE)
    hi = beta_plus(dimE)
    lower_margin = dimH - lo
    upper_margin = hi - dimH
    ok = (lower_margin >= -tol) and (upper_margin >= -tol)
    return InequalityVerdict(ok=ok, lower_margin=lower_margin, upper_margin=upper_margin,
                             beta_lower=lo, beta_upper=hi, tol=tol)


def estimate_to_dict(est: DimensionEstimate) -> dict:
    return {
        "metric": est.metric.value,
        "slope": est.slope,
        "intercept": est.intercept,
        "r_squared": est.r_squared,
        "scales": [{"delta": c.delta, "count": c.count} for c in est.counts],
        "dropped_scales": [{"delta": c.delta, "count": c.count} for c in est.dropped],
    }


def estimate_from_dict(d: dict) -> DimensionEstimate:
    return DimensionEstimate(
        slope=float(d["slope"]),
        intercept=float(d["intercept"]),
        r_squared=float(d["r_squared"]),
        counts=[NetCount(s["delta"], int(s["count"])) for s in d["scales"]],
        metric=MetricKind(d["metric"]),
        dropped=[NetCount(s["delta"], int(s["count"])) for s in d.get("dropped_scales", [])],
    )
