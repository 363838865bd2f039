import math

import numpy as np
import pytest

from heislab.constructions import (
    Example1,
    build_family,
    cantor_cloud,
    family_cloud,
    hsquare_cloud,
    product_cloud,
    segment_cloud,
)
from heislab.hgeom import HorizontalPlane, MetricKind, Point, dist, dist_to_plane
from heislab.probes import (
    Fixed,
    Linear,
    PowerLaw,
    Quadratic,
    density_ratio,
    estimate_annulus_constants,
    ex1_probe,
    ex2_default_radii,
    ex2_probe,
    ex2_window_level,
    ex3_probe,
    mass_split,
    panel_from_rects,
    probe_result_to_dict,
    sandwich_report_to_dict,
    sandwich_sample,
    scan_density,
    thm1_scan,
    thm2_scan,
)

E = MetricKind.EUCLIDEAN
H = MetricKind.HEISENBERG
O = Point(0, 0, 0)


@pytest.fixture(scope="module")
def tseg():
    return segment_cloud("t", -1.0, 1.0, 4000)


@pytest.fixture(scope="module")
def xseg():
    return segment_cloud("x", 0.0, 1.0, 4000)


def test_mass_split_x_axis_is_horizontal(xseg):
    for rho in (0.0, 0.01, 0.5):
        inside, outside = mass_split(xseg, O, 0.3, rho)
        assert outside == 0.0
        assert inside == pytest.approx(0.3, abs=1e-3)


def test_mass_split_t_axis_oracle(tseg):
    # 1-D length oracle: the plane through 0 cuts |t| <= rho out of [-r, r]
    inside, outside = mass_split(tseg, O, 0.1, 0.025)
    assert inside == pytest.approx(0.05, abs=1e-12)
    assert outside == pytest.approx(0.15, abs=1e-12)


def test_mass_split_wide_slab_swallows_ball(tseg):
    inside, outside = mass_split(tseg, O, 0.1, 0.1)
    assert outside == 0.0


def test_mass_partition(tseg):
    p = Point(0, 0, 0.3)
    r = 0.2
    inside, outside = mass_split(tseg, p, r, 0.04)
    from heislab.hgeom import dist_many

    ball_mass = float(tseg.weights[dist_many(tseg.points, p, E) <= r].sum())
    assert inside + outside == pytest.approx(ball_mass, abs=1e-12 * tseg.total_mass)


def test_outside_mass_monotone_in_rho(tseg):
    prev = math.inf
    for rho in (0.0, 0.01, 0.02, 0.05, 0.1):
        _, outside = mass_split(tseg, O, 0.1, rho)
        assert outside <= prev + 1e-15
        prev = outside


def test_density_ratio_t_axis(tseg):
    assert density_ratio(tseg, O, 0.1, 0.025, 1.0) == pytest.approx(0.75, abs=1e-3)
    assert density_ratio(tseg, O, 0.1, 0.2, 1.0) == 0.0


def test_thm1_t_axis_oracle(tseg):
    # outside mass 2(r - r^(3/2)) over denominator r gives 2 - 2 sqrt(r)
    res = thm1_scan(tseg, [O], 0.5, [0.01])
    assert res.convention == "r^s"
    assert res.summary["min_ratio"] == pytest.approx(2 - 2 * math.sqrt(0.01), abs=2e-3)


def test_thm1_x_axis_zero(xseg):
    res = thm1_scan(xseg, [Point(0.4, 0, 0)], 0.3, np.geomspace(0.2, 0.01, 6))
    assert res.summary["min_ratio"] == 0.0
    assert res.summary["max_ratio"] == 0.0


def test_thm2_t_axis_oracle(tseg):
    res = thm2_scan(tseg, [O], 0.25, np.geomspace(0.2, 0.02, 9), s=1.0)
    assert res.convention == "(2r)^s"
    assert res.summary["max_ratio"] == pytest.approx(0.75, abs=5e-3)
    assert res.summary["max_ratio"] > 0.25


def test_thm2_x_axis_zero(xseg):
    res = thm2_scan(xseg, [Point(0.5, 0, 0)], 0.25, [0.2, 0.1], s=2.0)
    assert res.summary["max_ratio"] == 0.0


def test_thm2_cantor_positive():
    cloud = cantor_cloud(0.5, 8)
    p = Point.from_array(cloud.points[0])
    res = thm2_scan(cloud, [p], 0.05, np.geomspace(0.5, 0.05, 9), s=0.5)
    assert res.summary["max_ratio"] > 0.0


def test_ex1_probe_bound_and_cap():
    res = ex1_probe(3, samples_per_rect=16, base_count=8)
    assert res.convention == "2r"
    ratios = [e.ratio for ps in res.points for e in ps.series]
    assert min(ratios) >= 0.125 - 1e-9
    # total-mass cap: ratio <= mass(ball)/(2r) <= 3r/(2r)
    assert max(ratios) <= 1.5
    assert res.error_bound <= 0.02


def test_ex1_probe_rejects_shallow_level():
    with pytest.raises(ValueError):
        ex1_probe(1)


def test_ex1_contrast_on_shared_panel():
    # the same base points show a large fixed-fraction ratio at the tied radii
    # and a vanishing minimum under the shrinking power-law neighborhood
    from heislab.constructions import level_sides

    level = 4
    fam = build_family(Example1(), level)
    cloud = family_cloud(fam, 4, kind="ex1")
    bases = panel_from_rects(fam, 8, x_max=0.75)
    h_by = {k: level_sides(Example1(), k)[0] for k in range(level + 1)}
    from heislab.probes import ex1_scan

    res1 = ex1_scan(cloud, h_by, range(1, level), bases)
    assert res1.summary["min_ratio"] >= 0.125 - 0.02
    h2, h4 = h_by[2], h_by[4]
    res2 = thm1_scan(cloud, bases, 0.5, np.geomspace(h2, h4, 24))
    per_point_min = [min(e.ratio for e in ps.series) for ps in res2.points]
    assert all(m <= 0.05 for m in per_point_min)


def test_ex2_window_level():
    assert ex2_window_level(2.0**-7) == 8
    assert ex2_window_level(1.5 * 2.0**-7) == 8
    assert ex2_window_level(2.0**-6) == 7


def test_ex2_probe_min_ratio():
    res = ex2_probe(2.0, 9, base_count=8)
    assert res.summary["min_ratio"] >= 0.0625 - 1e-9
    assert res.convention == "2r"


def test_ex2_probe_validations():
    with pytest.raises(ValueError):
        ex2_probe(2.0, 3)  # no level with 2^k > 136 built
    with pytest.raises(ValueError):
        ex2_probe(2.0, 9, radii=[0.3])  # outside every valid window
    with pytest.raises(ValueError):
        ex2_default_radii(2.0, 5)


def test_ex3_probe_positive_and_annulus():
    radii = list(np.geomspace(2.0, 0.05, 12))
    res = ex3_probe(0.5, 4, 5, radii, base_count=6)
    assert res.extra["status"] == "ok"
    assert res.extra["c0"] > 0.0
    assert res.extra["c_d"] > 0.0
    ratios = [e.ratio for ps in res.points for e in ps.series]
    assert min(ratios) > 0.0
    assert res.s == 2.5


def test_ex3_annulus_oracle():
    # direct Cantor measure check of the annulus mass at the estimated constants
    cloud = cantor_cloud(0.5, 7)
    radii = [r for r in np.geomspace(1.0, 0.05, 8) if r < 1]
    c0, cd = estimate_annulus_constants(cloud, radii, 0.5)
    assert 0 < c0 < 0.25
    t = cloud.points[:, 2]
    for tc in t[:: len(t) // 16]:
        for r in radii:
            m = cloud.weights[(np.abs(t - tc) >= c0 * r) & (np.abs(t - tc) <= r / 4)].sum()
            assert m >= cd * r**0.5 - 1e-12


def test_ex3_control_horizontal_input_zero(xseg):
    radii = list(np.geomspace(0.5, 0.05, 6))
    res = ex3_probe(0.5, 2, 5, radii, base_count=4, fs_cloud=xseg)
    ratios = [e.ratio for ps in res.points for e in ps.series]
    assert all(r == 0.0 for r in ratios)


def test_scan_density_summary_args():
    tseg = segment_cloud("t", -1.0, 1.0, 1000)
    res = scan_density(tseg, [O], [0.2, 0.1], Linear(0.25), 1.0, "(2r)^s", probe="thm2")
    assert set(res.summary) == {"min_ratio", "max_ratio", "argmin_r", "argmax_r"}
    assert res.summary["argmax_r"] in (0.2, 0.1)


def test_rho_rules():
    assert PowerLaw(0.5).rho(0.04) == 0.04**1.5
    assert Linear(0.25).rho(0.2) == 0.05
    assert Quadratic(2.0).rho(0.1) == pytest.approx(0.02)
    assert Fixed(0.125).rho(0.4) == 0.05
    with pytest.raises(ValueError):
        PowerLaw(1.5)
    with pytest.raises(ValueError):
        Quadratic(0.5)


def test_probe_config_validation():
    from heislab.probes import ProbeConfig

    cfg = ProbeConfig(s=1.0, radii=(0.2, 0.1), rho_rule=Linear(0.25), base_points=(O,))
    assert cfg.seed == 0
    with pytest.raises(ValueError):
        ProbeConfig(s=0.0, radii=(0.1,), rho_rule=Linear(0.25), base_points=(O,))
    with pytest.raises(ValueError):
        ProbeConfig(s=1.0, radii=(0.1, -0.2), rho_rule=Linear(0.25), base_points=(O,))


def test_sandwich_direct_examples():
    # direct membership evaluations of the two-sided comparison
    p, r = O, 1.0
    q = Point(0.5, 0, 0)
    assert dist(q, p, E) <= r / 2
    assert dist_to_plane(q, HorizontalPlane(p)) == 0.0
    assert dist(q, p, H) == 0.5 <= r

    q = Point(0, 0, 0.9)
    assert dist(q, p, H) == pytest.approx(0.81**0.25)
    assert dist(q, p, H) <= r
    assert dist_to_plane(q, HorizontalPlane(p)) == 0.9 <= r * r
    assert dist(q, p, E) == 0.9 <= r


def test_sandwich_sampler_inner_and_plane_clean():
    rep = sandwich_sample(2.0, (1.0, 0.3, 0.1), 30_000, seed=1)
    assert rep.inner_violations == 0
    assert rep.outer_plane_violations == 0
    assert rep.inner_hits > 100
    assert rep.outer_hits > 1000
    # deterministic for a fixed seed
    again = sandwich_sample(2.0, (1.0, 0.3, 0.1), 30_000, seed=1)
    assert sandwich_report_to_dict(again) == sandwich_report_to_dict(rep)


def test_sandwich_outer_ball_defect_witness():
    # the Euclidean-ball half of the outer inclusion fails off the t-axis:
    # q = p * (0, a, 0) keeps the gauge distance a but grows Euclidean distance
    # with the tilt 2|x0| a
    p = Point(2.0, 0.0, 0.0)
    q = Point(2.0, 0.29, 1.16)
    assert dist(q, p, H) <= 0.3
    assert dist(q, p, E) > 0.3
    assert dist_to_plane(q, HorizontalPlane(p)) <= 0.3**2
    rep = sandwich_sample(2.0, (1.0, 0.3, 0.1), 30_000, seed=1)
    assert rep.outer_ball_violations > 0
    assert rep.outer_violations == rep.outer_ball_violations


def test_sandwich_corrected_outer_radius_clean():
    # with the comparison-constant radius c_R * r = 3(1+R) r the Euclidean half
    # holds on the same samples
    rng = np.random.Generator(np.random.Philox(key=np.uint64(3)))
    R = 2.0
    for r in (1.0, 0.3, 0.1):
        for _ in range(3000):
            ang = rng.uniform(0, 2 * math.pi)
            rad = R * math.sqrt(rng.random())
            p = Point(rad * math.cos(ang), rad * math.sin(ang), rng.uniform(-1, 1))
            a = r * math.sqrt(rng.random())
            phi = rng.uniform(0, 2 * math.pi)
            u = Point(a * math.cos(phi), a * math.sin(phi), rng.uniform(-r * r, r * r))
            from heislab.hgeom import group_mul

            q = group_mul(p, u)
            if dist(q, p, H) <= r:
                assert dist(q, p, E) <= 3 * (1 + R) * r


def test_sandwich_validations():
    with pytest.raises(ValueError):
        sandwich_sample(0.0, (0.5,), 10, 0)
    with pytest.raises(ValueError):
        sandwich_sample(1.0, (1.5,), 10, 0)
    with pytest.raises(ValueError):
        sandwich_sample(1.0, (0.5,), 0, 0)


def test_probe_result_serialization(tseg):
    res = thm2_scan(tseg, [O], 0.25, [0.1], s=1.0)
    d = probe_result_to_dict(res)
    assert d["probe"] == "thm2"
    assert d["convention"] == "(2r)^s"
    assert d["rho_rule"] == {"rule": "linear", "delta": 0.25}
    assert d["points"][0]["p"] == [0.0, 0.0, 0.0]
    entry = d["points"][0]["series"][0]
    assert set(entry) == {"r", "inside", "outside", "ratio"}
    assert "error_bound" in d and "seed" in d
