import math

import numpy as np
import pytest

from geodev.errors import ConfigError
from geodev.geometry import ChartPoint, Tangent, curvature_at, torsion_at
from geodev.kinematics import connecting_path, worldline
from geodev.scenarios import (EQUATION_SCENARIOS, LINEAR_DRIFT_MASSES,
                              ScenarioSpec, build, family_names,
                              list_scenarios)
from geodev.transport import s_tensor

ALL_FAMILIES = ("flat-euclidean/ruled", "flat-euclidean/quadratic",
                "flat-torsion", "sphere", "minkowski", "offset-transport",
                "exp-transport")


def test_registry_has_seven_families_in_stable_order():
    assert family_names() == ALL_FAMILIES
    listed = [entry["name"] for entry in list_scenarios()]
    assert tuple(listed) == ALL_FAMILIES


def test_every_family_builds_with_defaults():
    for name in family_names():
        sc = build(ScenarioSpec(name))
        assert sc.label == name
        assert sc.metric is not None
        assert sc.probe_field is not None


def test_unknown_scenario_name():
    with pytest.raises(ConfigError, match="unknown scenario"):
        build(ScenarioSpec("klein-bottle"))


def test_unknown_parameter_named_in_error():
    with pytest.raises(ConfigError, match="warp"):
        build(ScenarioSpec("sphere", {"warp": 1.0}))


def test_out_of_range_parameter_named_in_error():
    with pytest.raises(ConfigError, match="tilt"):
        build(ScenarioSpec("sphere", {"tilt": 9.0}))


def test_non_integer_dimension_rejected():
    with pytest.raises(ConfigError, match="dim"):
        build(ScenarioSpec("flat-euclidean/ruled", {"dim": 2.5}))


def test_schema_round_trip():
    for entry in list_scenarios():
        defaults = {k: v["default"] for k, v in entry["parameters"].items()}
        sc = build(ScenarioSpec(entry["name"], defaults))
        assert sc.label == entry["name"]


def test_build_is_deterministic():
    a = build(ScenarioSpec("sphere", {"accel": 0.2}))
    b = build(ScenarioSpec("sphere", {"accel": 0.2}))
    for (s, r) in ((0.1, 0.05), (-0.3, -0.2)):
        assert np.array_equal(a.surface.map(s, r), b.surface.map(s, r))
        assert np.array_equal(a.surface.d_sr(s, r), b.surface.d_sr(s, r))


def test_r_base_override():
    sc = build(ScenarioSpec("sphere", r_base=0.05))
    assert sc.surface.r_base == 0.05
    with pytest.raises(ConfigError):
        build(ScenarioSpec("sphere", r_base=2.0))


def test_higher_dimensional_flat_families():
    for dim in (3, 4):
        sc = build(ScenarioSpec("flat-euclidean/quadratic", {"dim": dim}))
        assert sc.dimension == dim
        assert sc.surface.map(0.1, 0.1).shape == (dim,)


# ----------------------------------------------- structure coverage matrix

def _max_structure(scenario, fn, n=25):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(n):
        s = rng.uniform(*scenario.surface.s_domain)
        r = rng.uniform(*scenario.surface.r_domain)
        worst = max(worst, fn(s, r))
    return worst


def _torsion_mag(scenario):
    def fn(s, r):
        pt = scenario.surface.point(s, r)
        return np.abs(torsion_at(scenario.conn, pt).entries).max()
    return _max_structure(scenario, fn)


def _curvature_mag(scenario):
    def fn(s, r):
        pt = scenario.surface.point(s, r)
        return np.abs(curvature_at(scenario.conn, pt).entries).max()
    return _max_structure(scenario, fn)


def _s_tensor_mag(scenario):
    def fn(s, r):
        cpath = connecting_path(scenario, s)
        return np.abs(s_tensor(scenario.law, scenario.conn, cpath, r).entries).max()
    return _max_structure(scenario, fn, n=8)


@pytest.mark.parametrize("name,torsion,curv,s_ten", [
    ("flat-euclidean/ruled", False, False, False),
    ("flat-euclidean/quadratic", False, False, False),
    ("flat-torsion", True, False, False),
    ("sphere", False, True, False),
    ("minkowski", False, False, False),
    ("offset-transport", False, True, True),
    ("exp-transport", False, False, True),
])
def test_structure_matrix(name, torsion, curv, s_ten):
    sc = build(ScenarioSpec(name))
    assert (_torsion_mag(sc) > 1e-3) == torsion
    if curv:
        assert _curvature_mag(sc) > 1e-3
    else:
        assert _curvature_mag(sc) < 1e-10
    assert (_s_tensor_mag(sc) > 1e-3) == s_ten


def test_flat_torsion_values():
    sc = build(ScenarioSpec("flat-torsion", {"torsion_c": 0.3}))
    pt = sc.surface.point(0.1, 0.0)
    t = torsion_at(sc.conn, pt).entries
    assert t[0, 1, 0] == pytest.approx(0.3)
    assert t[0, 0, 1] == pytest.approx(-0.3)


def test_sphere_curvature_everywhere_on_surface():
    sc = build(ScenarioSpec("sphere"))
    rng = np.random.default_rng(3)
    for _ in range(10):
        s = rng.uniform(*sc.surface.s_domain)
        r = rng.uniform(*sc.surface.r_domain)
        pt = sc.surface.point(s, r)
        assert np.abs(curvature_at(sc.conn, pt).entries).max() > 0.5


# ----------------------------------------------- analytic data consistency

@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_surface_partials_match_finite_differences(name):
    sc = build(ScenarioSpec(name))
    surf = sc.surface
    rng = np.random.default_rng(11)
    h = 1e-6
    lo_s, hi_s = surf.s_domain
    lo_r, hi_r = surf.r_domain
    for _ in range(100):
        s = rng.uniform(lo_s + 2 * h, hi_s - 2 * h)
        r = rng.uniform(lo_r + 2 * h, hi_r - 2 * h)
        fd_s = (surf.map(s + h, r) - surf.map(s - h, r)) / (2 * h)
        fd_r = (surf.map(s, r + h) - surf.map(s, r - h)) / (2 * h)
        assert np.abs(fd_s - surf.d_s(s, r)).max() < 1e-6
        assert np.abs(fd_r - surf.d_r(s, r)).max() < 1e-6
        fd_ss = (surf.d_s(s + h, r) - surf.d_s(s - h, r)) / (2 * h)
        fd_sr = (surf.d_s(s, r + h) - surf.d_s(s, r - h)) / (2 * h)
        fd_rr = (surf.d_r(s, r + h) - surf.d_r(s, r - h)) / (2 * h)
        assert np.abs(fd_ss - surf.d_ss(s, r)).max() < 1e-6
        assert np.abs(fd_sr - surf.d_sr(s, r)).max() < 1e-6
        assert np.abs(fd_rr - surf.d_rr(s, r)).max() < 1e-6


@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_mass_and_metric_invariants_on_probe_grid(name):
    sc = build(ScenarioSpec(name, LINEAR_DRIFT_MASSES))
    rng = np.random.default_rng(5)
    h = 1e-6
    for _ in range(100):
        s = rng.uniform(*sc.surface.s_domain)
        r = rng.uniform(*sc.surface.r_domain)
        assert abs(sc.mass.value(s, r)) > 0.5
        fd = (sc.mass.mu(s + h, r) - sc.mass.mu(s - h, r)) / (2 * h)
        assert abs(fd - sc.mass.d_s_mu(s, r)) < 1e-8
        pt = sc.surface.point(s, r)
        g = sc.metric.matrix(pt)  # validates symmetry and nondegeneracy
        assert np.all(np.isfinite(g))
        gamma = sc.conn.coefficients(pt)
        assert np.all(np.isfinite(gamma))


@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_probe_field_r_partial(name):
    sc = build(ScenarioSpec(name))
    h = 1e-6
    for (s, r) in ((0.1, 0.05), (-0.2, -0.1)):
        fd = (sc.probe_field.value(s, r + h) - sc.probe_field.value(s, r - h)) / (2 * h)
        assert np.abs(fd - sc.probe_field.d_r(s, r)).max() < 1e-8


def test_sphere_chart_stays_away_from_poles():
    sc = build(ScenarioSpec("sphere", {"accel": 0.5}))
    rng = np.random.default_rng(9)
    for _ in range(200):
        s = rng.uniform(*sc.surface.s_domain)
        r = rng.uniform(*sc.surface.r_domain)
        theta = sc.surface.map(s, r)[0]
        assert 0.3 <= theta <= math.pi - 0.3


def test_minkowski_worldlines_timelike():
    sc = build(ScenarioSpec("minkowski"))
    g = np.diag([1.0, -1.0, -1.0, -1.0])
    rng = np.random.default_rng(13)
    for _ in range(50):
        s = rng.uniform(*sc.surface.s_domain)
        r = rng.uniform(*sc.surface.r_domain)
        v = sc.surface.d_s(s, r)
        assert v @ g @ v > 0.3


def test_equation_scenario_assignments_build():
    for eq, specs in EQUATION_SCENARIOS.items():
        for spec in specs:
            sc = build(spec)
            assert sc.label == spec.name
