import math

import numpy as np
import pytest

from fourphoton import kernels
from fourphoton.apparatus import AnalyzerSettings, BeamSplitter, InterferenceModel
from fourphoton.bell import ch_statistic
from fourphoton.optimize import (
    EfficiencySurface,
    OptimizerConfig,
    build_surface,
    hardy_optimum,
    optimize_angles,
)


@pytest.mark.parametrize(
    "kw", [{"coarse_grid_step": 20.0}, {"polish_tolerance": 1e-6}, {"multistart_count": 0}, {"seed": -1}]
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        OptimizerConfig(**kw)


def test_symmetric_threshold():
    r = optimize_angles(BeamSplitter.symmetric(), 1.0)
    assert r.eta_min == pytest.approx(2 / (1 + math.sqrt(2)), abs=1e-9)
    assert all(0.0 <= a < math.pi for a in r.angles)


def test_reported_threshold_is_feasible():
    for rho, v in [(0.1, 0.9), (0.5, 0.8), (1.0, 1.0)]:
        r = optimize_angles(rho, v)
        C, S = kernels.ch_parts(r.angles, rho, v)
        assert C > 0
        s = AnalyzerSettings(*r.angles)
        im = InterferenceModel.with_visibility(v)
        assert ch_statistic(s, BeamSplitter.from_rho(rho), im, min(r.eta_min + 0.005, 1.0)).B_CH > 0


def test_polish_never_worse_than_grid():
    for rho, v in [(0.05, 1.0), (0.3, 0.85), (1.0, 0.75)]:
        r = optimize_angles(rho, v)
        assert r.eta_min <= r.coarse_best + 1e-12


def test_deterministic_and_backend_independent():
    cfg = OptimizerConfig(seed=7)
    a = optimize_angles(0.2, 0.9, cfg)
    b = optimize_angles(0.2, 0.9, cfg)
    assert a == b


def test_no_violation_without_interference_is_infeasible():
    r = optimize_angles(1.0, 0.0)
    assert r.eta_min is None or not r.feasible


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        optimize_angles(0.0, 1.0)
    with pytest.raises(ValueError):
        optimize_angles(0.5, 1.2)


def test_ties_resolved_to_smallest_angles():
    # the symmetric problem is invariant under a joint rotation, so many optima tie
    r = optimize_angles(1.0, 1.0, OptimizerConfig(seed=3))
    assert r.angles[0] < math.radians(15.0)


@pytest.fixture(scope="module")
def surface():
    return build_surface([0.7, 0.775, 0.85, 0.925, 1.0], [0.05, 0.2, 0.4, 0.7, 1.0])


def test_surface_monotone_in_rho(surface):
    assert surface.diagnostics["nondecreasing_in_rho"]
    assert np.all(np.diff(surface.eta_min_grid, axis=1) >= -1e-9)


def test_surface_bounds(surface):
    eta = surface.eta_min_grid[np.isfinite(surface.eta_min_grid)]
    assert np.all(eta >= 2 / 3 - 1e-3)
    assert np.all(eta[surface.feasible_grid[np.isfinite(surface.eta_min_grid)]] <= 1.0)


def test_surface_csv_round_trip(surface, tmp_path):
    path = tmp_path / "s.csv"
    surface.write_csv(path)
    back = EfficiencySurface.read_csv(path)
    assert back.v_axis == surface.v_axis and back.rho_axis == surface.rho_axis
    assert np.array_equal(back.eta_min_grid, surface.eta_min_grid, equal_nan=True)
    assert np.array_equal(back.argmin_angles_grid, surface.argmin_angles_grid, equal_nan=True)
    assert np.array_equal(back.feasible_grid, surface.feasible_grid)
    path2 = tmp_path / "s2.csv"
    back.write_csv(path2)
    assert path.read_text() == path2.read_text()


def test_surface_csv_keeps_undefined_cells(tmp_path):
    s = build_surface([0.0], [1.0])
    s.write_csv(tmp_path / "u.csv")
    back = EfficiencySurface.read_csv(tmp_path / "u.csv")
    assert back.feasible_grid[0, 0] == s.feasible_grid[0, 0]
    assert np.array_equal(back.eta_min_grid, s.eta_min_grid, equal_nan=True)


def test_single_cell_equals_optimize_angles():
    s = build_surface([0.9], [0.1])
    r = optimize_angles(0.1, 0.9)
    assert s.eta_min_grid[0, 0] == pytest.approx(r.eta_min, rel=1e-11)
    assert s.argmin_angles_grid[0, 0] == pytest.approx(np.degrees(r.angles), rel=1e-11)


def test_surface_deterministic_and_parallel_equal():
    a = build_surface([0.8, 1.0], [0.1, 0.5])
    b = build_surface([0.8, 1.0], [0.1, 0.5], workers=2)
    assert np.array_equal(a.eta_min_grid, b.eta_min_grid)
    assert np.array_equal(a.argmin_angles_grid, b.argmin_angles_grid)


def test_surface_axis_validation():
    with pytest.raises(ValueError):
        build_surface([], [0.5])
    with pytest.raises(ValueError):
        build_surface([1.0, 0.9], [0.5])
    with pytest.raises(ValueError):
        build_surface([0.9], [0.0])


def test_lower_reflectivity_and_visibility_ordering():
    assert optimize_angles(0.25, 0.7).eta_min < optimize_angles(1.0, 1.0).eta_min


def test_hardy_optimum():
    h = hardy_optimum(1.0)
    assert h.best_R == pytest.approx(0.32, abs=0.02)
    assert h.hardy_probability == pytest.approx((5 * math.sqrt(5) - 11) / 2, abs=1e-6)
    with pytest.raises(ValueError):
        hardy_optimum(0.9)
