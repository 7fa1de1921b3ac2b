import math

import numpy as np
import pytest

from bioheat import fdm, xform
from bioheat.errors import ConfigError, DivergenceError, StabilityError, UnsupportedCombinationError
from bioheat.model import REFERENCE_SOURCES, REFERENCE_TISSUE, HeatSource

T = REFERENCE_TISSUE


@pytest.fixture(scope="module")
def grid():
    return fdm.FdmGrid.build(T)


def ratio_dt(lam, dr=0.3e-3):
    return lam * T.rho * T.cp * dr * dr / T.kappa


class TestGrid:
    def test_reference_grid(self, grid):
        assert grid.n_nodes == 501
        assert grid.radii[-1] == pytest.approx(0.15)
        assert grid.stability_ratio == pytest.approx(0.5, rel=1e-14)
        # rho cp dr^2 / (2 kappa) with the reference tissue
        assert grid.dt == pytest.approx(1060 * 3600 * 0.09e-6 / (2 * 0.502), rel=1e-14)
        assert 0.34 < grid.dt < 0.345

    def test_initial_state(self, grid):
        s = fdm.init_state(grid, T)
        assert s.elapsed == 0.0 and s.step_index == 0
        assert np.all(s.temperatures == T.tc)

    def test_rejects_large_ratio(self):
        with pytest.raises(StabilityError, match="0.51"):
            fdm.FdmGrid.build(T, dt=ratio_dt(0.51))

    @pytest.mark.parametrize("kwargs, lam", [
        ({"scheme": "forward"}, 0.3), ({"center": "lhopital"}, 0.2), ({"perfusion": "explicit"}, 0.5),
    ])
    def test_scheme_bounds(self, kwargs, lam):
        with pytest.raises(StabilityError):
            fdm.FdmGrid.build(T, dt=ratio_dt(lam), **kwargs)

    def test_accepts_within_bounds(self):
        fdm.FdmGrid.build(T, dt=ratio_dt(0.25), scheme="forward")
        fdm.FdmGrid.build(T, dt=ratio_dt(1 / 6), scheme="forward", center="lhopital")
        fdm.FdmGrid.build(T, dt=ratio_dt(0.49), perfusion="explicit")

    def test_bound_values(self):
        assert fdm.stability_bound("central", "mirror") == 0.5
        assert fdm.stability_bound("forward", "mirror") == 0.25
        assert fdm.stability_bound("central", "lhopital") == pytest.approx(1 / 6)
        assert fdm.stability_bound("central", "mirror", 0.1, "explicit") == pytest.approx(0.45)
        assert fdm.stability_bound("central", "mirror", 0.1) == 0.5

    @pytest.mark.parametrize("kwargs, key", [
        ({"scheme": "upwind"}, "scheme"), ({"center": "none"}, "center"), ({"perfusion": "implicit"}, "perfusion"),
        ({"dr": 0.0}, "dr"), ({"outer_radius": 0.1001, "dr": 1e-3}, "outer_radius"),
        ({"outer_radius": 2e-3, "dr": 1e-3}, "dr"), ({"dt": -1.0}, "dt"),
    ])
    def test_rejects_bad_options(self, kwargs, key):
        with pytest.raises(ConfigError) as info:
            fdm.FdmGrid.build(T, **kwargs)
        assert info.value.key == key


class TestUpdate:
    def test_fixed_point_is_bitwise(self, grid):
        state = fdm.init_state(grid, T)
        zero = np.zeros(grid.n_nodes)
        theta = np.zeros(grid.n_nodes)
        spare = np.empty_like(theta)
        for _ in range(10_000):
            fdm.explicit_update(theta, grid.stability_ratio, T.b * grid.dt, zero, out=spare)
            theta, spare = spare, theta
        assert np.all(theta == 0.0)
        for _ in range(5):
            state = fdm.step(state, grid, T, zero)
        assert np.all(state.temperatures == T.tc) and state.step_index == 5

    def test_alias_rejected(self):
        theta = np.zeros(8)
        with pytest.raises(ValueError):
            fdm.explicit_update(theta, 0.5, 0.0, np.zeros(8), out=theta)

    @staticmethod
    def _bump(n):
        r = np.arange(n)
        return np.exp(-((r - n / 3) ** 2) / 20.0)

    def test_central_conserves_weighted_energy(self):
        n = 200
        theta = self._bump(n)
        new = fdm.explicit_update(theta, 0.4, 0.0, np.zeros(n))
        w = np.arange(n, dtype=float) ** 2
        interior = slice(1, n - 1)
        change = math.fsum(w[interior] * (new - theta)[interior])
        assert abs(change) < 1e-12 * math.fsum(w * theta)

    def test_forward_lhopital_conserves_weighted_energy(self):
        n = 200
        theta = self._bump(n)
        new = fdm.explicit_update(theta, 0.15, 0.0, np.zeros(n), scheme="forward", center="lhopital")
        k = np.arange(n, dtype=float)
        w = k * (k + 1)
        w[0] = 1.0 / 3.0
        change = math.fsum(w[:-1] * (new - theta)[:-1])
        assert abs(change) < 1e-12 * math.fsum(w * theta)

    def test_boundary_nodes(self):
        theta = np.linspace(0, 1, 10)
        new = fdm.explicit_update(theta, 0.3, 0.0, np.zeros(10))
        assert new[0] == new[1] and new[-1] == new[-2]

    def test_explicit_perfusion_diverges_at_half(self, grid):
        # checkerboard mode: |g| = 1 + b dt at lam = 1/2 without the implicit split
        theta = 1e-12 * (-1.0) ** np.arange(grid.n_nodes)
        zero = np.zeros(grid.n_nodes)
        for _ in range(4000):
            theta = fdm.explicit_update(theta, 0.5, T.b * grid.dt, zero, perfusion="explicit")
        assert np.max(np.abs(theta)) > 1e-9
        calm = 1e-12 * (-1.0) ** np.arange(grid.n_nodes)
        for _ in range(4000):
            calm = fdm.explicit_update(calm, 0.5, T.b * grid.dt, zero)
        assert np.max(np.abs(calm)) <= 1e-12

    def test_divergence_error(self, grid):
        state = fdm.init_state(grid, T)
        field = np.zeros(grid.n_nodes)
        field[3] = np.inf
        with pytest.raises(DivergenceError, match="step 1"):
            fdm.step(state, grid, T, field)

    def test_source_shape_checked(self, grid):
        with pytest.raises(ValueError):
            fdm.step(fdm.init_state(grid, T), grid, T, np.zeros(5))


class TestRun:
    def test_unsupported_sources(self, grid):
        for kind in ("point", "shell"):
            with pytest.raises(UnsupportedCombinationError):
                fdm.run(REFERENCE_SOURCES[kind], T, grid, [1.0])

    def test_step_source_includes_boundary_node(self, grid):
        # a node a rounding error outside r0 still counts as inside
        r0 = grid.radii[16] * (1 - 1e-14)
        field = fdm.discretize_source(HeatSource.step(1.0, r0), grid)
        assert np.count_nonzero(field) == 17
        field = fdm.discretize_source(HeatSource.step(1.0, 5e-3), grid)
        assert np.count_nonzero(field) == 17

    def test_time_snapping(self, grid):
        assert fdm.steps_for_time(0.0, grid.dt) == 0
        assert fdm.steps_for_time(grid.dt, grid.dt) == 1
        assert fdm.steps_for_time(3 * grid.dt * (1 + 1e-14), grid.dt) == 3
        assert fdm.steps_for_time(10.0, grid.dt) == 30
        profs = fdm.run(REFERENCE_SOURCES["step"], T, grid, [0.0, 10.0, 10.0])
        assert profs[0].time == 0.0 and np.all(profs[0].temperatures == T.tc)
        assert profs[1].time == pytest.approx(30 * grid.dt) and profs[1].time >= 10.0
        np.testing.assert_array_equal(profs[1].temperatures, profs[2].temperatures)

    def test_rejects_unsorted_times(self, grid):
        with pytest.raises(ValueError):
            fdm.run(REFERENCE_SOURCES["step"], T, grid, [10.0, 1.0])
        with pytest.raises(ValueError):
            fdm.run(REFERENCE_SOURCES["step"], T, grid, [-1.0])

    def test_heating_stays_above_baseline(self, grid):
        profs = fdm.run(REFERENCE_SOURCES["gaussian"], T, grid, [10.0, 100.0, 500.0])
        for p in profs:
            assert p.temperatures.min() >= T.tc
        table = np.array([p.temperatures for p in profs])
        assert np.all(np.diff(table, axis=0) >= 0)

    def test_grid_refinement(self, grid):
        fine = fdm.FdmGrid.build(T, dr=0.15e-3)
        coarse = fdm.run(REFERENCE_SOURCES["gaussian"], T, grid, [100.0])[0]
        refined = fdm.run(REFERENCE_SOURCES["gaussian"], T, fine, [coarse.time])[0]
        assert refined.time == pytest.approx(coarse.time, rel=1e-12)
        rel = np.abs(coarse.temperatures - refined.temperatures[::2]) / refined.temperatures[::2]
        assert rel.max() < 1e-3

    def test_gaussian_tracks_transform(self, grid):
        (p,) = fdm.run(REFERENCE_SOURCES["gaussian"], T, grid, [100.0])
        for r in (0.0, 3e-3, 9e-3):
            k = int(round(r / grid.dr))
            ref = xform.temperature(REFERENCE_SOURCES["gaussian"], T, grid.radii[k], p.time)
            assert p.temperatures[k] == pytest.approx(ref, rel=1e-3)
