import numpy as np
import pytest

from stencilbench.errors import CflError, ConfigError
from stencilbench.grid import (Bathymetry, GridGeometry, SimParams, SimState,
                               apply_boundary, auto_dt, check_dt, init_state,
                               midpoint_depth, total_mass)

from conftest import make_domain, smooth_random


class TestGeometry:
    def test_shape_includes_halo(self):
        g = GridGeometry(1550, 950, 400.0, 400.0, halo=2)
        assert g.shape == (950 + 4, 1550 + 4)

    @pytest.mark.parametrize("kwargs", [
        dict(nx=0, ny=4, dx=1.0, dy=1.0),
        dict(nx=4, ny=0, dx=1.0, dy=1.0),
        dict(nx=4, ny=4, dx=0.0, dy=1.0),
        dict(nx=4, ny=4, dx=1.0, dy=-1.0),
        dict(nx=4, ny=4, dx=1.0, dy=1.0, halo=3),
    ])
    def test_invalid_geometry(self, kwargs):
        with pytest.raises(ConfigError):
            GridGeometry(**kwargs)


class TestInitState:
    def test_lake_at_rest_ghosts(self):
        geometry, bathy = make_domain(4, 4, halo=1)
        z = np.zeros((4, 4), np.float32)
        params = SimParams(dt=1.0)
        state = init_state(geometry, bathy, z, z, z, params)
        assert np.all(state.eta == 0.0)
        assert np.all(state.hu == 0.0)

    def test_allocation_at_operational_size(self):
        g = GridGeometry(1550, 950, 400.0, 400.0, halo=1)
        bathy = Bathymetry.flat(50.0, g)
        z = np.zeros((950, 1550), np.float32)
        state = init_state(g, bathy, z, z, z, SimParams(dt=1.0))
        for name in ("eta", "hu", "hv"):
            assert getattr(state, name).shape == (950 + 2, 1550 + 2)

    def test_dimension_mismatch(self):
        geometry, bathy = make_domain(8, 6)
        z = np.zeros((6, 8), np.float32)
        with pytest.raises(ConfigError, match="interior shape"):
            init_state(geometry, bathy, np.zeros((8, 6), np.float32), z, z,
                       SimParams(dt=1.0))

    def test_nonpositive_depth_rejected(self):
        geometry, bathy = make_domain(4, 4, depth=5.0)
        eta0 = np.full((4, 4), -10.0, np.float32)
        z = np.zeros((4, 4), np.float32)
        with pytest.raises(ConfigError, match="depth"):
            init_state(geometry, bathy, eta0, z, z, SimParams(dt=1.0))

    def test_two_levels_equal_initial(self):
        geometry, bathy = make_domain(6, 5)
        rng = np.random.default_rng(0)
        eta0 = rng.uniform(-0.1, 0.1, (5, 6)).astype(np.float32)
        z = np.zeros((5, 6), np.float32)
        state = init_state(geometry, bathy, eta0, z, z, SimParams(dt=1.0),
                           two_levels=True)
        assert np.array_equal(state.eta, state.eta_prev)


class TestBoundary:
    def test_periodic_wrap_identity(self):
        geometry, bathy = make_domain(4, 4, halo=1)
        params = SimParams(dt=1.0, boundary="periodic")
        eta0 = np.zeros((4, 4), np.float32)
        eta0[:, 0] = 7.0
        z = np.zeros((4, 4), np.float32)
        state = init_state(geometry, bathy, eta0, z, z, params)
        # east ghost column equals the wrapped west interior column
        assert np.all(state.eta[1:-1, -1] == 7.0)

    def test_closed_wall_faces_zero(self):
        geometry, bathy = make_domain(6, 5, halo=1)
        params = SimParams(dt=1.0, boundary="closed-wall")
        rng = np.random.default_rng(1)
        f = rng.uniform(-1, 1, (5, 6)).astype(np.float32)
        state = init_state(geometry, bathy, 0 * f, f, f.copy(), params)
        h = geometry.halo
        assert np.all(state.hu[:, h - 1] == 0.0)          # west wall face
        assert np.all(state.hu[:, geometry.nx + h - 1] == 0.0)  # east wall face
        assert np.all(state.hv[h - 1, :] == 0.0)
        assert np.all(state.hv[geometry.ny + h - 1, :] == 0.0)

    def test_closed_wall_eta_mirror_oracle(self):
        """Brute-force cell-by-cell check of the mirror rule on an 8x8 state."""
        geometry, bathy = make_domain(8, 8, halo=2)
        params = SimParams(dt=1.0, boundary="closed-wall")
        rng = np.random.default_rng(2)
        eta0 = rng.uniform(-0.5, 0.5, (8, 8)).astype(np.float32)
        z = np.zeros((8, 8), np.float32)
        state = init_state(geometry, bathy, eta0, z, z, params)
        h = geometry.halo
        eta = state.eta
        for j in range(h, h + 8):
            for k in range(h):
                assert eta[j, h - 1 - k] == eta[j, h + k]
                assert eta[j, 8 + h + k] == eta[j, 8 + h - 1 - k]
        for i in range(eta.shape[1]):
            for k in range(h):
                assert eta[h - 1 - k, i] == eta[h + k, i]
                assert eta[8 + h + k, i] == eta[8 + h - 1 - k, i]

    @pytest.mark.parametrize("boundary", ["periodic", "closed-wall"])
    @pytest.mark.parametrize("layout", ["staggered", "centered"])
    def test_ghost_fill_idempotent(self, boundary, layout):
        geometry, bathy = make_domain(9, 7, halo=2)
        params = SimParams(dt=1.0, boundary=boundary)
        rng = np.random.default_rng(3)
        eta0 = rng.uniform(-0.2, 0.2, (7, 9)).astype(np.float32)
        hu0 = rng.uniform(-1, 1, (7, 9)).astype(np.float32)
        hv0 = rng.uniform(-1, 1, (7, 9)).astype(np.float32)
        state = init_state(geometry, bathy, eta0, hu0, hv0, params, layout=layout)
        once = state.copy()
        apply_boundary(state, params)
        assert np.array_equal(once.eta, state.eta)
        assert np.array_equal(once.hu, state.hu)
        assert np.array_equal(once.hv, state.hv)


class TestBathymetry:
    def test_midpoints_are_intersection_averages(self, rng):
        geometry, _ = make_domain(10, 6, halo=1)
        h_int = (10 + rng.uniform(-2, 2, (6 + 3, 10 + 3))).astype(np.float32)
        bathy = Bathymetry(h_int, geometry)
        expect = midpoint_depth(h_int)
        assert np.array_equal(bathy.h_mid, expect)

    def test_positive_depths_required(self):
        geometry, _ = make_domain(4, 4, halo=1)
        h_int = np.full((7, 7), -1.0, np.float32)
        with pytest.raises(ConfigError, match="positive"):
            Bathymetry(h_int, geometry)

    def test_periodic_seam_identified(self):
        geometry, _ = make_domain(8, 6, halo=2)
        rng = np.random.default_rng(5)
        h = (10 + rng.uniform(-1, 1, (7, 9))).astype(np.float32)
        bathy = Bathymetry.from_interior(h, geometry, "periodic")
        # ghost nodes wrap: col c equals col c + nx for the halo ring
        for c in range(geometry.halo):
            assert np.array_equal(bathy.h_int[:, c], bathy.h_int[:, c + 8])


class TestTotalMass:
    def test_zero_field(self):
        geometry, bathy = make_domain(4, 4)
        z = np.zeros((4, 4), np.float32)
        state = init_state(geometry, bathy, z, z, z, SimParams(dt=1.0))
        assert total_mass(state, geometry) == 0.0

    def test_single_cell(self):
        g = GridGeometry(1, 1, 3.0, 3.0, halo=1)
        bathy = Bathymetry.flat(10.0, g)
        eta0 = np.array([[2.0]], np.float32)
        z = np.zeros((1, 1), np.float32)
        state = init_state(g, bathy, eta0, z, z, SimParams(dt=1.0))
        assert total_mass(state, g) == 18.0

    def test_matches_nested_loop_oracle(self, rng):
        geometry, bathy = make_domain(16, 16)
        eta0 = rng.uniform(-1, 1, (16, 16)).astype(np.float32)
        z = np.zeros((16, 16), np.float32)
        state = init_state(geometry, bathy, eta0, z, z, SimParams(dt=1.0))
        acc = 0.0
        for j in range(16):
            for i in range(16):
                acc += float(np.float64(eta0[j, i]))
        oracle = acc * (geometry.dx * geometry.dy)
        got = total_mass(state, geometry)
        # same accumulation order, so within 1 ulp means exactly equal here
        assert got == oracle


class TestCfl:
    def test_gate_rejects_large_dt(self):
        geometry, bathy = make_domain(16, 16, depth=10.0)
        with pytest.raises(CflError) as err:
            check_dt("linear", 100.0, geometry, bathy, 9.81)
        assert err.value.stable_dt > 0

    def test_auto_dt_passes_gate(self):
        geometry, bathy = make_domain(16, 16, depth=10.0, bumpy_bathy=True)
        for scheme in ("linear", "nonlinear", "hires"):
            dt = auto_dt(scheme, geometry, bathy, 9.81)
            check_dt(scheme, dt, geometry, bathy, 9.81)
