"""Parity and benchmark comparison between the kernel lanes.

The compiled core and the numpy fallback must agree bitwise for every
kernel, every variant, both math modes.
"""

import numpy as np
import pytest

import stencilbench.backends as backends
from stencilbench import bench, mandelbrot
from stencilbench.execmodel import BlockConfig, LaunchSpec
from stencilbench.grid import CENTERED, SimParams, auto_dt
from stencilbench.schemes import ctcs, hires, linear

from conftest import make_domain, random_state, states_equal

needs_compiled = pytest.mark.skipif(not backends.HAVE_COMPILED,
                                    reason="compiled kernel core not built")


def _setups():
    out = {}
    geometry, bathy = make_domain(19, 13, halo=2, bumpy_bathy=True, boundary="periodic")
    out["geometry"] = geometry
    out["bathy"] = bathy
    return out


@needs_compiled
class TestParity:
    @pytest.mark.parametrize("boundary", ["periodic", "closed-wall"])
    @pytest.mark.parametrize("variant", ["fused", "three_kernel"])
    def test_linear(self, boundary, variant):
        geometry, bathy = make_domain(19, 13, halo=2, bumpy_bathy=True,
                                      boundary=boundary)
        params = SimParams(g=9.81, f=1e-4, dt=auto_dt("linear", geometry, bathy, 9.81),
                           boundary=boundary)
        state = random_state(geometry, bathy, params, seed=21)
        spec = LaunchSpec.for_domain(BlockConfig(5, 4), geometry.nx, geometry.ny)
        a, _ = linear.step_linear(state, params, bathy, spec, variant, backend="python")
        b, _ = linear.step_linear(state, params, bathy, spec, variant, backend="compiled")
        assert states_equal(a, b)

    @pytest.mark.parametrize("boundary", ["periodic", "closed-wall"])
    @pytest.mark.parametrize("variant", ["fused", "three_kernel"])
    def test_ctcs(self, boundary, variant):
        geometry, bathy = make_domain(19, 13, halo=1, bumpy_bathy=True,
                                      boundary=boundary)
        params = SimParams(g=9.81, f=1e-4,
                           dt=auto_dt("nonlinear", geometry, bathy, 9.81),
                           boundary=boundary)
        state = random_state(geometry, bathy, params, seed=22, two_levels=True)
        spec = LaunchSpec.for_domain(BlockConfig(5, 4), geometry.nx, geometry.ny)
        state, _ = ctcs.step_ctcs(state, params, bathy, spec)  # past bootstrap
        a, _ = ctcs.step_ctcs(state, params, bathy, spec, variant, backend="python")
        b, _ = ctcs.step_ctcs(state, params, bathy, spec, variant, backend="compiled")
        assert states_equal(a, b)

    @pytest.mark.parametrize("boundary", ["periodic", "closed-wall"])
    @pytest.mark.parametrize("stage", [0, 3, 6])
    @pytest.mark.parametrize("mode", ["precise", "fast"])
    def test_hires(self, boundary, stage, mode):
        geometry, bathy = make_domain(19, 13, halo=2, bumpy_bathy=True,
                                      boundary=boundary)
        params = SimParams(g=9.81, f=1e-4, dt=auto_dt("hires", geometry, bathy, 9.81),
                           boundary=boundary)
        state = random_state(geometry, bathy, params, seed=23, layout=CENTERED)
        spec = LaunchSpec.for_domain(BlockConfig(5, 4), geometry.nx, geometry.ny,
                                     math_mode=mode)
        a, _ = hires.rk2_step(state, params, bathy, spec, stage=stage, backend="python")
        b, _ = hires.rk2_step(state, params, bathy, spec, stage=stage, backend="compiled")
        assert states_equal(a, b)

    def test_mandelbrot(self):
        ext = mandelbrot.ComplexExtent(complex(-0.6, 0.3), 2.5, 2.5, 48, 40)
        a = mandelbrot.render(ext, 300, backend="python")
        b = mandelbrot.render(ext, 300, backend="compiled")
        assert np.array_equal(a.iterations, b.iterations)
        assert np.array_equal(a.z_final, b.z_final)

    def test_multistep_trajectory(self):
        """Divergence would compound over steps; none may appear."""
        geometry, bathy = make_domain(16, 16, halo=2, bumpy_bathy=True)
        params = SimParams(g=9.81, f=0.0, dt=auto_dt("hires", geometry, bathy, 9.81))
        state = random_state(geometry, bathy, params, seed=24, layout=CENTERED)
        spec = LaunchSpec.for_domain(BlockConfig(8, 8), 16, 16)
        a = b = state
        for _ in range(50):
            a, _ = hires.rk2_step(a, params, bathy, spec, backend="python")
            b, _ = hires.rk2_step(b, params, bathy, spec, backend="compiled")
        assert states_equal(a, b)


@needs_compiled
class TestBackendBenchmark:
    def test_compare_backends_produces_records(self):
        geometry, bathy = make_domain(24, 24, halo=2)
        params = SimParams(g=9.81, f=0.0, dt=auto_dt("hires", geometry, bathy, 9.81))
        state = random_state(geometry, bathy, params, seed=25, layout=CENTERED)

        def run_fn_for(backend):
            def run_fn(block):
                spec = LaunchSpec.for_domain(block, 24, 24)
                s, stats = hires.rk2_step(state, params, bathy, spec, backend=backend)
                return stats
            return run_fn

        records = bench.compare_backends(
            run_fn_for, BlockConfig(8, 8), backends.BACKENDS,
            scheme="hires", variant="stage0", nx=24, ny=24, steps=1,
            warmup=1, reps=3)
        assert len(records) == len(backends.BACKENDS)
        assert all(r.feasible and r.megacells_per_s > 0 for r in records)
        tags = {r.variant for r in records}
        assert any("python" in t for t in tags)
