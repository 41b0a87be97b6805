import numpy as np
import pytest

from stencilbench import mandelbrot as mb
from stencilbench.errors import ConfigError
from stencilbench.execmodel import BlockConfig, LaunchSpec

F32 = np.float32


def reference_escape(cx, cy, max_iterations):
    """Direct per-pixel loop with float32 semantics, |z|^2 < 4 test."""
    x = F32(0.0)
    y = F32(0.0)
    xx = F32(0.0)
    yy = F32(0.0)
    n = 0
    while xx + yy < F32(4.0) and n < max_iterations:
        t = F32(x * y)
        y = F32(F32(t + t) + cy)
        x = F32(F32(xx - yy) + cx)
        xx = F32(x * x)
        yy = F32(y * y)
        n += 1
    return n, x, y


class TestEscape:
    def test_origin_never_escapes(self):
        n, z = mb.escape(0j, 100)
        assert n == 100

    def test_minus_one_cycles(self):
        n, z = mb.escape(-1 + 0j, 100)
        assert n == 100

    def test_c_equal_one_exits_at_two(self):
        n, z = mb.escape(1 + 0j, 5000)
        assert n == 2
        assert z == 2 + 0j

    def test_max_iterations_validated(self):
        with pytest.raises(ConfigError):
            mb.escape(0j, 0)


class TestRender:
    def test_single_pixel_at_origin(self):
        ext = mb.ComplexExtent(0j, 1.0, 1.0, 1, 1)
        res = mb.render(ext, 50)
        assert res.iterations[0, 0] == 50

    def test_block_size_independence(self):
        ext = mb.ComplexExtent(complex(-0.5, 0.0), 3.0, 3.0, 64, 64)
        a = mb.render(ext, 100, LaunchSpec.for_domain(BlockConfig(8, 8), 64, 64))
        b = mb.render(ext, 100, LaunchSpec.for_domain(BlockConfig(32, 4), 64, 64))
        assert np.array_equal(a.iterations, b.iterations)

    def test_matches_per_pixel_oracle(self):
        ext = mb.ComplexExtent(complex(-0.5, 0.0), 3.0, 3.0, 64, 64)
        res = mb.render(ext, 100)
        cx, cy = ext.pixel_coords()
        for j in range(0, 64, 3):
            for i in range(0, 64, 3):
                n, _, _ = reference_escape(cx[j, i], cy[j, i], 100)
                assert res.iterations[j, i] == n

    def test_conjugation_symmetry(self):
        """Extent symmetric about the real axis renders mirror-symmetric."""
        ext = mb.ComplexExtent(complex(-0.5, 0.0), 3.0, 3.0, 48, 48)
        res = mb.render(ext, 80)
        assert np.array_equal(res.iterations, res.iterations[::-1, :])

    def test_smooth_interior_equals_n(self):
        ext = mb.ComplexExtent(0j, 0.1, 0.1, 4, 4)  # deep interior window
        res = mb.render(ext, 60)
        assert np.all(res.iterations == 60)
        assert np.array_equal(res.smooth, res.iterations.astype(np.float64))

    def test_smooth_escaped_uses_continuous_formula(self):
        ext = mb.ComplexExtent(complex(1.0, 1.0), 0.01, 0.01, 2, 2)  # far outside
        res = mb.render(ext, 60)
        assert np.all(res.iterations < 60)
        n = res.iterations.astype(np.float64)
        expect = n + 1.0 - np.log2(np.log(np.abs(res.z_final)))
        assert np.allclose(res.smooth, expect, rtol=0, atol=0)

    def test_traffic_counts_streams(self):
        ext = mb.ComplexExtent(0j, 2.0, 2.0, 16, 16)
        res = mb.render(ext, 10)
        assert res.traffic.streams_read == 2
        assert res.traffic.streams_written == 3
        assert res.traffic.flops > 0


class TestZoomWorkload:
    def test_single_zoom_is_start_extent(self):
        (ext,) = mb.zoom_workload(zooms=1)
        assert ext.width == mb.START_WIDTH
        assert ext.center == mb.DEFAULT_CENTER

    def test_default_workload_shape(self):
        extents = mb.zoom_workload()
        assert len(extents) == 50
        assert all(e.center == complex(-0.75, 0.1) for e in extents)

    def test_geometric_halving(self):
        extents = mb.zoom_workload(zooms=8)
        for a, b in zip(extents, extents[1:]):
            assert b.width == 0.5 * a.width
            assert b.height == 0.5 * a.height

    def test_iterations_reported_per_frame(self):
        extents = mb.zoom_workload(center=complex(-0.75, 0.1), zooms=3, nx=32, ny=32)
        totals = [int(np.sum(mb.render(e, 200).iterations)) for e in extents]
        assert all(t > 0 for t in totals)  # reported, not asserted monotone


class TestArtifacts:
    def test_pgm_and_csv(self, tmp_path):
        ext = mb.ComplexExtent(complex(-0.5, 0.0), 3.0, 3.0, 8, 6)
        res = mb.render(ext, 30)
        pgm = tmp_path / "m.pgm"
        csvf = tmp_path / "m.csv"
        mb.write_pgm(pgm, res.iterations, 30)
        mb.write_smooth_csv(csvf, res.smooth)
        lines = pgm.read_text().splitlines()
        assert lines[0] == "P2"
        assert lines[1] == "8 6"
        assert lines[2] == "30"
        back = np.loadtxt(csvf, delimiter=",")
        assert np.allclose(back, res.smooth, rtol=1e-15, atol=0)
