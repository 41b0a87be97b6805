import os

import numpy as np
import pytest

from stencilbench.errors import ConfigError, LaunchError
from stencilbench.execmodel import (BlockConfig, DEFAULT_PRESET, Kernel, LaunchSpec,
                                    SharedBuffer, get_kernel, launch, shared_accounting)
import stencilbench.schemes  # noqa: F401  (kernel registration)

F32 = np.float32


def _domain_arrays(nx, ny, halo, rng, n=1):
    shape = (ny + 2 * halo, nx + 2 * halo)
    return [rng.uniform(-1, 1, shape).astype(np.float32) for _ in range(n)]


def run_copy(nx, ny, block, order="forward", threads=None):
    rng = np.random.default_rng(0)
    src = rng.uniform(-1, 1, (ny, nx)).astype(np.float32)
    out = np.zeros_like(src)
    spec = LaunchSpec.for_domain(block, nx, ny)
    stats = launch(get_kernel("copy"), spec, {"src": src}, {"dst": out},
                   domain=(0, 0, nx, ny), order=order, threads=threads)
    return src, out, stats


class TestLaunchBasics:
    def test_copy_kernel_streams(self):
        src, out, stats = run_copy(8, 8, BlockConfig(4, 4))
        assert np.array_equal(src, out)
        assert stats.streams_read == 1
        assert stats.streams_written == 1

    def test_partial_edge_blocks_masked(self):
        src, out, _ = run_copy(8, 8, BlockConfig(3, 3))
        assert np.array_equal(src, out)

    def test_masked_threads_not_counted(self):
        _, _, full = run_copy(8, 8, BlockConfig(4, 4))
        _, _, part = run_copy(8, 8, BlockConfig(3, 3))
        assert full.cell_writes == 64
        assert part.cell_writes == 64  # masked lanes write nothing

    def test_laplacian_matches_nested_loop_oracle(self, rng):
        nx, ny, halo = 16, 16, 1
        (src,) = _domain_arrays(nx, ny, halo, rng)
        out1 = np.zeros_like(src)
        out2 = np.zeros_like(src)
        k = get_kernel("laplacian5")
        for out, block in ((out1, BlockConfig(8, 2)), (out2, BlockConfig(16, 16))):
            spec = LaunchSpec.for_domain(block, nx, ny)
            launch(k, spec, {"src": src}, {"dst": out}, domain=(halo, halo, nx, ny))
        assert np.array_equal(out1, out2)
        four = F32(4.0)
        for j in range(1, ny + 1):
            for i in range(1, nx + 1):
                expect = F32(F32(F32(src[j - 1, i] + src[j + 1, i])
                                 + F32(src[j, i - 1] + src[j, i + 1]))
                             - F32(four * src[j, i]))
                assert out1[j, i] == expect


class TestScheduleIndependence:
    @pytest.mark.parametrize("kernel_name", ["laplacian5", "diffuse2"])
    def test_orders_and_threads(self, kernel_name, rng):
        k = get_kernel(kernel_name)
        halo = k.radius
        nx, ny = 23, 17
        (src,) = _domain_arrays(nx, ny, halo, rng)
        params = {"k": F32(0.1)}
        results = []
        for order, threads in (("forward", 1), ("reverse", 1), ("random", 1),
                               ("forward", 4)):
            out = np.zeros_like(src)
            spec = LaunchSpec.for_domain(BlockConfig(5, 3), nx, ny)
            launch(k, spec, {"src": src}, {"dst": out}, params,
                   domain=(halo, halo, nx, ny), order=order, seed=7, threads=threads)
            results.append(out)
        for other in results[1:]:
            assert np.array_equal(results[0], other)

    def test_traffic_stable_across_blocks(self, rng):
        k = get_kernel("laplacian5")
        (src,) = _domain_arrays(12, 12, 1, rng)
        reads = set()
        writes = set()
        for block in (BlockConfig(4, 4), BlockConfig(12, 12), BlockConfig(5, 7)):
            out = np.zeros_like(src)
            spec = LaunchSpec.for_domain(block, 12, 12)
            stats = launch(k, spec, {"src": src}, {"dst": out}, domain=(1, 1, 12, 12))
            reads.add(stats.streams_read)
            writes.add(stats.streams_written)
        assert reads == {1}
        assert writes == {1}


class TestSharedAccounting:
    def test_empty_inventory(self):
        spec = LaunchSpec.for_domain(BlockConfig(16, 16), 64, 64)
        assert shared_accounting(spec) == 0

    def test_single_buffer_no_halo(self):
        spec = LaunchSpec.for_domain(BlockConfig(16, 16), 64, 64,
                                     shared=[SharedBuffer("q", 1, 0)])
        assert shared_accounting(spec) == 1024

    def test_buffer_with_halo(self):
        spec = LaunchSpec.for_domain(BlockConfig(16, 16), 64, 64,
                                     shared=[SharedBuffer("q", 3, 2)])
        assert shared_accounting(spec) == 4 * 3 * 20 * 20

    def test_resource_gate_rejects(self):
        # whole shared budget in one block-sized buffer, plus one more byte's worth
        spec = LaunchSpec.for_domain(BlockConfig(32, 32), 64, 64,
                                     shared=[SharedBuffer("q", 13, 0)])
        assert shared_accounting(spec) > DEFAULT_PRESET.shared_per_block_limit_bytes
        src = np.zeros((64, 64), np.float32)
        with pytest.raises(LaunchError, match="shared"):
            launch(get_kernel("copy"), spec, {"src": src}, {"dst": src.copy()},
                   domain=(0, 0, 64, 64))

    def test_radius_exceeding_halo_rejected(self):
        k = get_kernel("diffuse2")  # radius 2
        src = np.zeros((18, 18), np.float32)  # halo 1 only
        spec = LaunchSpec.for_domain(BlockConfig(8, 8), 16, 16)
        with pytest.raises(LaunchError, match="radius"):
            launch(k, spec, {"src": src}, {"dst": src.copy()},
                   params={"k": F32(0.1)}, domain=(1, 1, 16, 16))

    def test_thread_limit_rejected(self):
        spec = LaunchSpec.for_domain(BlockConfig(64, 64), 64, 64)
        src = np.zeros((64, 64), np.float32)
        with pytest.raises(LaunchError, match="threads"):
            launch(get_kernel("copy"), spec, {"src": src}, {"dst": src.copy()},
                   domain=(0, 0, 64, 64))


class TestSpecTypes:
    def test_block_validation(self):
        with pytest.raises(ConfigError):
            BlockConfig(0, 4)

    def test_grid_covers_domain(self):
        spec = LaunchSpec.for_domain(BlockConfig(7, 5), 64, 64)
        assert spec.grid_w * 7 >= 64
        assert spec.grid_h * 5 >= 64

    def test_math_mode_validated(self):
        with pytest.raises(ConfigError):
            LaunchSpec(BlockConfig(4, 4), 1, 1, (), "sloppy")

    def test_csv_row_format(self):
        src, out, stats = run_copy(8, 8, BlockConfig(4, 4))
        row = stats.csv_row()
        fields = row.split(",")
        assert fields[0] == "copy"
        assert fields[1:3] == ["4", "4"]
        assert len(fields) == 7


class TestThreadsEnv:
    def test_threads_env_respected(self, monkeypatch):
        monkeypatch.setenv("STENCILBENCH_THREADS", "3")
        src, out, _ = run_copy(16, 16, BlockConfig(4, 4))
        assert np.array_equal(src, out)
