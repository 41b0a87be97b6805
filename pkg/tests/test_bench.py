import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stencilbench import bench
from stencilbench.bench import (BenchRecord, ConstantPower, Heatmap, TraceDirPower,
                                argmax_config, autotune, best_config, default_sweep)
from stencilbench.errors import ConfigError, LaunchError
from stencilbench.execmodel import BlockConfig, TrafficStats
from stencilbench.power import synthetic_trace


def rec(w, h, mcs, watts=None, feasible=True):
    r = BenchRecord("s", "v", BlockConfig(w, h), 64, 64, 10, feasible=feasible)
    if feasible and mcs is not None:
        r.wall_seconds = r.megacells / mcs
    r.mean_watts = watts
    return r


class TestArgmax:
    def test_simple_argmax(self):
        table = [(BlockConfig(8, 8), 100.0), (BlockConfig(16, 16), 200.0),
                 (BlockConfig(32, 8), 150.0)]
        assert argmax_config(table) == BlockConfig(16, 16)

    def test_tie_smaller_area(self):
        table = [(BlockConfig(16, 4), 100.0), (BlockConfig(8, 8), 100.0)]
        assert argmax_config(table) == BlockConfig(8, 8)

    def test_tie_equal_area_smaller_width(self):
        table = [(BlockConfig(16, 4), 100.0), (BlockConfig(4, 16), 100.0)]
        assert argmax_config(table) == BlockConfig(4, 16)

    def test_none_values_skipped(self):
        table = [(BlockConfig(8, 8), None), (BlockConfig(4, 4), 1.0)]
        assert argmax_config(table) == BlockConfig(4, 4)

    def test_all_infeasible(self):
        assert argmax_config([(BlockConfig(8, 8), None)]) is None

    @staticmethod
    def brute_force(table):
        best = None
        for cfg, val in table:
            if val is None:
                continue
            if best is None:
                best = (cfg, val)
                continue
            bc, bv = best
            better = (val > bv
                      or (val == bv and cfg.width * cfg.height < bc.width * bc.height)
                      or (val == bv and cfg.width * cfg.height == bc.width * bc.height
                          and cfg.width < bc.width))
            if better:
                best = (cfg, val)
        return None if best is None else best[0]

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 32), st.integers(1, 32),
                              st.sampled_from([1.0, 2.0, 3.0, 5.0, 8.0])),
                    min_size=1, max_size=24))
    def test_matches_brute_force(self, raw):
        table = [(BlockConfig(w, h), v) for w, h, v in raw]
        assert argmax_config(table) == self.brute_force(table)

    def test_matches_brute_force_1000_random_tables(self):
        rng = np.random.default_rng(0)
        sizes = [4, 8, 12, 16, 24, 32]
        for _ in range(1000):
            n = rng.integers(1, 12)
            table = []
            for _ in range(n):
                cfg = BlockConfig(int(rng.choice(sizes)), int(rng.choice(sizes)))
                val = float(rng.choice([50.0, 100.0, 150.0, 200.0]))
                table.append((cfg, val))
            assert argmax_config(table) == self.brute_force(table)


class FakeRun:
    """Deterministic run function with a planned throughput per block."""

    def __init__(self, plan, reject=()):
        self.plan = plan
        self.reject = set(reject)

    def __call__(self, block):
        if (block.width, block.height) in self.reject:
            raise LaunchError("resource gate")
        import time
        time.sleep(self.plan[(block.width, block.height)])
        return TrafficStats(kernel="fake", block_w=block.width, block_h=block.height)


class TestAutotune:
    def test_best_matches_plan(self):
        plan = {(4, 4): 0.004, (8, 8): 0.001, (16, 16): 0.002}
        configs = [BlockConfig(w, h) for w, h in plan]
        records, best = autotune(FakeRun(plan), configs, nx=64, ny=64, steps=1,
                                 warmup=0, reps=3)
        assert best == BlockConfig(8, 8)
        assert all(r.feasible for r in records)

    def test_infeasible_recorded_not_fatal(self):
        plan = {(4, 4): 0.001, (32, 32): 0.001}
        configs = [BlockConfig(4, 4), BlockConfig(32, 32)]
        records, best = autotune(FakeRun(plan, reject={(32, 32)}), configs,
                                 warmup=0, reps=1)
        assert best == BlockConfig(4, 4)
        bad = [r for r in records if not r.feasible]
        assert len(bad) == 1
        assert bad[0].block == BlockConfig(32, 32)
        assert "gate" in bad[0].note

    def test_efficiency_needs_power(self):
        with pytest.raises(ConfigError, match="power"):
            autotune(FakeRun({}), [], metric="efficiency")

    def test_constant_power_efficiency_tracks_throughput(self):
        plan = {(4, 4): 0.004, (8, 8): 0.001, (16, 16): 0.002}
        configs = [BlockConfig(w, h) for w, h in plan]
        run = FakeRun(plan)
        _, best_t = autotune(run, configs, nx=64, ny=64, steps=1,
                             warmup=0, reps=3, metric="throughput")
        _, best_e = autotune(run, configs, nx=64, ny=64, steps=1,
                             warmup=0, reps=3, metric="efficiency",
                             power_source=ConstantPower(50.0))
        assert best_t == best_e

    def test_default_sweep_respects_thread_limit(self):
        for cfg in default_sweep(1024):
            assert cfg.threads <= 1024


class TestEfficiencyIdentity:
    def test_megacells_per_joule_identity_exact(self):
        # powers of two make the float identities exact
        r = BenchRecord("s", "v", BlockConfig(8, 8), 1024, 1024, 128)
        r.wall_seconds = 4.0
        r.mean_watts = 64.0
        assert r.megacells == 1024 * 1024 * 128 / 1e6
        assert r.megacells_per_joule == r.megacells_per_s / r.mean_watts
        assert r.megacells_per_joule == r.megacells / r.net_joules

    def test_trace_dir_power(self, tmp_path):
        trace = synthetic_trace(84.0, 8.0, idle_watts=20.0)
        lines = ["t_ms,watts"] + [f"{t},{w}" for t, w in zip(trace.t_ms, trace.watts)]
        (tmp_path / "block_8x8.csv").write_text("\n".join(lines) + "\n")
        src = TraceDirPower(str(tmp_path))
        assert src(rec(8, 8, 100.0)) == pytest.approx(64.0, rel=1e-12)
        assert src(rec(4, 4, 100.0)) is None


class TestHeatmap:
    def make_records(self):
        rows = [rec(4, 4, 100.0), rec(8, 4, 150.0), rec(4, 8, 125.0),
                rec(8, 8, None, feasible=False)]
        return rows

    def test_single_entry(self):
        hm = Heatmap.from_records([rec(8, 8, 42.0)])
        assert hm.widths == [8] and hm.heights == [8]
        assert hm.values[(8, 8)] == 42.0

    def test_masked_cell_is_not_zero(self):
        hm = Heatmap.from_records(self.make_records())
        assert hm.values[(8, 8)] is None
        svg = hm.to_svg()
        assert "hatch" in svg

    def test_csv_round_trip_exact(self):
        hm = Heatmap.from_records(self.make_records())
        back = Heatmap.from_csv(hm.to_csv())
        assert back.widths == hm.widths
        assert back.heights == hm.heights
        assert back.values == hm.values

    def test_csv_round_trip_full_precision(self):
        r = rec(4, 4, 0.1 + 1e-17)
        hm = Heatmap.from_records([r])
        back = Heatmap.from_csv(hm.to_csv())
        assert back.values[(4, 4)] == hm.values[(4, 4)]

    def test_svg_has_rect_per_config(self):
        hm = Heatmap.from_records(self.make_records())
        svg = hm.to_svg()
        assert svg.count("<rect") == len(hm.widths) * len(hm.heights)


class TestResultsCsv:
    def test_header_and_row_shape(self, tmp_path):
        path = tmp_path / "r.csv"
        bench.write_results_csv(path, [rec(8, 8, 100.0, watts=50.0)])
        lines = path.read_text().splitlines()
        assert lines[0] == ("scheme,variant,block_w,block_h,nx,ny,steps,"
                            "wall_s,mcells_s,mean_w,mcells_j")
        assert len(lines) == 2
        assert len(lines[1].split(",")) == 11

    def test_infeasible_row_has_empty_metrics(self, tmp_path):
        path = tmp_path / "r.csv"
        bench.write_results_csv(path, [rec(32, 32, None, feasible=False)])
        row = path.read_text().splitlines()[1].split(",")
        assert row[7] == "" and row[8] == ""
