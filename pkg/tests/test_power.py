import numpy as np
import pytest

from stencilbench.errors import TraceError
from stencilbench.power import (PowerTrace, WattMeterReading, idle_baseline,
                                mean_net_watts, net_energy, parse_power_trace,
                                synthetic_trace, wattmeter_energy)


def make_text(rows, header="t_ms,watts"):
    return "\n".join([header] + rows) + "\n"


class TestParse:
    def test_constant_trace(self):
        rows = [f"{20 * k},50.0" for k in range(10)]
        trace = parse_power_trace(make_text(rows))
        assert len(trace.t_ms) == 10
        assert trace.nominal_spacing_ms == 20.0
        assert np.all(trace.watts == 50.0)

    def test_out_of_order_names_line(self):
        rows = ["0,50", "20,50", "40,50", "30,50"]
        with pytest.raises(TraceError, match="line 5"):
            parse_power_trace(make_text(rows))

    def test_empty_trace(self):
        with pytest.raises(TraceError, match="empty"):
            parse_power_trace("t_ms,watts\n")

    def test_missing_header(self):
        with pytest.raises(TraceError, match="header"):
            parse_power_trace("0,50\n20,50\n")

    def test_malformed_row_reported_with_line(self):
        rows = ["0,50", "20,abc", "40,50"]
        with pytest.raises(TraceError, match="line 3"):
            parse_power_trace(make_text(rows))


class TestIdleBaseline:
    def test_constant_everywhere(self):
        trace = synthetic_trace(20.0, 4.0, idle_watts=20.0)
        assert idle_baseline(trace) == 20.0

    def test_window_separation(self):
        trace = synthetic_trace(100.0, 10.0, idle_watts=20.0)
        assert idle_baseline(trace) == 20.0

    def test_lead_tail_mean(self):
        # 3 s of 18 W, active, 3 s of 22 W with equal sample counts -> 20 W
        t = np.arange(0, 16001, 20, dtype=np.float64)
        w = np.full(t.shape, 100.0)
        w[t < 3000] = 18.0
        w[t > 13000] = 22.0
        trace = PowerTrace(t, w, 3.0, 3.0)
        assert idle_baseline(trace) == 20.0

    def test_too_short_trace(self):
        trace = PowerTrace(np.array([0.0, 1000.0]), np.array([5.0, 5.0]), 3.0, 3.0)
        with pytest.raises(TraceError, match="short"):
            idle_baseline(trace)


class TestNetEnergy:
    def test_rectangle(self):
        trace = synthetic_trace(100.0, 10.0, idle_watts=20.0)
        assert net_energy(trace, 20.0) == 800.0

    def test_ramp_closed_form(self):
        trace = synthetic_trace((20.0, 120.0), 10.0, idle_watts=20.0)
        assert net_energy(trace, 20.0) == pytest.approx(500.0, rel=1e-12)

    def test_trace_equal_to_baseline(self):
        trace = synthetic_trace(20.0, 10.0, idle_watts=20.0)
        assert net_energy(trace, 20.0) == 0.0

    def test_shift_invariance(self):
        trace = synthetic_trace((32.0, 96.0), 8.0, idle_watts=16.0)
        base = idle_baseline(trace)
        e1 = net_energy(trace, base)
        shifted = PowerTrace(trace.t_ms.copy(), trace.watts + 64.0,
                             trace.lead_idle_s, trace.tail_idle_s)
        e2 = net_energy(shifted, base + 64.0)
        assert e1 == pytest.approx(e2, rel=1e-12)

    def test_mean_net_watts(self):
        trace = synthetic_trace(100.0, 10.0, idle_watts=20.0)
        assert mean_net_watts(trace, 20.0) == pytest.approx(80.0, rel=1e-12)


class TestWattMeter:
    def test_one_hour_arithmetic(self):
        reading = WattMeterReading(100.0, 3600.0, 50.0, 50.0)
        net, low = wattmeter_energy(reading)
        assert net == 360000.0 - 180000.0
        assert not low

    def test_idle_mean(self):
        reading = WattMeterReading(100.0, 3600.0, 49.0, 51.0)
        net, _ = wattmeter_energy(reading)
        assert net == 360000.0 - 50.0 * 3600.0

    def test_low_resolution_flag(self):
        reading = WattMeterReading(1.0, 60.0, 0.0, 0.0)
        net, low = wattmeter_energy(reading)
        assert net == 3600.0
        assert low

    def test_negative_net_is_inconsistency(self):
        reading = WattMeterReading(1.0, 3600.0, 50.0, 50.0)
        with pytest.raises(TraceError, match="negative"):
            wattmeter_energy(reading)

    def test_validation(self):
        with pytest.raises(TraceError):
            WattMeterReading(-1.0, 10.0, 0.0, 0.0)
        with pytest.raises(TraceError):
            WattMeterReading(1.0, 0.0, 0.0, 0.0)
