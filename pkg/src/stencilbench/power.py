"""Power-trace ingestion and energy metrics.

Traces follow the background-logger protocol: sampling starts a fixed idle
window before the workload and stops the same window after it (3 s by
default, ~20 ms sample spacing).  The idle baseline is the mean power over
the lead/tail windows and is subtracted before integrating; energies are
trapezoidal integrals over the non-idle span.  A watt meter reading is the
coarse alternative: total watt-hours at 1 Wh resolution with idle power
read before and after.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TraceError

DEFAULT_IDLE_WINDOW_S = 3.0
LOW_RESOLUTION_FACTOR = 100  # flag readings below 100x the 1 Wh quantum


@dataclass
class PowerTrace:
    """Timestamped power samples plus the idle-window lengths."""

    t_ms: np.ndarray
    watts: np.ndarray
    lead_idle_s: float = DEFAULT_IDLE_WINDOW_S
    tail_idle_s: float = DEFAULT_IDLE_WINDOW_S

    @property
    def nominal_spacing_ms(self) -> float:
        if len(self.t_ms) < 2:
            return 0.0
        return float(np.median(np.diff(self.t_ms)))

    @property
    def duration_s(self) -> float:
        return float(self.t_ms[-1] - self.t_ms[0]) / 1000.0

    @property
    def active_span_s(self) -> float:
        return self.duration_s - self.lead_idle_s - self.tail_idle_s


@dataclass(frozen=True)
class WattMeterReading:
    """Cumulative meter display: total Wh (1 Wh resolution), duration, and
    the idle powers read before/after plus the observed maximum."""

    total_wh: float
    duration_s: float
    idle_watts_before: float
    idle_watts_after: float
    max_watts: float = 0.0

    def __post_init__(self):
        if self.total_wh < 0:
            raise TraceError("total_wh must be >= 0")
        if self.duration_s <= 0:
            raise TraceError("duration_s must be positive")


def parse_power_trace(text: str, lead_idle_s: float = DEFAULT_IDLE_WINDOW_S,
                      tail_idle_s: float = DEFAULT_IDLE_WINDOW_S) -> PowerTrace:
    """Parse "t_ms,watts" CSV text; malformed rows are reported by line."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "t_ms,watts":
        raise TraceError('missing header "t_ms,watts"')
    t = []
    w = []
    problems = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        try:
            if len(parts) != 2:
                raise ValueError("expected two fields")
            ts = float(parts[0])
            watts = float(parts[1])
            if watts < 0:
                raise ValueError("negative power")
        except ValueError as exc:
            problems.append(f"line {lineno}: {exc}")
            continue
        if t and ts <= t[-1]:
            raise TraceError(f"line {lineno}: timestamp {ts} not increasing")
        t.append(ts)
        w.append(watts)
    if problems:
        raise TraceError("malformed rows: " + "; ".join(problems))
    if not t:
        raise TraceError("empty trace")
    return PowerTrace(np.asarray(t, dtype=np.float64), np.asarray(w, dtype=np.float64),
                      lead_idle_s, tail_idle_s)


def idle_baseline(trace: PowerTrace) -> float:
    """Mean power over the leading and trailing idle windows."""
    t = trace.t_ms
    span_ms = float(t[-1] - t[0])
    need_ms = (trace.lead_idle_s + trace.tail_idle_s) * 1000.0
    if span_ms <= need_ms:
        raise TraceError(
            f"trace spans {span_ms / 1000.0:g} s, shorter than the "
            f"{need_ms / 1000.0:g} s of idle windows")
    # Strict bounds: a sample sitting exactly on the workload boundary
    # belongs to the workload, not the idle window.
    lead_end = t[0] + trace.lead_idle_s * 1000.0
    tail_start = t[-1] - trace.tail_idle_s * 1000.0
    mask = (t < lead_end) | (t > tail_start)
    if not np.any(mask):
        raise TraceError("no samples inside the idle windows")
    return float(np.mean(trace.watts[mask]))


def net_energy(trace: PowerTrace, baseline: float | None = None) -> float:
    """Trapezoidal integral of (watts - baseline) over the non-idle span, J."""
    if baseline is None:
        baseline = idle_baseline(trace)
    t = trace.t_ms
    w = trace.watts
    t0 = float(t[0]) + trace.lead_idle_s * 1000.0
    t1 = float(t[-1]) - trace.tail_idle_s * 1000.0
    if t1 <= t0:
        return 0.0
    inside = (t > t0) & (t < t1)
    ts = np.concatenate(([t0], t[inside], [t1]))
    ws = np.concatenate(([np.interp(t0, t, w)], w[inside], [np.interp(t1, t, w)]))
    net = ws - baseline
    return float(np.trapezoid(net, ts) / 1000.0)


def mean_net_watts(trace: PowerTrace, baseline: float | None = None) -> float:
    span = trace.active_span_s
    if span <= 0:
        raise TraceError("trace has no active span")
    return net_energy(trace, baseline) / span


def wattmeter_energy(reading: WattMeterReading) -> tuple[float, bool]:
    """Net joules from a watt-meter reading and a low-resolution flag.

    Net = total - mean(idle before/after) * duration.  A negative net is a
    measurement inconsistency.  The flag is set when the total is below
    100x the 1 Wh display quantum.
    """
    total_j = reading.total_wh * 3600.0
    idle_mean = 0.5 * (reading.idle_watts_before + reading.idle_watts_after)
    net = total_j - idle_mean * reading.duration_s
    if net < 0:
        raise TraceError(
            f"net energy {net:.1f} J is negative: idle estimate exceeds the total")
    low_resolution = total_j < LOW_RESOLUTION_FACTOR * 3600.0
    return net, low_resolution


def synthetic_trace(active_watts, active_s: float, idle_watts: float = 20.0,
                    idle_s: float = DEFAULT_IDLE_WINDOW_S,
                    spacing_ms: float = 20.0) -> PowerTrace:
    """Build an idle-workload-idle trace; active_watts is a constant or a
    (start, end) ramp pair."""
    n_idle = int(round(idle_s * 1000.0 / spacing_ms))
    n_active = int(round(active_s * 1000.0 / spacing_ms))
    total = 2 * n_idle + n_active + 1
    t = np.arange(total) * spacing_ms
    w = np.full(total, float(idle_watts))
    if isinstance(active_watts, (tuple, list)):
        w0, w1 = active_watts
    else:
        w0 = w1 = float(active_watts)
    ramp = np.linspace(w0, w1, n_active + 1)
    w[n_idle:n_idle + n_active + 1] = ramp
    return PowerTrace(t.astype(np.float64), w, idle_s, idle_s)
