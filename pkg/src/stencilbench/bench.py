"""Benchmark harness: throughput records, block-size autotuning for
throughput or energy efficiency, and heatmap artifacts.

Timing uses the median of the repetitions (robust to host jitter); a
configuration whose launch is rejected by the resource gate is recorded as
infeasible, not fatal.  Energy efficiency is megacells per net joule and
needs a power source: a constant-net-watts stand-in or per-config ingested
traces (live metering is out of scope; host CPU energy never stands in for
device energy).
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import ConfigError, LaunchError
from .execmodel import BlockConfig, TrafficStats
from . import power as power_mod

METRICS = ("throughput", "efficiency")

RESULTS_HEADER = "scheme,variant,block_w,block_h,nx,ny,steps,wall_s,mcells_s,mean_w,mcells_j"


@dataclass
class BenchRecord:
    """One measured configuration."""

    scheme: str
    variant: str
    block: BlockConfig
    nx: int
    ny: int
    steps: int
    wall_seconds: float = 0.0
    traffic: TrafficStats | None = None
    mean_watts: float | None = None
    feasible: bool = True
    note: str = ""

    @property
    def megacells(self) -> float:
        return self.nx * self.ny * self.steps / 1e6

    @property
    def megacells_per_s(self) -> float | None:
        if not self.feasible or self.wall_seconds <= 0:
            return None
        return self.megacells / self.wall_seconds

    @property
    def net_joules(self) -> float | None:
        if self.mean_watts is None or not self.feasible:
            return None
        return self.mean_watts * self.wall_seconds

    @property
    def megacells_per_joule(self) -> float | None:
        mcs = self.megacells_per_s
        if mcs is None or self.mean_watts is None:
            return None
        return mcs / self.mean_watts

    def metric(self, name: str) -> float | None:
        if name == "throughput":
            return self.megacells_per_s
        if name == "efficiency":
            return self.megacells_per_joule
        raise ConfigError(f"unknown metric {name!r}")

    def csv_row(self) -> str:
        def f(x):
            return "" if x is None else repr(float(x))
        return ",".join([
            self.scheme, self.variant, str(self.block.width), str(self.block.height),
            str(self.nx), str(self.ny), str(self.steps),
            f(self.wall_seconds if self.feasible else None),
            f(self.megacells_per_s), f(self.mean_watts), f(self.megacells_per_joule)])


def write_results_csv(path, records: Sequence[BenchRecord]) -> None:
    with open(path, "w") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")


# --- selection ---------------------------------------------------------------

def _beats(cand: tuple[BlockConfig, float], best: tuple[BlockConfig, float]) -> bool:
    """Higher metric wins; ties go to the smaller area, then smaller width."""
    cb, cv = cand
    bb, bv = best
    if cv != bv:
        return cv > bv
    ca, ba = cb.width * cb.height, bb.width * bb.height
    if ca != ba:
        return ca < ba
    return cb.width < bb.width


def argmax_config(items: Iterable[tuple[BlockConfig, float | None]]) -> BlockConfig | None:
    """Best feasible configuration under the tie-break rule."""
    best = None
    for cfg, val in items:
        if val is None or (isinstance(val, float) and math.isnan(val)):
            continue
        if best is None or _beats((cfg, val), best):
            best = (cfg, val)
    return None if best is None else best[0]


def best_config(records: Sequence[BenchRecord], metric: str = "throughput") -> BlockConfig | None:
    return argmax_config((rec.block, rec.metric(metric)) for rec in records)


# --- power sources -----------------------------------------------------------

class ConstantPower:
    """Synthetic source: the same net watts for every configuration."""

    def __init__(self, watts: float):
        if watts <= 0:
            raise ConfigError("constant power must be positive")
        self.watts = float(watts)

    def __call__(self, record: BenchRecord) -> float:
        return self.watts


class TraceDirPower:
    """Ingested traces named block_{w}x{h}.csv inside a directory."""

    def __init__(self, dirpath: str):
        if not os.path.isdir(dirpath):
            raise ConfigError(f"trace directory {dirpath!r} does not exist")
        self.dirpath = dirpath

    def __call__(self, record: BenchRecord) -> float | None:
        name = f"block_{record.block.width}x{record.block.height}.csv"
        path = os.path.join(self.dirpath, name)
        if not os.path.exists(path):
            return None
        with open(path) as fh:
            trace = power_mod.parse_power_trace(fh.read())
        return power_mod.mean_net_watts(trace)


# --- autotuning ---------------------------------------------------------------

def default_sweep(limit_threads: int = 1024) -> list[BlockConfig]:
    sizes = (4, 8, 12, 16, 24, 32)
    return [BlockConfig(w, h) for w in sizes for h in sizes if w * h <= limit_threads]


def autotune(run_fn: Callable[[BlockConfig], TrafficStats],
             configs: Sequence[BlockConfig], *,
             scheme: str = "", variant: str = "", nx: int = 0, ny: int = 0,
             steps: int = 1, warmup: int = 3, reps: int = 10,
             metric: str = "throughput",
             power_source: Callable[[BenchRecord], float | None] | None = None,
             ) -> tuple[list[BenchRecord], BlockConfig | None]:
    """Sweep configurations; median-of-reps timing; argmax of the metric.

    run_fn executes the whole workload once for a given block config and
    returns its TrafficStats.
    """
    if metric not in METRICS:
        raise ConfigError(f"metric must be one of {METRICS}")
    if metric == "efficiency" and power_source is None:
        raise ConfigError("the efficiency metric needs a power source")
    if reps < 1:
        raise ConfigError("reps must be >= 1")
    records = []
    for cfg in configs:
        rec = BenchRecord(scheme, variant, cfg, nx, ny, steps)
        try:
            for _ in range(warmup):
                run_fn(cfg)
            times = []
            for _ in range(reps):
                t0 = time.perf_counter()
                rec.traffic = run_fn(cfg)
                times.append(time.perf_counter() - t0)
            times.sort()
            mid = len(times) // 2
            rec.wall_seconds = times[mid] if len(times) % 2 else \
                0.5 * (times[mid - 1] + times[mid])
            if power_source is not None:
                rec.mean_watts = power_source(rec)
        except LaunchError as exc:
            rec.feasible = False
            rec.note = str(exc)
        records.append(rec)
    return records, best_config(records, metric)


# --- heatmap -----------------------------------------------------------------

MASKED = "masked"

_VIRIDIS = (
    (0.267004, 0.004874, 0.329415),
    (0.282623, 0.140926, 0.457517),
    (0.253935, 0.265254, 0.529983),
    (0.206756, 0.371758, 0.553117),
    (0.163625, 0.471133, 0.558148),
    (0.127568, 0.566949, 0.550556),
    (0.134692, 0.658636, 0.517649),
    (0.266941, 0.748751, 0.440573),
    (0.477504, 0.821444, 0.318195),
    (0.741388, 0.873449, 0.149561),
    (0.993248, 0.906157, 0.143936),
)


def _viridis(x: float) -> str:
    x = min(max(x, 0.0), 1.0)
    pos = x * (len(_VIRIDIS) - 1)
    i = min(int(pos), len(_VIRIDIS) - 2)
    fr = pos - i
    rgb = [(_VIRIDIS[i][k] * (1 - fr) + _VIRIDIS[i + 1][k] * fr) for k in range(3)]
    return "#%02x%02x%02x" % tuple(int(round(255 * c)) for c in rgb)


@dataclass
class Heatmap:
    """Dense metric grid over the swept block widths/heights; None marks an
    infeasible or missing cell."""

    widths: list[int]
    heights: list[int]
    values: dict[tuple[int, int], float | None] = field(default_factory=dict)
    metric: str = "throughput"

    @classmethod
    def from_records(cls, records: Sequence[BenchRecord],
                     metric: str = "throughput") -> "Heatmap":
        widths = sorted({r.block.width for r in records})
        heights = sorted({r.block.height for r in records})
        hm = cls(widths, heights, {}, metric)
        for r in records:
            hm.values[(r.block.width, r.block.height)] = r.metric(metric)
        return hm

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("block_h/block_w," + ",".join(str(w) for w in self.widths) + "\n")
        for hgt in self.heights:
            cells = []
            for w in self.widths:
                if (w, hgt) not in self.values:
                    cells.append("")
                elif self.values[(w, hgt)] is None:
                    cells.append(MASKED)
                else:
                    cells.append(repr(float(self.values[(w, hgt)])))
            out.write(f"{hgt}," + ",".join(cells) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, metric: str = "throughput") -> "Heatmap":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or not rows[0] or rows[0][0] != "block_h/block_w":
            raise ConfigError("not a heatmap CSV")
        widths = [int(w) for w in rows[0][1:]]
        heights = []
        values: dict[tuple[int, int], float | None] = {}
        for row in rows[1:]:
            if not row:
                continue
            hgt = int(row[0])
            heights.append(hgt)
            for w, cell in zip(widths, row[1:]):
                if cell == "":
                    continue
                values[(w, hgt)] = None if cell == MASKED else float(cell)
        return cls(widths, heights, values, metric)

    def to_svg(self, cell: int = 48, label: str | None = None) -> str:
        """One rect per config on a viridis-style scale; masked cells hatched."""
        margin = 70
        wpx = margin + cell * len(self.widths) + 20
        hpx = margin + cell * len(self.heights) + 40
        finite = [v for v in self.values.values() if v is not None]
        lo = min(finite) if finite else 0.0
        hi = max(finite) if finite else 1.0
        span = (hi - lo) or 1.0
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{wpx}" height="{hpx}">',
            '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse">'
            '<path d="M0,6 L6,0" stroke="#888" stroke-width="1"/></pattern></defs>',
            f'<text x="{margin}" y="20" font-size="14">{label or self.metric}</text>',
        ]
        for col, w in enumerate(self.widths):
            x = margin + col * cell
            parts.append(f'<text x="{x + cell // 2}" y="{margin - 8}" font-size="11" '
                         f'text-anchor="middle">{w}</text>')
        for row, hgt in enumerate(self.heights):
            y = margin + row * cell
            parts.append(f'<text x="{margin - 8}" y="{y + cell // 2 + 4}" font-size="11" '
                         f'text-anchor="end">{hgt}</text>')
            for col, w in enumerate(self.widths):
                x = margin + col * cell
                v = self.values.get((w, hgt))
                if v is None:
                    fill = 'url(#hatch)' if (w, hgt) in self.values else '#eee'
                else:
                    fill = _viridis((v - lo) / span)
                parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                             f'fill="{fill}" stroke="#fff"/>')
        parts.append("</svg>")
        return "\n".join(parts)


# --- backend comparison -------------------------------------------------------

def compare_backends(run_fn_for: Callable[[str], Callable[[BlockConfig], TrafficStats]],
                     block: BlockConfig, backends: Sequence[str], *,
                     scheme: str = "", variant: str = "", nx: int = 0, ny: int = 0,
                     steps: int = 1, warmup: int = 1, reps: int = 3) -> list[BenchRecord]:
    """Time the same workload on each kernel backend (compiled vs numpy)."""
    records = []
    for backend in backends:
        run_fn = run_fn_for(backend)
        recs, _ = autotune(run_fn, [block], scheme=scheme,
                           variant=f"{variant}[{backend}]", nx=nx, ny=ny,
                           steps=steps, warmup=warmup, reps=reps)
        records.extend(recs)
    return records
