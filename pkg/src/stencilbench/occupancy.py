"""Analytic occupancy calculator.

Resident blocks per multiprocessor are bounded by four resources: warp
slots, the block-count cap, the register file, and shared memory.  Register
and shared allocations are rounded up to the device's allocation
granularity (per block, the common vendor-calculator convention).
Occupancy is resident warps over the device's warp capacity.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError
from .execmodel import DevicePreset

_LIMIT_ORDER = ("warps", "blocks", "registers", "shared")
_UNLIMITED = 1 << 30


@dataclass(frozen=True)
class KernelResources:
    """Per-block resource demand of a kernel configuration."""

    threads_per_block: int
    registers_per_thread: int
    shared_bytes_per_block: int

    def __post_init__(self):
        if self.threads_per_block < 1:
            raise ConfigError("threads_per_block must be >= 1")
        if self.registers_per_thread < 0 or self.shared_bytes_per_block < 0:
            raise ConfigError("resource demands must be >= 0")


@dataclass(frozen=True)
class OccupancyResult:
    resident_blocks: int
    active_warps: int
    occupancy_fraction: float
    limiting_factor: str
    limits: dict


def _round_up(value: int, granularity: int) -> int:
    if value == 0:
        return 0
    return -(-value // granularity) * granularity


def occupancy(resources_: KernelResources, preset: DevicePreset) -> OccupancyResult:
    """Resident blocks, active warps, occupancy fraction and the binding
    constraint for one kernel configuration on one device."""
    r = resources_
    if r.threads_per_block > preset.max_threads_per_block:
        raise ConfigError(
            f"{r.threads_per_block} threads per block exceeds the device "
            f"limit {preset.max_threads_per_block}")
    warps_per_block = -(-r.threads_per_block // preset.warp_size)
    limits = {
        "warps": preset.max_warps_per_sm // warps_per_block,
        "blocks": preset.max_blocks_per_sm,
    }
    if r.registers_per_thread > 0:
        regs_per_block = _round_up(r.registers_per_thread * r.threads_per_block,
                                   preset.register_alloc_granularity)
        limits["registers"] = preset.registers_per_sm // regs_per_block
    else:
        limits["registers"] = _UNLIMITED
    if r.shared_bytes_per_block > 0:
        shared_per_block = _round_up(r.shared_bytes_per_block,
                                     preset.shared_alloc_granularity_bytes)
        limits["shared"] = preset.shared_per_sm_bytes // shared_per_block
    else:
        limits["shared"] = _UNLIMITED
    resident = min(limits.values())
    limiting = next(name for name in _LIMIT_ORDER if limits[name] == resident)
    active_warps = resident * warps_per_block
    return OccupancyResult(
        resident_blocks=resident,
        active_warps=active_warps,
        occupancy_fraction=active_warps / preset.max_warps_per_sm,
        limiting_factor=limiting,
        limits=limits,
    )


def load_presets(path=None) -> dict[str, DevicePreset]:
    """Device presets from an INI file (bundled data by default)."""
    cp = configparser.ConfigParser()
    if path is None:
        text = resources.files("stencilbench").joinpath("data/devices.ini").read_text()
        cp.read_string(text)
    else:
        with open(path) as f:
            cp.read_file(f)
    presets = {}
    for section in cp.sections():
        try:
            presets[section] = DevicePreset(
                name=section,
                **{key: int(val) for key, val in cp[section].items()})
        except TypeError as exc:
            raise ConfigError(f"preset [{section}] has wrong keys: {exc}") from exc
    if not presets:
        raise ConfigError("no device presets found")
    return presets


def format_table(resources_: KernelResources, preset: DevicePreset) -> str:
    """Human-readable limits table with the binding factor marked."""
    res = occupancy(resources_, preset)
    lines = [
        f"device: {preset.name}",
        f"threads/block: {resources_.threads_per_block}  "
        f"registers/thread: {resources_.registers_per_thread}  "
        f"shared/block: {resources_.shared_bytes_per_block} B",
        "",
        "resource     max resident blocks",
    ]
    for name in _LIMIT_ORDER:
        v = res.limits[name]
        mark = "  <- limiting" if name == res.limiting_factor else ""
        shown = "unlimited" if v >= _UNLIMITED else str(v)
        lines.append(f"{name:<12s} {shown}{mark}")
    lines.append("")
    lines.append(f"resident blocks: {res.resident_blocks}")
    lines.append(f"active warps:    {res.active_warps}")
    lines.append(f"occupancy:       {100.0 * res.occupancy_fraction:.1f}%")
    return "\n".join(lines)
