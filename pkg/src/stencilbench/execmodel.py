"""Host-side re-implementation of the GPU execution model.

A launch partitions a rectangular domain into equally sized, independently
executed blocks.  Each block sees only (a) read tiles clipped to its cells
plus the kernel's declared stencil radius and (b) write views of exactly its
own cells, so block-size and schedule independence hold by construction.
Instrumentation counts logical global-array streams, per-cell accesses
(including halo re-reads), floating-point operations from the kernel's cost
model, and the shared-memory footprint implied by the launch's buffer
inventory.

Traffic is counted at the "array stream" level: one distinct global array
read or written per launch, independent of the block configuration.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, LaunchError

PRECISE = "precise"
FAST = "fast"

THREADS_ENV = "STENCILBENCH_THREADS"


@dataclass(frozen=True)
class BlockConfig:
    """Threads (cells) per block along x and y."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"block dims must be >= 1, got {self.width}x{self.height}")

    @property
    def threads(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class SharedBuffer:
    """One shared-memory tile: name, floats per cell, halo cells."""

    name: str
    floats_per_cell: int
    halo: int

    def bytes_per_block(self, block: BlockConfig) -> int:
        w = block.width + 2 * self.halo
        h = block.height + 2 * self.halo
        return 4 * self.floats_per_cell * w * h


@dataclass(frozen=True)
class DevicePreset:
    """Per-multiprocessor resource limits of a GPU model (vendor data)."""

    name: str
    max_threads_per_block: int
    warp_size: int
    max_warps_per_sm: int
    max_blocks_per_sm: int
    registers_per_sm: int
    register_alloc_granularity: int
    shared_per_sm_bytes: int
    shared_alloc_granularity_bytes: int
    shared_per_block_limit_bytes: int

    def __post_init__(self):
        for f in ("max_threads_per_block", "warp_size", "max_warps_per_sm",
                  "max_blocks_per_sm", "registers_per_sm", "register_alloc_granularity",
                  "shared_per_sm_bytes", "shared_alloc_granularity_bytes",
                  "shared_per_block_limit_bytes"):
            if getattr(self, f) <= 0:
                raise ConfigError(f"device preset field {f} must be positive")


# A generic desk-scale preset used when no specific device is selected.
DEFAULT_PRESET = DevicePreset(
    name="generic",
    max_threads_per_block=1024,
    warp_size=32,
    max_warps_per_sm=64,
    max_blocks_per_sm=16,
    registers_per_sm=65536,
    register_alloc_granularity=256,
    shared_per_sm_bytes=49152,
    shared_alloc_granularity_bytes=256,
    shared_per_block_limit_bytes=49152,
)


@dataclass(frozen=True)
class LaunchSpec:
    """Block shape, grid extent, shared-buffer inventory, and math mode."""

    block: BlockConfig
    grid_w: int
    grid_h: int
    shared_inventory: tuple[SharedBuffer, ...] = ()
    math_mode: str = PRECISE

    def __post_init__(self):
        if self.math_mode not in (PRECISE, FAST):
            raise ConfigError(f"math_mode must be precise|fast, got {self.math_mode!r}")

    @classmethod
    def for_domain(cls, block: BlockConfig, nx: int, ny: int,
                   shared: Sequence[SharedBuffer] = (), math_mode: str = PRECISE) -> "LaunchSpec":
        gw = -(-nx // block.width)
        gh = -(-ny // block.height)
        return cls(block, gw, gh, tuple(shared), math_mode)

    @property
    def shared_floats_per_cell(self) -> int:
        return sum(b.floats_per_cell for b in self.shared_inventory)


def shared_accounting(spec: LaunchSpec) -> int:
    """Shared bytes per block: sum of 4 * fpc * (w+2*halo_b) * (h+2*halo_b)."""
    return sum(b.bytes_per_block(spec.block) for b in spec.shared_inventory)


@dataclass
class TrafficStats:
    """Per-launch (or per-step, when merged) instrumentation counters."""

    kernel: str = ""
    block_w: int = 0
    block_h: int = 0
    streams_read: int = 0
    streams_written: int = 0
    cell_reads: int = 0
    cell_writes: int = 0
    flops: int = 0
    shared_floats_per_cell: int = 0
    shared_bytes_per_block: int = 0
    launches: int = 0

    CSV_HEADER = "kernel,block_w,block_h,streams_read,streams_written,flops,shared_bytes"

    def csv_row(self) -> str:
        return (f"{self.kernel},{self.block_w},{self.block_h},{self.streams_read},"
                f"{self.streams_written},{self.flops},{self.shared_bytes_per_block}")

    def merged_with(self, other: "TrafficStats", kernel: str | None = None) -> "TrafficStats":
        """Aggregate counters across launches of one logical step.

        Stream and flop counters add; the shared footprint reports the peak
        per-block value over the merged launches.
        """
        return TrafficStats(
            kernel=kernel or self.kernel,
            block_w=self.block_w or other.block_w,
            block_h=self.block_h or other.block_h,
            streams_read=self.streams_read + other.streams_read,
            streams_written=self.streams_written + other.streams_written,
            cell_reads=self.cell_reads + other.cell_reads,
            cell_writes=self.cell_writes + other.cell_writes,
            flops=self.flops + other.flops,
            shared_floats_per_cell=max(self.shared_floats_per_cell, other.shared_floats_per_cell),
            shared_bytes_per_block=max(self.shared_bytes_per_block, other.shared_bytes_per_block),
            launches=self.launches + other.launches,
        )


@dataclass(frozen=True)
class Kernel:
    """A registered stencil kernel: pure per-cell function of its input tiles.

    reads/writes name the counted global arrays; broadcast_reads are inputs
    excluded from stream accounting (constant broadcast data).  flops_per_cell
    maps (block_w, block_h) to the modeled per-cell cost; kernels whose cost
    depends on the computed result (escape-time iteration) supply flops_of
    instead, which sees the output arrays after the launch.
    """

    name: str
    reads: tuple[str, ...]
    writes: tuple[str, ...]
    radius: int
    broadcast_reads: tuple[str, ...] = ()
    shared: tuple[SharedBuffer, ...] = ()
    flops_per_cell: Callable[[int, int], float] | None = None
    flops_of: Callable[[Mapping[str, np.ndarray], int], int] | None = None

    def shared_plan(self) -> tuple[SharedBuffer, ...]:
        return self.shared


_REGISTRY: dict[str, Kernel] = {}


def register_kernel(kernel: Kernel) -> Kernel:
    _REGISTRY[kernel.name] = kernel
    return kernel


def get_kernel(name: str) -> Kernel:
    return _REGISTRY[name]


def registered_kernels() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


@dataclass(frozen=True)
class BlockRect:
    """One block's cell rectangle in array coordinates (after edge clipping)."""

    x0: int
    y0: int
    w: int
    h: int


def _block_rects(domain: tuple[int, int, int, int], block: BlockConfig) -> list[BlockRect]:
    x0, y0, nx, ny = domain
    rects = []
    for by in range(-(-ny // block.height)):
        for bx in range(-(-nx // block.width)):
            cx = x0 + bx * block.width
            cy = y0 + by * block.height
            w = min(block.width, x0 + nx - cx)
            h = min(block.height, y0 + ny - cy)
            rects.append(BlockRect(cx, cy, w, h))
    return rects


def _extra_extent(arr: np.ndarray, canonical: tuple[int, int]) -> tuple[int, int]:
    """Node-registered arrays carry one extra sample per axis (0 or 1)."""
    ey = arr.shape[0] - canonical[0]
    ex = arr.shape[1] - canonical[1]
    if ey not in (0, 1) or ex not in (0, 1):
        raise LaunchError(
            f"input shape {arr.shape} does not match the canonical field shape {canonical}")
    return ey, ex


def launch(kernel: Kernel, spec: LaunchSpec,
           inputs: Mapping[str, np.ndarray], outputs: Mapping[str, np.ndarray],
           params: Mapping[str, object] | None = None, *,
           domain: tuple[int, int, int, int],
           preset: DevicePreset = DEFAULT_PRESET,
           order: str = "forward", seed: int = 0,
           threads: int | None = None,
           backend: str | None = None) -> TrafficStats:
    """Run one kernel launch over the domain rectangle (array coordinates).

    Blocks execute independently in the requested order ("forward",
    "reverse", "random") or concurrently when threads > 1; outputs are
    bitwise independent of both choices.  Raises LaunchError when the
    shared inventory exceeds the preset per-block limit, when the stencil
    radius exceeds the available halo, or when the block exceeds the
    preset thread limit.
    """
    from . import backends

    if spec.block.threads > preset.max_threads_per_block:
        raise LaunchError(
            f"block {spec.block.width}x{spec.block.height} exceeds "
            f"{preset.max_threads_per_block} threads per block")
    shared_bytes = shared_accounting(spec)
    if shared_bytes > preset.shared_per_block_limit_bytes:
        raise LaunchError(
            f"shared inventory needs {shared_bytes} B/block, over the "
            f"{preset.shared_per_block_limit_bytes} B limit of preset {preset.name}")

    x0, y0, nx, ny = domain
    r = kernel.radius
    names = tuple(kernel.reads) + tuple(kernel.broadcast_reads)
    # Canonical shape is taken from the first output (outputs never carry
    # the +1 node extent).
    canonical = outputs[kernel.writes[0]].shape
    if x0 - r < 0 or y0 - r < 0 or x0 + nx + r > canonical[1] or y0 + ny + r > canonical[0]:
        raise LaunchError(
            f"stencil radius {r} exceeds the halo available around the "
            f"domain rectangle {domain} in arrays of shape {canonical}")

    impl = backends.get_impl(kernel.name, backend)
    p = dict(params or {})
    p["math_mode"] = spec.math_mode

    rects = _block_rects(domain, spec.block)
    sched = list(range(len(rects)))
    if order == "reverse":
        sched.reverse()
    elif order == "random":
        random.Random(seed).shuffle(sched)
    elif order != "forward":
        raise ConfigError(f"unknown schedule order {order!r}")

    extras = {name: _extra_extent(inputs[name], canonical) for name in names}

    def run_block(idx: int):
        rect = rects[idx]
        tiles = []
        for name in names:
            ey, ex = extras[name]
            arr = inputs[name]
            tiles.append(arr[rect.y0 - r: rect.y0 + rect.h + r + ey,
                             rect.x0 - r: rect.x0 + rect.w + r + ex])
        outs = [outputs[name][rect.y0: rect.y0 + rect.h, rect.x0: rect.x0 + rect.w]
                for name in kernel.writes]
        impl(tiles, outs, rect, p)

    nthreads = threads
    if nthreads is None:
        nthreads = int(os.environ.get(THREADS_ENV, "1") or "1")
    if nthreads > 1 and len(sched) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(run_block, sched))
    else:
        for idx in sched:
            run_block(idx)

    # Instrumentation: deterministic accumulation in block-list order.
    active = sum(rect.w * rect.h for rect in rects)
    n_inputs = len(kernel.reads) + len(kernel.broadcast_reads)
    cell_reads = sum((rect.w + 2 * r) * (rect.h + 2 * r) * n_inputs for rect in rects)
    if kernel.flops_of is not None:
        flops = kernel.flops_of(outputs, active)
    elif kernel.flops_per_cell is not None:
        flops = int(round(active * kernel.flops_per_cell(spec.block.width, spec.block.height)))
    else:
        flops = 0
    return TrafficStats(
        kernel=kernel.name,
        block_w=spec.block.width,
        block_h=spec.block.height,
        streams_read=len(kernel.reads),
        streams_written=len(kernel.writes),
        cell_reads=cell_reads,
        cell_writes=active * len(kernel.writes),
        flops=flops,
        shared_floats_per_cell=spec.shared_floats_per_cell,
        shared_bytes_per_block=shared_bytes,
        launches=1,
    )


# Generic exercise kernels (numpy lane only): a pure copy, an affine map,
# and two Laplacian stencils at radius 1 and 2.
register_kernel(Kernel("copy", ("src",), ("dst",), 0))
register_kernel(Kernel("scale_add", ("src",), ("dst",), 0,
                       flops_per_cell=lambda bw, bh: 2))
register_kernel(Kernel("laplacian5", ("src",), ("dst",), 1,
                       shared=(SharedBuffer("src", 1, 1),),
                       flops_per_cell=lambda bw, bh: 5))
register_kernel(Kernel("diffuse2", ("src",), ("dst",), 2,
                       shared=(SharedBuffer("src", 1, 2),),
                       flops_per_cell=lambda bw, bh: 7))
