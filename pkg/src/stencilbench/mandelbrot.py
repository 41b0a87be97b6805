"""Compute-bound escape-time benchmark with a geometric zoom workload.

The kernel iterates z <- z^2 + c from z0 = 0 in float32 and stops when
|z|^2 >= 4 or the iteration budget is exhausted; it runs through the block
execution model, so iteration grids are block-size independent.  Smooth
(continuous) color indices are derived host-side in float64:
n + 1 - log2(ln|z_final|) for escaped pixels, n for interior pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .execmodel import BlockConfig, Kernel, LaunchSpec, TrafficStats, launch, register_kernel

# Default zoom workload: fifty halvings onto -0.75 + 0.1i at 5000 iterations,
# starting from the classic [-2, 1] x [-1.5, 1.5] window.
DEFAULT_CENTER = complex(-0.75, 0.1)
DEFAULT_ZOOMS = 50
DEFAULT_MAX_ITERATIONS = 5000
START_WIDTH = 3.0
START_HEIGHT = 3.0
ZOOM_FACTOR = 0.5

FLOPS_PER_ITERATION = 8   # t, t+t, +cy, xx-yy, +cx, x*x, y*y, |z|^2 add


@dataclass(frozen=True)
class ComplexExtent:
    """A rendering window in the complex plane plus its pixel resolution."""

    center: complex
    width: float
    height: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("extent must have positive width and height")
        if self.nx < 1 or self.ny < 1:
            raise ConfigError("resolution must be at least 1x1")

    def pixel_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center complex coordinates (float32 grids cx, cy)."""
        xs = self.center.real + self.width * ((np.arange(self.nx) + 0.5) / self.nx - 0.5)
        ys = self.center.imag + self.height * ((np.arange(self.ny) + 0.5) / self.ny - 0.5)
        cx = np.broadcast_to(xs[None, :], (self.ny, self.nx))
        cy = np.broadcast_to(ys[:, None], (self.ny, self.nx))
        return (np.ascontiguousarray(cx, dtype=np.float32),
                np.ascontiguousarray(cy, dtype=np.float32))


@dataclass
class EscapeResult:
    """Per-pixel loop counts, final z, and the continuous color index."""

    iterations: np.ndarray
    z_final: np.ndarray
    smooth: np.ndarray
    max_iterations: int
    traffic: TrafficStats


def _mandel_flops(outputs, active_cells) -> int:
    n = outputs["iters"]
    total_iters = int(np.sum(n, dtype=np.int64))
    return FLOPS_PER_ITERATION * total_iters + int(active_cells)


KERNEL = register_kernel(Kernel(
    name="mandelbrot",
    reads=("cx", "cy"),
    writes=("iters", "zx", "zy"),
    radius=0,
    flops_of=_mandel_flops,
))


def escape(c: complex, max_iterations: int) -> tuple[int, complex]:
    """Scalar escape loop; returns the loop count and final z.

    Same float32 semantics as the grid kernel.
    """
    if max_iterations < 1:
        raise ConfigError("max_iterations must be >= 1")
    ext = ComplexExtent(c, 1.0, 1.0, 1, 1)
    res = render(ext, max_iterations)
    return int(res.iterations[0, 0]), complex(res.z_final[0, 0])


def render(extent: ComplexExtent, max_iterations: int,
           spec: LaunchSpec | None = None, *,
           backend: str | None = None) -> EscapeResult:
    """Render an extent through the block execution model."""
    if max_iterations < 1:
        raise ConfigError("max_iterations must be >= 1")
    if spec is None:
        spec = LaunchSpec.for_domain(BlockConfig(16, 16), extent.nx, extent.ny)
    cx, cy = extent.pixel_coords()
    iters = np.zeros((extent.ny, extent.nx), dtype=np.int32)
    zx = np.zeros((extent.ny, extent.nx), dtype=np.float32)
    zy = np.zeros((extent.ny, extent.nx), dtype=np.float32)
    stats = launch(
        KERNEL, spec,
        {"cx": cx, "cy": cy},
        {"iters": iters, "zx": zx, "zy": zy},
        {"max_iterations": max_iterations},
        domain=(0, 0, extent.nx, extent.ny),
        backend=backend)
    z = zx.astype(np.float64) + 1j * zy.astype(np.float64)
    smooth = iters.astype(np.float64)
    escaped = iters < max_iterations
    with np.errstate(divide="ignore", invalid="ignore"):
        ln_abs = np.log(np.abs(z[escaped]))
        smooth[escaped] = iters[escaped] + 1.0 - np.log2(ln_abs)
    return EscapeResult(iters, z, smooth, max_iterations, stats)


def zoom_workload(center: complex = DEFAULT_CENTER, zooms: int = DEFAULT_ZOOMS,
                  nx: int = 512, ny: int = 512) -> list[ComplexExtent]:
    """Geometric zoom sequence: halve the window per frame, fixed center."""
    if zooms < 1:
        raise ConfigError("zooms must be >= 1")
    extents = []
    width, height = START_WIDTH, START_HEIGHT
    for _ in range(zooms):
        extents.append(ComplexExtent(center, width, height, nx, ny))
        width *= ZOOM_FACTOR
        height *= ZOOM_FACTOR
    return extents


def write_pgm(path, iterations: np.ndarray, max_iterations: int) -> None:
    """Iteration counts as a plain (P2) PGM image."""
    arr = np.asarray(iterations)
    with open(path, "w") as f:
        f.write(f"P2\n{arr.shape[1]} {arr.shape[0]}\n{max_iterations}\n")
        for row in arr:
            f.write(" ".join(str(int(v)) for v in row))
            f.write("\n")


def write_smooth_csv(path, smooth: np.ndarray) -> None:
    np.savetxt(path, smooth, delimiter=",", fmt="%.17g")
