"""stencilbench: a desk-scale GPU performance-engineering workbench.

Three shallow-water stencil schemes run on an instrumented block/shared-tile
execution model with kernel-fusion and shared-memory optimization stages,
block-size autotuning for throughput and energy efficiency, an analytic
occupancy calculator, power-trace energy metrics, a compute-bound Mandelbrot
benchmark, and a CUDA<->OpenCL kernel-source porting tool.
"""

__version__ = "0.1.0"

from .backends import HAVE_COMPILED, active_backend  # noqa: F401
