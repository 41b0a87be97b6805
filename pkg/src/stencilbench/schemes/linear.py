"""Linearized shallow-water solver: forward-backward scheme on the C-grid.

Two launch variants produce bitwise-identical states:

* three_kernel - one launch per stage (hu, then hv, then eta), ghost cells
  refilled between launches so each stage reads the freshest values;
* fused - a single launch whose blocks recompute the intermediate stages on
  a halo-extended rectangle from time-n ghost data (and locally re-apply the
  boundary rule where a stage's ghost refill would own the value).

Stream accounting: the face depths are broadcast data (excluded from stream
counts), so three_kernel totals 3*(3 reads + 1 write) = 12 streams and fused
totals 3 + 3 = 6, a 50% reduction.
"""

from __future__ import annotations

import numpy as np

from .. import grid
from ..errors import LaunchError
from ..execmodel import Kernel, LaunchSpec, SharedBuffer, TrafficStats, launch, register_kernel
from ..grid import SimParams, SimState, apply_boundary, check_dt

F32 = np.float32

THREE_KERNEL = "three_kernel"
FUSED = "fused"
VARIANTS = (THREE_KERNEL, FUSED)

FLOPS_F = 12
FLOPS_G = 12
FLOPS_H = 7

KERNEL_F = register_kernel(Kernel(
    name="linear_f",
    reads=("eta", "hv", "hu"),
    broadcast_reads=("h_east",),
    writes=("hu_new",),
    radius=1,
    shared=(SharedBuffer("eta", 1, 1), SharedBuffer("hv", 1, 1)),
    flops_per_cell=lambda bw, bh: FLOPS_F,
))

KERNEL_G = register_kernel(Kernel(
    name="linear_g",
    reads=("eta", "hv", "hu_new"),
    broadcast_reads=("h_north",),
    writes=("hv_new",),
    radius=1,
    shared=(SharedBuffer("eta", 1, 1), SharedBuffer("hu_new", 1, 1)),
    flops_per_cell=lambda bw, bh: FLOPS_G,
))

KERNEL_H = register_kernel(Kernel(
    name="linear_h",
    reads=("eta", "hu_new", "hv_new"),
    writes=("eta_new",),
    radius=1,
    shared=(SharedBuffer("hu_new", 1, 1), SharedBuffer("hv_new", 1, 1)),
    flops_per_cell=lambda bw, bh: FLOPS_H,
))


def _fused_flops(bw: int, bh: int) -> float:
    # hu' on (bh+2)x(bw+1), hv' on (bh+1)x bw, eta' on the block.
    total = (FLOPS_F * (bh + 2) * (bw + 1)
             + FLOPS_G * (bh + 1) * bw
             + FLOPS_H * bh * bw)
    return total / (bh * bw)


KERNEL_FUSED = register_kernel(Kernel(
    name="linear_fused",
    reads=("eta", "hu", "hv"),
    broadcast_reads=("h_east", "h_north"),
    writes=("eta_new", "hu_new", "hv_new"),
    radius=2,
    shared=(SharedBuffer("eta", 1, 2), SharedBuffer("hu", 1, 2), SharedBuffer("hv", 1, 2),
            SharedBuffer("hu_new", 1, 1), SharedBuffer("hv_new", 1, 1)),
    flops_per_cell=_fused_flops,
))


def scalars(params: SimParams, geometry: grid.GridGeometry) -> dict:
    g = geometry
    return {
        "DT": F32(params.dt),
        "IDX": F32(1.0) / F32(g.dx),
        "IDY": F32(1.0) / F32(g.dy),
        "GRAV": F32(params.g),
        "FCOR": F32(params.f),
        "boundary": params.boundary,
        "wall_w": g.halo - 1,
        "wall_e": g.nx + g.halo - 1,
        "wall_s": g.halo - 1,
        "wall_n": g.ny + g.halo - 1,
    }


def step_linear(state: SimState, params: SimParams, bathy: grid.Bathymetry,
                spec: LaunchSpec, variant: str = FUSED, *,
                backend: str | None = None) -> tuple[SimState, TrafficStats]:
    """Advance one forward-backward step; returns the new state and the
    aggregated launch instrumentation."""
    if variant not in VARIANTS:
        raise LaunchError(f"unknown linear variant {variant!r}")
    g = state.geometry
    check_dt("linear", params.dt, g, bathy, params.g)
    need_halo = 2 if variant == FUSED else 1
    if g.halo < need_halo:
        raise LaunchError(f"linear {variant} variant needs halo >= {need_halo}")

    p = scalars(params, g)
    domain = (g.halo, g.halo, g.nx, g.ny)
    eta_new = state.eta.copy()
    hu_new = state.hu.copy()
    hv_new = state.hv.copy()
    common = dict(domain=domain, backend=backend)

    if variant == FUSED:
        stats = launch(
            KERNEL_FUSED, spec,
            {"eta": state.eta, "hu": state.hu, "hv": state.hv,
             "h_east": bathy.h_east, "h_north": bathy.h_north},
            {"eta_new": eta_new, "hu_new": hu_new, "hv_new": hv_new},
            p, **common)
    else:
        new = SimState(eta_new, hu_new, hv_new, g, layout=state.layout)
        stats = launch(
            KERNEL_F, spec,
            {"eta": state.eta, "hv": state.hv, "hu": state.hu, "h_east": bathy.h_east},
            {"hu_new": hu_new}, p, **common)
        apply_boundary(new, params)
        s2 = launch(
            KERNEL_G, spec,
            {"eta": state.eta, "hv": state.hv, "hu_new": hu_new, "h_north": bathy.h_north},
            {"hv_new": hv_new}, p, **common)
        apply_boundary(new, params)
        s3 = launch(
            KERNEL_H, spec,
            {"eta": state.eta, "hu_new": hu_new, "hv_new": hv_new},
            {"eta_new": eta_new}, p, **common)
        stats = stats.merged_with(s2).merged_with(s3, kernel="linear_three_kernel")

    new = SimState(eta_new, hu_new, hv_new, g, layout=state.layout,
                   t=state.t + params.dt, step_count=state.step_count + 1)
    apply_boundary(new, params)
    return new, stats
