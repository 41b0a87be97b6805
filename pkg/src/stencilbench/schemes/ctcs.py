"""Nonlinear leapfrog (centered-in-time centered-in-space) solver.

Level n+1 is computed from level n-1 over 2*dt with centered spatial
operators at level n: flux-form mass update, momentum with nonlinear
advection (flux form, centered averages), pressure g*h_face*grad(eta), and
Coriolis via the 4-point staggered average.  No Asselin filter, so a step
is time-reversible up to float rounding.  The first step bootstraps the
second time level with a forward-Euler step of the same spatial operator.

Variants: three launches (eta / hu / hv kernels, 3+5+5 reads + 3 writes
= 16 streams) or one fused launch (7 reads + 3 writes = 10 streams, the
theoretical 37.5% traffic reduction).  All updates read old time levels
only, so fused and unfused are bitwise identical by construction.
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

FLOPS_ETA = 7
FLOPS_HU = 54
FLOPS_HV = 54

KERNEL_ETA = register_kernel(Kernel(
    name="ctcs_eta",
    reads=("eta_prev", "hu", "hv"),
    writes=("eta_new",),
    radius=1,
    shared=(SharedBuffer("hu", 1, 1), SharedBuffer("hv", 1, 1)),
    flops_per_cell=lambda bw, bh: FLOPS_ETA,
))

KERNEL_HU = register_kernel(Kernel(
    name="ctcs_hu",
    reads=("hu_prev", "eta", "hu", "hv", "h_mid"),
    writes=("hu_new",),
    radius=1,
    shared=(SharedBuffer("eta", 1, 1), SharedBuffer("hu", 1, 1),
            SharedBuffer("hv", 1, 1), SharedBuffer("h_mid", 1, 1)),
    flops_per_cell=lambda bw, bh: FLOPS_HU,
))

KERNEL_HV = register_kernel(Kernel(
    name="ctcs_hv",
    reads=("hv_prev", "eta", "hu", "hv", "h_mid"),
    writes=("hv_new",),
    radius=1,
    shared=(SharedBuffer("eta", 1, 1), SharedBuffer("hu", 1, 1),
            SharedBuffer("hv", 1, 1), SharedBuffer("h_mid", 1, 1)),
    flops_per_cell=lambda bw, bh: FLOPS_HV,
))

_FUSED_SHARED = (
    SharedBuffer("eta", 1, 1), SharedBuffer("hu", 1, 1),
    SharedBuffer("hv", 1, 1), SharedBuffer("h_mid", 1, 1))

KERNEL_FUSED = register_kernel(Kernel(
    name="ctcs_fused",
    reads=("eta_prev", "hu_prev", "hv_prev", "eta", "hu", "hv", "h_mid"),
    writes=("eta_new", "hu_new", "hv_new"),
    radius=1,
    shared=_FUSED_SHARED,
    flops_per_cell=lambda bw, bh: FLOPS_ETA + FLOPS_HU + FLOPS_HV,
))


def shared_plan() -> tuple[SharedBuffer, ...]:
    """Fused-kernel shared inventory: the three current-level variables plus
    the constant depth, one float per cell each, halo 1."""
    return _FUSED_SHARED


def scalars(params: SimParams, geometry: grid.GridGeometry, dt2: float) -> dict:
    return {
        "DT2": F32(dt2),
        "IDX": F32(1.0) / F32(geometry.dx),
        "IDY": F32(1.0) / F32(geometry.dy),
        "GRAV": F32(params.g),
        "FCOR": F32(params.f),
    }


def step_ctcs(state: SimState, params: SimParams, bathy: grid.Bathymetry,
              spec: LaunchSpec, variant: str = FUSED, *,
              backend: str | None = None) -> tuple[SimState, TrafficStats]:
    """Advance one leapfrog step (forward-Euler bootstrap on the first call)."""
    if variant not in VARIANTS:
        raise LaunchError(f"unknown ctcs variant {variant!r}")
    if not state.two_level:
        raise LaunchError("ctcs needs a two-level state (init_state(two_levels=True))")
    g = state.geometry
    check_dt("nonlinear", params.dt, g, bathy, params.g)

    bootstrap = state.step_count == 0
    dt2 = params.dt if bootstrap else 2.0 * params.dt
    prev = (state.eta, state.hu, state.hv) if bootstrap else \
           (state.eta_prev, state.hu_prev, state.hv_prev)

    p = scalars(params, g, dt2)
    domain = (g.halo, g.halo, g.nx, g.ny)
    eta_new = state.eta.copy()
    hu_new = state.hu.copy()
    hv_new = state.hv.copy()
    common = dict(domain=domain, backend=backend)

    if variant == FUSED:
        stats = launch(
            KERNEL_FUSED, spec,
            {"eta_prev": prev[0], "hu_prev": prev[1], "hv_prev": prev[2],
             "eta": state.eta, "hu": state.hu, "hv": state.hv, "h_mid": bathy.h_mid},
            {"eta_new": eta_new, "hu_new": hu_new, "hv_new": hv_new},
            p, **common)
    else:
        stats = launch(
            KERNEL_ETA, spec,
            {"eta_prev": prev[0], "hu": state.hu, "hv": state.hv},
            {"eta_new": eta_new}, p, **common)
        s2 = launch(
            KERNEL_HU, spec,
            {"hu_prev": prev[1], "eta": state.eta, "hu": state.hu, "hv": state.hv,
             "h_mid": bathy.h_mid},
            {"hu_new": hu_new}, p, **common)
        s3 = launch(
            KERNEL_HV, spec,
            {"hv_prev": prev[2], "eta": state.eta, "hu": state.hu, "hv": state.hv,
             "h_mid": bathy.h_mid},
            {"hv_new": hv_new}, p, **common)
        stats = stats.merged_with(s2).merged_with(s3, kernel="ctcs_three_kernel")

    new = SimState(eta_new, hu_new, hv_new, g, layout=state.layout,
                   eta_prev=state.eta.copy(), hu_prev=state.hu.copy(),
                   hv_prev=state.hv.copy(),
                   t=state.t + params.dt, step_count=state.step_count + 1)
    apply_boundary(new, params)
    return new, stats
