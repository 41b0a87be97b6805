"""High-resolution well-balanced finite-volume solver with RK2 stepping.

Fields are interpreted as cell-centered for this scheme (layout
"centered").  Each step runs the stencil kernel exactly twice (second-order
strong-stability-preserving Runge-Kutta):

    Q*      = Q^n + dt * L(Q^n)
    Q^{n+1} = 1/2 Q^n + 1/2 (Q* + dt * L(Q*))

Stages 0..6 are shared-memory storage plans for the same math: stage 0
buffers everything (22 floats/cell), each later stage removes or reuses
buffers per the optimization ladder, trading recomputation for footprint.
Simulation results are identical across stages; only the traffic model
(shared footprint, global streams for the midpoint-depth array, FLOPs)
changes.
"""

from __future__ import annotations

import numpy as np

from .. import grid
from ..errors import LaunchError
from ..execmodel import Kernel, LaunchSpec, SharedBuffer, TrafficStats, launch, register_kernel
from ..grid import CENTERED, SimParams, SimState, apply_boundary, check_dt

F32 = np.float32

STAGES = tuple(range(7))

# Stage-0 shared inventory; each stage's plan applies the cumulative
# removals/reuses below.
_STAGE0 = (
    SharedBuffer("physical_q", 3, 2),
    SharedBuffer("recon_r", 4, 2),
    SharedBuffer("depth_mid", 1, 2),
    SharedBuffer("depth_face_x", 1, 1),
    SharedBuffer("depth_face_y", 1, 1),
    SharedBuffer("flux_x", 3, 1),
    SharedBuffer("flux_y", 3, 1),
    SharedBuffer("slopes_x", 3, 1),
    SharedBuffer("slopes_y", 3, 1),
)


def shared_plan(stage: int) -> tuple[SharedBuffer, ...]:
    """Shared inventory for one optimization stage.

    1: recompute midpoint depth from intersections (drop depth_mid)
    2: recompute face depths (drop depth_face_x/y)
    3: reuse the physical-variable buffer for the reconstruction (merge)
    4: recompute x fluxes at use (drop flux_x)
    5: recompute y fluxes at use (drop flux_y)
    6: reuse the x-slope buffer for the y slopes (merge)
    """
    if stage not in STAGES:
        raise LaunchError(f"stage must be 0..6, got {stage}")
    plan: list[SharedBuffer] = []
    for buf in _STAGE0:
        if stage >= 1 and buf.name == "depth_mid":
            continue
        if stage >= 2 and buf.name in ("depth_face_x", "depth_face_y"):
            continue
        if stage >= 3 and buf.name == "recon_r":
            continue
        if stage >= 4 and buf.name == "flux_x":
            continue
        if stage >= 5 and buf.name == "flux_y":
            continue
        if stage >= 6 and buf.name == "slopes_y":
            continue
        if stage >= 3 and buf.name == "physical_q":
            plan.append(SharedBuffer("physical_recon_qr", 4, 2))
            continue
        if stage >= 6 and buf.name == "slopes_x":
            plan.append(SharedBuffer("slopes_xy", 3, 1))
            continue
        plan.append(buf)
    return tuple(plan)


def shared_floats_per_cell(stage: int) -> int:
    return sum(b.floats_per_cell for b in shared_plan(stage))


# FLOP model: per-phase op counts taken from the kernel source, scaled by
# the evaluation extents of the stage's storage plan.  Recomputation stages
# evaluate the same expressions at more sites; buffer-reuse stages (3, 6)
# only swap storage, except that dropping the reconstruction buffer forces
# the y-equilibrium ingredient f*u to be recomputed at its use sites.
_LOAD = 14          # depth, desingularized velocities, f*v, f*u per tile cell
_HM_RECOMPUTE = 4   # 4-point intersection average
_DK = 5             # equilibrium jump per face
_SLOPES_DIR = 26    # u, v and K (or L) limited slopes per cell per direction
_FACE_DEPTH = 2     # face depth from two intersections
_FLUX_FACE = 64     # face states + central-upwind combine, excl. face depth
_S_RECOMPUTE = 1    # f*u at use (stage >= 3)
_PRESS = 19         # both face-averaged difference terms + depth re-add
_UPDATE = (26, 35)  # per substep


def launch_flops(stage: int, substep: int, bw: int, bh: int) -> float:
    """Modeled per-cell FLOPs for one launch at the given storage plan."""
    t2 = (bw + 4) * (bh + 4)
    t1 = (bw + 2) * (bh + 2)
    dkx = (bw + 3) * (bh + 2)
    dky = (bw + 2) * (bh + 3)
    fxb = (bw + 1) * bh
    fyb = bw * (bh + 1)
    fxr = 2 * bw * bh
    fyr = 2 * bw * bh
    cells = bw * bh

    total = _LOAD * t2
    if stage >= 1:
        total += _HM_RECOMPUTE * (t2 + cells)
    total += _DK * (dkx + dky)
    total += 2 * _SLOPES_DIR * t1
    fx_evals = fxb if stage < 4 else fxr
    fy_evals = fyb if stage < 5 else fyr
    if stage < 2:
        total += _FACE_DEPTH * (fxb + fyb)
        total += _FLUX_FACE * (fx_evals + fy_evals)
    else:
        total += (_FLUX_FACE + _FACE_DEPTH) * (fx_evals + fy_evals)
    if stage >= 3:
        total += _S_RECOMPUTE * (2 * dky + 2 * fy_evals)
    total += _PRESS * cells
    total += _UPDATE[substep] * cells
    return total / cells


def _kernel_for(stage: int, substep: int) -> Kernel:
    reads = ["eta", "hu", "hv"]
    if stage == 0:
        reads.append("h_mid")
    reads.append("h_int")
    if substep == 1:
        reads += ["eta_n", "hu_n", "hv_n"]
    return Kernel(
        name="hires_rhs",
        reads=tuple(reads),
        writes=("eta_new", "hu_new", "hv_new"),
        radius=2,
        shared=shared_plan(stage),
        flops_per_cell=lambda bw, bh, s=stage, ss=substep: launch_flops(s, ss, bw, bh),
    )


# Registered for implementation lookup and the generic kernel suite.
register_kernel(_kernel_for(0, 0))


def scalars(params: SimParams, geometry: grid.GridGeometry, stage: int, substep: int) -> dict:
    g32 = F32(params.g)
    return {
        "DT": F32(params.dt),
        "IDX": F32(1.0) / F32(geometry.dx),
        "IDY": F32(1.0) / F32(geometry.dy),
        "GRAV": g32,
        "FCOR": F32(params.f),
        "THETA": F32(1.3),
        "EPS4": F32(1e-8),
        "HDX": F32(0.5) * F32(geometry.dx),
        "HDY": F32(0.5) * F32(geometry.dy),
        "DXF": F32(geometry.dx),
        "DYF": F32(geometry.dy),
        "G2I": F32(0.5) / g32,
        "stage": stage,
        "substep": substep,
        "boundary": params.boundary,
        "wall_w": geometry.halo - 1,
        "wall_e": geometry.nx + geometry.halo - 1,
        "wall_s": geometry.halo - 1,
        "wall_n": geometry.ny + geometry.halo - 1,
    }


def rk2_step(state: SimState, params: SimParams, bathy: grid.Bathymetry,
             spec: LaunchSpec, stage: int = 0, *,
             backend: str | None = None) -> tuple[SimState, TrafficStats]:
    """Advance one RK2 step (two launches of the stencil kernel)."""
    if stage not in STAGES:
        raise LaunchError(f"stage must be 0..6, got {stage}")
    g = state.geometry
    if g.halo < 2:
        raise LaunchError("the finite-volume scheme needs halo = 2")
    if state.layout != CENTERED:
        raise LaunchError("the finite-volume scheme needs a cell-centered state")
    check_dt("hires", params.dt, g, bathy, params.g)

    spec = LaunchSpec(spec.block, spec.grid_w, spec.grid_h, shared_plan(stage), spec.math_mode)
    domain = (g.halo, g.halo, g.nx, g.ny)

    def bathy_inputs(stage_: int) -> dict:
        ins = {"h_int": bathy.h_int}
        if stage_ == 0:
            ins["h_mid"] = bathy.h_mid
        return ins

    # Substep 1: Q* = Q + dt L(Q)
    e1 = state.eta.copy()
    u1 = state.hu.copy()
    v1 = state.hv.copy()
    p0 = scalars(params, g, stage, 0)
    stats = launch(
        _kernel_for(stage, 0), spec,
        {"eta": state.eta, "hu": state.hu, "hv": state.hv, **bathy_inputs(stage)},
        {"eta_new": e1, "hu_new": u1, "hv_new": v1},
        p0, domain=domain, backend=backend)
    mid = SimState(e1, u1, v1, g, layout=CENTERED)
    apply_boundary(mid, params)

    # Substep 2: Q^{n+1} = (Q + Q* + dt L(Q*)) / 2
    e2 = state.eta.copy()
    u2 = state.hu.copy()
    v2 = state.hv.copy()
    p1 = scalars(params, g, stage, 1)
    s2 = launch(
        _kernel_for(stage, 1), spec,
        {"eta": e1, "hu": u1, "hv": v1, **bathy_inputs(stage),
         "eta_n": state.eta, "hu_n": state.hu, "hv_n": state.hv},
        {"eta_new": e2, "hu_new": u2, "hv_new": v2},
        p1, domain=domain, backend=backend)
    stats = stats.merged_with(s2, kernel=f"hires_rhs_stage{stage}")

    new = SimState(e2, u2, v2, g, layout=CENTERED,
                   t=state.t + params.dt, step_count=state.step_count + 1)
    apply_boundary(new, params)
    return new, stats


def recompute_overhead(stage0_stats: TrafficStats, stage6_stats: TrafficStats) -> float:
    """FLOP ratio of a recompute-heavy stage over the fully buffered one.

    Both stats must come from runs with identical domain, steps and block.
    """
    if (stage0_stats.block_w, stage0_stats.block_h, stage0_stats.cell_writes,
            stage0_stats.launches) != (stage6_stats.block_w, stage6_stats.block_h,
                                       stage6_stats.cell_writes, stage6_stats.launches):
        raise LaunchError("recompute_overhead needs stats from identical run descriptors")
    return stage6_stats.flops / stage0_stats.flops


def reconstruction_vars(state: SimState, params: SimParams, bathy: grid.Bathymetry):
    """The four per-cell equilibrium-reconstruction components (u, v, limited
    K-jump, limited L-jump) on the interior; all four vanish at lake-at-rest."""
    from ..backends import python_kernels as pk

    g = state.geometry
    p = scalars(params, g, 1, 0)
    eta, hu, hv = state.eta, state.hu, state.hv
    hint = bathy.h_int
    hm = bathy.h_mid
    hh = eta + hm
    h2 = hh * hh
    h4 = h2 * h2
    den = h4 + np.maximum(h4, p["EPS4"])
    with np.errstate(divide="ignore"):
        rs = (F32(1.0) / np.sqrt(den)).astype(np.float32)
    r2 = pk.SQRT2 * hh
    u = (r2 * hu) * rs
    v = (r2 * hv) * rs
    cp_ = p["FCOR"] * v
    cq_ = p["FCOR"] * u
    dk = p["GRAV"] * (eta[:, 1:] - eta[:, :-1]) - p["HDX"] * (cp_[:, :-1] + cp_[:, 1:])
    dl = p["GRAV"] * (eta[1:, :] - eta[:-1, :]) + p["HDY"] * (cq_[:-1, :] + cq_[1:, :])
    kx = pk._limited(dk, 1, p["THETA"])
    ly = pk._limited(dl, 0, p["THETA"])
    sl = g.interior
    h0 = g.halo
    return (u[sl], v[sl],
            kx[sl[0], h0 - 1:h0 - 1 + g.nx],
            ly[h0 - 1:h0 - 1 + g.ny, sl[1]])
