"""Simulation state, bathymetry, grid geometry and boundary handling.

Fields live on an Arakawa C-grid for the finite-difference schemes
(eta at cell centers, hu at east cell faces, hv at north cell faces)
and are cell-centered for the finite-volume scheme.  All fields are
stored as float32 arrays of shape (ny + 2*halo, nx + 2*halo), row-major
with y as the leading axis; reductions are done in float64.

Boundary kinds: "periodic" wraps ghost cells around the domain;
"closed-wall" zeroes the normal transport on wall faces and mirrors eta
into the ghost cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CflError, ConfigError

PERIODIC = "periodic"
CLOSED = "closed-wall"
BOUNDARIES = (PERIODIC, CLOSED)

STAGGERED = "staggered"
CENTERED = "centered"

F32 = np.float32
QUARTER = F32(0.25)


@dataclass(frozen=True)
class GridGeometry:
    """Interior cell counts, cell size in meters, and ghost-cell width."""

    nx: int
    ny: int
    dx: float
    dy: float
    halo: int = 1

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigError(f"grid must have at least one cell, got {self.nx}x{self.ny}")
        if self.dx <= 0 or self.dy <= 0:
            raise ConfigError(f"cell size must be positive, got dx={self.dx}, dy={self.dy}")
        if self.halo not in (1, 2):
            raise ConfigError(f"halo must be 1 or 2, got {self.halo}")

    @property
    def shape(self) -> tuple[int, int]:
        """Allocated field shape including ghost cells, (ny+2h, nx+2h)."""
        return (self.ny + 2 * self.halo, self.nx + 2 * self.halo)

    @property
    def interior(self) -> tuple[slice, slice]:
        h = self.halo
        return (slice(h, h + self.ny), slice(h, h + self.nx))


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical parameters: gravity, f-plane Coriolis, dt, boundary."""

    g: float = 9.81
    f: float = 0.0
    dt: float = 0.0
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.g <= 0:
            raise ConfigError(f"gravity must be positive, got {self.g}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")


class Bathymetry:
    """Equilibrium depth at cell intersections (h_int) and midpoints (h_mid).

    h_mid is always derived as the 4-point average of the surrounding
    intersection values, the same float32 expression the finite-volume
    kernel uses when it recomputes midpoints on the fly, so stored and
    recomputed values are bitwise identical.
    """

    def __init__(self, h_int: np.ndarray, geometry: GridGeometry):
        h_int = np.asarray(h_int, dtype=np.float32)
        ny, nx = geometry.shape
        if h_int.shape != (ny + 1, nx + 1):
            raise ConfigError(
                f"intersection depths must have shape {(ny + 1, nx + 1)} "
                f"(ghost-extended nodes), got {h_int.shape}"
            )
        if not np.all(h_int > 0):
            raise ConfigError("all depths must be positive")
        self.geometry = geometry
        self.h_int = h_int
        self.h_mid = midpoint_depth(h_int)
        # Face depths for the staggered schemes (east faces / north faces).
        hm = self.h_mid
        self.h_east = F32(0.5) * (hm + np.roll(hm, -1, axis=1))
        self.h_north = F32(0.5) * (hm + np.roll(hm, -1, axis=0))

    @classmethod
    def flat(cls, depth: float, geometry: GridGeometry) -> "Bathymetry":
        ny, nx = geometry.shape
        return cls(np.full((ny + 1, nx + 1), depth, dtype=np.float32), geometry)

    @classmethod
    def from_interior(cls, h_int_interior: np.ndarray, geometry: GridGeometry,
                      boundary: str = PERIODIC) -> "Bathymetry":
        """Build from interior intersection nodes ((ny+1, nx+1) values),
        extending into the ghost ring per the boundary kind."""
        h_int_interior = np.asarray(h_int_interior, dtype=np.float32)
        if h_int_interior.shape != (geometry.ny + 1, geometry.nx + 1):
            raise ConfigError(
                f"interior intersection depths must have shape "
                f"{(geometry.ny + 1, geometry.nx + 1)}, got {h_int_interior.shape}"
            )
        h = geometry.halo
        ny, nx = geometry.shape
        full = np.empty((ny + 1, nx + 1), dtype=np.float32)
        full[h:h + geometry.ny + 1, h:h + geometry.nx + 1] = h_int_interior
        if boundary == PERIODIC:
            # The two seam nodes are the same physical node on a torus; the
            # west/south copy wins so the wrap identities hold exactly.
            full[:, h + geometry.nx] = full[:, h]
            full[h + geometry.ny, :] = full[h, :]
            # Wrap nodes: node i maps to i +- nx (the seam node is shared).
            for k in range(h):
                full[:, h - 1 - k] = full[:, h - 1 - k + geometry.nx]
                full[:, h + geometry.nx + 1 + k] = full[:, h + 1 + k]
            for k in range(h):
                full[h - 1 - k, :] = full[h - 1 - k + geometry.ny, :]
                full[h + geometry.ny + 1 + k, :] = full[h + 1 + k, :]
        else:
            for k in range(h):
                full[:, h - 1 - k] = full[:, h + 1 + k]
                full[:, h + geometry.nx + 1 + k] = full[:, h + geometry.nx - 1 - k]
            for k in range(h):
                full[h - 1 - k, :] = full[h + 1 + k, :]
                full[h + geometry.ny + 1 + k, :] = full[h + geometry.ny - 1 - k, :]
        return cls(full, geometry)


def midpoint_depth(h_int: np.ndarray) -> np.ndarray:
    """4-point average of intersection depths; the construction rule for h_mid."""
    return QUARTER * (((h_int[:-1, :-1] + h_int[:-1, 1:]) + h_int[1:, :-1]) + h_int[1:, 1:])


@dataclass
class SimState:
    """Surface deviation and volume transports, with ghost-cell halos.

    Two-level schemes carry the previous time level in *_prev.  A state is
    an exclusive-ownership value: step functions never mutate their input,
    they return a fresh state.
    """

    eta: np.ndarray
    hu: np.ndarray
    hv: np.ndarray
    geometry: GridGeometry
    layout: str = STAGGERED
    eta_prev: np.ndarray | None = None
    hu_prev: np.ndarray | None = None
    hv_prev: np.ndarray | None = None
    t: float = 0.0
    step_count: int = 0

    @property
    def two_level(self) -> bool:
        return self.eta_prev is not None

    def copy(self) -> "SimState":
        return replace(
            self,
            eta=self.eta.copy(), hu=self.hu.copy(), hv=self.hv.copy(),
            eta_prev=None if self.eta_prev is None else self.eta_prev.copy(),
            hu_prev=None if self.hu_prev is None else self.hu_prev.copy(),
            hv_prev=None if self.hv_prev is None else self.hv_prev.copy(),
        )

    def interior(self, name: str) -> np.ndarray:
        return getattr(self, name)[self.geometry.interior]


def init_state(geometry: GridGeometry, bathy: Bathymetry,
               eta0: np.ndarray, hu0: np.ndarray, hv0: np.ndarray,
               params: SimParams, *, two_levels: bool = False,
               layout: str = STAGGERED) -> SimState:
    """Allocate a state from interior initial fields and fill ghost cells.

    Raises ConfigError on dimension mismatch or non-positive total depth.
    """
    if layout not in (STAGGERED, CENTERED):
        raise ConfigError(f"unknown layout {layout!r}")
    want = (geometry.ny, geometry.nx)
    fields = {}
    for name, f0 in (("eta", eta0), ("hu", hu0), ("hv", hv0)):
        f0 = np.asarray(f0, dtype=np.float32)
        if f0.shape != want:
            raise ConfigError(f"{name}0 must have interior shape {want}, got {f0.shape}")
        arr = np.zeros(geometry.shape, dtype=np.float32)
        arr[geometry.interior] = f0
        fields[name] = arr
    h_mid_int = bathy.h_mid[geometry.interior]
    if not np.all(fields["eta"][geometry.interior] + h_mid_int > 0):
        raise ConfigError("non-positive total depth: eta0 + H must be > 0 everywhere")
    state = SimState(fields["eta"], fields["hu"], fields["hv"], geometry, layout=layout)
    state = apply_boundary(state, params)
    if two_levels:
        state.eta_prev = state.eta.copy()
        state.hu_prev = state.hu.copy()
        state.hv_prev = state.hv.copy()
    return state


def _fill_periodic(arr: np.ndarray, nx: int, ny: int, h: int) -> None:
    arr[:, :h] = arr[:, nx:nx + h]
    arr[:, nx + h:] = arr[:, h:2 * h]
    arr[:h, :] = arr[ny:ny + h, :]
    arr[ny + h:, :] = arr[h:2 * h, :]


def _mirror_x(arr: np.ndarray, nx: int, h: int, sign: float) -> None:
    for k in range(h):
        arr[:, h - 1 - k] = sign * arr[:, h + k]
        arr[:, nx + h + k] = sign * arr[:, nx + h - 1 - k]


def _mirror_y(arr: np.ndarray, ny: int, h: int, sign: float) -> None:
    for k in range(h):
        arr[h - 1 - k, :] = sign * arr[h + k, :]
        arr[ny + h + k, :] = sign * arr[ny + h - 1 - k, :]


def _fill_closed_staggered(state: SimState) -> None:
    g = state.geometry
    nx, ny, h = g.nx, g.ny, g.halo
    _mirror_x(state.eta, nx, h, 1.0)
    _mirror_y(state.eta, ny, h, 1.0)
    # hu samples live on east faces: the wall faces are stored samples
    # (west wall at column h-1, east wall at column nx+h-1); ghost faces
    # beyond a wall reflect with negated sign.
    hu = state.hu
    hu[:, h - 1] = 0.0
    hu[:, nx + h - 1] = 0.0
    for m in range(1, h):
        hu[:, h - 1 - m] = -hu[:, h - 1 + m]
    for m in range(1, h + 1):
        hu[:, nx + h - 1 + m] = -hu[:, nx + h - 1 - m]
    _mirror_y(hu, ny, h, 1.0)
    # hv samples live on north faces (south wall row h-1, north wall row ny+h-1).
    hv = state.hv
    hv[h - 1, :] = 0.0
    hv[ny + h - 1, :] = 0.0
    for m in range(1, h):
        hv[h - 1 - m, :] = -hv[h - 1 + m, :]
    for m in range(1, h + 1):
        hv[ny + h - 1 + m, :] = -hv[ny + h - 1 - m, :]
    _mirror_x(hv, nx, h, 1.0)


def _fill_closed_centered(state: SimState) -> None:
    g = state.geometry
    nx, ny, h = g.nx, g.ny, g.halo
    _mirror_x(state.eta, nx, h, 1.0)
    _mirror_y(state.eta, ny, h, 1.0)
    _mirror_x(state.hu, nx, h, -1.0)
    _mirror_y(state.hu, ny, h, 1.0)
    _mirror_x(state.hv, nx, h, 1.0)
    _mirror_y(state.hv, ny, h, -1.0)


def apply_boundary(state: SimState, params: SimParams) -> SimState:
    """Fill ghost cells in place per the active boundary rule; returns state.

    Idempotent: applying twice gives bitwise the same ghost values.
    """
    g = state.geometry
    arrays = [state.eta, state.hu, state.hv]
    if state.two_level:
        arrays += [state.eta_prev, state.hu_prev, state.hv_prev]
    if params.boundary == PERIODIC:
        for arr in arrays:
            _fill_periodic(arr, g.nx, g.ny, g.halo)
        return state
    # closed-wall
    for eta, hu, hv in _level_triples(state):
        sub = replace(state, eta=eta, hu=hu, hv=hv,
                      eta_prev=None, hu_prev=None, hv_prev=None)
        if state.layout == STAGGERED:
            _fill_closed_staggered(sub)
        else:
            _fill_closed_centered(sub)
    return state


def _level_triples(state: SimState):
    yield state.eta, state.hu, state.hv
    if state.two_level:
        yield state.eta_prev, state.hu_prev, state.hv_prev


def total_mass(state: SimState, geometry: GridGeometry) -> float:
    """Deviation volume: sum of interior eta times cell area, in m^3.

    Accumulated in float64 in plain row-major order so the result matches a
    nested-loop summation exactly.
    """
    vals = state.eta[geometry.interior].astype(np.float64)
    s = 0.0
    for v in vals.ravel().tolist():
        s += v
    return s * (geometry.dx * geometry.dy)


# CFL handling ---------------------------------------------------------------

# Validation-gate Courant numbers per scheme family.
CFL_GATE = {"linear": 0.8, "nonlinear": 0.8, "hires": 0.25}
# Stability-aware factors used when a dt is chosen automatically; the 2-D
# von-Neumann limits are 1/sqrt(2) for forward-backward and 1/(2*sqrt(2))
# for the leapfrog scheme on this grid, so auto-dt stays below them.
CFL_AUTO = {"linear": 0.6, "nonlinear": 0.3, "hires": 0.25}


def cfl_limit(scheme: str, geometry: GridGeometry, bathy: Bathymetry, g: float) -> float:
    """Largest dt the gate accepts: C * min(dx,dy) / sqrt(g * max depth)."""
    c = CFL_GATE[scheme]
    hmax = float(np.max(bathy.h_mid))
    return c * min(geometry.dx, geometry.dy) / float(np.sqrt(g * hmax))


def auto_dt(scheme: str, geometry: GridGeometry, bathy: Bathymetry, g: float) -> float:
    """A stable dt for the scheme (used when dt is requested as 'auto')."""
    c = CFL_AUTO[scheme]
    hmax = float(np.max(bathy.h_mid))
    return c * min(geometry.dx, geometry.dy) / float(np.sqrt(g * hmax))


def check_dt(scheme: str, dt: float, geometry: GridGeometry, bathy: Bathymetry, g: float) -> None:
    limit = cfl_limit(scheme, geometry, bathy, g)
    if abs(dt) > limit:
        raise CflError(dt, limit)
