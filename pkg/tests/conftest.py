import numpy as np
import pytest

from stencilbench.grid import (Bathymetry, GridGeometry, SimParams, init_state)


def smooth_random(rng, shape, passes=8, wrap=True):
    """Band-limited random field in [-1, 1]-ish, periodic when wrap."""
    out = rng.uniform(-1.0, 1.0, shape)
    for _ in range(passes):
        out = (np.roll(out, 1, 0) + out + np.roll(out, -1, 0)) / 3.0
        out = (np.roll(out, 1, 1) + out + np.roll(out, -1, 1)) / 3.0
    return out


def gaussian_bump(nx, ny, amp=0.3, width=6.0):
    x = np.arange(nx) - (nx - 1) / 2.0
    y = np.arange(ny) - (ny - 1) / 2.0
    r2 = (x[None, :] ** 2 + y[:, None] ** 2) / width ** 2
    return (amp * np.exp(-r2)).astype(np.float32)


def make_domain(nx=16, ny=12, halo=2, depth=10.0, boundary="periodic",
                bumpy_bathy=False, seed=100):
    geometry = GridGeometry(nx, ny, 100.0, 100.0, halo=halo)
    if bumpy_bathy:
        rng = np.random.default_rng(seed)
        h = depth * (1.0 + 0.25 * smooth_random(rng, (ny + 1, nx + 1)))
        bathy = Bathymetry.from_interior(h.astype(np.float32), geometry, boundary)
    else:
        bathy = Bathymetry.flat(depth, geometry)
    return geometry, bathy


def random_state(geometry, bathy, params, *, seed=0, amp=0.05, transports=True,
                 two_levels=False, layout="staggered"):
    rng = np.random.default_rng(seed)
    ny, nx = geometry.ny, geometry.nx
    eta0 = (amp * smooth_random(rng, (ny, nx))).astype(np.float32)
    if transports:
        hu0 = (4 * amp * smooth_random(rng, (ny, nx))).astype(np.float32)
        hv0 = (4 * amp * smooth_random(rng, (ny, nx))).astype(np.float32)
    else:
        hu0 = np.zeros((ny, nx), np.float32)
        hv0 = np.zeros((ny, nx), np.float32)
    return init_state(geometry, bathy, eta0, hu0, hv0, params,
                      two_levels=two_levels, layout=layout)


def states_equal(a, b, names=("eta", "hu", "hv")):
    return all(np.array_equal(getattr(a, n), getattr(b, n)) for n in names)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
