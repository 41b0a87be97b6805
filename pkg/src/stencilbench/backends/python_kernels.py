"""numpy lane of the kernel core.

Every kernel is a pure per-cell function of its input tiles, vectorized over
the block rectangle.  Op order is pinned (explicit float32 constants, one
rounding per arithmetic op) because the compiled lane mirrors these
expressions literally and the two must agree bitwise.

Tile layout: inputs arrive as views of shape (h + 2r, w + 2r) around the
block rectangle (node-sampled arrays carry one extra row/column); outputs
are views of exactly the block's cells.
"""

from __future__ import annotations

import numpy as np

from .. import fastmath

F32 = np.float32
ZERO = F32(0.0)
HALF = F32(0.5)
QUARTER = F32(0.25)
ONE = F32(1.0)
TWO = F32(2.0)
FOUR = F32(4.0)
SQRT2 = F32(np.sqrt(np.float64(2.0)))

IMPLS = {}


def impl(name):
    def deco(fn):
        IMPLS[name] = fn
        return fn
    return deco


# --- generic test kernels ----------------------------------------------------

@impl("copy")
def k_copy(tiles, outs, rect, p):
    outs[0][:, :] = tiles[0]


@impl("scale_add")
def k_scale_add(tiles, outs, rect, p):
    outs[0][:, :] = p["a"] * tiles[0] + p["b"]


@impl("laplacian5")
def k_laplacian5(tiles, outs, rect, p):
    t = tiles[0]
    c = t[1:-1, 1:-1]
    outs[0][:, :] = ((t[:-2, 1:-1] + t[2:, 1:-1]) + (t[1:-1, :-2] + t[1:-1, 2:])) - FOUR * c


@impl("diffuse2")
def k_diffuse2(tiles, outs, rect, p):
    t = tiles[0]
    c = t[2:-2, 2:-2]
    lap = ((t[:-4, 2:-2] + t[4:, 2:-2]) + (t[2:-2, :-4] + t[2:-2, 4:])) - FOUR * c
    outs[0][:, :] = c + p["k"] * lap


# --- forward-backward linear scheme -------------------------------------------
#
# Stage formulas (freshest values feed the next stage):
#   F: hu' = hu + dt*(f*avg4(hv) - g*H_east*(eta_E - eta)/dx)
#   G: hv' = hv + dt*(-f*avg4(hu') - g*H_north*(eta_N - eta)/dy)
#   H: eta' = eta - dt*((hu' - hu'_W)/dx + (hv' - hv'_S)/dy)

def _linear_f_expr(eta_c, eta_e, hv_c, hv_e, hv_s, hv_se, hu_c, he, p):
    a4 = QUARTER * (((hv_c + hv_e) + hv_s) + hv_se)
    gr = (eta_e - eta_c) * p["IDX"]
    return hu_c + p["DT"] * (p["FCOR"] * a4 - p["GRAV"] * (he * gr))


def _linear_g_expr(eta_c, eta_n, hu_w, hu_c, hu_nw, hu_n, hv_c, hn, p):
    a4 = QUARTER * (((hu_w + hu_c) + hu_nw) + hu_n)
    gr = (eta_n - eta_c) * p["IDY"]
    return hv_c + p["DT"] * (np.negative(p["FCOR"] * a4) - p["GRAV"] * (hn * gr))


def _linear_h_expr(eta_c, hu_w, hu_c, hv_s, hv_c, p):
    return eta_c - p["DT"] * ((hu_c - hu_w) * p["IDX"] + (hv_c - hv_s) * p["IDY"])


@impl("linear_f")
def k_linear_f(tiles, outs, rect, p):
    eta, hv, hu, he = tiles
    outs[0][:, :] = _linear_f_expr(
        eta[1:-1, 1:-1], eta[1:-1, 2:],
        hv[1:-1, 1:-1], hv[1:-1, 2:], hv[:-2, 1:-1], hv[:-2, 2:],
        hu[1:-1, 1:-1], he[1:-1, 1:-1], p)


@impl("linear_g")
def k_linear_g(tiles, outs, rect, p):
    eta, hv, hu_new, hn = tiles
    outs[0][:, :] = _linear_g_expr(
        eta[1:-1, 1:-1], eta[2:, 1:-1],
        hu_new[1:-1, :-2], hu_new[1:-1, 1:-1], hu_new[2:, :-2], hu_new[2:, 1:-1],
        hv[1:-1, 1:-1], hn[1:-1, 1:-1], p)


@impl("linear_h")
def k_linear_h(tiles, outs, rect, p):
    eta, hu_new, hv_new = tiles
    outs[0][:, :] = _linear_h_expr(
        eta[1:-1, 1:-1],
        hu_new[1:-1, :-2], hu_new[1:-1, 1:-1],
        hv_new[:-2, 1:-1], hv_new[1:-1, 1:-1], p)


@impl("linear_fused")
def k_linear_fused(tiles, outs, rect, p):
    """All three stages in one launch.

    The block computes hu' on an extended rectangle (one extra column west,
    one extra row south and north) and hv' one extra row south, reading the
    time-n halo instead of the freshly written globals.  Positions that the
    per-stage boundary fill would own (wall faces, tangential ghost rows)
    are overridden with the boundary rule so the result stays bitwise equal
    to the three-launch variant.
    """
    eta, hu, hv, he, hn = tiles
    h, w = outs[0].shape
    closed = p.get("boundary") == "closed-wall"

    # hu' on array rows [y0-1, y0+h], cols [x0-1, x0+w-1]: tile rows 1..h+2,
    # cols 1..w+1.
    hu_ext = _linear_f_expr(
        eta[1:h + 3, 1:w + 2], eta[1:h + 3, 2:w + 3],
        hv[1:h + 3, 1:w + 2], hv[1:h + 3, 2:w + 3],
        hv[0:h + 2, 1:w + 2], hv[0:h + 2, 2:w + 3],
        hu[1:h + 3, 1:w + 2], he[1:h + 3, 1:w + 2], p)
    if closed:
        for col in range(w + 1):
            i_arr = rect.x0 - 1 + col
            if i_arr == p["wall_w"] or i_arr == p["wall_e"]:
                hu_ext[:, col] = ZERO
        row_lo = rect.y0 - 1
        if row_lo == p["wall_s"]:          # south tangential ghost row
            hu_ext[0, :] = hu_ext[1, :]
        if rect.y0 + h == p["wall_n"] + 1:  # north tangential ghost row
            hu_ext[h + 1, :] = hu_ext[h, :]

    # hv' on array rows [y0-1, y0+h-1], cols [x0, x0+w-1]: tile rows 1..h+1,
    # cols 2..w+1.
    hv_ext = _linear_g_expr(
        eta[1:h + 2, 2:w + 2], eta[2:h + 3, 2:w + 2],
        hu_ext[0:h + 1, 0:w], hu_ext[0:h + 1, 1:w + 1],
        hu_ext[1:h + 2, 0:w], hu_ext[1:h + 2, 1:w + 1],
        hv[1:h + 2, 2:w + 2], hn[1:h + 2, 2:w + 2], p)
    if closed:
        for row in range(h + 1):
            j_arr = rect.y0 - 1 + row
            if j_arr == p["wall_s"] or j_arr == p["wall_n"]:
                hv_ext[row, :] = ZERO

    out_eta = _linear_h_expr(
        eta[2:h + 2, 2:w + 2],
        hu_ext[1:h + 1, 0:w], hu_ext[1:h + 1, 1:w + 1],
        hv_ext[0:h, 0:w], hv_ext[1:h + 1, 0:w], p)

    outs[0][:, :] = out_eta
    outs[1][:, :] = hu_ext[1:h + 1, 1:w + 1]
    outs[2][:, :] = hv_ext[1:h + 1, 0:w]


# --- nonlinear leapfrog (centered-in-time centered-in-space) ------------------

def _ctcs_hu_expr(sl, p):
    """hu update at an east face; sl maps stencil-offset names to arrays."""
    hc_c = sl["H_c"] + sl["eta_c"]
    hc_e = sl["H_e"] + sl["eta_e"]
    hc_n = sl["H_n"] + sl["eta_n"]
    hc_ne = sl["H_ne"] + sl["eta_ne"]
    hc_s = sl["H_s"] + sl["eta_s"]
    hc_se = sl["H_se"] + sl["eta_se"]
    he = HALF * (hc_c + hc_e)
    press = (p["GRAV"] * he) * ((sl["eta_e"] - sl["eta_c"]) * p["IDX"])
    cor = p["FCOR"] * (QUARTER * (((sl["hv_c"] + sl["hv_e"]) + sl["hv_s"]) + sl["hv_se"]))
    hub0 = HALF * (sl["hu_w"] + sl["hu_c"])
    q0 = (hub0 * hub0) / hc_c
    hub1 = HALF * (sl["hu_c"] + sl["hu_e"])
    q1 = (hub1 * hub1) / hc_e
    advx = (q1 - q0) * p["IDX"]
    hut = HALF * (sl["hu_c"] + sl["hu_n"])
    hvt = HALF * (sl["hv_c"] + sl["hv_e"])
    hct = QUARTER * (((hc_c + hc_e) + hc_n) + hc_ne)
    qt = (hut * hvt) / hct
    hub = HALF * (sl["hu_s"] + sl["hu_c"])
    hvb = HALF * (sl["hv_s"] + sl["hv_se"])
    hcb = QUARTER * (((hc_s + hc_se) + hc_c) + hc_e)
    qb = (hub * hvb) / hcb
    advy = (qt - qb) * p["IDY"]
    return sl["hu_prev_c"] + p["DT2"] * (((cor - advx) - advy) - press)


def _ctcs_hv_expr(sl, p):
    """hv update at a north face."""
    hc_c = sl["H_c"] + sl["eta_c"]
    hc_n = sl["H_n"] + sl["eta_n"]
    hc_e = sl["H_e"] + sl["eta_e"]
    hc_ne = sl["H_ne"] + sl["eta_ne"]
    hc_w = sl["H_w"] + sl["eta_w"]
    hc_nw = sl["H_nw"] + sl["eta_nw"]
    hn = HALF * (hc_c + hc_n)
    press = (p["GRAV"] * hn) * ((sl["eta_n"] - sl["eta_c"]) * p["IDY"])
    cor = p["FCOR"] * (QUARTER * (((sl["hu_w"] + sl["hu_c"]) + sl["hu_nw"]) + sl["hu_n"]))
    hvb0 = HALF * (sl["hv_s"] + sl["hv_c"])
    q0 = (hvb0 * hvb0) / hc_c
    hvb1 = HALF * (sl["hv_c"] + sl["hv_n"])
    q1 = (hvb1 * hvb1) / hc_n
    advy = (q1 - q0) * p["IDY"]
    hue = HALF * (sl["hu_c"] + sl["hu_n"])
    hve = HALF * (sl["hv_c"] + sl["hv_e"])
    hce = QUARTER * (((hc_c + hc_e) + hc_n) + hc_ne)
    qe = (hue * hve) / hce
    huw = HALF * (sl["hu_w"] + sl["hu_nw"])
    hvw = HALF * (sl["hv_w"] + sl["hv_c"])
    hcw = QUARTER * (((hc_w + hc_c) + hc_nw) + hc_n)
    qw = (huw * hvw) / hcw
    advx = (qe - qw) * p["IDX"]
    return sl["hv_prev_c"] + p["DT2"] * (((np.negative(cor) - advx) - advy) - press)


def _stencil_slices(arrs: dict) -> dict:
    """Build name_offset -> view mappings for radius-1 tiles."""
    off = {"c": (1, 1), "e": (1, 2), "w": (1, 0), "n": (2, 1), "s": (0, 1),
           "ne": (2, 2), "nw": (2, 0), "se": (0, 2), "sw": (0, 0)}
    out = {}
    for name, arr in arrs.items():
        hh = arr.shape[0] - 2
        ww = arr.shape[1] - 2
        for suf, (oy, ox) in off.items():
            out[f"{name}_{suf}"] = arr[oy:oy + hh, ox:ox + ww]
    return out


@impl("ctcs_eta")
def k_ctcs_eta(tiles, outs, rect, p):
    eta_prev, hu, hv = tiles
    outs[0][:, :] = eta_prev[1:-1, 1:-1] - p["DT2"] * (
        (hu[1:-1, 1:-1] - hu[1:-1, :-2]) * p["IDX"]
        + (hv[1:-1, 1:-1] - hv[:-2, 1:-1]) * p["IDY"])


@impl("ctcs_hu")
def k_ctcs_hu(tiles, outs, rect, p):
    hu_prev, eta, hu, hv, hm = tiles
    sl = _stencil_slices({"hu_prev": hu_prev, "eta": eta, "hu": hu, "hv": hv, "H": hm})
    outs[0][:, :] = _ctcs_hu_expr(sl, p)


@impl("ctcs_hv")
def k_ctcs_hv(tiles, outs, rect, p):
    hv_prev, eta, hu, hv, hm = tiles
    sl = _stencil_slices({"hv_prev": hv_prev, "eta": eta, "hu": hu, "hv": hv, "H": hm})
    outs[0][:, :] = _ctcs_hv_expr(sl, p)


@impl("ctcs_fused")
def k_ctcs_fused(tiles, outs, rect, p):
    eta_prev, hu_prev, hv_prev, eta, hu, hv, hm = tiles
    sl = _stencil_slices({"eta_prev": eta_prev, "hu_prev": hu_prev, "hv_prev": hv_prev,
                          "eta": eta, "hu": hu, "hv": hv, "H": hm})
    outs[0][:, :] = sl["eta_prev_c"] - p["DT2"] * (
        (sl["hu_c"] - sl["hu_w"]) * p["IDX"] + (sl["hv_c"] - sl["hv_s"]) * p["IDY"])
    outs[1][:, :] = _ctcs_hu_expr(sl, p)
    outs[2][:, :] = _ctcs_hv_expr(sl, p)


# --- high-resolution finite-volume scheme -------------------------------------
#
# Central-upwind fluxes on a geostrophic-equilibrium reconstruction:
# per cell the four reconstruction variables are the desingularized
# velocities (u, v) and the limited jumps of K = g*eta - V (x) and
# L = g*eta + U (y), where V_x = f*v and U_y = f*u.  Pressure + Coriolis
# enter through face-averaged K/L differences, which vanish bitwise at
# lake-at-rest (and at discrete geostrophic balance), making the scheme
# well-balanced in floating point, not just in exact arithmetic.

def _minmod3(a, b, c):
    mn = np.minimum(np.minimum(a, b), c)
    mx = np.maximum(np.maximum(a, b), c)
    return np.where(mn > ZERO, mn, np.where(mx < ZERO, mx, ZERO))


def _limited(diffs, axis, theta):
    """Generalized-minmod limited jump per cell from face jumps."""
    if axis == 1:
        dl = diffs[:, :-1]
        dr = diffs[:, 1:]
    else:
        dl = diffs[:-1, :]
        dr = diffs[1:, :]
    return _minmod3(theta * dl, HALF * (dl + dr), theta * dr)


def _sqrt(x, mode):
    if mode == "fast":
        return fastmath.sqrt(x, "fast")
    return np.sqrt(x)


def _rsqrt(x, mode):
    if mode == "fast":
        return fastmath.rsqrt(x, "fast")
    with np.errstate(divide="ignore"):
        return ONE / np.sqrt(x)


def _cu_flux(qm, qp, fm, fp, ap, am, inv, pr, ad):
    num = (ap * fm - am * fp) + pr * (qp - qm)
    return np.where(ad > ZERO, num * inv, ZERO)


@impl("hires_rhs")
def k_hires_rhs(tiles, outs, rect, p):
    stage = int(p["stage"])
    substep = int(p["substep"])
    mode = p.get("math_mode", "precise")
    eta, hu, hv = tiles[0], tiles[1], tiles[2]
    k = 3
    hm_tile = None
    if stage == 0:
        hm_tile = tiles[3]
        k = 4
    hint = tiles[k]
    k += 1
    if substep == 1:
        eta0, hu0, hv0 = tiles[k], tiles[k + 1], tiles[k + 2]

    h, w = outs[0].shape
    theta = p["THETA"]

    # Load/convert phase: total depth and the equilibrium-reconstruction
    # ingredients on the full halo-2 tile.
    if hm_tile is not None:
        hm = hm_tile
    else:
        hm = QUARTER * (((hint[:-1, :-1] + hint[:-1, 1:]) + hint[1:, :-1]) + hint[1:, 1:])
    hh = eta + hm
    h2 = hh * hh
    h4 = h2 * h2
    den = h4 + np.maximum(h4, p["EPS4"])
    rs = _rsqrt(den, mode)
    r2 = SQRT2 * hh
    u = (r2 * hu) * rs
    v = (r2 * hv) * rs
    cp_ = p["FCOR"] * v   # d/dx of the Coriolis primitive V
    cq_ = p["FCOR"] * u   # d/dy of the Coriolis primitive U

    # Equilibrium-variable jumps across faces.
    dk = p["GRAV"] * (eta[:, 1:] - eta[:, :-1]) - p["HDX"] * (cp_[:, :-1] + cp_[:, 1:])
    dl = p["GRAV"] * (eta[1:, :] - eta[:-1, :]) + p["HDY"] * (cq_[:-1, :] + cq_[1:, :])

    # Limited slopes (jump units, one value per cell that has both faces).
    su_x = _limited(u[:, 1:] - u[:, :-1], 1, theta)
    sv_x = _limited(v[:, 1:] - v[:, :-1], 1, theta)
    sk_x = _limited(dk, 1, theta)
    su_y = _limited(u[1:, :] - u[:-1, :], 0, theta)
    sv_y = _limited(v[1:, :] - v[:-1, :], 0, theta)
    sl_y = _limited(dl, 0, theta)

    g2i = p["G2I"]
    dxf = p["DXF"]
    dyf = p["DYF"]
    grav = p["GRAV"]

    # --- x faces: east faces of tile cells 1..w+1, block rows only.
    rows = slice(2, h + 2)
    cl = (rows, slice(1, w + 2))
    cr = (rows, slice(2, w + 3))
    sl_l = (rows, slice(0, w + 1))   # slope array is offset by one cell
    sl_r = (rows, slice(1, w + 2))
    etam = eta[cl] + g2i * (sk_x[sl_l] + dxf * cp_[cl])
    etap = eta[cr] - g2i * (sk_x[sl_r] + dxf * cp_[cr])
    hf = HALF * (hint[2:h + 2, 2:w + 3] + hint[3:h + 3, 2:w + 3])
    hmf = np.maximum(etam + hf, ZERO)
    hpf = np.maximum(etap + hf, ZERO)
    um = u[cl] + HALF * su_x[sl_l]
    up = u[cr] - HALF * su_x[sl_r]
    vm = v[cl] + HALF * sv_x[sl_l]
    vp = v[cr] - HALF * sv_x[sl_r]
    hum = hmf * um
    hup = hpf * up
    hvm = hmf * vm
    hvp = hpf * vp
    cm = _sqrt(grav * hmf, mode)
    cpd = _sqrt(grav * hpf, mode)
    ap = np.maximum(np.maximum(um + cm, up + cpd), ZERO)
    am = np.minimum(np.minimum(um - cm, up - cpd), ZERO)
    ad = ap - am
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = ONE / ad
    pr = ap * am
    f1 = _cu_flux(hmf, hpf, hum, hup, ap, am, inv, pr, ad)
    f2 = _cu_flux(hum, hup, hum * um, hup * up, ap, am, inv, pr, ad)
    f3 = _cu_flux(hvm, hvp, hum * vm, hup * vp, ap, am, inv, pr, ad)

    # --- y faces: north faces of tile cells rows 1..h+1, block cols only.
    cols = slice(2, w + 2)
    cb = (slice(1, h + 2), cols)
    ct = (slice(2, h + 3), cols)
    sb = (slice(0, h + 1), cols)
    st = (slice(1, h + 2), cols)
    etamy = eta[cb] + g2i * (sl_y[sb] - dyf * cq_[cb])
    etapy = eta[ct] - g2i * (sl_y[st] - dyf * cq_[ct])
    hfy = HALF * (hint[2:h + 3, 2:w + 2] + hint[2:h + 3, 3:w + 3])
    hmy = np.maximum(etamy + hfy, ZERO)
    hpy = np.maximum(etapy + hfy, ZERO)
    umy = u[cb] + HALF * su_y[sb]
    upy = u[ct] - HALF * su_y[st]
    vmy = v[cb] + HALF * sv_y[sb]
    vpy = v[ct] - HALF * sv_y[st]
    humy = hmy * umy
    hupy = hpy * upy
    hvmy = hmy * vmy
    hvpy = hpy * vpy
    cmy = _sqrt(grav * hmy, mode)
    cpy = _sqrt(grav * hpy, mode)
    bp = np.maximum(np.maximum(vmy + cmy, vpy + cpy), ZERO)
    bm = np.minimum(np.minimum(vmy - cmy, vpy - cpy), ZERO)
    bd = bp - bm
    with np.errstate(divide="ignore", invalid="ignore"):
        invy = ONE / bd
    pry = bp * bm
    g1 = _cu_flux(hmy, hpy, hvmy, hvpy, bp, bm, invy, pry, bd)
    g2 = _cu_flux(humy, hupy, hvmy * umy, hvpy * upy, bp, bm, invy, pry, bd)
    g3 = _cu_flux(hvmy, hvpy, hvmy * vmy, hvpy * vpy, bp, bm, invy, pry, bd)

    # Impermeable walls: zero the mass flux on closed-wall faces.
    if p.get("boundary") == "closed-wall":
        for col in range(w + 1):
            if rect.x0 - 1 + col in (p["wall_w"], p["wall_e"]):
                f1[:, col] = ZERO
        for row in range(h + 1):
            if rect.y0 - 1 + row in (p["wall_s"], p["wall_n"]):
                g1[row, :] = ZERO

    # --- pressure/Coriolis through face-averaged equilibrium differences.
    cc = (rows, cols)
    skc = sk_x[rows, slice(1, w + 1)]
    ske = sk_x[rows, slice(2, w + 2)]
    skw = sk_x[rows, slice(0, w)]
    dkw = dk[rows, slice(1, w + 1)]
    dke = dk[rows, slice(2, w + 2)]
    tx = ((skc + skc) - ske) - skw
    kt = HALF * (dkw + dke) + QUARTER * tx
    px = (hh[cc] * kt) * p["IDX"]
    slc = sl_y[slice(1, h + 1), cols]
    sln = sl_y[slice(2, h + 2), cols]
    sls = sl_y[slice(0, h), cols]
    dls = dl[slice(1, h + 1), cols]
    dln = dl[slice(2, h + 2), cols]
    ty = ((slc + slc) - sln) - sls
    lt = HALF * (dls + dln) + QUARTER * ty
    py = (hh[cc] * lt) * p["IDY"]

    # --- flux differences and time update.
    f1w = f1[:, 0:w]
    f1e = f1[:, 1:w + 1]
    f2w = f2[:, 0:w]
    f2e = f2[:, 1:w + 1]
    f3w = f3[:, 0:w]
    f3e = f3[:, 1:w + 1]
    g1s = g1[0:h, :]
    g1n = g1[1:h + 1, :]
    g2s = g2[0:h, :]
    g2n = g2[1:h + 1, :]
    g3s = g3[0:h, :]
    g3n = g3[1:h + 1, :]
    rhs_eta = (f1w - f1e) * p["IDX"] + (g1s - g1n) * p["IDY"]
    rhs_hu = ((f2w - f2e) * p["IDX"] + (g2s - g2n) * p["IDY"]) - px
    rhs_hv = ((f3w - f3e) * p["IDX"] + (g3s - g3n) * p["IDY"]) - py

    dt = p["DT"]
    if substep == 0:
        outs[0][:, :] = eta[cc] + dt * rhs_eta
        outs[1][:, :] = hu[cc] + dt * rhs_hu
        outs[2][:, :] = hv[cc] + dt * rhs_hv
    else:
        e0 = eta0[cc]
        u0 = hu0[cc]
        v0 = hv0[cc]
        outs[0][:, :] = HALF * e0 + HALF * (eta[cc] + dt * rhs_eta)
        outs[1][:, :] = HALF * u0 + HALF * (hu[cc] + dt * rhs_hu)
        outs[2][:, :] = HALF * v0 + HALF * (hv[cc] + dt * rhs_hv)


# --- compute-bound escape-time kernel -----------------------------------------

@impl("mandelbrot")
def k_mandelbrot(tiles, outs, rect, p):
    """Escape-time iteration z <- z^2 + c from z0 = 0, with the squared
    magnitude test |z|^2 < 4; stops after max_iterations."""
    cx = np.ascontiguousarray(tiles[0], dtype=np.float32).ravel()
    cy = np.ascontiguousarray(tiles[1], dtype=np.float32).ravel()
    maxiter = int(p["max_iterations"])
    n = np.zeros(cx.shape, dtype=np.int32)
    x = np.zeros(cx.shape, dtype=np.float32)
    y = np.zeros(cx.shape, dtype=np.float32)
    xx = np.zeros(cx.shape, dtype=np.float32)
    yy = np.zeros(cx.shape, dtype=np.float32)
    act = np.arange(cx.size)
    for _ in range(maxiter):
        alive = (xx[act] + yy[act]) < FOUR
        act = act[alive]
        if act.size == 0:
            break
        xa = x[act]
        ya = y[act]
        t = xa * ya
        ynew = (t + t) + cy[act]
        xnew = (xx[act] - yy[act]) + cx[act]
        x[act] = xnew
        y[act] = ynew
        xx[act] = xnew * xnew
        yy[act] = ynew * ynew
        n[act] += 1
    shape = outs[0].shape
    outs[0][:, :] = n.reshape(shape)
    outs[1][:, :] = x.reshape(shape)
    outs[2][:, :] = y.reshape(shape)
