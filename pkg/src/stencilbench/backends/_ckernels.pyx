# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled lane of the kernel core.

Scalar per-cell loops mirroring the numpy lane op for op: same expression
structure, float32 arithmetic throughout, compiled with -ffp-contract=off,
so both lanes produce bitwise-identical results.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, NAN, fmaxf, fminf, sqrtf

cdef float ZERO = 0.0
cdef float HALF = 0.5
cdef float QUARTER = 0.25
cdef float ONE = 1.0
cdef float TWO = 2.0
cdef float THREE_HALVES = 1.5
cdef float FOUR = 4.0
cdef float SQRT2 = <float>(2.0 ** 0.5)
cdef float FLT_MIN_NORMAL = 1.1754943508222875e-38

cdef union _fbits:
    float f
    unsigned int u


cdef inline float _rsqrt_fast(float x) noexcept nogil:
    cdef _fbits b
    cdef float y, xh
    if -FLT_MIN_NORMAL < x < FLT_MIN_NORMAL:
        x = ZERO
    if x == ZERO:
        return INFINITY
    if x < ZERO:
        return NAN
    b.f = x
    b.u = 0x5F3759DFu - (b.u >> 1)
    y = b.f
    xh = HALF * x
    y = y * (THREE_HALVES - xh * (y * y))
    y = y * (THREE_HALVES - xh * (y * y))
    y = y * (THREE_HALVES - xh * (y * y))
    return y


cdef inline float _sqrt_fast(float x) noexcept nogil:
    if -FLT_MIN_NORMAL < x < FLT_MIN_NORMAL:
        x = ZERO
    if x == ZERO:
        return ZERO
    return x * _rsqrt_fast(x)


cdef inline float _minmod3(float a, float b, float c) noexcept nogil:
    cdef float mn = fminf(fminf(a, b), c)
    cdef float mx = fmaxf(fmaxf(a, b), c)
    if mn > ZERO:
        return mn
    if mx < ZERO:
        return mx
    return ZERO


cdef inline float _cu_flux1(float qm, float qp, float fm, float fp,
                            float ap, float am, float inv, float pr,
                            float ad) noexcept nogil:
    cdef float num
    if ad > ZERO:
        num = (ap * fm - am * fp) + pr * (qp - qm)
        return num * inv
    return ZERO


# --- forward-backward linear scheme -------------------------------------------

cdef inline float _lin_f(float eta_c, float eta_e, float hv_c, float hv_e,
                         float hv_s, float hv_se, float hu_c, float he,
                         float DT, float IDX, float GRAV, float FCOR) noexcept nogil:
    cdef float a4 = QUARTER * (((hv_c + hv_e) + hv_s) + hv_se)
    cdef float gr = (eta_e - eta_c) * IDX
    return hu_c + DT * (FCOR * a4 - GRAV * (he * gr))


cdef inline float _lin_g(float eta_c, float eta_n, float hu_w, float hu_c,
                         float hu_nw, float hu_n, float hv_c, float hn,
                         float DT, float IDY, float GRAV, float FCOR) noexcept nogil:
    cdef float a4 = QUARTER * (((hu_w + hu_c) + hu_nw) + hu_n)
    cdef float gr = (eta_n - eta_c) * IDY
    return hv_c + DT * (-(FCOR * a4) - GRAV * (hn * gr))


cdef inline float _lin_h(float eta_c, float hu_w, float hu_c, float hv_s,
                         float hv_c, float DT, float IDX, float IDY) noexcept nogil:
    return eta_c - DT * ((hu_c - hu_w) * IDX + (hv_c - hv_s) * IDY)


def k_linear_f(tiles, outs, rect, p):
    cdef float[:, :] eta = tiles[0]
    cdef float[:, :] hv = tiles[1]
    cdef float[:, :] hu = tiles[2]
    cdef float[:, :] he = tiles[3]
    cdef float[:, :] out = outs[0]
    cdef float DT = p["DT"], IDX = p["IDX"], GRAV = p["GRAV"], FCOR = p["FCOR"]
    cdef Py_ssize_t h = out.shape[0], w = out.shape[1], j, i
    for j in range(h):
        for i in range(w):
            out[j, i] = _lin_f(eta[j + 1, i + 1], eta[j + 1, i + 2],
                               hv[j + 1, i + 1], hv[j + 1, i + 2],
                               hv[j, i + 1], hv[j, i + 2],
                               hu[j + 1, i + 1], he[j + 1, i + 1],
                               DT, IDX, GRAV, FCOR)


def k_linear_g(tiles, outs, rect, p):
    cdef float[:, :] eta = tiles[0]
    cdef float[:, :] hv = tiles[1]
    cdef float[:, :] hu_new = tiles[2]
    cdef float[:, :] hn = tiles[3]
    cdef float[:, :] out = outs[0]
    cdef float DT = p["DT"], IDY = p["IDY"], GRAV = p["GRAV"], FCOR = p["FCOR"]
    cdef Py_ssize_t h = out.shape[0], w = out.shape[1], j, i
    for j in range(h):
        for i in range(w):
            out[j, i] = _lin_g(eta[j + 1, i + 1], eta[j + 2, i + 1],
                               hu_new[j + 1, i], hu_new[j + 1, i + 1],
                               hu_new[j + 2, i], hu_new[j + 2, i + 1],
                               hv[j + 1, i + 1], hn[j + 1, i + 1],
                               DT, IDY, GRAV, FCOR)


def k_linear_h(tiles, outs, rect, p):
    cdef float[:, :] eta = tiles[0]
    cdef float[:, :] hu_new = tiles[1]
    cdef float[:, :] hv_new = tiles[2]
    cdef float[:, :] out = outs[0]
    cdef float DT = p["DT"], IDX = p["IDX"], IDY = p["IDY"]
    cdef Py_ssize_t h = out.shape[0], w = out.shape[1], j, i
    for j in range(h):
        for i in range(w):
            out[j, i] = _lin_h(eta[j + 1, i + 1],
                               hu_new[j + 1, i], hu_new[j + 1, i + 1],
                               hv_new[j, i + 1], hv_new[j + 1, i + 1],
                               DT, IDX, IDY)


def k_linear_fused(tiles, outs, rect, p):
    cdef float[:, :] eta = tiles[0]
    cdef float[:, :] hu = tiles[1]
    cdef float[:, :] hv = tiles[2]
    cdef float[:, :] he = tiles[3]
    cdef float[:, :] hn = tiles[4]
    cdef float[:, :] out_eta = outs[0]
    cdef float[:, :] out_hu = outs[1]
    cdef float[:, :] out_hv = outs[2]
    cdef float DT = p["DT"], IDX = p["IDX"], IDY = p["IDY"]
    cdef float GRAV = p["GRAV"], FCOR = p["FCOR"]
    cdef Py_ssize_t h = out_eta.shape[0], w = out_eta.shape[1], j, i
    cdef bint closed = p.get("boundary") == "closed-wall"
    cdef long x0 = rect.x0, y0 = rect.y0
    cdef long wall_w = p["wall_w"], wall_e = p["wall_e"]
    cdef long wall_s = p["wall_s"], wall_n = p["wall_n"]

    hu_ext_a = np.empty((h + 2, w + 1), dtype=np.float32)
    hv_ext_a = np.empty((h + 1, w), dtype=np.float32)
    cdef float[:, :] hu_ext = hu_ext_a
    cdef float[:, :] hv_ext = hv_ext_a

    # hu' on tile rows 1..h+2, cols 1..w+1
    for j in range(h + 2):
        for i in range(w + 1):
            hu_ext[j, i] = _lin_f(eta[j + 1, i + 1], eta[j + 1, i + 2],
                                  hv[j + 1, i + 1], hv[j + 1, i + 2],
                                  hv[j, i + 1], hv[j, i + 2],
                                  hu[j + 1, i + 1], he[j + 1, i + 1],
                                  DT, IDX, GRAV, FCOR)
    if closed:
        for i in range(w + 1):
            if x0 - 1 + i == wall_w or x0 - 1 + i == wall_e:
                for j in range(h + 2):
                    hu_ext[j, i] = ZERO
        if y0 - 1 == wall_s:
            for i in range(w + 1):
                hu_ext[0, i] = hu_ext[1, i]
        if y0 + h == wall_n + 1:
            for i in range(w + 1):
                hu_ext[h + 1, i] = hu_ext[h, i]

    # hv' on tile rows 1..h+1, cols 2..w+1
    for j in range(h + 1):
        for i in range(w):
            hv_ext[j, i] = _lin_g(eta[j + 1, i + 2], eta[j + 2, i + 2],
                                  hu_ext[j, i], hu_ext[j, i + 1],
                                  hu_ext[j + 1, i], hu_ext[j + 1, i + 1],
                                  hv[j + 1, i + 2], hn[j + 1, i + 2],
                                  DT, IDY, GRAV, FCOR)
    if closed:
        for j in range(h + 1):
            if y0 - 1 + j == wall_s or y0 - 1 + j == wall_n:
                for i in range(w):
                    hv_ext[j, i] = ZERO

    for j in range(h):
        for i in range(w):
            out_eta[j, i] = _lin_h(eta[j + 2, i + 2],
                                   hu_ext[j + 1, i], hu_ext[j + 1, i + 1],
                                   hv_ext[j, i], hv_ext[j + 1, i],
                                   DT, IDX, IDY)
            out_hu[j, i] = hu_ext[j + 1, i + 1]
            out_hv[j, i] = hv_ext[j + 1, i]


# --- nonlinear leapfrog ---------------------------------------------------------

cdef inline float _ctcs_hu_cell(float[:, :] hu_prev, float[:, :] eta,
                                float[:, :] hu, float[:, :] hv, float[:, :] hm,
                                Py_ssize_t j, Py_ssize_t i,
                                float DT2, float IDX, float IDY,
                                float GRAV, float FCOR) noexcept nogil:
    # j, i index the tile center (offset +1 from the output cell).
    cdef float hc_c = hm[j, i] + eta[j, i]
    cdef float hc_e = hm[j, i + 1] + eta[j, i + 1]
    cdef float hc_n = hm[j + 1, i] + eta[j + 1, i]
    cdef float hc_ne = hm[j + 1, i + 1] + eta[j + 1, i + 1]
    cdef float hc_s = hm[j - 1, i] + eta[j - 1, i]
    cdef float hc_se = hm[j - 1, i + 1] + eta[j - 1, i + 1]
    cdef float he = HALF * (hc_c + hc_e)
    cdef float press = (GRAV * he) * ((eta[j, i + 1] - eta[j, i]) * IDX)
    cdef float cor = FCOR * (QUARTER * (((hv[j, i] + hv[j, i + 1]) + hv[j - 1, i]) + hv[j - 1, i + 1]))
    cdef float hub0 = HALF * (hu[j, i - 1] + hu[j, i])
    cdef float q0 = (hub0 * hub0) / hc_c
    cdef float hub1 = HALF * (hu[j, i] + hu[j, i + 1])
    cdef float q1 = (hub1 * hub1) / hc_e
    cdef float advx = (q1 - q0) * IDX
    cdef float hut = HALF * (hu[j, i] + hu[j + 1, i])
    cdef float hvt = HALF * (hv[j, i] + hv[j, i + 1])
    cdef float hct = QUARTER * (((hc_c + hc_e) + hc_n) + hc_ne)
    cdef float qt = (hut * hvt) / hct
    cdef float hub = HALF * (hu[j - 1, i] + hu[j, i])
    cdef float hvb = HALF * (hv[j - 1, i] + hv[j - 1, i + 1])
    cdef float hcb = QUARTER * (((hc_s + hc_se) + hc_c) + hc_e)
    cdef float qb = (hub * hvb) / hcb
    cdef float advy = (qt - qb) * IDY
    return hu_prev[j, i] + DT2 * (((cor - advx) - advy) - press)


cdef inline float _ctcs_hv_cell(float[:, :] hv_prev, float[:, :] eta,
                                float[:, :] hu, float[:, :] hv, float[:, :] hm,
                                Py_ssize_t j, Py_ssize_t i,
                                float DT2, float IDX, float IDY,
                                float GRAV, float FCOR) noexcept nogil:
    cdef float hc_c = hm[j, i] + eta[j, i]
    cdef float hc_n = hm[j + 1, i] + eta[j + 1, i]
    cdef float hc_e = hm[j, i + 1] + eta[j, i + 1]
    cdef float hc_ne = hm[j + 1, i + 1] + eta[j + 1, i + 1]
    cdef float hc_w = hm[j, i - 1] + eta[j, i - 1]
    cdef float hc_nw = hm[j + 1, i - 1] + eta[j + 1, i - 1]
    cdef float hn = HALF * (hc_c + hc_n)
    cdef float press = (GRAV * hn) * ((eta[j + 1, i] - eta[j, i]) * IDY)
    cdef float cor = FCOR * (QUARTER * (((hu[j, i - 1] + hu[j, i]) + hu[j + 1, i - 1]) + hu[j + 1, i]))
    cdef float hvb0 = HALF * (hv[j - 1, i] + hv[j, i])
    cdef float q0 = (hvb0 * hvb0) / hc_c
    cdef float hvb1 = HALF * (hv[j, i] + hv[j + 1, i])
    cdef float q1 = (hvb1 * hvb1) / hc_n
    cdef float advy = (q1 - q0) * IDY
    cdef float hue = HALF * (hu[j, i] + hu[j + 1, i])
    cdef float hve = HALF * (hv[j, i] + hv[j, i + 1])
    cdef float hce = QUARTER * (((hc_c + hc_e) + hc_n) + hc_ne)
    cdef float qe = (hue * hve) / hce
    cdef float huw = HALF * (hu[j, i - 1] + hu[j + 1, i - 1])
    cdef float hvw = HALF * (hv[j, i - 1] + hv[j, i])
    cdef float hcw = QUARTER * (((hc_w + hc_c) + hc_nw) + hc_n)
    cdef float qw = (huw * hvw) / hcw
    cdef float advx = (qe - qw) * IDX
    return hv_prev[j, i] + DT2 * (((-(cor) - advx) - advy) - press)


def k_ctcs_eta(tiles, outs, rect, p):
    cdef float[:, :] eta_prev = tiles[0]
    cdef float[:, :] hu = tiles[1]
    cdef float[:, :] hv = tiles[2]
    cdef float[:, :] out = outs[0]
    cdef float DT2 = p["DT2"], IDX = p["IDX"], IDY = p["IDY"]
    cdef Py_ssize_t h = out.shape[0], w = out.shape[1], j, i
    for j in range(h):
        for i in range(w):
            out[j, i] = eta_prev[j + 1, i + 1] - DT2 * (
                (hu[j + 1, i + 1] - hu[j + 1, i]) * IDX
                + (hv[j + 1, i + 1] - hv[j, i + 1]) * IDY)


def k_ctcs_hu(tiles, outs, rect, p):
    cdef float[:, :] hu_prev = tiles[0]
    cdef float[:, :] eta = tiles[1]
    cdef float[:, :] hu = tiles[2]
    cdef float[:, :] hv = tiles[3]
    cdef float[:, :] hm = tiles[4]
    cdef float[:, :] out = outs[0]
    cdef float DT2 = p["DT2"], IDX = p["IDX"], IDY = p["IDY"]
    cdef float GRAV = p["GRAV"], FCOR = p["FCOR"]
    cdef Py_ssize_t h = out.shape[0], w = out.shape[1], j, i
    for j in range(h):
        for i in range(w):
            out[j, i] = _ctcs_hu_cell(hu_prev, eta, hu, hv, hm, j + 1, i + 1,
                                      DT2, IDX, IDY, GRAV, FCOR)


def k_ctcs_hv(tiles, outs, rect, p):
    cdef float[:, :] hv_prev = tiles[0]
    cdef float[:, :] eta = tiles[1]
    cdef float[:, :] hu = tiles[2]
    cdef float[:, :] hv = tiles[3]
    cdef float[:, :] hm = tiles[4]
    cdef float[:, :] out = outs[0]
    cdef float DT2 = p["DT2"], IDX = p["IDX"], IDY = p["IDY"]
    cdef float GRAV = p["GRAV"], FCOR = p["FCOR"]
    cdef Py_ssize_t h = out.shape[0], w = out.shape[1], j, i
    for j in range(h):
        for i in range(w):
            out[j, i] = _ctcs_hv_cell(hv_prev, eta, hu, hv, hm, j + 1, i + 1,
                                      DT2, IDX, IDY, GRAV, FCOR)


def k_ctcs_fused(tiles, outs, rect, p):
    cdef float[:, :] eta_prev = tiles[0]
    cdef float[:, :] hu_prev = tiles[1]
    cdef float[:, :] hv_prev = tiles[2]
    cdef float[:, :] eta = tiles[3]
    cdef float[:, :] hu = tiles[4]
    cdef float[:, :] hv = tiles[5]
    cdef float[:, :] hm = tiles[6]
    cdef float[:, :] out_eta = outs[0]
    cdef float[:, :] out_hu = outs[1]
    cdef float[:, :] out_hv = outs[2]
    cdef float DT2 = p["DT2"], IDX = p["IDX"], IDY = p["IDY"]
    cdef float GRAV = p["GRAV"], FCOR = p["FCOR"]
    cdef Py_ssize_t h = out_eta.shape[0], w = out_eta.shape[1], j, i
    for j in range(h):
        for i in range(w):
            out_eta[j, i] = eta_prev[j + 1, i + 1] - DT2 * (
                (hu[j + 1, i + 1] - hu[j + 1, i]) * IDX
                + (hv[j + 1, i + 1] - hv[j, i + 1]) * IDY)
            out_hu[j, i] = _ctcs_hu_cell(hu_prev, eta, hu, hv, hm, j + 1, i + 1,
                                         DT2, IDX, IDY, GRAV, FCOR)
            out_hv[j, i] = _ctcs_hv_cell(hv_prev, eta, hu, hv, hm, j + 1, i + 1,
                                         DT2, IDX, IDY, GRAV, FCOR)


# --- high-resolution finite-volume scheme --------------------------------------

def k_hires_rhs(tiles, outs, rect, p):
    cdef int stage = p["stage"]
    cdef int substep = p["substep"]
    cdef bint fast = p.get("math_mode", "precise") == "fast"
    cdef float[:, :] eta = tiles[0]
    cdef float[:, :] hu = tiles[1]
    cdef float[:, :] hv = tiles[2]
    cdef float[:, :] hm_tile = None
    cdef float[:, :] hint
    cdef float[:, :] eta0 = None, hu0 = None, hv0 = None
    cdef Py_ssize_t k = 3
    if stage == 0:
        hm_tile = tiles[3]
        k = 4
    hint = tiles[k]
    k += 1
    if substep == 1:
        eta0 = tiles[k]
        hu0 = tiles[k + 1]
        hv0 = tiles[k + 2]

    cdef float[:, :] out_eta = outs[0]
    cdef float[:, :] out_hu = outs[1]
    cdef float[:, :] out_hv = outs[2]
    cdef Py_ssize_t h = out_eta.shape[0], w = out_eta.shape[1]
    cdef Py_ssize_t th = h + 4, tw = w + 4
    cdef Py_ssize_t j, i

    cdef float DT = p["DT"], IDX = p["IDX"], IDY = p["IDY"]
    cdef float GRAV = p["GRAV"], FCOR = p["FCOR"], THETA = p["THETA"]
    cdef float EPS4 = p["EPS4"], HDX = p["HDX"], HDY = p["HDY"]
    cdef float DXF = p["DXF"], DYF = p["DYF"], G2I = p["G2I"]
    cdef bint closed = p.get("boundary") == "closed-wall"
    cdef long x0 = rect.x0, y0 = rect.y0
    cdef long wall_w = p.get("wall_w", -10), wall_e = p.get("wall_e", -10)
    cdef long wall_s = p.get("wall_s", -10), wall_n = p.get("wall_n", -10)

    buf = [np.empty((th, tw), dtype=np.float32) for _ in range(6)]
    cdef float[:, :] hhv = buf[0]
    cdef float[:, :] uv = buf[1]
    cdef float[:, :] vv = buf[2]
    cdef float[:, :] cpv = buf[3]
    cdef float[:, :] cqv = buf[4]
    cdef float[:, :] hmv = buf[5]
    dk_a = np.empty((th, tw - 1), dtype=np.float32)
    dl_a = np.empty((th - 1, tw), dtype=np.float32)
    cdef float[:, :] dk = dk_a
    cdef float[:, :] dl = dl_a
    sx = [np.empty((th, tw - 2), dtype=np.float32) for _ in range(3)]
    sy = [np.empty((th - 2, tw), dtype=np.float32) for _ in range(3)]
    cdef float[:, :] su_x = sx[0]
    cdef float[:, :] sv_x = sx[1]
    cdef float[:, :] sk_x = sx[2]
    cdef float[:, :] su_y = sy[0]
    cdef float[:, :] sv_y = sy[1]
    cdef float[:, :] sl_y = sy[2]
    fx = [np.empty((h, w + 1), dtype=np.float32) for _ in range(3)]
    fy = [np.empty((h + 1, w), dtype=np.float32) for _ in range(3)]
    cdef float[:, :] f1 = fx[0]
    cdef float[:, :] f2 = fx[1]
    cdef float[:, :] f3 = fx[2]
    cdef float[:, :] g1 = fy[0]
    cdef float[:, :] g2 = fy[1]
    cdef float[:, :] g3 = fy[2]

    cdef float hm_, hh_, h2_, h4_, den, rs, r2
    cdef float d1, d2
    cdef float etam, etap, hf, hmf, hpf, um, up, vm, vp
    cdef float hum, hup, hvm, hvp, cm, cpd, ap, am, ad, inv, pr
    cdef float skc, ske, skw, dkw, dke, tx, kt, px
    cdef float slc, sln, sls, dls, dln, ty, lt, py
    cdef float rhs_eta, rhs_hu, rhs_hv, t1

    # Load/convert phase over the full tile.
    for j in range(th):
        for i in range(tw):
            if stage == 0:
                hm_ = hm_tile[j, i]
            else:
                hm_ = QUARTER * (((hint[j, i] + hint[j, i + 1]) + hint[j + 1, i]) + hint[j + 1, i + 1])
            hmv[j, i] = hm_
            hh_ = eta[j, i] + hm_
            hhv[j, i] = hh_
            h2_ = hh_ * hh_
            h4_ = h2_ * h2_
            den = h4_ + fmaxf(h4_, EPS4)
            if fast:
                rs = _rsqrt_fast(den)
            else:
                rs = ONE / sqrtf(den)
            r2 = SQRT2 * hh_
            uv[j, i] = (r2 * hu[j, i]) * rs
            vv[j, i] = (r2 * hv[j, i]) * rs
            cpv[j, i] = FCOR * vv[j, i]
            cqv[j, i] = FCOR * uv[j, i]

    for j in range(th):
        for i in range(tw - 1):
            dk[j, i] = GRAV * (eta[j, i + 1] - eta[j, i]) - HDX * (cpv[j, i] + cpv[j, i + 1])
    for j in range(th - 1):
        for i in range(tw):
            dl[j, i] = GRAV * (eta[j + 1, i] - eta[j, i]) + HDY * (cqv[j, i] + cqv[j + 1, i])

    for j in range(th):
        for i in range(tw - 2):
            d1 = uv[j, i + 1] - uv[j, i]
            d2 = uv[j, i + 2] - uv[j, i + 1]
            su_x[j, i] = _minmod3(THETA * d1, HALF * (d1 + d2), THETA * d2)
            d1 = vv[j, i + 1] - vv[j, i]
            d2 = vv[j, i + 2] - vv[j, i + 1]
            sv_x[j, i] = _minmod3(THETA * d1, HALF * (d1 + d2), THETA * d2)
            sk_x[j, i] = _minmod3(THETA * dk[j, i], HALF * (dk[j, i] + dk[j, i + 1]), THETA * dk[j, i + 1])
    for j in range(th - 2):
        for i in range(tw):
            d1 = uv[j + 1, i] - uv[j, i]
            d2 = uv[j + 2, i] - uv[j + 1, i]
            su_y[j, i] = _minmod3(THETA * d1, HALF * (d1 + d2), THETA * d2)
            d1 = vv[j + 1, i] - vv[j, i]
            d2 = vv[j + 2, i] - vv[j + 1, i]
            sv_y[j, i] = _minmod3(THETA * d1, HALF * (d1 + d2), THETA * d2)
            sl_y[j, i] = _minmod3(THETA * dl[j, i], HALF * (dl[j, i] + dl[j + 1, i]), THETA * dl[j + 1, i])

    # x faces: east faces of tile cells 1..w+1, block rows 2..h+1.
    for j in range(h):
        for i in range(w + 1):
            etam = eta[j + 2, i + 1] + G2I * (sk_x[j + 2, i] + DXF * cpv[j + 2, i + 1])
            etap = eta[j + 2, i + 2] - G2I * (sk_x[j + 2, i + 1] + DXF * cpv[j + 2, i + 2])
            hf = HALF * (hint[j + 2, i + 2] + hint[j + 3, i + 2])
            hmf = fmaxf(etam + hf, ZERO)
            hpf = fmaxf(etap + hf, ZERO)
            um = uv[j + 2, i + 1] + HALF * su_x[j + 2, i]
            up = uv[j + 2, i + 2] - HALF * su_x[j + 2, i + 1]
            vm = vv[j + 2, i + 1] + HALF * sv_x[j + 2, i]
            vp = vv[j + 2, i + 2] - HALF * sv_x[j + 2, i + 1]
            hum = hmf * um
            hup = hpf * up
            hvm = hmf * vm
            hvp = hpf * vp
            if fast:
                cm = _sqrt_fast(GRAV * hmf)
                cpd = _sqrt_fast(GRAV * hpf)
            else:
                cm = sqrtf(GRAV * hmf)
                cpd = sqrtf(GRAV * hpf)
            ap = fmaxf(fmaxf(um + cm, up + cpd), ZERO)
            am = fminf(fminf(um - cm, up - cpd), ZERO)
            ad = ap - am
            inv = ONE / ad
            pr = ap * am
            f1[j, i] = _cu_flux1(hmf, hpf, hum, hup, ap, am, inv, pr, ad)
            f2[j, i] = _cu_flux1(hum, hup, hum * um, hup * up, ap, am, inv, pr, ad)
            f3[j, i] = _cu_flux1(hvm, hvp, hum * vm, hup * vp, ap, am, inv, pr, ad)

    # y faces: north faces of tile cells rows 1..h+1, block cols 2..w+1.
    for j in range(h + 1):
        for i in range(w):
            etam = eta[j + 1, i + 2] + G2I * (sl_y[j, i + 2] - DYF * cqv[j + 1, i + 2])
            etap = eta[j + 2, i + 2] - G2I * (sl_y[j + 1, i + 2] - DYF * cqv[j + 2, i + 2])
            hf = HALF * (hint[j + 2, i + 2] + hint[j + 2, i + 3])
            hmf = fmaxf(etam + hf, ZERO)
            hpf = fmaxf(etap + hf, ZERO)
            um = uv[j + 1, i + 2] + HALF * su_y[j, i + 2]
            up = uv[j + 2, i + 2] - HALF * su_y[j + 1, i + 2]
            vm = vv[j + 1, i + 2] + HALF * sv_y[j, i + 2]
            vp = vv[j + 2, i + 2] - HALF * sv_y[j + 1, i + 2]
            hum = hmf * um
            hup = hpf * up
            hvm = hmf * vm
            hvp = hpf * vp
            if fast:
                cm = _sqrt_fast(GRAV * hmf)
                cpd = _sqrt_fast(GRAV * hpf)
            else:
                cm = sqrtf(GRAV * hmf)
                cpd = sqrtf(GRAV * hpf)
            ap = fmaxf(fmaxf(vm + cm, vp + cpd), ZERO)
            am = fminf(fminf(vm - cm, vp - cpd), ZERO)
            ad = ap - am
            inv = ONE / ad
            pr = ap * am
            g1[j, i] = _cu_flux1(hmf, hpf, hvm, hvp, ap, am, inv, pr, ad)
            g2[j, i] = _cu_flux1(hum, hup, hvm * um, hvp * up, ap, am, inv, pr, ad)
            g3[j, i] = _cu_flux1(hvm, hvp, hvm * vm, hvp * vp, ap, am, inv, pr, ad)

    if closed:
        for i in range(w + 1):
            if x0 - 1 + i == wall_w or x0 - 1 + i == wall_e:
                for j in range(h):
                    f1[j, i] = ZERO
        for j in range(h + 1):
            if y0 - 1 + j == wall_s or y0 - 1 + j == wall_n:
                for i in range(w):
                    g1[j, i] = ZERO

    for j in range(h):
        for i in range(w):
            skc = sk_x[j + 2, i + 1]
            ske = sk_x[j + 2, i + 2]
            skw = sk_x[j + 2, i]
            dkw = dk[j + 2, i + 1]
            dke = dk[j + 2, i + 2]
            tx = ((skc + skc) - ske) - skw
            kt = HALF * (dkw + dke) + QUARTER * tx
            px = (hhv[j + 2, i + 2] * kt) * IDX
            slc = sl_y[j + 1, i + 2]
            sln = sl_y[j + 2, i + 2]
            sls = sl_y[j, i + 2]
            dls = dl[j + 1, i + 2]
            dln = dl[j + 2, i + 2]
            ty = ((slc + slc) - sln) - sls
            lt = HALF * (dls + dln) + QUARTER * ty
            py = (hhv[j + 2, i + 2] * lt) * IDY
            rhs_eta = (f1[j, i] - f1[j, i + 1]) * IDX + (g1[j, i] - g1[j + 1, i]) * IDY
            rhs_hu = ((f2[j, i] - f2[j, i + 1]) * IDX + (g2[j, i] - g2[j + 1, i]) * IDY) - px
            rhs_hv = ((f3[j, i] - f3[j, i + 1]) * IDX + (g3[j, i] - g3[j + 1, i]) * IDY) - py
            if substep == 0:
                out_eta[j, i] = eta[j + 2, i + 2] + DT * rhs_eta
                out_hu[j, i] = hu[j + 2, i + 2] + DT * rhs_hu
                out_hv[j, i] = hv[j + 2, i + 2] + DT * rhs_hv
            else:
                t1 = eta[j + 2, i + 2] + DT * rhs_eta
                out_eta[j, i] = HALF * eta0[j + 2, i + 2] + HALF * t1
                t1 = hu[j + 2, i + 2] + DT * rhs_hu
                out_hu[j, i] = HALF * hu0[j + 2, i + 2] + HALF * t1
                t1 = hv[j + 2, i + 2] + DT * rhs_hv
                out_hv[j, i] = HALF * hv0[j + 2, i + 2] + HALF * t1


# --- escape-time kernel ---------------------------------------------------------

def k_mandelbrot(tiles, outs, rect, p):
    cdef float[:, :] cx = tiles[0]
    cdef float[:, :] cy = tiles[1]
    cdef int[:, :] out_n = outs[0]
    cdef float[:, :] out_zx = outs[1]
    cdef float[:, :] out_zy = outs[2]
    cdef int maxiter = p["max_iterations"]
    cdef Py_ssize_t h = out_n.shape[0], w = out_n.shape[1], j, i
    cdef float x, y, xx, yy, t, cxi, cyi
    cdef int n
    for j in range(h):
        for i in range(w):
            cxi = cx[j, i]
            cyi = cy[j, i]
            x = ZERO
            y = ZERO
            xx = ZERO
            yy = ZERO
            n = 0
            while xx + yy < FOUR and n < maxiter:
                t = x * y
                y = (t + t) + cyi
                x = (xx - yy) + cxi
                xx = x * x
                yy = y * y
                n = n + 1
            out_n[j, i] = n
            out_zx[j, i] = x
            out_zy[j, i] = y
