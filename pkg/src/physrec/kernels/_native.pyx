# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels. Mirrors physrec.kernels.pure bit for bit.

Plain -O2 IEEE float64 arithmetic in the same operand order as the NumPy
fallback; do not enable fast-math or reorder expressions here.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def fill_circle(cnp.uint8_t[:, :, ::1] img, int i0, int i1, int j0, int j1,
                double cx, double cy, double radius,
                int r, int g, int b):
    cdef int i, j
    cdef double px, py, dx, dy, rr = radius * radius
    if i1 < i0 or j1 < j0:
        return
    for i in range(i0, i1 + 1):
        py = i + 0.5
        dy = py - cy
        for j in range(j0, j1 + 1):
            px = j + 0.5
            dx = px - cx
            if dx * dx + dy * dy <= rr:
                img[i, j, 0] = <cnp.uint8_t> r
                img[i, j, 1] = <cnp.uint8_t> g
                img[i, j, 2] = <cnp.uint8_t> b


def fill_obb(cnp.uint8_t[:, :, ::1] img, int i0, int i1, int j0, int j1,
             double cx, double cy, double cos_a, double sin_a,
             double hw, double hh, int r, int g, int b):
    cdef int i, j
    cdef double px, py, dx, dy, lx, ly
    if i1 < i0 or j1 < j0:
        return
    for i in range(i0, i1 + 1):
        py = i + 0.5
        dy = py - cy
        for j in range(j0, j1 + 1):
            px = j + 0.5
            dx = px - cx
            lx = dx * cos_a + dy * sin_a
            ly = dy * cos_a - dx * sin_a
            if lx < 0:
                lx = -lx
            if ly < 0:
                ly = -ly
            if lx <= hw and ly <= hh:
                img[i, j, 0] = <cnp.uint8_t> r
                img[i, j, 1] = <cnp.uint8_t> g
                img[i, j, 2] = <cnp.uint8_t> b


def fill_capsule(cnp.uint8_t[:, :, ::1] img, int i0, int i1, int j0, int j1,
                 double x1, double y1, double x2, double y2, double radius,
                 int r, int g, int b):
    cdef int i, j
    cdef double px, py, dx, dy, t, qx, qy
    cdef double ex = x2 - x1
    cdef double ey = y2 - y1
    cdef double seg_len2 = ex * ex + ey * ey
    cdef double rr = radius * radius
    if i1 < i0 or j1 < j0:
        return
    for i in range(i0, i1 + 1):
        py = i + 0.5
        dy = py - y1
        for j in range(j0, j1 + 1):
            px = j + 0.5
            dx = px - x1
            if seg_len2 > 0.0:
                t = (dx * ex + dy * ey) / seg_len2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            else:
                t = 0.0
            qx = dx - t * ex
            qy = dy - t * ey
            if qx * qx + qy * qy <= rr:
                img[i, j, 0] = <cnp.uint8_t> r
                img[i, j, 1] = <cnp.uint8_t> g
                img[i, j, 2] = <cnp.uint8_t> b


def dtw_table(dist, step_penalty):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef int n = d.shape[0]
    cdef int m = d.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] acc = np.empty((n, m), dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] steps = np.empty((n, m), dtype=np.uint8)
    cdef double p = step_penalty
    cdef double diag, up, left, best
    cdef int i, j, code

    acc[0, 0] = d[0, 0]
    steps[0, 0] = 0
    for j in range(1, m):
        acc[0, j] = d[0, j] + (acc[0, j - 1] + p)
        steps[0, j] = 3
    for i in range(1, n):
        acc[i, 0] = d[i, 0] + (acc[i - 1, 0] + p)
        steps[i, 0] = 2
        for j in range(1, m):
            diag = acc[i - 1, j - 1]
            up = acc[i - 1, j] + p
            left = acc[i, j - 1] + p
            if diag <= up and diag <= left:
                best = diag
                code = 1
            elif up <= left:
                best = up
                code = 2
            else:
                best = left
                code = 3
            acc[i, j] = d[i, j] + best
            steps[i, j] = <cnp.uint8_t> code
    return acc, steps


def hs_iterate(cnp.float64_t[:, ::1] du, cnp.float64_t[:, ::1] dv,
               cnp.float64_t[:, ::1] ix, cnp.float64_t[:, ::1] iy,
               cnp.float64_t[:, ::1] it, cnp.float64_t[:, ::1] denom,
               int iters):
    cdef int h = du.shape[0]
    cdef int w = du.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] nu_arr = np.empty((h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] nv_arr = np.empty((h, w), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] nu = nu_arr
    cdef cnp.float64_t[:, ::1] nv = nv_arr
    cdef cnp.float64_t[:, ::1] tmp
    cdef int k, i, j, im, ip, jm, jp
    cdef double dub, dvb, t

    for k in range(iters):
        for i in range(h):
            im = i - 1 if i > 0 else 0
            ip = i + 1 if i < h - 1 else h - 1
            for j in range(w):
                jm = j - 1 if j > 0 else 0
                jp = j + 1 if j < w - 1 else w - 1
                dub = ((du[i, jm] + du[i, jp]) + (du[im, j] + du[ip, j])) * 0.25
                dvb = ((dv[i, jm] + dv[i, jp]) + (dv[im, j] + dv[ip, j])) * 0.25
                t = (ix[i, j] * dub + iy[i, j] * dvb + it[i, j]) / denom[i, j]
                nu[i, j] = dub - ix[i, j] * t
                nv[i, j] = dvb - iy[i, j] * t
        tmp = du
        du = nu
        nu = tmp
        tmp = dv
        dv = nv
        nv = tmp
    if iters % 2 == 1:
        # result lives in the scratch buffers; copy back into the caller's
        nu[:, :] = du
        nv[:, :] = dv
