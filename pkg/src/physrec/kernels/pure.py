"""Pure-NumPy implementations of the hot kernels.

Arithmetic mirrors the compiled backend expression-for-expression (same
operand order, float64 throughout) so both produce bitwise-identical fills
and DTW tables. Pixel (i, j) is sampled at its center (j + 0.5, i + 0.5).
"""

from __future__ import annotations

import numpy as np


def _pixel_centers(i0: int, i1: int, j0: int, j1: int):
    ys = np.arange(i0, i1 + 1, dtype=np.float64) + 0.5
    xs = np.arange(j0, j1 + 1, dtype=np.float64) + 0.5
    return ys[:, None], xs[None, :]


def fill_circle(img, i0, i1, j0, j1, cx, cy, radius, r, g, b):
    if i1 < i0 or j1 < j0:
        return
    py, px = _pixel_centers(i0, i1, j0, j1)
    dx = px - cx
    dy = py - cy
    mask = dx * dx + dy * dy <= radius * radius
    img[i0 : i1 + 1, j0 : j1 + 1][mask] = (r, g, b)


def fill_obb(img, i0, i1, j0, j1, cx, cy, cos_a, sin_a, hw, hh, r, g, b):
    if i1 < i0 or j1 < j0:
        return
    py, px = _pixel_centers(i0, i1, j0, j1)
    dx = px - cx
    dy = py - cy
    lx = dx * cos_a + dy * sin_a
    ly = dy * cos_a - dx * sin_a
    mask = (np.abs(lx) <= hw) & (np.abs(ly) <= hh)
    img[i0 : i1 + 1, j0 : j1 + 1][mask] = (r, g, b)


def fill_capsule(img, i0, i1, j0, j1, x1, y1, x2, y2, radius, r, g, b):
    if i1 < i0 or j1 < j0:
        return
    py, px = _pixel_centers(i0, i1, j0, j1)
    ex = x2 - x1
    ey = y2 - y1
    seg_len2 = ex * ex + ey * ey
    dx = px - x1
    dy = py - y1
    if seg_len2 > 0.0:
        t = np.clip((dx * ex + dy * ey) / seg_len2, 0.0, 1.0)
    else:
        t = np.zeros(np.broadcast_shapes(dx.shape, dy.shape))
    qx = dx - t * ex
    qy = dy - t * ey
    mask = qx * qx + qy * qy <= radius * radius
    img[i0 : i1 + 1, j0 : j1 + 1][mask] = (r, g, b)


def dtw_table(dist, step_penalty):
    """Accumulated-cost table for a monotone warp over ``dist``.

    Steps: diagonal is free, vertical/horizontal add ``step_penalty``.
    Returns (acc, steps) with steps coding 0=start, 1=diag, 2=up, 3=left;
    ties resolve diag > up > left.
    """
    dist = np.asarray(dist, dtype=np.float64)
    n, m = dist.shape
    acc = np.empty((n, m), dtype=np.float64)
    steps = np.empty((n, m), dtype=np.uint8)
    p = float(step_penalty)
    acc[0, 0] = dist[0, 0]
    steps[0, 0] = 0
    for j in range(1, m):
        acc[0, j] = dist[0, j] + (acc[0, j - 1] + p)
        steps[0, j] = 3
    for i in range(1, n):
        acc[i, 0] = dist[i, 0] + (acc[i - 1, 0] + p)
        steps[i, 0] = 2
        row = acc[i]
        prev = acc[i - 1]
        d = dist[i]
        for j in range(1, m):
            diag = prev[j - 1]
            up = prev[j] + p
            left = row[j - 1] + p
            if diag <= up and diag <= left:
                best, code = diag, 1
            elif up <= left:
                best, code = up, 2
            else:
                best, code = left, 3
            row[j] = d[j] + best
            steps[i, j] = code
    return acc, steps


def hs_iterate(du, dv, ix, iy, it, denom, iters):
    """Jacobi relaxation of the smoothness-regularized flow increment.

    All arrays are float64 (H, W); ``denom`` is the precomputed
    alpha^2 + ix^2 + iy^2. Updates du/dv in place.
    """
    for _ in range(int(iters)):
        pu = np.pad(du, 1, mode="edge")
        pv = np.pad(dv, 1, mode="edge")
        dub = ((pu[1:-1, :-2] + pu[1:-1, 2:]) + (pu[:-2, 1:-1] + pu[2:, 1:-1])) * 0.25
        dvb = ((pv[1:-1, :-2] + pv[1:-1, 2:]) + (pv[:-2, 1:-1] + pv[2:, 1:-1])) * 0.25
        t = (ix * dub + iy * dvb + it) / denom
        du[...] = dub - ix * t
        dv[...] = dvb - iy * t
