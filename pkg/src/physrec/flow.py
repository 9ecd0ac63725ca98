"""Classical dense optical flow: coarse-to-fine pyramid with quadratic
smoothness, solved by Jacobi relaxation (the hot loop lives in the kernel
backend). A stand-in for learned flow: absolute values are not comparable
to learned estimators, but identities and orderings hold.

Flow vectors are returned in the pixel units of the ORIGINAL frames even
though estimation runs at a reduced working resolution.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .config import EvalConfig
from .imgops import bilinear_resize, to_gray

_MIN_LEVEL_SIZE = 24


def _warp_bilinear(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    h, w = img.shape
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    sx = np.clip(xs + u, 0.0, w - 1.0)
    sy = np.clip(ys + v, 0.0, h - 1.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    wx = sx - x0
    wy = sy - y0
    top = img[y0, x0] * (1.0 - wx) + img[y0, x1] * wx
    bot = img[y1, x0] * (1.0 - wx) + img[y1, x1] * wx
    return top * (1.0 - wy) + bot * wy


def estimate_flow(g0: np.ndarray, g1: np.ndarray, cfg: EvalConfig) -> np.ndarray:
    """Dense flow g0 -> g1 for grayscale float images in [0, 1].

    Returns (H, W, 2) with (u, v) in pixels of the input arrays.
    """
    pyramid = [(np.asarray(g0, dtype=np.float64), np.asarray(g1, dtype=np.float64))]
    for _ in range(cfg.flow_levels - 1):
        a, b = pyramid[-1]
        h, w = a.shape
        if min(h, w) < 2 * _MIN_LEVEL_SIZE:
            break
        pyramid.append(
            (bilinear_resize(a, h // 2, w // 2), bilinear_resize(b, h // 2, w // 2))
        )

    u = np.zeros(pyramid[-1][0].shape, dtype=np.float64)
    v = np.zeros_like(u)
    for level in range(len(pyramid) - 1, -1, -1):
        a, b = pyramid[level]
        h, w = a.shape
        if u.shape != (h, w):
            ph, pw = u.shape
            u = bilinear_resize(u, h, w) * (w / pw)
            v = bilinear_resize(v, h, w) * (h / ph)
        warped = _warp_bilinear(b, u, v)
        avg = 0.5 * (a + warped)
        iy, ix = np.gradient(avg)
        it = warped - a
        denom = cfg.flow_alpha2 + ix * ix + iy * iy
        du = np.zeros((h, w), dtype=np.float64)
        dv = np.zeros((h, w), dtype=np.float64)
        kernels.hs_iterate(
            du, dv,
            np.ascontiguousarray(ix), np.ascontiguousarray(iy),
            np.ascontiguousarray(it), np.ascontiguousarray(denom),
            cfg.flow_iterations,
        )
        u = u + du
        v = v + dv
    return np.stack([u, v], axis=-1)


def flow_between_frames(f0: np.ndarray, f1: np.ndarray, cfg: EvalConfig) -> np.ndarray:
    """Flow between two RGB uint8 frames, estimated at the working resolution
    but expressed in original-frame pixels."""
    h, w = f0.shape[:2]
    if max(h, w) > cfg.flow_resolution:
        scale = cfg.flow_resolution / max(h, w)
        wh, ww = max(1, int(round(h * scale))), max(1, int(round(w * scale)))
    else:
        wh, ww = h, w
    g0 = bilinear_resize(to_gray(f0) / 255.0, wh, ww)
    g1 = bilinear_resize(to_gray(f1) / 255.0, wh, ww)
    flow = estimate_flow(g0, g1, cfg)
    flow[..., 0] *= w / ww
    flow[..., 1] *= h / wh
    return flow
