"""Small deterministic image helpers shared by the renderer and metrics.

Everything is float64 NumPy with fixed operation order; no external image
library is involved so results are stable across installs.
"""

from __future__ import annotations

import numpy as np


_LUMA = np.array([0.299, 0.587, 0.114])


def to_gray(frame: np.ndarray) -> np.ndarray:
    """Rec. 601 luma of an (H, W, 3) uint8/float frame, float64 same scale."""
    return frame.astype(np.float64) @ _LUMA


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel centers (align_corners=False)."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    if (h, w) == (out_h, out_w):
        return img.copy()
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    if img.ndim == 3:
        wy = wy[..., None]
        wx = wx[..., None]
    a = img[y0][:, x0]
    b = img[y0][:, x1]
    c = img[y1][:, x0]
    d = img[y1][:, x1]
    top = a * (1.0 - wx) + b * wx
    bot = c * (1.0 - wx) + d * wx
    return top * (1.0 - wy) + bot * wy


def resize_frame_uint8(frame: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    if frame.shape[0] == out_h and frame.shape[1] == out_w:
        return frame
    out = bilinear_resize(frame, out_h, out_w)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def thumbnail_gray(frame: np.ndarray, longer_side: int) -> np.ndarray:
    """Grayscale thumbnail whose longer side is ``longer_side``, in [0, 1]."""
    g = to_gray(frame) / 255.0
    h, w = g.shape
    if h >= w:
        out_h = longer_side
        out_w = max(1, int(round(w * longer_side / h)))
    else:
        out_w = longer_side
        out_h = max(1, int(round(h * longer_side / w)))
    return bilinear_resize(g, out_h, out_w)
