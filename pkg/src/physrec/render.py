"""Software rasterizer: trajectory in, clip out.

Hard-edged scanline fills (no anti-aliasing) keep frames bitwise
deterministic and make pixel-count checks exact. Bodies paint in canonical
body order over the background color; pixel (i, j) samples its center.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .clipio import Clip
from .engine import BodyState, Trajectory
from .scene import Box, Circle, Compound, SceneSpec, Segment, segment_local_endpoints


def _clip_bounds(x0, y0, x1, y1, h, w):
    j0 = max(0, int(math.floor(x0)) - 1)
    j1 = min(w - 1, int(math.ceil(x1)) + 1)
    i0 = max(0, int(math.floor(y0)) - 1)
    i1 = min(h - 1, int(math.ceil(y1)) + 1)
    return i0, i1, j0, j1


def _draw_circle(img, cx, cy, radius, color):
    h, w = img.shape[:2]
    i0, i1, j0, j1 = _clip_bounds(cx - radius, cy - radius, cx + radius, cy + radius, h, w)
    kernels.fill_circle(img, i0, i1, j0, j1, cx, cy, radius, *color)


def _draw_obb(img, cx, cy, hw, hh, angle, color):
    h, w = img.shape[:2]
    ca, sa = math.cos(angle), math.sin(angle)
    ex = hw * abs(ca) + hh * abs(sa)
    ey = hw * abs(sa) + hh * abs(ca)
    i0, i1, j0, j1 = _clip_bounds(cx - ex, cy - ey, cx + ex, cy + ey, h, w)
    kernels.fill_obb(img, i0, i1, j0, j1, cx, cy, ca, sa, hw, hh, *color)


def _draw_capsule(img, x1, y1, x2, y2, radius, color):
    h, w = img.shape[:2]
    i0, i1, j0, j1 = _clip_bounds(
        min(x1, x2) - radius, min(y1, y2) - radius,
        max(x1, x2) + radius, max(y1, y2) + radius, h, w,
    )
    kernels.fill_capsule(img, i0, i1, j0, j1, x1, y1, x2, y2, radius, *color)


def draw_body(img: np.ndarray, spec, state: BodyState) -> None:
    shape = spec.shape
    x, y, angle = state.x, state.y, state.angle
    if isinstance(shape, Circle):
        _draw_circle(img, x, y, shape.radius, spec.color)
    elif isinstance(shape, Box):
        _draw_obb(img, x, y, shape.half_w, shape.half_h, shape.angle + angle, spec.color)
    elif isinstance(shape, Segment):
        (lx1, ly1), (lx2, ly2) = segment_local_endpoints(shape)
        c, s = math.cos(angle), math.sin(angle)
        _draw_capsule(
            img,
            x + lx1 * c - ly1 * s, y + lx1 * s + ly1 * c,
            x + lx2 * c - ly2 * s, y + lx2 * s + ly2 * c,
            shape.thickness / 2.0, spec.color,
        )
    elif isinstance(shape, Compound):
        c, s = math.cos(angle), math.sin(angle)
        for part in shape.parts:
            px = x + part.offset_x * c - part.offset_y * s
            py = y + part.offset_x * s + part.offset_y * c
            _draw_obb(img, px, py, part.half_w, part.half_h, part.angle + angle, spec.color)
    else:
        raise TypeError(f"unknown shape {type(shape)!r}")


def render_frame(scene: SceneSpec, states, order) -> np.ndarray:
    w, h = scene.world.resolution
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:, :] = scene.world.background
    by_id = {b.id: b for b in scene.bodies}
    for body_id, state in zip(order, states):
        draw_body(img, by_id[body_id], state)
    return img


def rasterize(scene: SceneSpec, traj: Trajectory, source: str = "generated") -> Clip:
    """One frame per fps-sampled trajectory snapshot."""
    frames = [render_frame(scene, states, traj.body_ids) for states in traj.frames()]
    return Clip(frames=np.stack(frames), fps=traj.fps, source=source)
