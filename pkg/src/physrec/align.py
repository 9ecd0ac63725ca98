"""Temporal alignment between a reference clip and a generated clip.

Three stages, coarse to fine:
  1. coarse offset search -- grayscale thumbnails, Pearson correlation over
     anchor frames for offsets within +/-max_offset, penalized by offset
     magnitude; keeps the top-k candidate offsets.
  2. stack refinement -- windows of consecutive sampled frames scored by
     MSE + 0.5 MAE + 0.1 angular (angle between temporal-difference
     vectors); the cheapest candidate wins.
  3. DTW -- full monotone warp over 48x48 grayscale features with a step
     penalty, used when the stack residual stays above threshold.

Offsets are expressed in sampled frames (every ``sample_every``-th frame).
Positive offset means the generated clip lags the reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .clipio import Clip
from .config import EvalConfig
from .imgops import bilinear_resize, thumbnail_gray, to_gray

_EPS = 1e-12


@dataclass
class SampledClip:
    indices: list[int]
    frames: np.ndarray  # (N, H, W, 3) uint8 view
    _gray_cache: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.indices)

    def gray_variant(self, kind: str, size: int) -> np.ndarray:
        """Stack of grayscale reductions of every sampled frame, cached.

        kind "longer": aspect-preserving, longer side = size;
        kind "square": size x size. Values in [0, 1].
        """
        key = (kind, size)
        if key not in self._gray_cache:
            if kind == "longer":
                small = [thumbnail_gray(f, size) for f in self.frames]
            else:
                small = [
                    bilinear_resize(to_gray(f) / 255.0, size, size) for f in self.frames
                ]
            self._gray_cache[key] = np.stack(small)
        return self._gray_cache[key]

    def thumbs(self, longer_side: int) -> np.ndarray:
        return self.gray_variant("longer", longer_side)

    def features(self, size: int) -> np.ndarray:
        g = self.gray_variant("square", size)
        return g.reshape(len(self.indices), -1)


@dataclass
class AlignmentResult:
    offset: int
    alignment_error: float
    stage: str  # coarse | stack | dtw
    pairing: list[tuple[int, int]]  # (ref, gen) positions in sampled-frame units
    warp_path: list[tuple[int, int]] | None = None
    degenerate: bool = False


@dataclass
class CoarseResult:
    candidates: list[tuple[int, float]]  # (offset, score), best first
    degenerate: bool = False


def sample_frames(clip: Clip, sample_every: int) -> SampledClip:
    """Every sample_every-th frame, original indices retained."""
    idx = list(range(0, clip.n_frames, sample_every))
    return SampledClip(indices=idx, frames=clip.frames[::sample_every])


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    am = a - a.mean()
    bm = b - b.mean()
    na = float(np.sqrt(np.sum(am * am)))
    nb = float(np.sqrt(np.sum(bm * bm)))
    if na < _EPS and nb < _EPS:
        return 1.0 if abs(float(a.mean()) - float(b.mean())) < 1e-9 else 0.0
    if na < _EPS or nb < _EPS:
        return 0.0
    return float(np.sum(am * bm)) / (na * nb)


def _anchor_positions(n: int, max_samples: int) -> np.ndarray:
    k = min(n, max_samples)
    return np.unique(np.round(np.linspace(0, n - 1, k)).astype(int))


def _coarse(ref: SampledClip, gen: SampledClip, cfg: EvalConfig) -> CoarseResult:
    rt = ref.thumbs(cfg.downsample)
    gt = gen.thumbs(cfg.downsample)
    if np.ptp(rt) < _EPS and np.ptp(gt) < _EPS:
        return CoarseResult(candidates=[(0, 0.0)], degenerate=True)
    anchors = _anchor_positions(len(ref), cfg.max_samples)
    flat_r = rt.reshape(len(ref), -1)
    flat_g = gt.reshape(len(gen), -1)
    scored: list[tuple[int, float]] = []
    m = len(gen)
    for offset in range(-cfg.max_offset, cfg.max_offset + 1):
        corrs = [
            _pearson(flat_r[i], flat_g[i + offset])
            for i in anchors
            if 0 <= i + offset < m
        ]
        if not corrs:
            continue
        score = float(np.mean(corrs)) - cfg.offset_penalty * abs(offset) / cfg.max_offset
        scored.append((offset, score))
    scored.sort(key=lambda t: (-t[1], abs(t[0]), t[0]))
    return CoarseResult(candidates=scored[: cfg.top_k])


def coarse_offset_search(ref: Clip, gen: Clip, cfg: EvalConfig) -> CoarseResult:
    return _coarse(sample_frames(ref, cfg.sample_every), sample_frames(gen, cfg.sample_every), cfg)


def _angle_between(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.sqrt(np.sum(u * u)))
    nv = float(np.sqrt(np.sum(v * v)))
    if nu < _EPS and nv < _EPS:
        return 0.0
    if nu < _EPS or nv < _EPS:
        return math.pi / 2.0
    c = float(np.sum(u * v)) / (nu * nv)
    return math.acos(min(max(c, -1.0), 1.0))


def _overlap_pairs(n: int, m: int, offset: int) -> list[tuple[int, int]]:
    return [(i, i + offset) for i in range(n) if 0 <= i + offset < m]


def _stack_cost(rt: np.ndarray, gt: np.ndarray, offset: int, window: int) -> float | None:
    n, m = len(rt), len(gt)
    hw = window // 2
    centers = [
        c for c in range(hw, n - hw)
        if 0 <= c + offset - hw and c + offset + hw < m
    ]
    costs = []
    if centers:
        for c in centers:
            wr = rt[c - hw : c + hw + 1]
            wg = gt[c + offset - hw : c + offset + hw + 1]
            diff = wr - wg
            mse = float(np.mean(diff * diff))
            mae = float(np.mean(np.abs(diff)))
            angles = [
                _angle_between(
                    (wr[k + 1] - wr[k]).ravel(), (wg[k + 1] - wg[k]).ravel()
                )
                for k in range(window - 1)
            ]
            costs.append(mse + 0.5 * mae + 0.1 * float(np.mean(angles)))
    else:
        # clips too short for full windows: plain frame pairs, no angular term
        for i, j in _overlap_pairs(n, m, offset):
            diff = rt[i] - gt[j]
            costs.append(float(np.mean(diff * diff)) + 0.5 * float(np.mean(np.abs(diff))))
    if not costs:
        return None
    return float(np.mean(costs))


def _stack(
    ref: SampledClip, gen: SampledClip, candidates: list[tuple[int, float]], cfg: EvalConfig,
    degenerate: bool = False,
) -> AlignmentResult:
    rt = ref.thumbs(cfg.downsample)
    gt = gen.thumbs(cfg.downsample)
    best: tuple[float, int] | None = None
    for offset, _score in candidates:
        cost = _stack_cost(rt, gt, offset, cfg.window)
        if cost is None:
            continue
        key = (cost, abs(offset), offset)
        if best is None or key < (best[0], abs(best[1]), best[1]):
            best = (cost, offset)
    if best is None:
        best = (0.0, 0)
    cost, offset = best
    return AlignmentResult(
        offset=offset,
        alignment_error=cost,
        stage="stack",
        pairing=_overlap_pairs(len(ref), len(gen), offset),
        degenerate=degenerate,
    )


def stack_refine(
    ref: Clip, gen: Clip, candidates: list[tuple[int, float]], cfg: EvalConfig
) -> AlignmentResult:
    return _stack(
        sample_frames(ref, cfg.sample_every), sample_frames(gen, cfg.sample_every),
        candidates, cfg,
    )


def _dtw(ref: SampledClip, gen: SampledClip, cfg: EvalConfig) -> AlignmentResult:
    fr = ref.features(cfg.dtw_feature_size)
    fg = gen.features(cfg.dtw_feature_size)
    n, m = len(fr), len(fg)
    dist = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        diff = fg - fr[i]
        dist[i] = np.mean(diff * diff, axis=1)
    acc, steps = kernels.dtw_table(dist, cfg.dtw_step_penalty)
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        code = steps[i, j]
        if code == 1:
            i, j = i - 1, j - 1
        elif code == 2:
            i -= 1
        else:
            j -= 1
        path.append((i, j))
    path.reverse()
    cost = float(acc[n - 1, m - 1]) / len(path)
    offsets = sorted(j - i for i, j in path)
    offset = int(round(float(np.median(offsets))))
    offset = max(-cfg.max_offset, min(cfg.max_offset, offset))
    return AlignmentResult(
        offset=offset,
        alignment_error=cost,
        stage="dtw",
        pairing=list(path),
        warp_path=list(path),
    )


def dtw_align(ref: Clip, gen: Clip, cfg: EvalConfig) -> AlignmentResult:
    return _dtw(sample_frames(ref, cfg.sample_every), sample_frames(gen, cfg.sample_every), cfg)


def align_sampled(ref: SampledClip, gen: SampledClip, cfg: EvalConfig) -> AlignmentResult:
    coarse = _coarse(ref, gen, cfg)
    result = _stack(ref, gen, coarse.candidates, cfg, degenerate=coarse.degenerate)
    if result.alignment_error > cfg.stack_escalation_threshold and len(ref) >= 2 and len(gen) >= 2:
        warped = _dtw(ref, gen, cfg)
        if warped.alignment_error < result.alignment_error:
            return warped
    return result


def align(ref: Clip, gen: Clip, cfg: EvalConfig) -> AlignmentResult:
    """Composite coarse -> stack -> (DTW when the residual stays high)."""
    return align_sampled(
        sample_frames(ref, cfg.sample_every), sample_frames(gen, cfg.sample_every), cfg
    )
