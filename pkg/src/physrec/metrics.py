"""Frame, motion, and text metrics computed on aligned clips.

Every metric carries a direction tag (up = higher is better) consumed by the
aggregation layer.
"""

from __future__ import annotations

import math
import re

import cv2
import numpy as np

from .align import SampledClip
from .config import EvalConfig
from .errors import InsufficientFrames, ProviderUnavailable
from .flow import estimate_flow
from .imgops import bilinear_resize, to_gray

PSNR_CAP_DB = 99.0
_SSIM_C1 = (0.01 * 255.0) ** 2
_SSIM_C2 = (0.03 * 255.0) ** 2
_SSIM_RADIUS = 5  # 11-tap Gaussian window, sigma 1.5

METRIC_DIRECTIONS = {
    "psnr": "up",
    "ssim": "up",
    "flow_epe": "down",
    "flow_mag_diff": "down",
    "flow_angular_deg": "down",
    "rouge_l_f1": "up",
    "embed_sim": "up",
    "align_err": "down",
    "model_success": "up",
    "system_success": "up",
}


def _select_pairs(pairing, max_pairs: int):
    if len(pairing) <= max_pairs:
        return list(pairing)
    pos = np.unique(np.round(np.linspace(0, len(pairing) - 1, max_pairs)).astype(int))
    return [pairing[int(p)] for p in pos]


def psnr(ref: SampledClip, gen: SampledClip, pairing, max_pairs: int = 10**9) -> float:
    """Mean frame-wise PSNR in dB over aligned pairs, capped at 99 dB for
    identical frames."""
    if not pairing:
        raise InsufficientFrames("empty pairing")
    values = []
    for i, j in _select_pairs(pairing, max_pairs):
        a = ref.frames[i].astype(np.float64)
        b = gen.frames[j].astype(np.float64)
        mse = float(np.mean((a - b) ** 2))
        if mse == 0.0:
            values.append(PSNR_CAP_DB)
        else:
            values.append(min(10.0 * math.log10(255.0**2 / mse), PSNR_CAP_DB))
    return float(np.mean(values))


def _gaussian_taps(radius: int, sigma: float) -> np.ndarray:
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(xs**2) / (2.0 * sigma**2))
    return w / w.sum()


_SSIM_TAPS = _gaussian_taps(_SSIM_RADIUS, 1.5)
_SSIM_ROW = _SSIM_TAPS.reshape(1, -1)
_SSIM_COL = _SSIM_TAPS.reshape(-1, 1)


def _blur(x: np.ndarray) -> np.ndarray:
    # border values are cropped out below, so only the interior matters
    return cv2.sepFilter2D(x, -1, _SSIM_ROW, _SSIM_COL, borderType=cv2.BORDER_REFLECT)


def _ssim_channels(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-channel SSIM of two (H, W, C) float stacks, C <= 4.

    float32 internally: the maps are bandwidth-bound and identical inputs
    still give exactly 1.0.
    """
    mu_x = _blur(x)
    mu_y = _blur(y)
    xx = _blur(x * x) - mu_x * mu_x
    yy = _blur(y * y) - mu_y * mu_y
    xy = _blur(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _SSIM_C1) * (2.0 * xy + _SSIM_C2)
    den = (mu_x * mu_x + mu_y * mu_y + _SSIM_C1) * (xx + yy + _SSIM_C2)
    r = _SSIM_RADIUS
    return np.mean((num / den)[r:-r, r:-r], axis=(0, 1), dtype=np.float64)


def _ssim_channel(x: np.ndarray, y: np.ndarray) -> float:
    x32 = np.ascontiguousarray(x, dtype=np.float32)[..., None]
    y32 = np.ascontiguousarray(y, dtype=np.float32)[..., None]
    return float(_ssim_channels(x32, y32)[0])


_LUMA32 = np.array([0.299, 0.587, 0.114], dtype=np.float32)


def _luma_rgb_stack(frame: np.ndarray) -> np.ndarray:
    out = np.empty((*frame.shape[:2], 4), dtype=np.float32)
    out[..., 1:] = frame
    out[..., 0] = out[..., 1:] @ _LUMA32
    return out


def ssim_frame(a: np.ndarray, b: np.ndarray) -> float:
    """Mean of the luma-channel SSIM and the average per-RGB-channel SSIM."""
    scores = _ssim_channels(_luma_rgb_stack(a), _luma_rgb_stack(b))
    return 0.5 * (float(scores[0]) + float(np.mean(scores[1:])))


def ssim(ref: SampledClip, gen: SampledClip, pairing, max_pairs: int = 10**9) -> float:
    if not pairing:
        raise InsufficientFrames("empty pairing")
    values = [
        ssim_frame(ref.frames[i], gen.frames[j])
        for i, j in _select_pairs(pairing, max_pairs)
    ]
    return float(np.mean(values))


def _clip_flow(clip: SampledClip, i: int, j: int, cfg: EvalConfig) -> np.ndarray:
    """Flow between sampled frames i -> j, in original-frame pixels."""
    gray = clip.gray_variant("longer", min(cfg.flow_resolution, max(clip.frames.shape[1:3])))
    flow = estimate_flow(gray[i], gray[j], cfg)
    h, w = clip.frames.shape[1:3]
    wh, ww = gray.shape[1:3]
    flow[..., 0] *= w / ww
    flow[..., 1] *= h / wh
    return flow


def flow_metrics(ref: SampledClip, gen: SampledClip, pairing, cfg: EvalConfig) -> dict:
    """Dense-flow comparison over consecutive aligned pairs: end-point error,
    absolute magnitude difference, and mean angular error (degrees)."""
    if len(pairing) < 2:
        raise InsufficientFrames("need at least two aligned pairs for flow metrics")
    steps = list(zip(pairing[:-1], pairing[1:]))
    steps = _select_pairs(steps, cfg.flow_max_pairs)
    epe, mag, ang = [], [], []
    for (r0, g0), (r1, g1) in steps:
        fr = _clip_flow(ref, r0, r1, cfg)
        fg = _clip_flow(gen, g0, g1, cfg)
        d = fr - fg
        epe.append(float(np.mean(np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2))))
        mr = np.sqrt(fr[..., 0] ** 2 + fr[..., 1] ** 2)
        mg = np.sqrt(fg[..., 0] ** 2 + fg[..., 1] ** 2)
        mag.append(float(np.mean(np.abs(mr - mg))))
        num = fr[..., 0] * fg[..., 0] + fr[..., 1] * fg[..., 1] + 1.0
        den = np.sqrt((fr[..., 0] ** 2 + fr[..., 1] ** 2 + 1.0) * (fg[..., 0] ** 2 + fg[..., 1] ** 2 + 1.0))
        cos = np.clip(num / den, -1.0, 1.0)
        ang.append(float(np.degrees(np.mean(np.arccos(cos)))))
    return {
        "flow_epe": float(np.mean(epe)),
        "flow_mag_diff": float(np.mean(mag)),
        "flow_angular_deg": float(np.mean(ang)),
    }


# ---------------------------------------------------------------------------
# text metric

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate_text: str, reference_text: str) -> dict:
    """LCS-based precision/recall/F1 over lowercased, punctuation-stripped,
    whitespace-split tokens. Empty inputs score zero."""
    cand = _tokens(candidate_text)
    ref = _tokens(reference_text)
    if not cand or not ref:
        return {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    lcs = _lcs_length(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return {"precision": p, "recall": r, "f1": f1}


# ---------------------------------------------------------------------------
# pluggable frame-embedding providers

_PROVIDERS: dict[str, object] = {}


def register_provider(name: str):
    def wrap(fn):
        _PROVIDERS[name] = fn
        return fn

    return wrap


@register_provider("thumb32")
def _thumb32_features(frame: np.ndarray) -> np.ndarray:
    """Baseline provider: mean-centered 32x32 grayscale thumbnail."""
    g = bilinear_resize(to_gray(frame) / 255.0, 32, 32).ravel()
    return g - g.mean()


def embed_similarity(provider: str, ref: SampledClip, gen: SampledClip, pairing,
                     max_pairs: int = 10**9) -> float:
    """Mean cosine similarity of provider features over aligned pairs."""
    if provider not in _PROVIDERS:
        raise ProviderUnavailable(f"no embedding provider {provider!r} registered")
    if not pairing:
        raise InsufficientFrames("empty pairing")
    fn = _PROVIDERS[provider]
    values = []
    for i, j in _select_pairs(pairing, max_pairs):
        a = np.asarray(fn(ref.frames[i]), dtype=np.float64).ravel()
        b = np.asarray(fn(gen.frames[j]), dtype=np.float64).ravel()
        na = float(np.sqrt(np.sum(a * a)))
        nb = float(np.sqrt(np.sum(b * b)))
        if na < 1e-12 and nb < 1e-12:
            values.append(1.0)
        elif na < 1e-12 or nb < 1e-12:
            values.append(0.0)
        else:
            values.append(float(np.sum(a * b)) / (na * nb))
    return float(np.mean(values))
