"""Clip container, lossless frame persistence, and normalization.

A clip directory holds ``frame_%06d.png`` plus ``manifest.json``; checksums
are SHA-256 over the decoded RGB bytes, so integrity is codec-independent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ChecksumMismatch, MissingFrame
from .imgops import resize_frame_uint8

FRAME_PATTERN = "frame_%06d.png"


@dataclass
class Clip:
    frames: np.ndarray  # (T, H, W, 3) uint8
    fps: int
    source: str = "reference"  # reference | generated | fallback

    def __post_init__(self):
        self.frames = np.ascontiguousarray(self.frames, dtype=np.uint8)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3 or self.frames.shape[0] < 1:
            raise ValueError("clip frames must be a nonempty (T, H, W, 3) array")

    @property
    def n_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def resolution(self) -> tuple[int, int]:
        return int(self.frames.shape[2]), int(self.frames.shape[1])  # (W, H)

    @property
    def duration_s(self) -> float:
        return self.n_frames / self.fps


@dataclass
class ClipManifest:
    fps: int
    width: int
    height: int
    frame_count: int
    pattern: str
    source: str
    checksums: list[str]

    def to_dict(self) -> dict:
        return {
            "fps": self.fps,
            "width": self.width,
            "height": self.height,
            "frame_count": self.frame_count,
            "pattern": self.pattern,
            "source": self.source,
            "checksums": self.checksums,
        }


def _frame_digest(frame: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(frame).tobytes()).hexdigest()


def save_clip(clip: Clip, directory: str | Path) -> ClipManifest:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    checksums = []
    for t in range(clip.n_frames):
        frame = clip.frames[t]
        Image.fromarray(frame, mode="RGB").save(directory / (FRAME_PATTERN % t))
        checksums.append(_frame_digest(frame))
    w, h = clip.resolution
    manifest = ClipManifest(
        fps=clip.fps,
        width=w,
        height=h,
        frame_count=clip.n_frames,
        pattern=FRAME_PATTERN,
        source=clip.source,
        checksums=checksums,
    )
    (directory / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2))
    return manifest


def read_manifest(directory: str | Path) -> ClipManifest:
    doc = json.loads((Path(directory) / "manifest.json").read_text())
    return ClipManifest(**doc)


def _read_frame(path: Path, index: int, expected_digest: str | None) -> np.ndarray:
    if not path.exists():
        raise MissingFrame(index)
    try:
        with Image.open(path) as im:
            frame = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except Exception as exc:
        raise ChecksumMismatch(index, f"frame unreadable ({exc})") from exc
    if expected_digest is not None and _frame_digest(frame) != expected_digest:
        raise ChecksumMismatch(index)
    return frame


def load_clip(directory: str | Path, verify: bool = True) -> Clip:
    directory = Path(directory)
    manifest = read_manifest(directory)
    frames = []
    for t in range(manifest.frame_count):
        digest = manifest.checksums[t] if verify else None
        frames.append(_read_frame(directory / (manifest.pattern % t), t, digest))
    return Clip(frames=np.stack(frames), fps=manifest.fps, source=manifest.source)


def load_frame(directory: str | Path, index: int, verify: bool = True) -> np.ndarray:
    directory = Path(directory)
    manifest = read_manifest(directory)
    if not (0 <= index < manifest.frame_count):
        raise MissingFrame(index)
    digest = manifest.checksums[index] if verify else None
    return _read_frame(directory / (manifest.pattern % index), index, digest)


def normalize_clip(
    clip: Clip,
    target_fps: int,
    target_resolution: tuple[int, int],
    target_duration_s: float,
) -> Clip:
    """Match fps / resolution / duration: nearest-frame temporal resampling,
    bilinear spatial resampling, truncate or pad-with-last-frame in time.
    Returns the input unchanged when it already matches.
    """
    tw, th = target_resolution
    n_target = int(round(target_fps * target_duration_s))
    if (
        clip.fps == target_fps
        and clip.resolution == (tw, th)
        and clip.n_frames == n_target
    ):
        return clip
    src_n = clip.n_frames
    out = np.empty((n_target, th, tw, 3), dtype=np.uint8)
    for i in range(n_target):
        src_idx = int(round(i * clip.fps / target_fps))
        if src_idx >= src_n:
            src_idx = src_n - 1
        out[i] = resize_frame_uint8(clip.frames[src_idx], th, tw)
    return Clip(frames=out, fps=target_fps, source=clip.source)


def delay_clip(clip: Clip, delay_frames: int) -> Clip:
    """Copy delayed by ``delay_frames`` raw frames: the start freezes on the
    first frame and the tail is dropped (same length). Test/diagnostic helper."""
    if delay_frames <= 0:
        return clip
    d = min(delay_frames, clip.n_frames - 1)
    frames = np.concatenate(
        [np.repeat(clip.frames[:1], d, axis=0), clip.frames[: clip.n_frames - d]]
    )
    return Clip(frames=frames, fps=clip.fps, source=clip.source)
