"""Hypothesis-producer adapters behind one contract: request in, raw
response text out.

Kinds: a generic HTTP adapter (single JSON exchange), a ground-truth oracle
with optional seeded Gaussian noise, a replay adapter for recorded runs, and
a fault-injection wrapper for retry/fallback testing. Every failure mode is
a typed error that the pipeline turns into diagnostics; adapters never
crash a run.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import os
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import requests
from PIL import Image

from .config import AdapterSpec
from .detection import DetectionContext, serialize_detection
from .errors import AdapterTimeout, ConfigError, MissingCredential, TransportError
from .scene import SCHEMA_EXCERPT, describe_scene, scene_from_dict, serialize_scene

ENDPOINT_ENV = "PHYSREC_ENDPOINT"
DIAGNOSTIC_TAIL_CHARS = 2000


@dataclass
class RepairContext:
    previous_raw: str
    diagnostics_summary: str


@dataclass
class ModelRequest:
    start_frame: np.ndarray
    later_frame: np.ndarray
    detection: DetectionContext | None = None
    prompt_profile: str = "default"
    repair_context: RepairContext | None = None
    scene_id: str = ""  # lets scene-scoped adapters (oracle, replay) resolve resources

    def __post_init__(self):
        if self.start_frame.shape != self.later_frame.shape:
            raise ConfigError("request frames must share a resolution")


@dataclass
class PromptDocument:
    text: str
    images: list[np.ndarray]


_TASK_HEADER = """\
You are an expert in 2D rigid-body physics simulation.

You are given two key frames from a short clip: an early frame and a later
frame. Your goals:

(1) Scene and motion analysis (3-8 sentences): describe the main objects
    (shapes, colors, approximate sizes), how they move between the two
    frames (who moves, who stays still, collisions, stacks that topple),
    and the likely physical causes (gravity, contact forces, friction,
    impulses).

(2) Scene specification: produce ONE scene document in the JSON dialect
    below that reproduces the first frame's layout and assigns velocities
    and materials consistent with the observed motion. The document will be
    executed by a deterministic rigid-body simulator to roll the scene
    forward.
"""

_OUTPUT_FORMAT = """\
Return your answer in the following format:

(A) Analysis section: plain English paragraphs.

(B) Scene section: a single fenced block

```json
{ ... scene document ... }
```

Do not include any other fenced blocks.
"""

JUDGE_RUBRIC_PROFILE = "judge_rubric"

JUDGE_RUBRIC_PROMPT = """\
You are an expert evaluator of physical simulations and video quality.

Compare the provided reference clip with the generated clip and decide how
faithfully the generated clip reconstructs the physical event. Focus on:
- Physical plausibility (crucial): do objects obey rigid-body physics
  (gravity, collisions, friction)? Any interpenetration, floating, or
  objects failing to move when hit?
- Motion consistency: trajectory, speed, and timing versus the reference.
- Scene semantics: correct objects (color, shape, count) in the correct
  layout.
- Visual fidelity: overall clarity, ignoring minor rendering style
  differences when the physics is right.

Return a JSON object with keys:
- "score": integer 1-10 (10 = perfect physical and visual match; 1 =
  physical laws violated even if the image looks plausible).
- "justification": brief explanation, naming any physical violations.
"""


def build_prompt(req: ModelRequest) -> PromptDocument:
    """Deterministic prompt text plus image attachments."""
    if req.prompt_profile == JUDGE_RUBRIC_PROFILE:
        return PromptDocument(text=JUDGE_RUBRIC_PROMPT, images=[req.start_frame, req.later_frame])
    parts = [_TASK_HEADER, SCHEMA_EXCERPT, ""]
    if req.detection is not None:
        parts.append("Detected objects in the first frame (JSON):")
        parts.append(serialize_detection(req.detection))
        parts.append("")
    parts.append(_OUTPUT_FORMAT)
    if req.repair_context is not None:
        parts.append(
            "Your previous attempt failed to execute. Previous response:\n"
            + req.repair_context.previous_raw
            + "\n\nExecution diagnostics:\n"
            + req.repair_context.diagnostics_summary
            + "\n\nReturn a corrected answer in the same format."
        )
    return PromptDocument(text="\n".join(parts), images=[req.start_frame, req.later_frame])


class Adapter:
    name = "adapter"

    def invoke(self, req: ModelRequest) -> str:
        raise NotImplementedError


def invoke(adapter: Adapter, req: ModelRequest) -> str:
    return adapter.invoke(req)


class OracleAdapter(Adapter):
    """Serializes the ground-truth scene, optionally perturbed by seeded
    Gaussian noise on positions (all bodies) and velocities (dynamic
    bodies). (scene_id, sigmas, seed) fixes the response bitwise."""

    name = "oracle"

    def __init__(self, benchmark_dir: str | Path, sigma_pos: float = 0.0,
                 sigma_vel: float = 0.0, seed: int = 0):
        self.benchmark_dir = Path(benchmark_dir)
        self.sigma_pos = sigma_pos
        self.sigma_vel = sigma_vel
        self.seed = seed

    def _rng(self, scene_id: str) -> np.random.Generator:
        digest = hashlib.sha256(
            f"{scene_id}|{self.sigma_pos}|{self.sigma_vel}|{self.seed}".encode()
        ).digest()
        return np.random.Generator(np.random.Philox(key=np.frombuffer(digest[:16], dtype=np.uint64)))

    def invoke(self, req: ModelRequest) -> str:
        scene_path = self.benchmark_dir / "scenes" / req.scene_id / "scene.json"
        try:
            scene = scene_from_dict(json.loads(scene_path.read_text()))
        except OSError as exc:
            raise TransportError(f"oracle cannot read ground truth: {exc}") from exc
        rng = self._rng(req.scene_id)
        w, h = scene.world.resolution
        bodies = []
        for b in scene.bodies:
            dx, dy = rng.normal(0.0, self.sigma_pos, size=2)
            x = min(max(b.position[0] + dx, 0.0), float(w))
            y = min(max(b.position[1] + dy, 0.0), float(h))
            vx, vy = b.velocity
            if not b.is_static:
                dvx, dvy = rng.normal(0.0, self.sigma_vel, size=2)
                vx, vy = vx + dvx, vy + dvy
            bodies.append(replace(b, position=(x, y), velocity=(vx, vy)))
        noisy = replace(scene, bodies=tuple(bodies))
        return describe_scene(noisy) + "\n\n```json\n" + serialize_scene(noisy) + "\n```\n"


class ReplayAdapter(Adapter):
    """Replays raw responses recorded under responses/<scene_id>/attempt_<n>.txt
    (the layout run directories use), making historical runs re-evaluable
    offline."""

    name = "replay"

    def __init__(self, responses_dir: str | Path):
        self.responses_dir = Path(responses_dir)

    def invoke(self, req: ModelRequest) -> str:
        attempt = 1 if req.repair_context is None else 2
        path = self.responses_dir / req.scene_id / f"attempt_{attempt}.txt"
        if not path.exists():
            raise TransportError(f"no recorded response at {path}")
        return path.read_text()


def _png_base64(frame: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(frame, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class _TokenBucket:
    def __init__(self, rate: float):
        self.rate = rate
        self.allowance = rate
        self.last = time.monotonic()
        self.lock = threading.Lock()

    def take(self):
        with self.lock:
            now = time.monotonic()
            self.allowance = min(self.rate, self.allowance + (now - self.last) * self.rate)
            self.last = now
            if self.allowance < 1.0:
                wait = (1.0 - self.allowance) / self.rate
                time.sleep(wait)
                self.allowance = 0.0
            else:
                self.allowance -= 1.0


class HttpAdapter(Adapter):
    """One JSON request/response exchange per invocation.

    Request body: {"prompt": str, "images": [{"name": str, "png_base64":
    str}], "profile": str}; response body: {"text": str}. The bearer token
    comes from the configured env var and is checked before any request.
    """

    name = "http"

    def __init__(self, endpoint: str = "", credential_env: str = "PHYSREC_API_KEY",
                 timeout_s: float = 60.0, requests_per_s: float = 0.0):
        self.endpoint = endpoint
        self.credential_env = credential_env
        self.timeout_s = timeout_s
        self.bucket = _TokenBucket(requests_per_s) if requests_per_s > 0 else None

    def invoke(self, req: ModelRequest) -> str:
        api_key = os.environ.get(self.credential_env, "")
        if not api_key:
            raise MissingCredential(f"environment variable {self.credential_env} is not set")
        endpoint = os.environ.get(ENDPOINT_ENV) or self.endpoint
        if not endpoint:
            raise TransportError("no endpoint configured (set PHYSREC_ENDPOINT)")
        prompt = build_prompt(req)
        body = {
            "prompt": prompt.text,
            "images": [
                {"name": "start_frame", "png_base64": _png_base64(req.start_frame)},
                {"name": "later_frame", "png_base64": _png_base64(req.later_frame)},
            ],
            "profile": req.prompt_profile,
        }
        if self.bucket is not None:
            self.bucket.take()
        try:
            resp = requests.post(
                endpoint,
                json=body,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout_s,
            )
        except requests.Timeout as exc:
            raise AdapterTimeout(f"request timed out after {self.timeout_s}s") from exc
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code != 200:
            raise TransportError(f"endpoint returned HTTP {resp.status_code}")
        try:
            return resp.json()["text"]
        except (ValueError, KeyError) as exc:
            raise TransportError(f"malformed endpoint response: {exc}") from exc


FAULT_RESPONSE = "FAULT-INJECTED RESPONSE: payload withheld for robustness testing."


class FaultWrapAdapter(Adapter):
    """Replaces the inner adapter's response with an unparseable document
    according to a deterministic schedule."""

    name = "fault-wrap"

    def __init__(self, inner: Adapter, mode: str = "first_attempt",
                 scenes: frozenset[str] | None = None):
        if mode not in ("never", "first_attempt", "always", "scenes"):
            raise ConfigError(f"unknown fault mode {mode!r}")
        self.inner = inner
        self.mode = mode
        self.scenes = scenes or frozenset()

    def should_fail(self, scene_id: str, attempt: int) -> bool:
        if self.mode == "always":
            return True
        if self.mode == "first_attempt":
            return attempt == 1
        if self.mode == "scenes":
            return attempt == 1 and scene_id in self.scenes
        return False

    def invoke(self, req: ModelRequest) -> str:
        attempt = 1 if req.repair_context is None else 2
        if self.should_fail(req.scene_id, attempt):
            return FAULT_RESPONSE
        return self.inner.invoke(req)


def build_adapter(name: str, specs: dict[str, AdapterSpec], benchmark_dir: str | Path,
                  _seen: frozenset[str] = frozenset()) -> Adapter:
    """Instantiate a named adapter from config, resolving fault-wrap inners."""
    if name in _seen:
        raise ConfigError(f"adapter {name!r} wraps itself (cycle)")
    if name in specs:
        spec = specs[name]
    elif name == "oracle":
        spec = AdapterSpec(kind="oracle")
    elif name == "http":
        spec = AdapterSpec(kind="http")
    else:
        raise ConfigError(f"unknown adapter {name!r}")
    if spec.kind == "oracle":
        return OracleAdapter(
            benchmark_dir, sigma_pos=spec.sigma_pos, sigma_vel=spec.sigma_vel,
            seed=spec.noise_seed,
        )
    if spec.kind == "replay":
        if not spec.replay_dir:
            raise ConfigError(f"adapter {name!r}: replay requires replay_dir")
        return ReplayAdapter(spec.replay_dir)
    if spec.kind == "http":
        return HttpAdapter(
            endpoint=spec.endpoint, credential_env=spec.credential_env,
            timeout_s=spec.timeout_s, requests_per_s=spec.requests_per_s,
        )
    inner = build_adapter(spec.inner, specs, benchmark_dir, _seen | {name})
    return FaultWrapAdapter(inner, mode=spec.fault_mode, scenes=frozenset(spec.fault_scenes))
