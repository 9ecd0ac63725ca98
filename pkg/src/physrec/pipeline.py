"""Per-scene evaluation pipeline: invoke -> parse -> validate -> execute,
with one automatic repair attempt and a guaranteed fallback clip.

Every scene yields exactly one RunRecord and one playable clip no matter
what the adapter does. Model-success counts a scene only when a
model-produced hypothesis executed (no fallback); system-success counts the
fallback too.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .adapters import DIAGNOSTIC_TAIL_CHARS, Adapter, ModelRequest, RepairContext
from .benchgen import BenchmarkManifest, SceneEntry
from .clipio import load_frame, normalize_clip, read_manifest, save_clip
from .config import RunConfig
from .detection import parse_detection
from .engine import simulate
from .errors import HarnessError
from .render import rasterize
from .scene import (
    WorldParams,
    canonicalize_scene,
    fallback_scene,
    parse_scene,
    serialize_scene,
    validate_scene,
)

NO_DIAGNOSTICS = "no diagnostics captured"


@dataclass
class AttemptRecord:
    index: int
    ok: bool
    stage: str  # stage reached: invoke | parse | validate | simulate | render | done
    diagnostics: list[str] = field(default_factory=list)
    raw_path: str = ""


@dataclass
class RunRecord:
    scene_id: str
    attempts: list[AttemptRecord]
    used_fallback: bool
    clip_ref: str
    model_success: bool
    system_success: bool

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "attempts": [asdict(a) for a in self.attempts],
            "used_fallback": self.used_fallback,
            "clip_ref": self.clip_ref,
            "model_success": self.model_success,
            "system_success": self.system_success,
        }

    @staticmethod
    def from_dict(doc: dict) -> "RunRecord":
        return RunRecord(
            scene_id=doc["scene_id"],
            attempts=[AttemptRecord(**a) for a in doc["attempts"]],
            used_fallback=doc["used_fallback"],
            clip_ref=doc["clip_ref"],
            model_success=doc["model_success"],
            system_success=doc["system_success"],
        )


def summarize_diagnostics(diagnostics: list[str], cap: int = DIAGNOSTIC_TAIL_CHARS) -> str:
    """Ordered concatenation, truncated to the cap keeping the tail."""
    text = "\n".join(d for d in diagnostics if d).strip()
    if not text:
        return NO_DIAGNOSTICS
    return text[-cap:]


def _execute_scene(scene, target_fps, target_resolution, target_duration, source):
    traj = simulate(scene)
    clip = rasterize(scene, traj, source=source)
    return normalize_clip(clip, target_fps, target_resolution, target_duration)


def run_scene(
    entry: SceneEntry,
    benchmark_dir: str | Path,
    adapter: Adapter,
    run_dir: str | Path,
    cfg: RunConfig,
) -> tuple[RunRecord, dict]:
    """Evaluate one scene end to end; never raises."""
    t_begin = time.perf_counter()
    benchmark_dir = Path(benchmark_dir)
    scene_dir = Path(run_dir) / entry.scene_id
    scene_dir.mkdir(parents=True, exist_ok=True)

    clip_dir = benchmark_dir / entry.clip_dir
    ref_manifest = read_manifest(clip_dir)
    target_fps = ref_manifest.fps
    target_res = (ref_manifest.width, ref_manifest.height)
    target_duration = ref_manifest.frame_count / ref_manifest.fps

    start = load_frame(clip_dir, entry.t_start - 1)
    later = load_frame(clip_dir, entry.t_later - 1)
    detection = None
    if cfg.provide_detection:
        detection = parse_detection((benchmark_dir / entry.detection_path).read_text())

    attempts: list[AttemptRecord] = []
    clip = None
    repair: RepairContext | None = None
    max_attempts = 2 if cfg.retry else 1

    for attempt_index in range(1, max_attempts + 1):
        record = AttemptRecord(index=attempt_index, ok=False, stage="invoke")
        attempts.append(record)
        req = ModelRequest(
            start_frame=start,
            later_frame=later,
            detection=detection,
            repair_context=repair,
            scene_id=entry.scene_id,
        )
        raw = ""
        try:
            raw = adapter.invoke(req)
        except HarnessError as exc:
            record.diagnostics.append(f"invoke: {type(exc).__name__}: {exc}")
        except Exception as exc:  # adapters must not kill the run
            record.diagnostics.append(f"invoke: internal error: {exc}")
        if raw:
            raw_path = scene_dir / f"attempt_{attempt_index}.txt"
            raw_path.write_text(raw)
            record.raw_path = raw_path.name
            try:
                record.stage = "parse"
                output = parse_scene(raw)
                record.stage = "validate"
                report = validate_scene(output.scene)
                scene = canonicalize_scene(output.scene)
                if not report.ok:
                    record.diagnostics.append("validate: repaired " + report.summary())
                record.stage = "simulate"
                clip = _execute_scene(scene, target_fps, target_res, target_duration, "generated")
                record.stage = "done"
                record.ok = True
                (scene_dir / "scene.json").write_text(serialize_scene(scene))
            except HarnessError as exc:
                record.diagnostics.append(f"{record.stage}: {type(exc).__name__}: {exc}")
                clip = None
            except Exception as exc:
                record.diagnostics.append(f"{record.stage}: internal error: {exc}")
                clip = None
        if record.ok:
            break
        repair = RepairContext(
            previous_raw=raw,
            diagnostics_summary=summarize_diagnostics(record.diagnostics),
        )

    used_fallback = False
    model_success = clip is not None
    system_success = True
    if clip is None:
        used_fallback = True
        try:
            world = WorldParams(
                resolution=target_res, fps=target_fps, duration_s=target_duration
            )
            scene = fallback_scene(world)
            clip = _execute_scene(scene, target_fps, target_res, target_duration, "fallback")
            (scene_dir / "scene.json").write_text(serialize_scene(scene))
        except Exception as exc:  # pragma: no cover - fallback is total by design
            system_success = False
            attempts[-1].diagnostics.append(f"fallback: internal error: {exc}")

    clip_ref = ""
    if clip is not None:
        save_clip(clip, scene_dir / "clip")
        clip_ref = "clip"

    record = RunRecord(
        scene_id=entry.scene_id,
        attempts=attempts,
        used_fallback=used_fallback,
        clip_ref=clip_ref,
        model_success=model_success,
        system_success=system_success,
    )
    (scene_dir / "record.json").write_text(json.dumps(record.to_dict(), indent=2))
    timing = {"scene_id": entry.scene_id, "seconds": time.perf_counter() - t_begin}
    return record, timing


def run_benchmark(
    manifest: BenchmarkManifest,
    benchmark_dir: str | Path,
    adapter: Adapter,
    run_dir: str | Path,
    cfg: RunConfig,
) -> list[RunRecord]:
    """run_scene over the manifest with a bounded worker pool; records come
    back in manifest order regardless of completion order. Wall-clock
    timings go to a separate log so run outputs stay byte-stable."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    results: dict[str, tuple[RunRecord, dict]] = {}
    if cfg.workers <= 1:
        for entry in manifest.scenes:
            results[entry.scene_id] = run_scene(entry, benchmark_dir, adapter, run_dir, cfg)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {
                entry.scene_id: pool.submit(
                    run_scene, entry, benchmark_dir, adapter, run_dir, cfg
                )
                for entry in manifest.scenes
            }
            for scene_id, fut in futures.items():
                results[scene_id] = fut.result()

    records = [results[e.scene_id][0] for e in manifest.scenes]
    timings = [results[e.scene_id][1] for e in manifest.scenes]
    from .stats import success_summary  # local import avoids a module cycle

    summary = success_summary(records)
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    (run_dir / "timings.log").write_text(
        "".join(json.dumps(t) + "\n" for t in timings)
    )
    return records


def load_records(run_dir: str | Path, manifest: BenchmarkManifest) -> list[RunRecord]:
    records = []
    for entry in manifest.scenes:
        path = Path(run_dir) / entry.scene_id / "record.json"
        records.append(RunRecord.from_dict(json.loads(path.read_text())))
    return records
