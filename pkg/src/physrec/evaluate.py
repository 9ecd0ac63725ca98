"""Per-scene metric reports for a completed run: temporal alignment first,
then every frame/motion/text metric on the aligned pairs.
"""

from __future__ import annotations

import json
from pathlib import Path

from .align import align_sampled, sample_frames
from .benchgen import BenchmarkManifest
from .clipio import load_clip
from .config import EvalConfig
from .errors import HarnessError, IncompleteRun
from .metrics import (
    METRIC_DIRECTIONS,
    embed_similarity,
    flow_metrics,
    psnr,
    rouge_l,
    ssim,
)
from .pipeline import RunRecord, load_records
from .scene import parse_scene


def _model_analysis(run_dir: Path, record: RunRecord) -> str:
    if not record.model_success:
        return ""
    for attempt in record.attempts:
        if attempt.ok and attempt.raw_path:
            raw = (run_dir / record.scene_id / attempt.raw_path).read_text()
            try:
                return parse_scene(raw).analysis
            except HarnessError:
                return ""
    return ""


def evaluate_scene(
    entry,
    benchmark_dir: str | Path,
    run_dir: str | Path,
    record: RunRecord,
    cfg: EvalConfig,
) -> dict:
    benchmark_dir = Path(benchmark_dir)
    run_dir = Path(run_dir)
    gen_clip_dir = run_dir / entry.scene_id / "clip"
    if not record.clip_ref or not gen_clip_dir.exists():
        raise IncompleteRun(f"scene {entry.scene_id!r} has no generated clip")
    ref = load_clip(benchmark_dir / entry.clip_dir)
    gen = load_clip(gen_clip_dir)

    ref_s = sample_frames(ref, cfg.sample_every)
    gen_s = sample_frames(gen, cfg.sample_every)
    alignment = align_sampled(ref_s, gen_s, cfg)
    pairing = alignment.pairing

    reference_text = (benchmark_dir / entry.description_path).read_text()
    analysis = _model_analysis(run_dir, record)

    metrics = {
        "psnr": psnr(ref_s, gen_s, pairing, cfg.metric_max_pairs),
        "ssim": ssim(ref_s, gen_s, pairing, cfg.metric_max_pairs),
        **flow_metrics(ref_s, gen_s, pairing, cfg),
        "rouge_l_f1": rouge_l(analysis, reference_text)["f1"],
        "embed_sim": embed_similarity(
            cfg.embed_provider, ref_s, gen_s, pairing, cfg.metric_max_pairs
        ),
        "align_err": alignment.alignment_error,
    }
    return {
        "scene_id": entry.scene_id,
        "alignment": {
            "offset": alignment.offset,
            "error": alignment.alignment_error,
            "stage": alignment.stage,
            "degenerate": alignment.degenerate,
        },
        "metrics": metrics,
        "directions": {name: METRIC_DIRECTIONS[name] for name in metrics},
    }


def evaluate_run(
    manifest: BenchmarkManifest,
    benchmark_dir: str | Path,
    run_dir: str | Path,
    cfg: EvalConfig,
) -> list[dict]:
    """Evaluate every scene of a run; writes metrics/<scene>.json plus a
    combined metrics.json, byte-stable across repeat invocations."""
    run_dir = Path(run_dir)
    records = load_records(run_dir, manifest)
    by_id = {r.scene_id: r for r in records}
    out_dir = run_dir / "metrics"
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    for entry in manifest.scenes:
        report = evaluate_scene(entry, benchmark_dir, run_dir, by_id[entry.scene_id], cfg)
        (out_dir / f"{entry.scene_id}.json").write_text(json.dumps(report, indent=2))
        reports.append(report)
    (run_dir / "metrics.json").write_text(json.dumps(reports, indent=2))
    return reports


def load_reports(run_dir: str | Path) -> list[dict]:
    path = Path(run_dir) / "metrics.json"
    if not path.exists():
        raise IncompleteRun(f"no metrics.json under {run_dir}; run `evaluate` first")
    return json.loads(path.read_text())
