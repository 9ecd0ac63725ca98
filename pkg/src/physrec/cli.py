"""Command-line surface: generate | run | evaluate | compare | report.

All paths resolve against --root. Exit codes: 0 success, 1 user/config
error, 2 incomplete run. Outputs are byte-stable for identical inputs;
wall-clock timings live in a separate timings.log.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import kernels
from .adapters import build_adapter
from .benchgen import (
    benchmark_config_digest,
    build_benchmark,
    load_manifest,
    manifest_path,
    template_ids,
)
from .config import HarnessConfig, load_config
from .errors import ConfigError, HarnessError, IncompleteRun
from .evaluate import evaluate_run, load_reports
from .pipeline import load_records, run_benchmark
from .stats import (
    aggregate,
    boxplot_export,
    compare_aggregates,
    emit_leaderboard,
    success_summary,
)

EXIT_USER_ERROR = 1
EXIT_INCOMPLETE = 2


def _fail(exc: HarnessError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_INCOMPLETE if isinstance(exc, IncompleteRun) else EXIT_USER_ERROR)


@click.group()
@click.option("--root", type=click.Path(file_okay=False), default=".", show_default=True,
              help="Directory all benchmark/run paths resolve against.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Harness config file (JSON).")
@click.pass_context
def main(ctx, root, config_path):
    """Execution-based physical-reasoning evaluation harness."""
    ctx.ensure_object(dict)
    try:
        cfg = load_config(config_path)
    except HarnessError as exc:
        _fail(exc)
    ctx.obj["root"] = Path(root)
    ctx.obj["cfg"] = cfg


def _resolve_templates(cfg: HarnessConfig, templates_opt: str | None) -> list[str]:
    raw = templates_opt.split(",") if templates_opt else list(cfg.benchmark.templates)
    raw = [t.strip() for t in raw if t.strip()]
    if raw == ["all"]:
        return template_ids()
    return raw


@main.command()
@click.option("--templates", default=None, help='Comma-separated template ids or "all".')
@click.option("--seeds", type=int, default=None, help="Seeds per template.")
@click.option("--force", is_flag=True, help="Rebuild even when up to date.")
@click.pass_context
def generate(ctx, templates, seeds, force):
    """Build the reference benchmark (clips, annotations, manifest)."""
    cfg: HarnessConfig = ctx.obj["cfg"]
    bench_cfg = cfg.benchmark
    bench_cfg.templates = _resolve_templates(cfg, templates)
    if seeds is not None:
        bench_cfg.seeds_per_template = seeds
    out_dir = ctx.obj["root"] / "benchmark"
    try:
        if manifest_path(out_dir).exists() and not force:
            existing = load_manifest(out_dir)
            if existing.config_digest == benchmark_config_digest(bench_cfg):
                click.echo(f"benchmark up to date ({len(existing.scenes)} scenes)")
                return
        manifest = build_benchmark(bench_cfg, out_dir)
    except HarnessError as exc:
        _fail(exc)
    click.echo(
        f"benchmark built: {len(manifest.scenes)} scenes "
        f"({len(set(e.template_id for e in manifest.scenes))} templates x "
        f"{bench_cfg.seeds_per_template} seeds) in {out_dir}"
    )


@main.command()
@click.option("--adapter", "adapter_name", required=True, help="Adapter name (config key, or oracle/http).")
@click.option("--no-retry", is_flag=True, help="Truncate after the first attempt.")
@click.option("--workers", type=int, default=None)
@click.option("--run-id", default=None, help="Run directory name (default: adapter name).")
@click.pass_context
def run(ctx, adapter_name, no_retry, workers, run_id):
    """Evaluate every benchmark scene with the given adapter."""
    cfg: HarnessConfig = ctx.obj["cfg"]
    root: Path = ctx.obj["root"]
    run_cfg = cfg.run
    if no_retry:
        run_cfg.retry = False
    if workers is not None:
        run_cfg.workers = workers
    rid = run_id or run_cfg.run_id or adapter_name
    bench_dir = root / "benchmark"
    try:
        manifest = load_manifest(bench_dir)
        adapter = build_adapter(adapter_name, cfg.adapters, bench_dir)
        records = run_benchmark(manifest, bench_dir, adapter, root / "runs" / rid, run_cfg)
        summary = success_summary(records)
    except FileNotFoundError as exc:
        _fail(IncompleteRun(f"benchmark not found: {exc}"))
    except HarnessError as exc:
        _fail(exc)
    click.echo(
        f"run {rid}: model_success={summary['model_success']:.3f} "
        f"system_success={summary['system_success']:.3f} "
        f"fixed_by_retry={summary['fixed_by_retry']:.3f}"
    )


@main.command()
@click.option("--run-id", required=True)
@click.pass_context
def evaluate(ctx, run_id):
    """Align and score every scene of a run against its reference."""
    cfg: HarnessConfig = ctx.obj["cfg"]
    root: Path = ctx.obj["root"]
    bench_dir = root / "benchmark"
    run_dir = root / "runs" / run_id
    try:
        manifest = load_manifest(bench_dir)
        if not run_dir.exists():
            raise IncompleteRun(f"run directory {run_dir} does not exist")
        reports = evaluate_run(manifest, bench_dir, run_dir, cfg.eval)
        agg = aggregate(reports, manifest)
    except FileNotFoundError as exc:
        _fail(IncompleteRun(str(exc)))
    except HarnessError as exc:
        _fail(exc)
    click.echo(f"evaluated {len(reports)} scenes (run {run_id})")
    for metric in sorted(agg.means):
        click.echo(f"  {metric}: {agg.means[metric]:.4f}")


def _load_aggregate(root: Path, run_id: str):
    manifest = load_manifest(root / "benchmark")
    reports = load_reports(root / "runs" / run_id)
    return aggregate(reports, manifest), manifest


@main.command()
@click.argument("run_a")
@click.argument("run_b")
@click.option("--out", "out_dir", default="reports", show_default=True)
@click.option("--resamples", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def compare(ctx, run_a, run_b, out_dir, resamples, seed):
    """Paired bootstrap CIs of per-scene differences between two runs."""
    root: Path = ctx.obj["root"]
    try:
        agg_a, _ = _load_aggregate(root, run_a)
        agg_b, _ = _load_aggregate(root, run_b)
        cis = compare_aggregates(agg_a, agg_b, run_a, run_b, n_resamples=resamples, seed=seed)
    except FileNotFoundError as exc:
        _fail(IncompleteRun(str(exc)))
    except HarnessError as exc:
        _fail(exc)
    out = root / out_dir
    out.mkdir(parents=True, exist_ok=True)
    doc = [vars(ci) for ci in cis]
    (out / "ci-report.json").write_text(json.dumps(doc, indent=2))
    methods = {run_a: agg_a.means, run_b: agg_b.means}
    for fmt, name in (("csv", "leaderboard.csv"), ("markdown", "leaderboard.md"),
                      ("json", "leaderboard.json")):
        (out / name).write_text(emit_leaderboard(methods, fmt))
    click.echo(f"comparison written to {out}")
    for ci in cis:
        click.echo(
            f"  {ci.metric}: improvement {ci.mean_improvement:+.4f} "
            f"[{ci.ci_low:+.4f}, {ci.ci_high:+.4f}]"
        )


@main.command()
@click.option("--runs", "runs_opt", required=True, help="Comma-separated run ids.")
@click.option("--out", "out_dir", default="reports", show_default=True)
@click.pass_context
def report(ctx, runs_opt, out_dir):
    """Leaderboard and per-scene boxplot data across runs."""
    root: Path = ctx.obj["root"]
    run_ids = [r.strip() for r in runs_opt.split(",") if r.strip()]
    try:
        aggregates = {}
        methods = {}
        for rid in run_ids:
            agg, manifest = _load_aggregate(root, rid)
            records = load_records(root / "runs" / rid, manifest)
            summary = success_summary(records)
            aggregates[rid] = agg
            methods[rid] = {
                **agg.means,
                "model_success": summary["model_success"],
                "system_success": summary["system_success"],
            }
    except FileNotFoundError as exc:
        _fail(IncompleteRun(str(exc)))
    except HarnessError as exc:
        _fail(exc)
    out = root / out_dir
    out.mkdir(parents=True, exist_ok=True)
    for fmt, name in (("csv", "leaderboard.csv"), ("markdown", "leaderboard.md"),
                      ("json", "leaderboard.json")):
        (out / name).write_text(emit_leaderboard(methods, fmt))
    (out / "boxplot-data.json").write_text(json.dumps(boxplot_export(aggregates), indent=2))
    click.echo(f"report written to {out} (kernel backend: {kernels.BACKEND})")
    click.echo(emit_leaderboard(methods, "markdown"))


if __name__ == "__main__":
    main()
