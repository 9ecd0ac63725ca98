"""Cross-scene aggregation, paired bootstrap confidence intervals, success
accounting, and leaderboard/boxplot emission.

The bootstrap is paired: methods are compared on identical scene sets via
per-scene signed differences (direction-aware: for lower-is-better metrics
the improvement is baseline - ours, else ours - baseline, so positive always
means "ours is better"). Resampling is seeded and counter-based, hence
bitwise reproducible.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DirectionUnknown, EmptyRun, IncompleteRun
from .metrics import METRIC_DIRECTIONS

METRIC_FAMILIES: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("reconstruction", ("psnr", "ssim")),
    ("semantic", ("embed_sim",)),
    ("text", ("rouge_l_f1",)),
    ("motion", ("flow_epe", "flow_mag_diff", "flow_angular_deg", "align_err")),
    ("success", ("model_success", "system_success")),
)

_ARROWS = {"up": "↑", "down": "↓"}


@dataclass
class Aggregate:
    scene_ids: list[str]
    metrics: dict[str, np.ndarray]          # metric -> per-scene values
    difficulty: dict[str, str]              # scene_id -> label
    means: dict[str, float] = field(default_factory=dict)
    means_by_difficulty: dict[str, dict[str, float]] = field(default_factory=dict)


def aggregate(reports: list[dict], manifest) -> Aggregate:
    """Per-metric means over all scenes, plus per-difficulty strata.
    A manifest scene without a report is an error, never silently dropped."""
    by_id = {r["scene_id"]: r for r in reports}
    missing = [e.scene_id for e in manifest.scenes if e.scene_id not in by_id]
    if missing:
        raise IncompleteRun(f"missing metric reports for scenes: {', '.join(missing)}")
    scene_ids = [e.scene_id for e in manifest.scenes]
    difficulty = {e.scene_id: e.difficulty for e in manifest.scenes}
    names = sorted(by_id[scene_ids[0]]["metrics"])
    metrics = {
        name: np.array([by_id[sid]["metrics"][name] for sid in scene_ids], dtype=np.float64)
        for name in names
    }
    agg = Aggregate(scene_ids=scene_ids, metrics=metrics, difficulty=difficulty)
    agg.means = {name: float(vals.mean()) for name, vals in metrics.items()}
    for label in sorted(set(difficulty.values())):
        idx = [i for i, sid in enumerate(scene_ids) if difficulty[sid] == label]
        agg.means_by_difficulty[label] = {
            name: float(vals[idx].mean()) for name, vals in metrics.items()
        }
    return agg


@dataclass
class BootstrapCI:
    metric: str
    comparison: str
    mean_improvement: float
    ci_low: float
    ci_high: float
    confidence: float = 0.95
    n_resamples: int = 10000


def signed_differences(ours: np.ndarray, baseline: np.ndarray, direction: str) -> np.ndarray:
    """Positive = ours better: ours-baseline for up metrics, baseline-ours
    for down metrics."""
    if direction == "up":
        return np.asarray(ours, dtype=np.float64) - np.asarray(baseline, dtype=np.float64)
    if direction == "down":
        return np.asarray(baseline, dtype=np.float64) - np.asarray(ours, dtype=np.float64)
    raise DirectionUnknown(f"unknown metric direction {direction!r}")


def paired_bootstrap(
    ours: np.ndarray,
    baseline: np.ndarray,
    direction: str,
    metric: str = "",
    comparison: str = "",
    n_resamples: int = 10000,
    seed: int = 0,
    exhaustive: bool = False,
) -> BootstrapCI:
    """Percentile-method CI over scene resampling of per-scene differences.

    ``exhaustive=True`` enumerates all n^n resamples (tiny n only), which the
    acceptance suite compares against an independent enumeration.
    """
    ours = np.asarray(ours, dtype=np.float64)
    baseline = np.asarray(baseline, dtype=np.float64)
    if ours.shape != baseline.shape or ours.ndim != 1 or ours.size == 0:
        raise EmptyRun("paired bootstrap needs matching nonempty per-scene values")
    diffs = signed_differences(ours, baseline, direction)
    n = diffs.size
    if exhaustive:
        if n**n > 1_000_000:
            raise ValueError(f"exhaustive resampling infeasible for n={n}")
        means = np.array(
            [diffs[list(tup)].mean() for tup in itertools.product(range(n), repeat=n)]
        )
        n_resamples = len(means)
    else:
        rng = np.random.Generator(np.random.Philox(key=seed))
        idx = rng.integers(0, n, size=(n_resamples, n))
        means = diffs[idx].mean(axis=1)
    lo, hi = np.percentile(means, [2.5, 97.5])
    return BootstrapCI(
        metric=metric,
        comparison=comparison,
        mean_improvement=float(diffs.mean()),
        ci_low=float(lo),
        ci_high=float(hi),
        n_resamples=n_resamples,
    )


def compare_aggregates(
    ours: Aggregate,
    baseline: Aggregate,
    ours_name: str,
    baseline_name: str,
    n_resamples: int = 10000,
    seed: int = 0,
) -> list[BootstrapCI]:
    if ours.scene_ids != baseline.scene_ids:
        raise IncompleteRun("paired comparison requires identical scene sets")
    out = []
    for metric in sorted(set(ours.metrics) & set(baseline.metrics)):
        direction = METRIC_DIRECTIONS.get(metric)
        if direction is None:
            raise DirectionUnknown(f"no direction registered for metric {metric!r}")
        out.append(
            paired_bootstrap(
                ours.metrics[metric],
                baseline.metrics[metric],
                direction,
                metric=metric,
                comparison=f"{ours_name} vs {baseline_name}",
                n_resamples=n_resamples,
                seed=seed,
            )
        )
    return out


def success_summary(records) -> dict:
    """Model/system success rates and the fraction fixed only by the retry."""
    if not records:
        raise EmptyRun("no run records")
    n = len(records)
    first_try = sum(1 for r in records if r.model_success and len(r.attempts) == 1)
    fixed = sum(1 for r in records if r.model_success and len(r.attempts) == 2)
    system = sum(1 for r in records if r.system_success)
    return {
        "n_scenes": n,
        "model_success": (first_try + fixed) / n,
        "system_success": system / n,
        "success_no_retry": first_try / n,
        "fixed_by_retry": fixed / n,
    }


# ---------------------------------------------------------------------------
# leaderboard / boxplot emission


def _ordered_columns(methods: dict[str, dict[str, float]]) -> list[tuple[str, str]]:
    present: set[str] = set()
    for values in methods.values():
        present.update(values)
    columns = []
    for family, names in METRIC_FAMILIES:
        for name in names:
            if name in present:
                columns.append((family, name))
    for name in sorted(present):  # anything unfamiliar goes last, alphabetically
        if all(name != c[1] for c in columns):
            columns.append(("other", name))
    return columns


def _header(name: str) -> str:
    return f"{name}{_ARROWS[METRIC_DIRECTIONS.get(name, 'up')]}"


def emit_leaderboard(methods: dict[str, dict[str, float]], fmt: str = "markdown") -> str:
    """Deterministic leaderboard document; columns grouped by metric family,
    direction arrows in the headers, one row per method."""
    columns = _ordered_columns(methods)
    rows = sorted(methods)

    def cell(method, metric):
        value = methods[method].get(metric)
        return "" if value is None else f"{value:.4f}"

    if fmt == "csv":
        lines = ["method," + ",".join(_header(m) for _, m in columns)]
        for method in rows:
            lines.append(method + "," + ",".join(cell(method, m) for _, m in columns))
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        head = "| method | " + " | ".join(_header(m) for _, m in columns) + " |"
        sep = "|" + "---|" * (len(columns) + 1)
        lines = [head, sep]
        for method in rows:
            lines.append(
                "| " + method + " | " + " | ".join(cell(method, m) for _, m in columns) + " |"
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = {
            "columns": [
                {
                    "metric": m,
                    "family": fam,
                    "direction": METRIC_DIRECTIONS.get(m, "up"),
                }
                for fam, m in columns
            ],
            "rows": [
                {"method": method, "values": {m: methods[method].get(m) for _, m in columns}}
                for method in rows
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown leaderboard format {fmt!r}")


def boxplot_data(values: np.ndarray) -> dict:
    """Quartiles, 1.5-IQR whiskers clamped to data points, and outliers."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    q1, median, q3 = (float(v) for v in np.percentile(values, [25, 50, 75]))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = values[(values >= lo_fence) & (values <= hi_fence)]
    whisker_low = float(inside[0]) if inside.size else q1
    whisker_high = float(inside[-1]) if inside.size else q3
    outliers = [float(v) for v in values[(values < lo_fence) | (values > hi_fence)]]
    return {
        "min": float(values[0]),
        "q1": q1,
        "median": median,
        "q3": q3,
        "max": float(values[-1]),
        "whisker_low": whisker_low,
        "whisker_high": whisker_high,
        "outliers": outliers,
    }


def boxplot_export(aggregates: dict[str, Aggregate]) -> dict:
    doc: dict = {}
    for method in sorted(aggregates):
        agg = aggregates[method]
        doc[method] = {
            metric: boxplot_data(vals) for metric, vals in sorted(agg.metrics.items())
        }
    return doc
