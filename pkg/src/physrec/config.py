"""Configuration objects: evaluation hyperparameters plus the harness-level
config file schema. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError


def _from_dict(cls, doc: dict, path: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object")
    known = {f.name for f in fields(cls)}
    for key in doc:
        if key not in known:
            raise ConfigError(f"{path}.{key}: unknown config key")
    return cls(**doc)


@dataclass
class EvalConfig:
    """Alignment and metric hyperparameters (defaults are the evaluation
    protocol defaults; the flow_* and *_max_pairs knobs are harness-level
    performance settings)."""

    sample_every: int = 3
    max_offset: int = 30           # in sampled frames
    window: int = 3                # stack refinement window (odd)
    offset_penalty: float = 0.05
    downsample: int = 64           # coarse thumbnail longer side
    top_k: int = 5
    max_samples: int = 16          # coarse anchor frames
    dtw_feature_size: int = 48     # square grayscale DTW features
    dtw_step_penalty: float = 0.005
    stack_escalation_threshold: float = 0.05
    metric_max_pairs: int = 16
    flow_max_pairs: int = 12
    flow_resolution: int = 128
    flow_alpha2: float = 1e-3
    flow_iterations: int = 60
    flow_levels: int = 4
    embed_provider: str = "thumb32"

    def __post_init__(self):
        numeric = (
            self.sample_every, self.max_offset, self.window, self.offset_penalty,
            self.downsample, self.top_k, self.max_samples, self.dtw_feature_size,
            self.dtw_step_penalty, self.stack_escalation_threshold,
            self.metric_max_pairs, self.flow_max_pairs, self.flow_resolution,
            self.flow_alpha2, self.flow_iterations, self.flow_levels,
        )
        if any(v <= 0 for v in numeric):
            raise ConfigError("all evaluation hyperparameters must be positive")
        if self.window % 2 != 1:
            raise ConfigError("window must be odd")


@dataclass
class BenchmarkConfig:
    templates: list[str] = field(default_factory=lambda: ["all"])
    seeds_per_template: int = 4
    duration_s: float = 3.0
    fps: int = 30
    resolution: list[int] = field(default_factory=lambda: [512, 512])
    t_start: int = 1
    t_later: int = 10
    split: str = "sub"

    def __post_init__(self):
        if not (1 <= self.t_start < self.t_later):
            raise ConfigError("keyframes must satisfy 1 <= t_start < t_later")
        if self.duration_s <= 0 or self.fps < 1:
            raise ConfigError("duration_s and fps must be positive")


@dataclass
class AdapterSpec:
    kind: str = "oracle"           # http | oracle | replay | fault-wrap
    endpoint: str = ""
    credential_env: str = "PHYSREC_API_KEY"
    timeout_s: float = 60.0
    requests_per_s: float = 0.0    # 0 = unlimited
    sigma_pos: float = 0.0
    sigma_vel: float = 0.0
    noise_seed: int = 0
    replay_dir: str = ""
    fault_mode: str = "never"      # never | first_attempt | always | scenes
    fault_scenes: list[str] = field(default_factory=list)
    inner: str = ""                # inner adapter name for fault-wrap

    def __post_init__(self):
        if self.kind not in ("http", "oracle", "replay", "fault-wrap"):
            raise ConfigError(f"unknown adapter kind {self.kind!r}")
        if self.sigma_pos < 0 or self.sigma_vel < 0:
            raise ConfigError("noise sigmas must be >= 0")
        if self.kind == "fault-wrap" and not self.inner:
            raise ConfigError("fault-wrap adapter requires an inner adapter name")


@dataclass
class RunConfig:
    workers: int = 4
    retry: bool = True
    provide_detection: bool = True
    run_id: str = ""

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class HarnessConfig:
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    run: RunConfig = field(default_factory=RunConfig)
    adapters: dict[str, AdapterSpec] = field(default_factory=dict)

    @staticmethod
    def from_dict(doc: dict) -> "HarnessConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config root must be an object")
        known = {"benchmark", "eval", "run", "adapters"}
        for key in doc:
            if key not in known:
                raise ConfigError(f"$.{key}: unknown config key")
        adapters_doc = doc.get("adapters", {})
        if not isinstance(adapters_doc, dict):
            raise ConfigError("$.adapters: expected an object")
        adapters = {
            name: _from_dict(AdapterSpec, spec, f"$.adapters.{name}")
            for name, spec in adapters_doc.items()
        }
        return HarnessConfig(
            benchmark=_from_dict(BenchmarkConfig, doc.get("benchmark", {}), "$.benchmark"),
            eval=_from_dict(EvalConfig, doc.get("eval", {}), "$.eval"),
            run=_from_dict(RunConfig, doc.get("run", {}), "$.run"),
            adapters=adapters,
        )

    def to_dict(self) -> dict:
        return {
            "benchmark": asdict(self.benchmark),
            "eval": asdict(self.eval),
            "run": asdict(self.run),
            "adapters": {k: asdict(v) for k, v in self.adapters.items()},
        }


def load_config(path: str | Path | None) -> HarnessConfig:
    if path is None:
        return HarnessConfig()
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    return HarnessConfig.from_dict(doc)
