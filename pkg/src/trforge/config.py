"""Run configuration: one file (TOML or JSON), sections per stage.

Defaults encode the curation recipe this package implements: strict
probability thresholds, a 50K sample clustered into 100 groups, 14 kept
clusters capped at 52K members, OCR after resizing the short edge to 384,
four 4K GPT-4 pools, and the sampling temperatures per task family.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .filtering import FilterThresholds
from .llmclient import RetryPolicy, TemperatureProfile
from .textlayout import LayoutParams


@dataclass
class PathsConfig:
    metadata: str = ""
    embeddings: str = ""
    ocr_dir: str = ""
    out_dir: str = "out"


@dataclass
class ClusteringConfig:
    k: int = 100
    sample_n: int = 50000
    max_iter: int = 100
    tol: float = 1e-4
    keep: tuple[int, ...] = ()
    keep_cluster_count: int = 14
    cap_per_cluster: int = 52000

    def __post_init__(self):
        if self.k < 1 or self.sample_n < 1:
            raise ValidationError("k and sample_n must be positive")
        if self.keep and len(self.keep) != self.keep_cluster_count:
            raise ValidationError(
                f"keep list has {len(self.keep)} clusters, "
                f"config says {self.keep_cluster_count}"
            )


@dataclass
class Gpt4PoolConfig:
    clusters: tuple[int, ...] = (3, 4, 6, 9)
    per_cluster: int = 4000

    @property
    def total(self) -> int:
        return len(self.clusters) * self.per_cluster


@dataclass
class LlmConfig:
    endpoint_env: str = "TRFORGE_LLM_ENDPOINT"
    api_key_env: str = "TRFORGE_LLM_API_KEY"
    model: str = "gpt-4-0314"
    temperatures: TemperatureProfile = field(default_factory=TemperatureProfile)
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    max_in_flight: int = 4
    budget_requests: int | None = None


@dataclass
class EvalConfig:
    anls_tau: float = 0.5
    fontsize_targets: tuple[int, ...] = tuple(range(3, 20))
    judge_prompt_path: str | None = None


@dataclass
class RunConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    thresholds: FilterThresholds = field(default_factory=FilterThresholds)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    gpt4_pool: Gpt4PoolConfig = field(default_factory=Gpt4PoolConfig)
    layout: LayoutParams = field(default_factory=LayoutParams)
    llm: LlmConfig = field(default_factory=LlmConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    downsample_target: int = 384
    taxonomy_path: str | None = None


_SECTIONS = {
    "paths": PathsConfig,
    "thresholds": FilterThresholds,
    "clustering": ClusteringConfig,
    "gpt4_pool": Gpt4PoolConfig,
    "layout": LayoutParams,
    "llm": LlmConfig,
    "eval": EvalConfig,
}

_TUPLE_FIELDS = {"keep", "clusters", "fontsize_targets"}


def _build_section(cls, values: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in values.items():
        if key not in names:
            raise ValidationError(f"unknown key {key!r} in [{cls.__name__}]")
        if key in _TUPLE_FIELDS:
            value = tuple(int(v) for v in value)
        elif key == "temperatures":
            value = TemperatureProfile(**value)
        elif key == "retry":
            value = RetryPolicy(**value)
        kwargs[key] = value
    return cls(**kwargs)


def load_config(path: str | Path | None = None) -> RunConfig:
    """Defaults when path is None; otherwise overlay the file's sections
    onto the defaults. Extension picks the parser (.toml or .json)."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if path.suffix == ".toml":
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    elif path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
    else:
        raise ValidationError(f"config must be .toml or .json, got {path.name}")
    if not isinstance(doc, dict):
        raise ValidationError("config root must be a table/object")

    kwargs = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ValidationError(f"section {key!r} must be a table/object")
            kwargs[key] = _build_section(_SECTIONS[key], value)
        elif key == "downsample_target":
            kwargs[key] = int(value)
        elif key == "taxonomy_path":
            kwargs[key] = str(value)
        else:
            raise ValidationError(f"unknown config section {key!r}")
    return RunConfig(**kwargs)
