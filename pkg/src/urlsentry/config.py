"""Pipeline configuration: defaults, config-file parsing, flag merging.

The config file is flat key = value text using the same keys as the CLI
flags; CLI flags override file values, and unknown keys are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import neural, trees
from .errors import ConfigError
from .pipeline import DEFAULT_LABEL_MAP, SplitConfig

FEATURE_MODES = ("raw", "latent")
CLASSIFIER_CHOICES = ("mlp", "knn", "xgb", "gb", "rf", "all")

# Keys accepted in a config file; mirrors the CLI flags.
CONFIG_FILE_KEYS = ("data", "model", "seed", "threshold", "out", "features", "classifier")


@dataclass
class PipelineConfig:
    feature_mode: str = "latent"
    classifier: str = "all"
    threshold: float = 0.5
    seed: int = 42
    test_fraction: float = 0.2
    stratified: bool = True
    max_rows: int = 50_000
    out_dir: str = "out"
    data_path: str | None = None
    model_path: str | None = None
    label_map: dict = field(default_factory=lambda: dict(DEFAULT_LABEL_MAP))
    knn_k: int = 5
    mlp: neural.TrainConfig = field(default_factory=neural.TrainConfig)
    autoencoder: neural.TrainConfig = field(
        default_factory=lambda: neural.DEFAULT_AUTOENCODER_CONFIG
    )
    forest: trees.ForestParams = field(default_factory=trees.ForestParams)
    gb: trees.BoostParams = field(default_factory=trees.BoostParams)
    xgb: trees.XgbParams = field(default_factory=trees.XgbParams)

    def split_config(self) -> SplitConfig:
        return SplitConfig(
            test_fraction=self.test_fraction, seed=self.seed, stratified=self.stratified
        )

    def validate(self) -> "PipelineConfig":
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigError(f"features must be one of {FEATURE_MODES}, got {self.feature_mode!r}")
        if self.classifier not in CLASSIFIER_CHOICES:
            raise ConfigError(
                f"classifier must be one of {CLASSIFIER_CHOICES}, got {self.classifier!r}"
            )
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        return self


def parse_config_file(path: str) -> dict[str, str]:
    """Read flat key = value lines; '#' starts a comment; unknown keys reject."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{line_no}: expected key = value, got {stripped!r}")
            key, value = (part.strip() for part in stripped.split("=", 1))
            if key not in CONFIG_FILE_KEYS:
                raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
            values[key] = value
    return values


def build_config(file_values: dict[str, str], flag_values: dict) -> PipelineConfig:
    """Merge config-file values with CLI flags (flags win) into a PipelineConfig."""
    cfg = PipelineConfig()

    merged: dict[str, object] = dict(file_values)
    for key, value in flag_values.items():
        if value is not None:
            merged[key] = value

    for key, value in merged.items():
        try:
            if key == "seed":
                cfg = replace(cfg, seed=int(value))
            elif key == "threshold":
                cfg = replace(cfg, threshold=float(value))
            elif key == "features":
                cfg = replace(cfg, feature_mode=str(value))
            elif key == "classifier":
                cfg = replace(cfg, classifier=str(value))
            elif key == "out":
                cfg = replace(cfg, out_dir=str(value))
            elif key == "data":
                cfg = replace(cfg, data_path=str(value))
            elif key == "model":
                cfg = replace(cfg, model_path=str(value))
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"invalid value for {key!r}: {value!r}") from exc
    return cfg.validate()
