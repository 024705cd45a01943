"""End-to-end orchestration shared by the CLI commands.

Pipeline order, fixed for train and inference alike:
featurize -> winsorize (train bounds) -> min-max scale (train scaler)
-> optional autoencoder latents -> classifier.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

from . import knn as knn_mod
from . import neural, trees
from .artifact import ModelArtifact, predict_feature_matrix, predict_urls
from .config import PipelineConfig
from .errors import ConfigError, EmptyInput, ThresholdOutOfRange
from .evaluation import (
    ComparisonConfig,
    ComparisonTable,
    ConfusionMatrix,
    MetricsReport,
    compare_classifiers,
    compute_metrics,
    confusion_matrix,
)
from .features import FeatureSpec, featurize_many
from .pipeline import (
    CleanReport,
    Dataset,
    apply_bounds,
    apply_scaler,
    bound_outliers,
    clean,
    fit_scaler,
    load_csv,
    map_labels,
    stratified_split,
    stratified_subsample,
)


@dataclass(frozen=True)
class Verdict:
    url: str
    confidence: float  # malicious probability
    label: str  # "safe" | "flagged"


def filter_predictions(
    verdict_inputs: list[tuple[str, float]], threshold: float
) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    """Partition (url, confidence) pairs into (safe, flagged) by threshold.

    flagged holds confidence >= threshold; both lists keep input order.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ThresholdOutOfRange(f"threshold must be in [0, 1], got {threshold}")
    safe, flagged = [], []
    for item in verdict_inputs:
        (flagged if item[1] >= threshold else safe).append(item)
    return safe, flagged


def make_verdicts(artifact: ModelArtifact, urls: list[str], threshold: float) -> list[Verdict]:
    if not 0.0 <= threshold <= 1.0:
        raise ThresholdOutOfRange(f"threshold must be in [0, 1], got {threshold}")
    confidences = predict_urls(artifact, urls)
    return [
        Verdict(url=u, confidence=float(c), label="flagged" if c >= threshold else "safe")
        for u, c in zip(urls, confidences)
    ]


def dataset_fingerprint(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_labeled_dataset(
    path: str, config: PipelineConfig, spec: FeatureSpec | None = None
) -> tuple[Dataset, CleanReport]:
    """CSV -> cleaned, labeled, featurized Dataset."""
    if spec is None:
        spec = FeatureSpec()
    records = load_csv(path)
    records, report = clean(records)
    urls, labels = map_labels(records, config.label_map)
    features = featurize_many(urls, spec)
    return Dataset(features=features, labels=labels, urls=urls), report


def _feature_mode_name(config: PipelineConfig) -> str:
    return "autoencoder_latent" if config.feature_mode == "latent" else "raw"


def _seeded(cfg, seed: int):
    return replace(cfg, seed=seed)


def train_artifact(
    dataset: Dataset, config: PipelineConfig, fingerprint: str = ""
) -> ModelArtifact:
    """Fit preprocessing on the full dataset and train one classifier."""
    if dataset.n_rows == 0:
        raise EmptyInput("cannot train on an empty dataset")
    ds = stratified_subsample(dataset, config.max_rows, config.seed)
    spec = FeatureSpec()

    bounds, clipped = bound_outliers(ds.features)
    scaler = fit_scaler(clipped)
    X = apply_scaler(scaler, clipped)

    autoencoder = None
    if config.feature_mode == "latent":
        autoencoder = neural.train_autoencoder(X, _seeded(config.autoencoder, config.seed))
        X = neural.encode(autoencoder, X)

    work = Dataset(features=X, labels=ds.labels, urls=ds.urls)
    kind = config.classifier
    if kind == "mlp":
        model = neural.train_mlp(work, _seeded(config.mlp, config.seed))
    elif kind == "knn":
        model = knn_mod.KnnModel(
            stored_features=work.features,
            stored_labels=work.labels,
            default_k=min(config.knn_k, work.n_rows),
        )
    elif kind == "xgb":
        model = trees.train_xgb(work, config.xgb)
    elif kind == "gb":
        model = trees.train_gradient_boosting(work, config.gb)
    elif kind == "rf":
        model = trees.train_random_forest(work, _seeded(config.forest, config.seed))
    else:
        raise ConfigError(f"train needs a single classifier kind, got {kind!r}")

    return ModelArtifact(
        feature_spec=spec,
        bounds=bounds,
        scaler=scaler,
        feature_mode=_feature_mode_name(config),
        autoencoder=autoencoder,
        classifier_kind=kind,
        classifier=model,
        seed=config.seed,
        dataset_fingerprint=fingerprint,
    )


def run_compare(
    dataset: Dataset, config: PipelineConfig
) -> tuple[ComparisonTable, dict[str, ConfusionMatrix]]:
    """Subsample, split, preprocess, and run the five-way comparison."""
    ds = stratified_subsample(dataset, config.max_rows, config.seed)
    train, test = stratified_split(ds, config.split_config())

    bounds, train_clipped = bound_outliers(train.features)
    scaler = fit_scaler(train_clipped)
    train_x = apply_scaler(scaler, train_clipped)
    test_x = apply_scaler(scaler, apply_bounds(bounds, test.features))

    if config.feature_mode == "latent":
        autoencoder = neural.train_autoencoder(
            train_x, _seeded(config.autoencoder, config.seed)
        )
        train_x = neural.encode(autoencoder, train_x)
        test_x = neural.encode(autoencoder, test_x)

    comparison = ComparisonConfig(
        seed=config.seed,
        knn_k=config.knn_k,
        mlp=config.mlp,
        forest=config.forest,
        gb=config.gb,
        xgb=config.xgb,
        split_descriptor=(
            f"{int((1 - config.test_fraction) * 100)}/{int(config.test_fraction * 100)} "
            f"stratified, {ds.n_rows} rows, features={config.feature_mode}"
        ),
    )
    return compare_classifiers(
        Dataset(train_x, train.labels, train.urls),
        Dataset(test_x, test.labels, test.urls),
        comparison,
    )


def evaluate_artifact(
    artifact: ModelArtifact, dataset: Dataset
) -> tuple[ConfusionMatrix, MetricsReport]:
    """Score an artifact on labeled data; classification cut is 0.5."""
    confidences = predict_feature_matrix(artifact, dataset.features)
    predicted = [1 if c >= 0.5 else 0 for c in confidences]
    cm = confusion_matrix(predicted, [int(t) for t in dataset.labels])
    return cm, compute_metrics(cm)
