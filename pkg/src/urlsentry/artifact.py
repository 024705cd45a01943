"""Versioned on-disk model bundles.

An artifact is a single JSON document carrying the feature spec, fitted
preprocessing (outlier bounds + scaler), the optional autoencoder, and one
classifier. All floats serialize at full round-trip precision and the
payload is covered by a SHA-256 checksum; the creation timestamp lives
outside the checksum so re-running the same training reproduces the payload
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import CorruptArtifact, FeatureSpecMismatch, UnsupportedVersion
from .features import FeatureSpec, featurize_many
from .knn import KnnModel, predict_knn_batch
from .neural import AutoencoderModel, LayerParams, MlpModel, encode, predict_proba_mlp_batch
from .pipeline import OutlierBounds, Scaler, apply_bounds, apply_scaler
from .trees import (
    BoostedModel,
    ForestModel,
    TreeNode,
    predict_boosted_batch,
    predict_forest_batch,
)

FORMAT_VERSION = 1

CLASSIFIER_KINDS = ("mlp", "knn", "xgb", "gb", "rf")


@dataclass
class ModelArtifact:
    feature_spec: FeatureSpec
    bounds: OutlierBounds
    scaler: Scaler
    feature_mode: str  # raw | autoencoder_latent
    autoencoder: AutoencoderModel | None
    classifier_kind: str
    classifier: object
    seed: int
    dataset_fingerprint: str
    format_version: int = FORMAT_VERSION
    created_at: str = ""


# ---------------------------------------------------------------------------
# Prediction through an artifact
# ---------------------------------------------------------------------------

def transform_features(artifact: ModelArtifact, features: np.ndarray) -> np.ndarray:
    """Apply the artifact's fitted preprocessing (and encoder) to raw features."""
    if features.shape[1] != artifact.feature_spec.dim:
        raise FeatureSpecMismatch(
            f"artifact expects {artifact.feature_spec.dim} features, "
            f"data has {features.shape[1]}"
        )
    X = apply_scaler(artifact.scaler, apply_bounds(artifact.bounds, features))
    if artifact.feature_mode == "autoencoder_latent":
        X = encode(artifact.autoencoder, X)
    return np.atleast_2d(X)


def predict_feature_matrix(artifact: ModelArtifact, features: np.ndarray) -> np.ndarray:
    """Malicious-probability for each row of an unscaled feature matrix."""
    X = transform_features(artifact, features)
    kind = artifact.classifier_kind
    if kind == "mlp":
        return predict_proba_mlp_batch(artifact.classifier, X)
    if kind == "knn":
        return predict_knn_batch(artifact.classifier, X)
    if kind in ("xgb", "gb"):
        return predict_boosted_batch(artifact.classifier, X)
    if kind == "rf":
        return predict_forest_batch(artifact.classifier, X)
    raise CorruptArtifact(f"unknown classifier kind {kind!r}")


def predict_urls(artifact: ModelArtifact, urls: list[str]) -> np.ndarray:
    """Malicious-probability for each URL string."""
    features = featurize_many(urls, artifact.feature_spec)
    return predict_feature_matrix(artifact, features)


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------

def _layer_to_dict(layer: LayerParams) -> dict:
    return {
        "weights": layer.weights.tolist(),
        "biases": layer.biases.tolist(),
        "activation": layer.activation,
    }


def _layer_from_dict(d: dict) -> LayerParams:
    return LayerParams(
        weights=np.asarray(d["weights"], dtype=np.float64),
        biases=np.asarray(d["biases"], dtype=np.float64),
        activation=d["activation"],
    )


def _tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"value": node.value}
    return {
        "feature": node.feature_index,
        "threshold": node.threshold,
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _tree_from_dict(d: dict) -> TreeNode:
    if "value" in d:
        return TreeNode(value=float(d["value"]))
    return TreeNode(
        feature_index=int(d["feature"]),
        threshold=float(d["threshold"]),
        left=_tree_from_dict(d["left"]),
        right=_tree_from_dict(d["right"]),
    )


def _classifier_to_dict(kind: str, model) -> dict:
    if kind == "mlp":
        return {"layers": [_layer_to_dict(l) for l in model.layers]}
    if kind == "knn":
        return {
            "features": model.stored_features.tolist(),
            "labels": model.stored_labels.tolist(),
            "default_k": model.default_k,
        }
    if kind in ("xgb", "gb"):
        return {
            "variant": model.variant,
            "init_score": model.init_score,
            "learning_rate": model.learning_rate,
            "lam": model.lam,
            "gamma": model.gamma,
            "trees": [_tree_to_dict(t) for t in model.trees],
        }
    if kind == "rf":
        return {
            "n_trees": model.n_trees,
            "m_features": model.m_features,
            "bootstrap": model.bootstrap,
            "seed": model.seed,
            "trees": [_tree_to_dict(t) for t in model.trees],
        }
    raise ValueError(f"unknown classifier kind {kind!r}")


def _classifier_from_dict(kind: str, d: dict):
    if kind == "mlp":
        return MlpModel(layers=[_layer_from_dict(l) for l in d["layers"]])
    if kind == "knn":
        return KnnModel(
            stored_features=np.asarray(d["features"], dtype=np.float64),
            stored_labels=np.asarray(d["labels"], dtype=np.int64),
            default_k=int(d["default_k"]),
        )
    if kind in ("xgb", "gb"):
        return BoostedModel(
            variant=d["variant"],
            init_score=float(d["init_score"]),
            trees=[_tree_from_dict(t) for t in d["trees"]],
            learning_rate=float(d["learning_rate"]),
            lam=float(d["lam"]),
            gamma=float(d["gamma"]),
        )
    if kind == "rf":
        return ForestModel(
            trees=[_tree_from_dict(t) for t in d["trees"]],
            n_trees=int(d["n_trees"]),
            m_features=int(d["m_features"]),
            bootstrap=bool(d["bootstrap"]),
            seed=int(d["seed"]),
        )
    raise CorruptArtifact(f"unknown classifier kind {kind!r}")


def _autoencoder_to_dict(model: AutoencoderModel | None) -> dict | None:
    if model is None:
        return None
    return {
        "latent_dim": model.latent_dim,
        "encoder": [_layer_to_dict(l) for l in model.encoder_layers],
        "decoder": [_layer_to_dict(l) for l in model.decoder_layers],
    }


def _autoencoder_from_dict(d: dict | None) -> AutoencoderModel | None:
    if d is None:
        return None
    return AutoencoderModel(
        encoder_layers=[_layer_from_dict(l) for l in d["encoder"]],
        decoder_layers=[_layer_from_dict(l) for l in d["decoder"]],
        latent_dim=int(d["latent_dim"]),
    )


def _payload(artifact: ModelArtifact) -> dict:
    return {
        "feature_spec": {"keywords": list(artifact.feature_spec.keywords)},
        "bounds": {
            "lower": artifact.bounds.lower.tolist(),
            "upper": artifact.bounds.upper.tolist(),
        },
        "scaler": {
            "min": artifact.scaler.col_min.tolist(),
            "max": artifact.scaler.col_max.tolist(),
        },
        "feature_mode": artifact.feature_mode,
        "autoencoder": _autoencoder_to_dict(artifact.autoencoder),
        "classifier_kind": artifact.classifier_kind,
        "classifier": _classifier_to_dict(artifact.classifier_kind, artifact.classifier),
        "seed": artifact.seed,
        "dataset_fingerprint": artifact.dataset_fingerprint,
    }


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_model(artifact: ModelArtifact, path: str) -> None:
    """Write the artifact as checksummed JSON; numeric values lose no precision."""
    payload = _payload(artifact)
    canon = _canonical(payload)
    document = {
        "format_version": FORMAT_VERSION,
        "created_at": artifact.created_at or datetime.now(timezone.utc).isoformat(),
        "checksum": hashlib.sha256(canon.encode("utf-8")).hexdigest(),
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(document, fh, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> ModelArtifact:
    """Load and verify an artifact; predictions match the saved model exactly."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorruptArtifact(f"artifact is not valid JSON: {exc}") from exc

    version = document.get("format_version")
    if not isinstance(version, int):
        raise CorruptArtifact("artifact lacks an integer format_version")
    if version > FORMAT_VERSION:
        raise UnsupportedVersion(found=version, supported=FORMAT_VERSION)

    payload = document.get("payload")
    stored = document.get("checksum")
    if payload is None or stored is None:
        raise CorruptArtifact("artifact lacks payload or checksum")
    actual = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
    if actual != stored:
        raise CorruptArtifact("checksum mismatch: artifact bytes were altered")

    try:
        return ModelArtifact(
            feature_spec=FeatureSpec(keywords=tuple(payload["feature_spec"]["keywords"])),
            bounds=OutlierBounds(
                lower=np.asarray(payload["bounds"]["lower"], dtype=np.float64),
                upper=np.asarray(payload["bounds"]["upper"], dtype=np.float64),
            ),
            scaler=Scaler(
                col_min=np.asarray(payload["scaler"]["min"], dtype=np.float64),
                col_max=np.asarray(payload["scaler"]["max"], dtype=np.float64),
            ),
            feature_mode=payload["feature_mode"],
            autoencoder=_autoencoder_from_dict(payload["autoencoder"]),
            classifier_kind=payload["classifier_kind"],
            classifier=_classifier_from_dict(
                payload["classifier_kind"], payload["classifier"]
            ),
            seed=int(payload["seed"]),
            dataset_fingerprint=payload["dataset_fingerprint"],
            format_version=version,
            created_at=document.get("created_at", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArtifact(f"artifact payload is structurally invalid: {exc}") from exc
