"""urlsentry: lexical malicious-URL detection library and CLI.

Pipeline: URL featurization -> cleaning/scaling/outlier bounding ->
optional autoencoder latents -> one of five classifiers (MLP, k-NN,
second-order boosting, gradient boosting, random forest) -> confidence
filtering into safe/flagged URL lists.
"""

from importlib import resources

from .artifact import ModelArtifact, load_model, predict_urls, save_model
from .config import PipelineConfig
from .errors import UrlSentryError
from .evaluation import (
    ComparisonTable,
    ConfusionMatrix,
    MetricsReport,
    compare_classifiers,
    compute_metrics,
    confusion_matrix,
)
from .features import FeatureSpec, UrlParts, extract_features, feature_names, parse_url
from .knn import KnnModel, k_nearest, predict_knn
from .neural import (
    AutoencoderModel,
    MlpModel,
    TrainConfig,
    encode,
    predict_proba_mlp,
    train_autoencoder,
    train_mlp,
)
from .pipeline import (
    Dataset,
    RawRecord,
    Scaler,
    SplitConfig,
    apply_scaler,
    bound_outliers,
    clean,
    fit_scaler,
    load_csv,
    map_labels,
    stratified_split,
)
from .runner import (
    Verdict,
    evaluate_artifact,
    filter_predictions,
    load_labeled_dataset,
    make_verdicts,
    run_compare,
    train_artifact,
)
from .trees import (
    BoostedModel,
    ForestModel,
    TreeNode,
    best_split,
    gini,
    grow_tree,
    predict_boosted,
    predict_forest,
    predict_tree,
    train_gradient_boosting,
    train_random_forest,
    train_xgb,
)

__version__ = "0.1.0"


def sample_dataset_path() -> str:
    """Path to the bundled labeled sample CSV used by tests and docs."""
    return str(resources.files("urlsentry").joinpath("data/sample_urls.csv"))
