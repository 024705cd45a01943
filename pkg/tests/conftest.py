import numpy as np
import pytest

import urlsentry
from urlsentry.pipeline import Dataset

URL_SCHEMES = ("http://", "https://", "")
URL_TLDS = (".com", ".org", ".net", ".tk", ".xyz")
URL_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789-_."


def random_url(rng: np.random.Generator) -> str:
    host = "".join(rng.choice(list("abcdefghijklmnopqrstuvwxyz0123456789-"))
                   for _ in range(int(rng.integers(3, 15))))
    url = rng.choice(URL_SCHEMES) + host + rng.choice(URL_TLDS)
    if rng.random() < 0.6:
        depth = int(rng.integers(1, 4))
        url += "".join(
            "/" + "".join(rng.choice(list(URL_CHARS)) for _ in range(int(rng.integers(1, 8))))
            for _ in range(depth)
        )
    if rng.random() < 0.3:
        url += "?q=" + str(int(rng.integers(0, 10_000)))
    if rng.random() < 0.15:
        url += "&login=1"
    return url


def random_urls(n: int, seed: int = 0) -> list[str]:
    rng = np.random.default_rng(seed)
    return [random_url(rng) for _ in range(n)]


def separable_dataset(seed: int = 123, n_per_class: int = 10) -> Dataset:
    """2-d points split by the plane x + y = 5; separation is re-certified
    with an explicit margin check at build time."""
    rng = np.random.default_rng(seed)
    x0 = rng.normal(1.0, 0.3, size=(n_per_class, 2))
    x1 = rng.normal(4.0, 0.3, size=(n_per_class, 2))
    X = np.vstack([x0, x1])
    y = np.array([0] * n_per_class + [1] * n_per_class)
    signed = X.sum(axis=1) - 5.0
    assert np.abs(signed).min() > 0.5, "toy set lost its separation margin"
    assert all((signed[i] > 0) == (y[i] == 1) for i in range(len(y)))
    return Dataset(X, y, [f"toy-{i}" for i in range(len(y))])


@pytest.fixture(scope="session")
def sample_csv() -> str:
    return urlsentry.sample_dataset_path()


@pytest.fixture
def toy_dataset() -> Dataset:
    return separable_dataset()
