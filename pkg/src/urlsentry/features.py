"""Lexical URL featurization.

Every feature is computed from the URL string alone (no DNS, no fetching),
so extraction is deterministic and total: any non-empty string produces a
vector. Malformed percent-encodings and other oddities are treated as
literal characters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import EmptyUrl

IP_RE = re.compile(r"^(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})$")

SPECIAL_CHARS = "@?=&%_~"

DEFAULT_KEYWORDS = ("login", "secure", "account", "verify", "bank", "free")

_BASE_FEATURES = (
    "url_length",
    "host_length",
    "path_length",
    "count_dots",
    "count_hyphens",
    "count_digits",
    "count_special",
    "digit_ratio",
    "path_depth",
    "num_subdomains",
    "has_https",
    "host_is_ip",
)


@dataclass(frozen=True)
class UrlParts:
    scheme: str
    host: str
    path: str
    query: str
    host_is_ip: bool


@dataclass(frozen=True)
class FeatureSpec:
    """Fixed feature catalog: base lexical features plus one flag per keyword.

    Keyword flags appear after the base features, in keyword order, so
    appending a keyword never disturbs existing columns.
    """

    keywords: tuple[str, ...] = DEFAULT_KEYWORDS

    def __post_init__(self):
        lowered = tuple(k.lower() for k in self.keywords)
        object.__setattr__(self, "keywords", lowered)
        names = feature_names(self)
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")

    @property
    def dim(self) -> int:
        return len(_BASE_FEATURES) + len(self.keywords)


def feature_names(spec: FeatureSpec) -> list[str]:
    """Return the exact column order produced by extract_features."""
    return list(_BASE_FEATURES) + [f"kw_{k}" for k in spec.keywords]


def _is_dotted_quad(host: str) -> bool:
    m = IP_RE.match(host)
    if not m:
        return False
    return all(0 <= int(octet) <= 255 for octet in m.groups())


def parse_url(raw: str) -> UrlParts:
    """Split a raw URL string into scheme/host/path/query.

    No "://" means the scheme is empty and parsing starts at the host.
    Scheme and host are lowercased; path and query keep their case.
    """
    s = raw.strip()
    if not s:
        raise EmptyUrl("URL is empty or whitespace-only")

    if "://" in s:
        scheme, rest = s.split("://", 1)
        scheme = scheme.lower()
    else:
        scheme, rest = "", s

    # Host runs until the first path or query delimiter.
    cut = len(rest)
    for ch in "/?":
        pos = rest.find(ch)
        if pos != -1:
            cut = min(cut, pos)
    host = rest[:cut].lower()
    remainder = rest[cut:]

    if remainder.startswith("?"):
        path, query = "", remainder[1:]
    elif "?" in remainder:
        path, query = remainder.split("?", 1)
    else:
        path, query = remainder, ""

    return UrlParts(
        scheme=scheme,
        host=host,
        path=path,
        query=query,
        host_is_ip=_is_dotted_quad(host),
    )


def extract_features(raw: str, spec: FeatureSpec | None = None) -> np.ndarray:
    """Compute the lexical feature vector for one URL, in spec order.

    Pure function: identical (raw, spec) inputs always yield an identical
    float64 vector.
    """
    if spec is None:
        spec = FeatureSpec()
    parts = parse_url(raw)
    s = raw.strip()
    lowered = s.lower()

    n = len(s)
    digits = sum(c.isdigit() for c in s)

    values = [
        float(n),
        float(len(parts.host)),
        float(len(parts.path)),
        float(s.count(".")),
        float(s.count("-")),
        float(digits),
        float(sum(s.count(c) for c in SPECIAL_CHARS)),
        digits / n,
        float(parts.path.count("/")),
        float(max(parts.host.count(".") - 1, 0)),
        1.0 if parts.scheme == "https" else 0.0,
        1.0 if parts.host_is_ip else 0.0,
    ]
    values.extend(1.0 if kw in lowered else 0.0 for kw in spec.keywords)
    return np.asarray(values, dtype=np.float64)


def featurize_many(urls: list[str], spec: FeatureSpec | None = None) -> np.ndarray:
    """Stack feature vectors for a list of URLs into an n x d matrix."""
    if spec is None:
        spec = FeatureSpec()
    if not urls:
        return np.empty((0, spec.dim), dtype=np.float64)
    return np.stack([extract_features(u, spec) for u in urls])
