#!/usr/bin/env python3
"""Regenerate the bundled sample dataset (src/urlsentry/data/sample_urls.csv).

Synthetic but shaped like real traffic: benign URLs are short and clean,
phishing leans on credential keywords and hyphenated hosts, defacement on
long query-heavy CMS paths, malware on raw IPs and executable downloads.
Deterministic: re-running reproduces the same file.
"""

import csv
import os
import random

OUT = os.path.join(
    os.path.dirname(__file__), "..", "src", "urlsentry", "data", "sample_urls.csv"
)

WORDS = [
    "garden", "recipe", "weather", "museum", "library", "travel", "cinema",
    "science", "history", "nature", "kitchen", "fitness", "photo", "music",
    "market", "journal", "academy", "studio", "atlas", "harbor", "meadow",
    "timber", "copper", "willow", "juniper", "falcon", "maple", "cedar",
    "orchid", "lantern", "compass", "quarry", "summit", "prairie", "canyon",
    "bakery", "gallery", "theatre", "archive", "bulletin", "courier",
]

SECTIONS = ["news", "articles", "blog", "docs", "guides", "events", "shop",
            "forum", "wiki", "media", "about", "help", "archive", "reviews"]

BRANDISH = ["payvault", "bankmail", "securepay", "netfunds", "cardpoint",
            "trustwire", "safedesk", "accountly", "globalpay", "mailvault"]

KEYWORDS = ["login", "verify", "account", "secure", "bank", "signin", "update"]

SKETCHY_TLDS = ["tk", "ml", "gq", "cf", "top", "xyz", "icu", "club"]

CMS_BITS = ["content", "option", "task", "view", "itemid", "catid", "lang",
            "page", "section", "module", "layout", "tmpl"]

EXE_NAMES = ["setup", "install", "update", "player", "codec", "plugin",
             "flash", "viewer", "toolbar", "cleaner"]


def ip(rng):
    return ".".join(str(rng.randint(1, 254)) for _ in range(4))


def benign(rng):
    w = rng.choice(WORDS)
    tld = rng.choice(["com", "org", "net", "edu", "io"])
    scheme = "https" if rng.random() < 0.85 else "http"
    sub = rng.choice(["www.", "", "", rng.choice(SECTIONS) + "."])
    n = rng.random()
    if n < 0.35:
        return f"{scheme}://{sub}{w}.{tld}/{rng.choice(SECTIONS)}/{rng.choice(WORDS)}.html"
    if n < 0.6:
        return f"{scheme}://{sub}{w}.{tld}/{rng.choice(SECTIONS)}"
    if n < 0.8:
        return f"{scheme}://{sub}{w}{rng.choice(WORDS)}.{tld}/"
    return f"{scheme}://{sub}{w}.{tld}"


def phishing(rng):
    kw = rng.choice(KEYWORDS)
    n = rng.random()
    if n < 0.25:
        host = f"{rng.choice(BRANDISH)}-{kw}.{rng.choice(SKETCHY_TLDS)}"
        return f"http://{host}/{kw}?session={rng.randint(10_000, 999_999)}"
    if n < 0.5:
        host = f"{rng.choice(BRANDISH)}.{kw}-{rng.choice(WORDS)}.{rng.choice(SKETCHY_TLDS)}"
        return f"http://{host}/{rng.choice(KEYWORDS)}/{rng.choice(KEYWORDS)}.php"
    if n < 0.7:
        return (
            f"http://{ip(rng)}/{kw}/confirm.php?user={rng.randint(100, 9999)}"
            f"&token={rng.randint(100_000, 9_999_999)}"
        )
    if n < 0.9:
        host = f"{kw}-{rng.choice(BRANDISH)}{rng.randint(1, 99)}.{rng.choice(SKETCHY_TLDS)}"
        return f"https://{host}/webapps/{kw}/verify?acct={rng.randint(1000, 99999)}"
    host = f"{rng.choice(WORDS)}{rng.randint(10, 99)}.{rng.choice(SKETCHY_TLDS)}"
    return f"http://{host}/~{rng.choice(BRANDISH)}/{kw}.html"


def defacement(rng):
    w = rng.choice(WORDS)
    tld = rng.choice(["com", "org", "net", "info"])
    bits = rng.sample(CMS_BITS, 3)
    path = rng.choice(["index.php", "main.php", "portal.php", "home.php"])
    query = "&".join(f"{b}={rng.randint(1, 500)}" for b in bits)
    extra = rng.choice(["", f"&view={rng.choice(CMS_BITS)}", "&lang=en"])
    return f"http://www.{w}{rng.choice(WORDS)}.{tld}/{path}?{query}{extra}"


def malware(rng):
    n = rng.random()
    exe = rng.choice(EXE_NAMES)
    if n < 0.4:
        return f"http://{ip(rng)}/{exe}{rng.randint(1, 99)}.exe"
    if n < 0.7:
        host = f"{rng.choice(WORDS)}{rng.randint(100, 999)}.{rng.choice(SKETCHY_TLDS)}"
        return f"http://{host}/download/{exe}.exe?free={rng.randint(0, 1)}"
    if n < 0.85:
        host = f"free-{rng.choice(WORDS)}{rng.randint(10, 99)}.{rng.choice(SKETCHY_TLDS)}"
        return f"http://{host}/files/{exe}_{rng.randint(1000, 9999)}.zip"
    return f"http://{ip(rng)}:{rng.choice([81, 88, 8081, 8443])}/bin/{exe}.exe"


def main():
    rng = random.Random(42)
    rows = []
    seen = set()

    def add(maker, label, count):
        made = 0
        while made < count:
            url = maker(rng)
            if url in seen:
                continue
            seen.add(url)
            rows.append((url, label))
            made += 1

    add(benign, "benign", 300)
    add(phishing, "phishing", 150)
    add(defacement, "defacement", 75)
    add(malware, "malware", 75)
    rng.shuffle(rows)

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["url", "type"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {os.path.normpath(OUT)}")


if __name__ == "__main__":
    main()
