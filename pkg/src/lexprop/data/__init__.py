"""Bundled data: default seed-word pairs per domain and a demo corpus.

Seed pairs exist for three domains: ``standard_english``, ``finance``, and
``twitter``. The demo corpus is a small synthetic dataset with clearly
positive and negative word clusters, sized so the full pipeline runs in
seconds.
"""

from __future__ import annotations

import shutil
from importlib import resources
from pathlib import Path

from ..errors import DataError

DOMAINS = ("standard_english", "finance", "twitter")

_DEMO_FILES = (
    "corpus.txt",
    "seeds_positive.txt",
    "seeds_negative.txt",
    "gold.tsv",
    "valence.tsv",
)


def _read_lines(relative: str) -> list[str]:
    text = resources.files(__package__).joinpath(relative).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def seed_words(domain: str) -> tuple[list[str], list[str]]:
    """Default (positive, negative) seed word lists for a domain."""
    if domain not in DOMAINS:
        raise DataError(f"unknown seed domain {domain!r}; choose from {DOMAINS}")
    return (
        _read_lines(f"seeds/{domain}_positive.txt"),
        _read_lines(f"seeds/{domain}_negative.txt"),
    )


def copy_seed_files(domain: str, dest: str | Path) -> tuple[Path, Path]:
    """Copy a domain's seed files into ``dest``; returns the two paths."""
    if domain not in DOMAINS:
        raise DataError(f"unknown seed domain {domain!r}; choose from {DOMAINS}")
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    out = []
    for side in ("positive", "negative"):
        name = f"{domain}_{side}.txt"
        src = resources.files(__package__).joinpath(f"seeds/{name}")
        target = dest / name
        target.write_text(src.read_text(encoding="utf-8"), encoding="utf-8")
        out.append(target)
    return out[0], out[1]


def copy_demo(dest: str | Path) -> Path:
    """Materialize the demo corpus, seeds, golds, and a ready config file.

    Returns the path of the written config; its output_dir points at
    ``dest/out``.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    for name in _DEMO_FILES:
        src = resources.files(__package__).joinpath(f"demo/{name}")
        (dest / name).write_text(src.read_text(encoding="utf-8"), encoding="utf-8")
    config = dest / "demo.cfg"
    config.write_text(
        "# demo pipeline: small synthetic corpus, runs in seconds\n"
        f"corpus = {dest / 'corpus.txt'}\n"
        f"seeds_positive = {dest / 'seeds_positive.txt'}\n"
        f"seeds_negative = {dest / 'seeds_negative.txt'}\n"
        f"output_dir = {dest / 'out'}\n"
        "min_count = 1\n"
        "window_size = 4\n"
        "smoothing = 0.75\n"
        "embedding_dim = 20\n"
        "graph_k = 5\n"
        "beta = 0.9\n"
        "bootstrap_b = 10\n"
        "subset_size = 3\n"
        "method = walk\n",
        encoding="utf-8",
    )
    return config
