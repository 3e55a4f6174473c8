"""Pipeline stages with persisted artifacts, checksums, and skip-if-fresh.

Every stage writes its artifact plus a JSON sidecar recording the stage
parameters, the checksums of the inputs it consumed, and the checksum of
the artifact it produced. A stage is skipped when all of those still match,
so re-running a pipeline only rebuilds what a config or input edit actually
invalidated. Staleness is content-based: copying a tree elsewhere does not
trigger rebuilds, while editing an upstream artifact does.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .config import PipelineConfig
from .corpus import (
    SparseCountMatrix,
    Vocabulary,
    build_vocabulary,
    count_cooccurrences,
    load_counts,
    load_stopwords,
    load_vocabulary,
    read_corpus,
    save_counts,
    save_vocabulary,
)
from .embeddings import (
    load_embeddings,
    nearest_neighbors,
    ppmi,
    save_embeddings,
    svd_embed,
)
from .errors import ConfigError, DataError
from .graph import build_knn_graph, load_graph, save_graph
from .propagation import (
    Lexicon,
    SeedSet,
    WalkParams,
    bestpath_scores,
    bootstrap,
    clamped_propagation,
    load_ppmi,
    load_seed_set,
    pmi_baseline,
    random_walk_scores,
    save_ppmi,
)

log = logging.getLogger(__name__)

ARTIFACTS = {
    "vocab": "vocab.txt",
    "counts": "counts.txt",
    "ppmi": "ppmi.txt",
    "embeddings": "embeddings.txt",
    "graph": "graph.txt",
    "lexicon": "lexicon.tsv",
}


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def artifact_path(cfg: PipelineConfig, name: str) -> Path:
    return Path(cfg.output_dir) / ARTIFACTS[name]


def _meta_path(artifact: Path) -> Path:
    return artifact.with_name(artifact.name + ".meta.json")


def _require_file(path: str | Path, what: str) -> Path:
    p = Path(path)
    if not str(path):
        raise ConfigError(f"no {what} configured")
    if not p.is_file():
        raise DataError(f"missing {what}: {p}")
    return p


def _require_artifact(cfg: PipelineConfig, name: str, producer: str) -> Path:
    p = artifact_path(cfg, name)
    if not p.is_file():
        raise DataError(f"missing input artifact: {p} (run '{producer}' first)")
    return p


def _read_meta(artifact: Path) -> dict | None:
    meta = _meta_path(artifact)
    if not meta.is_file():
        return None
    try:
        return json.loads(meta.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return None


def _write_meta(artifact: Path, stage: str, params: dict, inputs: dict, extra: dict | None = None) -> None:
    record = {
        "stage": stage,
        "tool_version": __version__,
        "params": params,
        "inputs": inputs,
        "output_sha256": file_sha256(artifact),
    }
    if extra:
        record.update(extra)
    _meta_path(artifact).write_text(
        json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _is_fresh(artifact: Path, stage: str, params: dict, inputs: dict) -> bool:
    if not artifact.is_file():
        return False
    meta = _read_meta(artifact)
    if meta is None:
        return False
    if meta.get("stage") != stage or meta.get("tool_version") != __version__:
        return False
    if meta.get("params") != params or meta.get("inputs") != inputs:
        return False
    return meta.get("output_sha256") == file_sha256(artifact)


@contextmanager
def output_lock(cfg: PipelineConfig):
    """Exclusive lock on the output directory for mutating commands."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lock = out / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(
            f"output directory is locked by another run: {lock} "
            "(delete the lock file if that run is gone)"
        ) from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _load_bound_vocab(cfg: PipelineConfig) -> Vocabulary:
    return load_vocabulary(_require_artifact(cfg, "vocab", "vocab"))


def _check_binding(artifact: Path, vocab: Vocabulary) -> None:
    """Fail when an artifact was built against a different vocabulary."""
    meta = _read_meta(artifact)
    recorded = (meta or {}).get("vocab_hash")
    if recorded and recorded != vocab.content_hash():
        raise DataError(
            f"stale artifact: {artifact} (vocabulary changed since it was built; "
            "re-run the producing stage)"
        )


def stage_vocab(cfg: PipelineConfig) -> Path:
    corpus_file = _require_file(cfg.corpus, "corpus file")
    params = {
        "min_count": cfg.min_count,
        "top_n": cfg.top_n,
        "lowercase": cfg.lowercase,
    }
    inputs = {"corpus": file_sha256(corpus_file)}
    stop = None
    if cfg.stopwords:
        stop_file = _require_file(cfg.stopwords, "stopword file")
        inputs["stopwords"] = file_sha256(stop_file)
        stop = load_stopwords(stop_file, lowercase=cfg.lowercase)
    out = artifact_path(cfg, "vocab")
    if _is_fresh(out, "vocab", params, inputs):
        log.info("vocab: %s is fresh, skipping", out)
        return out
    vocab = build_vocabulary(
        read_corpus(corpus_file, lowercase=cfg.lowercase),
        min_count=cfg.min_count,
        top_n=cfg.top_n,
        stopwords=stop,
    )
    save_vocabulary(vocab, out)
    _write_meta(out, "vocab", params, inputs, {"vocab_hash": vocab.content_hash()})
    log.info("vocab: %d words -> %s", len(vocab), out)
    return out


def stage_cooccur(cfg: PipelineConfig) -> Path:
    corpus_file = _require_file(cfg.corpus, "corpus file")
    vocab_file = _require_artifact(cfg, "vocab", "vocab")
    vocab = load_vocabulary(vocab_file)
    params = {"window_size": cfg.window_size, "lowercase": cfg.lowercase}
    inputs = {"corpus": file_sha256(corpus_file), "vocab": file_sha256(vocab_file)}
    out = artifact_path(cfg, "counts")
    if _is_fresh(out, "cooccur", params, inputs):
        log.info("cooccur: %s is fresh, skipping", out)
        return out
    counts = count_cooccurrences(
        read_corpus(corpus_file, lowercase=cfg.lowercase),
        vocab,
        window_size=cfg.window_size,
    )
    save_counts(counts, out)
    _write_meta(out, "cooccur", params, inputs, {"vocab_hash": counts.vocab_hash})
    log.info("cooccur: %d stored pairs -> %s", counts.nnz, out)
    return out


def stage_embed(cfg: PipelineConfig) -> Path:
    counts_file = _require_artifact(cfg, "counts", "cooccur")
    vocab = _load_bound_vocab(cfg)
    _check_binding(counts_file, vocab)
    params = {
        "smoothing": cfg.smoothing,
        "embedding_dim": cfg.embedding_dim,
        "svd_seed": cfg.svd_seed,
    }
    inputs = {
        "counts": file_sha256(counts_file),
        "vocab": file_sha256(artifact_path(cfg, "vocab")),
    }
    out = artifact_path(cfg, "embeddings")
    ppmi_file = artifact_path(cfg, "ppmi")
    if _is_fresh(out, "embed", params, inputs) and _is_fresh(
        ppmi_file, "ppmi", params, inputs
    ):
        log.info("embed: %s is fresh, skipping", out)
        return out
    counts = load_counts(counts_file, vocab_hash=vocab.content_hash())
    weighted = ppmi(counts, c=cfg.smoothing)
    save_ppmi(weighted, ppmi_file)
    _write_meta(ppmi_file, "ppmi", params, inputs, {"vocab_hash": vocab.content_hash()})
    dim = len(vocab)
    d = cfg.embedding_dim
    if d >= dim:
        d = dim - 1
        if d < 1:
            raise DataError("vocabulary too small to embed")
        log.warning(
            "embedding_dim %d capped to %d for a %d-word vocabulary",
            cfg.embedding_dim, d, dim,
        )
    emb = svd_embed(weighted, vocab, d, seed=cfg.svd_seed)
    save_embeddings(emb, out)
    _write_meta(out, "embed", params, inputs, {"vocab_hash": vocab.content_hash()})
    log.info("embed: %d x %d embeddings -> %s", len(vocab), d, out)
    return out


def stage_graph(cfg: PipelineConfig) -> Path:
    emb_file = _require_artifact(cfg, "embeddings", "embed")
    vocab = _load_bound_vocab(cfg)
    _check_binding(emb_file, vocab)
    params = {"graph_k": cfg.graph_k}
    inputs = {"embeddings": file_sha256(emb_file)}
    out = artifact_path(cfg, "graph")
    if _is_fresh(out, "graph", params, inputs):
        log.info("graph: %s is fresh, skipping", out)
        return out
    emb = load_embeddings(emb_file, expected_vocab=vocab)
    graph = build_knn_graph(emb, k=cfg.graph_k)
    save_graph(graph, out)
    _write_meta(out, "graph", params, inputs, {"vocab_hash": vocab.content_hash()})
    log.info("graph: %d edges -> %s", graph.n_edges, out)
    return out


def _load_seeds(cfg: PipelineConfig) -> SeedSet:
    pos = _require_file(cfg.seeds_positive, "positive seed file")
    neg = _require_file(cfg.seeds_negative, "negative seed file")
    return load_seed_set(pos, neg)


def stage_induce(cfg: PipelineConfig, with_bootstrap: bool = False) -> Path:
    seeds = _load_seeds(cfg)
    vocab = _load_bound_vocab(cfg)
    walk = WalkParams(beta=cfg.beta, tol=cfg.tol, max_iter=cfg.max_iter)
    params: dict = {"method": cfg.method, "bootstrap": with_bootstrap}
    inputs = {
        "seeds_positive": file_sha256(cfg.seeds_positive),
        "seeds_negative": file_sha256(cfg.seeds_negative),
    }
    if with_bootstrap and cfg.method != "walk":
        raise ConfigError("bootstrap is only defined for the walk method")

    if cfg.method in ("walk", "clamped"):
        graph_file = _require_artifact(cfg, "graph", "graph")
        _check_binding(graph_file, vocab)
        inputs["graph"] = file_sha256(graph_file)
        params.update(beta=cfg.beta, tol=cfg.tol, max_iter=cfg.max_iter)
        if with_bootstrap:
            params.update(
                bootstrap_b=cfg.bootstrap_b,
                subset_size=cfg.subset_size,
                bootstrap_seed=cfg.bootstrap_seed,
            )
    elif cfg.method == "bestpath":
        ppmi_file = _require_artifact(cfg, "ppmi", "embed")
        _check_binding(ppmi_file, vocab)
        inputs["ppmi"] = file_sha256(ppmi_file)
        params.update(bestpath_k=cfg.bestpath_k, bestpath_hops=cfg.bestpath_hops)
    else:  # pmi
        counts_file = _require_artifact(cfg, "counts", "cooccur")
        _check_binding(counts_file, vocab)
        inputs["counts"] = file_sha256(counts_file)
        params.update(smoothing=cfg.smoothing, pmi_alpha=cfg.pmi_alpha)

    out = artifact_path(cfg, "lexicon")
    if _is_fresh(out, "induce", params, inputs):
        log.info("induce: %s is fresh, skipping", out)
        return out

    if cfg.method == "walk":
        graph = load_graph(artifact_path(cfg, "graph"), vocab)
        if with_bootstrap:
            lexicon = bootstrap(
                graph,
                seeds,
                walk,
                n_runs=cfg.bootstrap_b,
                subset_size=cfg.subset_size,
                rng_seed=cfg.bootstrap_seed,
                workers=cfg.workers,
            )
        else:
            lexicon = random_walk_scores(graph, seeds, walk)
    elif cfg.method == "clamped":
        graph = load_graph(artifact_path(cfg, "graph"), vocab)
        lexicon = clamped_propagation(graph, seeds, walk)
    elif cfg.method == "bestpath":
        weighted = load_ppmi(artifact_path(cfg, "ppmi"))
        lexicon = bestpath_scores(
            weighted, vocab, seeds, k=cfg.bestpath_k, max_hops=cfg.bestpath_hops
        )
    else:
        counts = load_counts(
            artifact_path(cfg, "counts"), vocab_hash=vocab.content_hash()
        )
        lexicon = pmi_baseline(
            counts, vocab, seeds, c=cfg.smoothing, alpha=cfg.pmi_alpha
        )
    lexicon.metadata["tool_version"] = __version__
    lexicon.to_tsv(out)
    _write_meta(out, "induce", params, inputs, {"vocab_hash": vocab.content_hash()})
    log.info("induce: %d-word lexicon (%s) -> %s", len(lexicon), cfg.method, out)
    return out


def neighbors_query(cfg: PipelineConfig, word: str, k: int) -> list[tuple[str, float]]:
    emb_file = _require_artifact(cfg, "embeddings", "embed")
    emb = load_embeddings(emb_file)
    return nearest_neighbors(emb, word, k)
