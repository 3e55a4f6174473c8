"""Sentiment propagation from seed words over the lexical graph.

The main scorer runs a seeded random walk with restart on the symmetrically
normalized graph, once per seed polarity, and combines the visit
probabilities into a standardized polarity score. Bootstrap resampling of
seed subsets yields per-word standard deviations. Two alternative
propagators (clamped label spreading, best-path max-product) and a
propagation-free PMI scorer serve as baselines.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import SparseCountMatrix, Vocabulary
from .embeddings import PpmiMatrix
from .errors import ConvergenceError, DataError
from .graph import LexicalGraph, cosine_knn_pairs

log = logging.getLogger(__name__)

LABELS = ("positive", "neutral", "negative")


@dataclass
class WalkParams:
    """Random-walk settings: restart weight, convergence tolerance, budget."""

    beta: float = 0.9
    tol: float = 1e-6
    max_iter: int = 500

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise DataError(f"beta must be in (0, 1), got {self.beta}")
        if self.tol <= 0.0:
            raise DataError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise DataError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class SeedSet:
    """Disjoint positive and negative seed word lists."""

    positive: list[str]
    negative: list[str]

    def __post_init__(self) -> None:
        if not self.positive or not self.negative:
            raise DataError("both seed sides must be non-empty")
        overlap = set(self.positive) & set(self.negative)
        if overlap:
            raise DataError(f"seed sides overlap: {sorted(overlap)}")

    def resolve(self, vocab: Vocabulary) -> tuple[list[str], list[str]]:
        """Drop seeds missing from the vocabulary; error if a side empties."""
        out = []
        for side, words in (("positive", self.positive), ("negative", self.negative)):
            kept = [w for w in words if w in vocab]
            missing = [w for w in words if w not in vocab]
            if missing:
                log.warning(
                    "%d %s seed(s) not in vocabulary, dropped: %s",
                    len(missing), side, ", ".join(missing),
                )
            if not kept:
                raise DataError(f"no {side} seeds resolvable against the vocabulary")
            out.append(kept)
        return out[0], out[1]

    def checksum(self) -> str:
        h = hashlib.sha256()
        for w in self.positive:
            h.update(f"+{w}\n".encode("utf-8"))
        for w in self.negative:
            h.update(f"-{w}\n".encode("utf-8"))
        return h.hexdigest()


@dataclass
class Lexicon:
    """Per-word polarity scores with optional bootstrap std and labels."""

    words: list[str]
    scores: np.ndarray
    std: np.ndarray | None = None
    labels: list[str] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if len(self.words) != self.scores.size:
            raise DataError("lexicon words and scores differ in length")
        self._index = {w: i for i, w in enumerate(self.words)}
        if len(self._index) != len(self.words):
            raise DataError("duplicate words in lexicon")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def score(self, word: str) -> float:
        try:
            return float(self.scores[self._index[word]])
        except KeyError:
            raise DataError(f"word not in lexicon: {word!r}") from None

    def label(self, word: str) -> str | None:
        if self.labels is None:
            return None
        return self.labels[self._index[word]]

    def position(self, word: str) -> int:
        return self._index[word]

    def to_tsv(self, path: str | Path) -> None:
        """Write '#'-commented metadata, a header row, then one row per word."""
        with open(path, "w", encoding="utf-8") as fh:
            for key, value in self.metadata.items():
                fh.write(f"# {key} = {_format_meta(value)}\n")
            fh.write("word\tscore\tstd\tlabel\n")
            for i, w in enumerate(self.words):
                std = f"{self.std[i]:.12g}" if self.std is not None else ""
                label = self.labels[i] if self.labels is not None else ""
                fh.write(f"{w}\t{self.scores[i]:.12g}\t{std}\t{label}\n")

    @classmethod
    def from_tsv(cls, path: str | Path) -> "Lexicon":
        metadata: dict = {}
        words: list[str] = []
        scores: list[float] = []
        stds: list[float] = []
        labels: list[str] = []
        any_std = False
        any_label = False
        with open(path, encoding="utf-8") as fh:
            lines = iter(enumerate(fh, 1))
            header_seen = False
            for lineno, line in lines:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    body = line.lstrip("#").strip()
                    if "=" in body:
                        key, _, value = body.partition("=")
                        metadata[key.strip()] = value.strip()
                    continue
                if not header_seen:
                    if line.split("\t")[:2] != ["word", "score"]:
                        raise DataError(f"{path}:{lineno}: expected header 'word\\tscore...'")
                    header_seen = True
                    continue
                parts = line.split("\t")
                if len(parts) != 4:
                    raise DataError(f"{path}:{lineno}: expected 4 tab-separated columns")
                word, score_s, std_s, label = parts
                try:
                    scores.append(float(score_s))
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad score {score_s!r}") from None
                if std_s:
                    any_std = True
                    stds.append(float(std_s))
                else:
                    stds.append(np.nan)
                if label:
                    if label not in LABELS:
                        raise DataError(f"{path}:{lineno}: bad label {label!r}")
                    any_label = True
                labels.append(label)
                words.append(word)
        if not words:
            raise DataError(f"{path}: empty lexicon")
        return cls(
            words=words,
            scores=np.asarray(scores),
            std=np.asarray(stds) if any_std else None,
            labels=labels if any_label else None,
            metadata=metadata,
        )

    def with_labels(self, labels: Sequence[str]) -> "Lexicon":
        if len(labels) != len(self.words):
            raise DataError("label list length mismatch")
        return Lexicon(
            words=list(self.words),
            scores=self.scores.copy(),
            std=None if self.std is None else self.std.copy(),
            labels=list(labels),
            metadata=dict(self.metadata),
        )


def _format_meta(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)


def standardize(scores: np.ndarray) -> np.ndarray:
    """Shift and scale to zero mean and unit population variance."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size <= 1:
        return np.zeros_like(scores)
    std = scores.std()
    if std == 0.0:
        log.warning("all scores identical; standardization returns zeros")
        return np.zeros_like(scores)
    return (scores - scores.mean()) / std


def _symmetric_transition(adjacency: sp.csr_matrix) -> sp.csr_matrix:
    """D^(-1/2) E D^(-1/2) with D the diagonal of column sums of E."""
    col = np.asarray(adjacency.sum(axis=0)).ravel()
    inv_sqrt = np.zeros_like(col)
    nz = col > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(col[nz])
    scale = sp.diags(inv_sqrt)
    return (scale @ adjacency @ scale).tocsr()


def _resolve_walk_seeds(graph: LexicalGraph, seeds: Sequence[str]) -> list[int]:
    if not seeds:
        raise DataError("seed list is empty")
    idx = []
    for w in seeds:
        if w not in graph.vocab:
            raise DataError(f"seed word not in vocabulary: {w!r}")
        idx.append(graph.vocab.index[w])
    degrees = graph.degrees()
    kept = [i for i in idx if degrees[i] > 0]
    dropped = [i for i in idx if degrees[i] == 0]
    if dropped:
        log.warning(
            "%d isolated seed(s) dropped: %s",
            len(dropped), ", ".join(graph.vocab.words[i] for i in dropped),
        )
    if not kept:
        raise DataError("no resolvable seeds: all seeds are isolated")
    return kept


def random_walk(
    graph: LexicalGraph, seeds: Sequence[str], params: WalkParams | None = None
) -> np.ndarray:
    """Stationary visit scores of a restarting random walk from the seeds.

    Iterates p <- beta * T p + (1 - beta) * s on the symmetrically normalized
    adjacency, from the uniform vector, until the max-norm change drops below
    ``params.tol``. The restart vector s spreads 1/len(seeds) over the seeds.
    Isolated nodes score 0.
    """
    params = params or WalkParams()
    seed_idx = _resolve_walk_seeds(graph, seeds)
    n = graph.dim
    t = _symmetric_transition(graph.adjacency)
    s = np.zeros(n)
    s[seed_idx] = 1.0 / len(seed_idx)
    restart = (1.0 - params.beta) * s
    p = np.full(n, 1.0 / n)
    for _ in range(params.max_iter):
        p_next = params.beta * (t @ p) + restart
        residual = float(np.max(np.abs(p_next - p)))
        p = p_next
        if residual < params.tol:
            return p
    raise ConvergenceError(
        f"random walk did not converge within {params.max_iter} iterations "
        f"(final residual {residual:.3e}, tol {params.tol:g})",
        residual=residual,
        iterations=params.max_iter,
    )


def combine_polarity(p_pos: np.ndarray, p_neg: np.ndarray) -> np.ndarray:
    """Positive-polarity share p+ / (p+ + p-); unreachable words get 0.5."""
    p_pos = np.asarray(p_pos, dtype=np.float64)
    p_neg = np.asarray(p_neg, dtype=np.float64)
    denom = p_pos + p_neg
    out = np.full(p_pos.shape, 0.5)
    hit = denom > 0.0
    out[hit] = p_pos[hit] / denom[hit]
    return out


def random_walk_scores(
    graph: LexicalGraph, seeds: SeedSet, params: WalkParams | None = None
) -> Lexicon:
    """Standardized polarity scores from two seeded random walks.

    Walks once from the positive seeds and once from the negative seeds,
    combines the visit scores into a positive share per word, and
    standardizes the result to zero mean and unit variance.
    """
    params = params or WalkParams()
    pos, neg = seeds.resolve(graph.vocab)
    p_pos = random_walk(graph, pos, params)
    p_neg = random_walk(graph, neg, params)
    raw = combine_polarity(p_pos, p_neg)
    unreachable = [
        graph.vocab.words[i] for i in np.flatnonzero(p_pos + p_neg == 0.0)
    ]
    metadata = {
        "method": "walk",
        "beta": params.beta,
        "tol": params.tol,
        "k": graph.k,
        "seed_checksum": seeds.checksum(),
    }
    if unreachable:
        metadata["unreachable"] = unreachable
        log.warning("%d word(s) unreachable from both seed sets", len(unreachable))
    return Lexicon(
        words=list(graph.vocab.words),
        scores=standardize(raw),
        metadata=metadata,
    )


def bootstrap(
    graph: LexicalGraph,
    seeds: SeedSet,
    params: WalkParams | None = None,
    n_runs: int = 50,
    subset_size: int = 7,
    rng_seed: int = 0,
    workers: int = 1,
) -> Lexicon:
    """Mean and spread of walk scores over random seed subsets.

    Each run samples ``subset_size`` seeds per side without replacement,
    scores the vocabulary with :func:`random_walk_scores`, and the final
    score is the mean of the per-run standardized scores with the sample
    standard deviation as a confidence measure. Run b draws from its own
    RNG stream keyed by (rng_seed, b), so results do not depend on the
    number of workers or on execution order.
    """
    params = params or WalkParams()
    if n_runs < 2:
        raise DataError(f"bootstrap needs at least 2 runs, got {n_runs}")
    pos, neg = seeds.resolve(graph.vocab)
    limit = min(len(pos), len(neg))
    if not 1 <= subset_size <= limit:
        raise DataError(
            f"subset_size must be in [1, {limit}] for these seeds, got {subset_size}"
        )

    def one_run(b: int) -> np.ndarray:
        rng = np.random.default_rng([rng_seed, b])
        sub_pos = [pos[i] for i in rng.permutation(len(pos))[:subset_size]]
        sub_neg = [neg[i] for i in rng.permutation(len(neg))[:subset_size]]
        return random_walk_scores(graph, SeedSet(sub_pos, sub_neg), params).scores

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one_run, range(n_runs)))
    else:
        runs = [one_run(b) for b in range(n_runs)]
    mat = np.vstack(runs)
    # shift by the first run before reducing: variance is shift-invariant,
    # and identical runs then give exactly zero mean offset and zero std
    shifted = mat - mat[0]
    mean = mat[0] + shifted.mean(axis=0)
    std = shifted.std(axis=0, ddof=1)
    return Lexicon(
        words=list(graph.vocab.words),
        scores=mean,
        std=std,
        metadata={
            "method": "walk",
            "beta": params.beta,
            "tol": params.tol,
            "k": graph.k,
            "B": n_runs,
            "subset_size": subset_size,
            "rng_seed": rng_seed,
            "seed_checksum": seeds.checksum(),
        },
    )


def _clamped_fixed_point(
    graph: LexicalGraph,
    pos_idx: Sequence[int],
    neg_idx: Sequence[int],
    params: WalkParams,
) -> np.ndarray:
    """Iterate row-stochastic spreading with seeds re-clamped each pass."""
    adjacency = graph.adjacency
    row = np.asarray(adjacency.sum(axis=1)).ravel()
    inv = np.zeros_like(row)
    nz = row > 0
    inv[nz] = 1.0 / row[nz]
    t_row = (sp.diags(inv) @ adjacency).tocsr()
    y = np.zeros(graph.dim)
    y[list(pos_idx)] = 1.0
    y[list(neg_idx)] = -1.0
    for _ in range(params.max_iter):
        y_next = t_row @ y
        y_next[list(pos_idx)] = 1.0
        y_next[list(neg_idx)] = -1.0
        residual = float(np.max(np.abs(y_next - y)))
        y = y_next
        if residual < params.tol:
            return y
    raise ConvergenceError(
        f"clamped propagation did not converge within {params.max_iter} "
        f"iterations (final residual {residual:.3e})",
        residual=residual,
        iterations=params.max_iter,
    )


def clamped_propagation(
    graph: LexicalGraph, seeds: SeedSet, params: WalkParams | None = None
) -> Lexicon:
    """Label spreading with seeds clamped to +/-1 each iteration.

    Non-seed labels relax to the row-stochastic average of their neighbors;
    the fixed point is standardized like the walk scores.
    """
    params = params or WalkParams()
    pos, neg = seeds.resolve(graph.vocab)
    pos_idx = [graph.vocab.index[w] for w in pos]
    neg_idx = [graph.vocab.index[w] for w in neg]
    y = _clamped_fixed_point(graph, pos_idx, neg_idx, params)
    return Lexicon(
        words=list(graph.vocab.words),
        scores=standardize(y),
        metadata={
            "method": "clamped",
            "tol": params.tol,
            "k": graph.k,
            "seed_checksum": seeds.checksum(),
        },
    )


def _max_product_reach(
    n: int,
    edge_src: np.ndarray,
    edge_dst: np.ndarray,
    edge_w: np.ndarray,
    seed_idx: Sequence[int],
    max_hops: int,
) -> np.ndarray:
    """Best path product from any seed to each node within max_hops edges.

    Bounded Viterbi relaxation: seeds start at 1 (the empty path) and each
    round extends the best known products by one edge. Edge arrays must list
    both directions of every undirected edge.
    """
    reach = np.zeros(n)
    reach[list(seed_idx)] = 1.0
    for _ in range(max_hops):
        new = reach.copy()
        np.maximum.at(new, edge_dst, reach[edge_src] * edge_w)
        if np.array_equal(new, reach):
            break
        reach = new
    return reach


def _ppmi_knn_edges(
    ppmi_matrix: PpmiMatrix, k: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """kNN edges over PPMI context rows, weighted by clipped cosine."""
    mat = ppmi_matrix.matrix.tocsr()
    norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=1)).ravel())
    active = norms > 0.0
    inv = np.zeros_like(norms)
    inv[active] = 1.0 / norms[active]
    normed = (sp.diags(inv) @ mat).tocsr()
    ii, jj = cosine_knn_pairs(normed, k, active)
    if not ii.size:
        return (
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0),
        )
    cos = np.asarray(normed[ii].multiply(normed[jj]).sum(axis=1)).ravel()
    w = np.clip(cos, 0.0, 1.0)
    keep = w > 0.0
    ii, jj, w = ii[keep], jj[keep], w[keep]
    # list both directions for the relaxation
    src = np.concatenate([ii, jj])
    dst = np.concatenate([jj, ii])
    weights = np.concatenate([w, w])
    return src, dst, weights


def bestpath_scores(
    ppmi_matrix: PpmiMatrix,
    vocab: Vocabulary,
    seeds: SeedSet,
    k: int = 25,
    max_hops: int = 4,
) -> Lexicon:
    """Best-path propagation over a cosine kNN graph of PPMI context rows.

    A word's polarity per side is the largest product of edge weights along
    any path of at most ``max_hops`` edges from a seed on that side. The raw
    score is pol+ - lambda * pol- with lambda = sum(pol+) / sum(pol-)
    re-balancing the two sides; output is standardized. Disconnected words
    carry zero on both sides and score raw 0.
    """
    if k < 1 or max_hops < 1:
        raise DataError("k and max_hops must be >= 1")
    if len(vocab) != ppmi_matrix.dim:
        raise DataError(
            f"vocabulary size {len(vocab)} does not match matrix dim {ppmi_matrix.dim}"
        )
    pos, neg = seeds.resolve(vocab)
    src, dst, weights = _ppmi_knn_edges(ppmi_matrix, k)
    pos_idx = [vocab.index[w] for w in pos]
    neg_idx = [vocab.index[w] for w in neg]
    n = len(vocab)
    pol_pos = _max_product_reach(n, src, dst, weights, pos_idx, max_hops)
    pol_neg = _max_product_reach(n, src, dst, weights, neg_idx, max_hops)
    lam = pol_pos.sum() / pol_neg.sum()
    raw = pol_pos - lam * pol_neg
    return Lexicon(
        words=list(vocab.words),
        scores=standardize(raw),
        metadata={
            "method": "bestpath",
            "k": k,
            "max_hops": max_hops,
            "seed_checksum": seeds.checksum(),
        },
    )


def pmi_baseline(
    counts: SparseCountMatrix,
    vocab: Vocabulary,
    seeds: SeedSet,
    c: float = 0.75,
    alpha: float = 0.01,
) -> Lexicon:
    """Propagation-free scoring by summed seed association.

    score(w) = sum over positive seeds of PMI(w, s) minus the same sum over
    negative seeds, where PMI is the unclamped smoothed log-ratio. Additive
    smoothing ``alpha`` on every pair count gives absent pairs a finite
    floor. Words that never co-occur with anything are excluded.
    """
    if not 0.0 < c <= 1.0:
        raise DataError(f"smoothing exponent must be in (0, 1], got {c}")
    if alpha <= 0.0:
        raise DataError(f"alpha must be > 0, got {alpha}")
    if counts.vocab_hash and counts.vocab_hash != vocab.content_hash():
        raise DataError("count matrix is bound to a different vocabulary")
    if len(vocab) != counts.dim:
        raise DataError(
            f"vocabulary size {len(vocab)} does not match matrix dim {counts.dim}"
        )
    pos, neg = seeds.resolve(vocab)
    mat = counts.matrix.tocsc()
    n = counts.dim
    raw_row = np.asarray(mat.sum(axis=1)).ravel()
    raw_col = np.asarray(mat.sum(axis=0)).ravel()
    total_s = mat.sum() + alpha * n * n
    row_s = raw_row + alpha * n
    col_s = raw_col + alpha * n
    ctx = col_s**c
    z = ctx.sum()
    included = raw_row > 0.0
    if not included.all():
        skipped = [vocab.words[i] for i in np.flatnonzero(~included)]
        log.warning(
            "%d word(s) with zero total count excluded from the PMI baseline: %s",
            len(skipped), ", ".join(skipped[:5]),
        )
    if not included.any():
        raise DataError("no words with positive total count")

    def pmi_column(s_idx: int) -> np.ndarray:
        pair = np.asarray(mat[:, s_idx].todense()).ravel() + alpha
        # log of (pair/total) / ((row/total) * (ctx_s/Z)) = pair*Z/(row*ctx_s)
        return np.log(pair * z / (row_s * ctx[s_idx]))

    score = np.zeros(n)
    for w in pos:
        score += pmi_column(vocab.index[w])
    for w in neg:
        score -= pmi_column(vocab.index[w])
    words = [vocab.words[i] for i in np.flatnonzero(included)]
    return Lexicon(
        words=words,
        scores=standardize(score[included]),
        metadata={
            "method": "pmi",
            "smoothing": c,
            "alpha": alpha,
            "seed_checksum": seeds.checksum(),
        },
    )


def load_seed_words(path: str | Path) -> list[str]:
    """Read a one-word-per-line seed file, preserving order."""
    words: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word:
                words.append(word)
    if not words:
        raise DataError(f"{path}: empty seed file")
    return words


def load_seed_set(
    positive_path: str | Path | None = None,
    negative_path: str | Path | None = None,
    combined_path: str | Path | None = None,
) -> SeedSet:
    """Build a SeedSet from two one-per-line files or one signed file.

    The combined format carries a '+' or '-' prefix column before each word.
    """
    if combined_path is not None:
        pos: list[str] = []
        neg: list[str] = []
        with open(combined_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) != 2 or parts[0] not in ("+", "-"):
                    raise DataError(
                        f"{combined_path}:{lineno}: expected '+ word' or '- word'"
                    )
                (pos if parts[0] == "+" else neg).append(parts[1])
        return SeedSet(pos, neg)
    if positive_path is None or negative_path is None:
        raise DataError("need either a combined seed file or both side files")
    return SeedSet(load_seed_words(positive_path), load_seed_words(negative_path))


def save_ppmi(ppmi_matrix: PpmiMatrix, path: str | Path) -> None:
    """Write 'PPMI <dim> <nnz> <smoothing>' plus all stored triples.

    Unlike count files, both (i, j) and (j, i) are written when present:
    smoothed PPMI is not symmetric in general.
    """
    coo = ppmi_matrix.matrix.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"PPMI {ppmi_matrix.dim} {coo.nnz} {ppmi_matrix.smoothing:.12g}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {v:.12g}\n")


def load_ppmi(path: str | Path) -> PpmiMatrix:
    from .corpus import _load_triples

    dim, smoothing, rows, cols, vals = _load_triples(path, "PPMI")
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    return PpmiMatrix(mat, smoothing=float(smoothing))
