"""Weighted k-nearest-neighbor lexical graphs over embedded vocabularies.

Each word is connected to its k most cosine-similar neighbors; the edge set
is the union symmetrization (an edge exists if either endpoint selected the
other). Edge weights are arccos(-cos_sim), an increasing map of similarity
onto [0, pi], so anti-similar pairs carry zero weight and are dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus import Vocabulary, _load_triples
from .embeddings import EmbeddingSet
from .errors import DataError

log = logging.getLogger(__name__)

_BLOCK_ROWS = 1024


@dataclass
class LexicalGraph:
    """Sparse symmetric weighted adjacency over a vocabulary."""

    vocab: Vocabulary
    k: int
    adjacency: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz // 2

    def degrees(self) -> np.ndarray:
        return np.asarray((self.adjacency != 0).sum(axis=1)).ravel()

    def isolated_nodes(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.degrees() == 0)]


def graph_from_edges(
    vocab: Vocabulary, k: int, edges: list[tuple[int, int, float]]
) -> LexicalGraph:
    """Assemble a graph from undirected (i, j, weight) triples."""
    n = len(vocab)
    rows, cols, vals = [], [], []
    for i, j, w in edges:
        if i == j:
            raise DataError(f"self-loop on node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise DataError(f"edge ({i}, {j}) out of range for {n} nodes")
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((w, w))
    adj = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(n, n)
    )
    adj.sum_duplicates()
    adj.eliminate_zeros()
    return LexicalGraph(vocab=vocab, k=k, adjacency=adj)


def _top_k_indices(sims: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries, ties broken by lowest index.

    Entries equal to -inf are never selected; fewer than k indices may be
    returned when not enough finite candidates exist.
    """
    finite = sims > -np.inf
    n_finite = int(finite.sum())
    if n_finite == 0:
        return np.empty(0, dtype=np.int64)
    if n_finite <= k:
        return np.flatnonzero(finite)
    kth = np.partition(sims, len(sims) - k)[len(sims) - k]
    above = np.flatnonzero(sims > kth)
    ties = np.flatnonzero(sims == kth)
    need = k - above.size
    return np.sort(np.concatenate([above, ties[:need]]))


def cosine_knn_pairs(
    rows: np.ndarray | sp.spmatrix, k: int, active: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Union-symmetrized kNN pairs by cosine over matrix rows.

    ``active`` masks rows that may participate (zero-norm rows must be
    inactive). Returns parallel arrays (ii, jj) with ii < jj, sorted.
    """
    n = rows.shape[0]
    sparse = sp.issparse(rows)
    transposed = rows.T.tocsc() if sparse else rows.T
    pairs: set[tuple[int, int]] = set()
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        block = rows[start:stop] @ transposed
        if sp.issparse(block):
            block = block.toarray()
        block = np.asarray(block)
        for r in range(stop - start):
            i = start + r
            if not active[i]:
                continue
            sims = block[r].copy()
            sims[~active] = -np.inf
            sims[i] = -np.inf
            for j in _top_k_indices(sims, k):
                pairs.add((i, int(j)) if i < j else (int(j), i))
    if not pairs:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    arr = np.array(sorted(pairs), dtype=np.int64)
    return arr[:, 0], arr[:, 1]


def build_knn_graph(emb: EmbeddingSet, k: int = 25) -> LexicalGraph:
    """Build the union-kNN lexical graph with arccos(-cosine) edge weights.

    Ties in the kNN cut are broken by vocabulary order. Words with all-zero
    embeddings take no part in the search and end up isolated. Zero-weight
    edges (cosine exactly -1) are dropped.
    """
    n = len(emb.vocab)
    if not 1 <= k < n:
        raise DataError(f"k must be in [1, {n - 1}], got {k}")
    norms = emb.row_norms()
    active = norms > 0.0
    if not active.any():
        raise DataError("all embedding rows are zero")
    if not active.all():
        log.warning(
            "%d zero-norm word(s) excluded from graph construction",
            int((~active).sum()),
        )
    normed = np.zeros_like(emb.matrix)
    normed[active] = emb.matrix[active] / norms[active, None]
    ii, jj = cosine_knn_pairs(normed, k, active)
    if ii.size:
        cos = np.einsum("ij,ij->i", normed[ii], normed[jj])
        weights = np.arccos(-np.clip(cos, -1.0, 1.0))
        keep = weights > 0.0
        edges = list(zip(ii[keep].tolist(), jj[keep].tolist(), weights[keep].tolist()))
    else:
        edges = []
    graph = graph_from_edges(emb.vocab, k, edges)
    isolated = graph.isolated_nodes()
    if isolated:
        log.warning(
            "%d isolated node(s) in the lexical graph (e.g. %s)",
            len(isolated),
            ", ".join(emb.vocab.words[i] for i in isolated[:5]),
        )
    return graph


def save_graph(graph: LexicalGraph, path: str | Path) -> None:
    """Write 'GRAPH <dim> <nnz> <k>' then upper-triangle 'i j weight' lines."""
    upper = sp.triu(graph.adjacency, k=1).tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"GRAPH {graph.dim} {upper.nnz} {graph.k}\n")
        for i, j, w in zip(upper.row, upper.col, upper.data):
            fh.write(f"{i} {j} {w:.12g}\n")


def load_graph(path: str | Path, vocab: Vocabulary) -> LexicalGraph:
    dim, k, rows, cols, vals = _load_triples(path, "GRAPH")
    if dim != len(vocab):
        raise DataError(
            f"{path}: graph dim {dim} does not match vocabulary size {len(vocab)}"
        )
    edges = [(int(i), int(j), float(w)) for i, j, w in zip(rows, cols, vals)]
    return graph_from_edges(vocab, int(k), edges)
