"""Word embeddings: smoothed PPMI weighting and truncated-SVD vectors.

The PPMI transform keeps max(log p(i,j) / (p(i) * p_c(j)), 0) per cell, with
context-distribution smoothing applied to the second (context) marginal only:
p_c(j) is proportional to colsum(j)**c. Embeddings are rows of U from a
rank-d truncated SVD of the PPMI matrix, singular values discarded.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus import SparseCountMatrix, Vocabulary
from .errors import ConvergenceError, DataError

log = logging.getLogger(__name__)


@dataclass
class PpmiMatrix:
    """Sparse positive-PMI association matrix.

    All stored values are strictly positive (the clamp at zero makes zeros
    implicit). Symmetric only when ``smoothing`` is exactly 1: smoothing the
    context marginal alone breaks the symmetry of the underlying counts.
    """

    matrix: sp.csr_matrix
    smoothing: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def entry(self, i: int, j: int) -> float:
        return float(self.matrix[i, j])


@dataclass
class EmbeddingSet:
    """Dense per-word vectors: row i of ``matrix`` embeds ``vocab.words[i]``."""

    vocab: Vocabulary
    matrix: np.ndarray

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.vocab):
            raise DataError(
                f"embedding matrix shape {self.matrix.shape} does not match "
                f"vocabulary of {len(self.vocab)} words"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise DataError("embedding matrix contains non-finite entries")

    @property
    def dim_d(self) -> int:
        return self.matrix.shape[1]

    def vector(self, word: str) -> np.ndarray:
        try:
            return self.matrix[self.vocab.index[word]]
        except KeyError:
            raise DataError(f"word not in vocabulary: {word!r}") from None

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.matrix, axis=1)

    def zero_rows(self) -> list[int]:
        """Indices of all-zero embedding rows (cosine is undefined on them)."""
        return [int(i) for i in np.flatnonzero(self.row_norms() == 0.0)]


def ppmi(counts: SparseCountMatrix, c: float = 0.75) -> PpmiMatrix:
    """Smoothed positive pointwise mutual information of a count matrix.

    cell(i,j) = max(log[(n_ij / N) / ((row_i / N) * (col_j**c / Z))], 0)
    with N the total count mass and Z = sum_k col_k**c. Natural log.
    """
    if not 0.0 < c <= 1.0:
        raise DataError(f"smoothing exponent must be in (0, 1], got {c}")
    mat = counts.matrix
    total = mat.sum()
    if mat.nnz == 0 or total == 0:
        raise DataError("no co-occurrence mass")
    row = np.asarray(mat.sum(axis=1)).ravel()
    col = np.asarray(mat.sum(axis=0)).ravel()
    ctx = col**c
    z = ctx.sum()
    coo = mat.tocoo()
    # ratio p(i,j) / (p(i) * p_c(j)) simplifies to v * Z / (row_i * ctx_j)
    vals = np.log(coo.data * z / (row[coo.row] * ctx[coo.col]))
    keep = vals > 0.0
    out = sp.csr_matrix(
        (vals[keep], (coo.row[keep], coo.col[keep])), shape=mat.shape
    )
    return PpmiMatrix(out, smoothing=c)


def truncated_svd(
    matrix: sp.spmatrix | np.ndarray,
    d: int,
    seed: int = 0,
    oversample: int = 10,
    min_iters: int = 4,
    max_iters: int = 300,
    rtol: float = 1e-11,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rank-d truncated SVD by randomized subspace iteration.

    Draws a seeded Gaussian test matrix with ``oversample`` extra columns,
    then alternates multiplication by the matrix and its transpose with QR
    re-orthonormalization each pass. Runs at least ``min_iters`` passes and
    continues until the top-d singular values stabilize to ``rtol``.

    Returns (U, s, Vt) with U of shape (n, d). Each singular vector is
    sign-fixed so its largest-magnitude entry is positive.
    """
    a = sp.csr_matrix(matrix, dtype=np.float64)
    n, m = a.shape
    if not 1 <= d <= min(n, m):
        raise DataError(f"d must be in [1, {min(n, m)}], got {d}")
    if a.nnz == 0:
        raise DataError("cannot factor an all-zero matrix")
    at = a.T.tocsr()
    width = min(d + oversample, min(n, m))
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(a @ rng.standard_normal((m, width)))
    prev: np.ndarray | None = None
    change = np.inf
    for it in range(1, max_iters + 1):
        w, _ = np.linalg.qr(at @ q)
        q, _ = np.linalg.qr(a @ w)
        b = (at @ q).T  # dense (width, m) projection of the matrix
        ub, s, vt = np.linalg.svd(b, full_matrices=False)
        if not np.all(np.isfinite(s)):
            raise ConvergenceError(
                "singular values diverged during subspace iteration",
                residual=float("nan"),
                iterations=it,
            )
        if prev is not None:
            floor = max(s[0], np.finfo(np.float64).tiny) * 1e-12
            change = float(np.max(np.abs(s[:d] - prev[:d]) / np.maximum(prev[:d], floor)))
            if it >= min_iters and change < rtol:
                break
        prev = s
    else:
        raise ConvergenceError(
            f"singular values did not stabilize to {rtol:g} within "
            f"{max_iters} subspace iterations (last change {change:.3e})",
            residual=change,
            iterations=max_iters,
        )
    u = q @ ub[:, :d]
    s = s[:d].copy()
    vt = vt[:d].copy()
    # fix signs: largest-magnitude entry of each left singular vector positive
    for j in range(d):
        pivot = int(np.argmax(np.abs(u[:, j])))
        if u[pivot, j] < 0:
            u[:, j] = -u[:, j]
            vt[j, :] = -vt[j, :]
    return u, s, vt


def svd_embed(
    ppmi_matrix: PpmiMatrix,
    vocab: Vocabulary,
    d: int,
    seed: int = 0,
) -> EmbeddingSet:
    """Embed words as the first d left-singular vectors of the PPMI matrix."""
    if len(vocab) != ppmi_matrix.dim:
        raise DataError(
            f"vocabulary size {len(vocab)} does not match matrix dim {ppmi_matrix.dim}"
        )
    if ppmi_matrix.nnz == 0:
        raise DataError("PPMI matrix is empty")
    u, _, _ = truncated_svd(ppmi_matrix.matrix, d, seed=seed)
    emb = EmbeddingSet(vocab, u)
    zero = emb.zero_rows()
    if zero:
        sample = ", ".join(vocab.words[i] for i in zero[:5])
        log.warning(
            "%d word(s) received an all-zero embedding and will be excluded "
            "from graph construction (e.g. %s)", len(zero), sample,
        )
    return emb


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DataError("zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def nearest_neighbors(
    emb: EmbeddingSet, word: str, k: int
) -> list[tuple[str, float]]:
    """The k most cosine-similar other words, descending.

    Ties are broken by vocabulary order. Words with all-zero embedding rows
    are skipped (their cosine is undefined).
    """
    n = len(emb.vocab)
    if word not in emb.vocab:
        raise DataError(f"word not in vocabulary: {word!r}")
    if not 1 <= k < n:
        raise DataError(f"k must be in [1, {n - 1}], got {k}")
    norms = emb.row_norms()
    qi = emb.vocab.index[word]
    if norms[qi] == 0.0:
        raise DataError("zero vector")
    normed = np.zeros_like(emb.matrix)
    ok = norms > 0.0
    normed[ok] = emb.matrix[ok] / norms[ok, None]
    sims = normed @ normed[qi]
    sims[qi] = -np.inf
    sims[~ok] = -np.inf
    order = np.lexsort((np.arange(n), -sims))
    out: list[tuple[str, float]] = []
    for j in order:
        if sims[j] == -np.inf:
            break
        out.append((emb.vocab.words[j], float(np.clip(sims[j], -1.0, 1.0))))
        if len(out) == k:
            break
    if len(out) < k:
        log.warning("only %d of %d requested neighbors are defined", len(out), k)
    return out


def save_embeddings(emb: EmbeddingSet, path: str | Path) -> None:
    """Write '<N> <d>' then one 'word v1 ... vd' line per word."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(emb.vocab)} {emb.dim_d}\n")
        for i, w in enumerate(emb.vocab.words):
            vals = " ".join(f"{v:.10g}" for v in emb.matrix[i])
            fh.write(f"{w} {vals}\n")


def load_embeddings(
    path: str | Path, expected_vocab: Vocabulary | None = None
) -> EmbeddingSet:
    """Load a text embedding file, optionally restricted to a vocabulary.

    With ``expected_vocab`` the rows are reordered to that vocabulary's order;
    words missing from the file and file words outside the vocabulary are
    reported via warnings.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: expected header '<N> <d>'")
        try:
            n, d = int(header[0]), int(header[1])
        except ValueError:
            raise DataError(f"{path}: non-numeric header {' '.join(header)!r}") from None
        words: list[str] = []
        seen: set[str] = set()
        rows = np.empty((n, d), dtype=np.float64)
        k = 0
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if k >= n:
                raise DataError(f"{path}:{lineno}: more rows than header's {n}")
            if len(parts) != d + 1:
                raise DataError(
                    f"{path}:{lineno}: expected {d} values for {parts[0]!r}, "
                    f"got {len(parts) - 1}"
                )
            word = parts[0]
            if word in seen:
                raise DataError(f"{path}:{lineno}: duplicate word {word!r}")
            seen.add(word)
            try:
                rows[k] = [float(x) for x in parts[1:]]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field") from None
            words.append(word)
            k += 1
    if k != n:
        raise DataError(f"{path}: header promises {n} rows, found {k}")
    if expected_vocab is None:
        vocab = Vocabulary(words, {w: 1 for w in words})
        return EmbeddingSet(vocab, rows)
    file_index = {w: i for i, w in enumerate(words)}
    kept = [w for w in expected_vocab.words if w in file_index]
    missing = [w for w in expected_vocab.words if w not in file_index]
    dropped = len(words) - len(kept)
    if missing:
        log.warning(
            "%d vocabulary word(s) missing from %s (e.g. %s)",
            len(missing), path, ", ".join(missing[:5]),
        )
    if dropped:
        log.warning("%d file word(s) outside the vocabulary were dropped", dropped)
    if not kept:
        raise DataError(f"{path}: no overlap with the expected vocabulary")
    sub_vocab = Vocabulary(kept, {w: expected_vocab.counts[w] for w in kept})
    sub_rows = rows[[file_index[w] for w in kept]]
    return EmbeddingSet(sub_vocab, sub_rows)
