"""Corpus ingestion: vocabulary construction and windowed co-occurrence counting.

Corpora are plain UTF-8 text, pre-tokenized: one document per line, tokens
separated by whitespace. Co-occurrence windows never cross line boundaries.
"""

from __future__ import annotations

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DataError

log = logging.getLogger(__name__)

# flush partial co-occurrence buffers once this many index pairs accumulate
_FLUSH_PAIRS = 4_000_000


class Vocabulary:
    """Bidirectional word <-> index map with occurrence counts.

    ``index`` is a bijection onto ``0..len(words)-1`` and every stored count
    is at least 1.
    """

    def __init__(self, words: Sequence[str], counts: dict[str, int]) -> None:
        self.words: list[str] = list(words)
        self.index: dict[str, int] = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise DataError("duplicate words in vocabulary")
        try:
            self.counts: dict[str, int] = {w: int(counts[w]) for w in self.words}
        except KeyError as exc:
            raise DataError(f"missing count for vocabulary word {exc.args[0]!r}") from None
        if any(c < 1 for c in self.counts.values()):
            raise DataError("zero-count words are never stored")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.words == other.words and self.counts == other.counts

    def __repr__(self) -> str:
        return f"Vocabulary({len(self.words)} words)"

    def content_hash(self) -> str:
        """Checksum over the ordered (word, count) pairs."""
        h = hashlib.sha256()
        for w in self.words:
            h.update(f"{w}\t{self.counts[w]}\n".encode("utf-8"))
        return h.hexdigest()


@dataclass
class SparseCountMatrix:
    """Symmetric word-word co-occurrence counts for one vocabulary.

    ``matrix`` stores only positive entries; ``vocab_hash`` binds the matrix
    to the vocabulary it was counted against.
    """

    matrix: sp.csr_matrix
    window_size: int
    vocab_hash: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def entry(self, i: int, j: int) -> float:
        return float(self.matrix[i, j])

    def total_mass(self) -> float:
        return float(self.matrix.sum())


def read_corpus(path: str | Path, lowercase: bool = True) -> Iterator[list[str]]:
    """Yield one token list per line of a corpus file."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if lowercase:
                line = line.lower()
            yield line.split()


def load_stopwords(path: str | Path, lowercase: bool = True) -> set[str]:
    """Read a one-word-per-line stopword file."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word:
                words.add(word.lower() if lowercase else word)
    return words


def build_vocabulary(
    corpus: Iterable[Sequence[str]],
    min_count: int = 1,
    top_n: int | None = None,
    stopwords: set[str] | None = None,
) -> Vocabulary:
    """Count tokens and keep the most frequent ones.

    Words with count >= ``min_count`` survive, stopwords are removed, and
    the result is truncated to the ``top_n`` most frequent. Ordering is by
    descending frequency with ties broken lexicographically.
    """
    if min_count < 1:
        raise DataError(f"min_count must be >= 1, got {min_count}")
    if top_n is not None and top_n < 1:
        raise DataError(f"top_n must be >= 1, got {top_n}")
    counts: Counter[str] = Counter()
    for doc in corpus:
        counts.update(doc)
    if "" in counts:
        raise DataError("corpus contains empty tokens")
    drop = stopwords or set()
    items = [(w, c) for w, c in counts.items() if c >= min_count and w not in drop]
    items.sort(key=lambda wc: (-wc[1], wc[0]))
    if top_n is not None:
        items = items[:top_n]
    if not items:
        raise DataError("empty vocabulary")
    return Vocabulary([w for w, _ in items], dict(items))


def count_cooccurrences(
    corpus: Iterable[Sequence[str]],
    vocab: Vocabulary,
    window_size: int = 4,
) -> SparseCountMatrix:
    """Count symmetric sliding-window co-occurrences within each line.

    Every in-vocabulary position pair (t, t+off) with 1 <= off <= window_size
    increments both (w_t, w_{t+off}) and (w_{t+off}, w_t) by one.
    Out-of-vocabulary tokens occupy positions (they widen gaps) but generate
    no counts. Same-position pairs are never counted, so the diagonal only
    holds repeats of a word at distinct positions.
    """
    if window_size < 1:
        raise DataError(f"window_size must be >= 1, got {window_size}")
    dim = len(vocab)
    index = vocab.index
    acc = sp.csr_matrix((dim, dim), dtype=np.float64)
    buf_i: list[np.ndarray] = []
    buf_j: list[np.ndarray] = []
    pending = 0

    def flush() -> None:
        nonlocal acc, pending
        if not buf_i:
            return
        rows = np.concatenate(buf_i)
        cols = np.concatenate(buf_j)
        ones = np.ones(len(rows), dtype=np.float64)
        part = sp.coo_matrix((ones, (rows, cols)), shape=(dim, dim)).tocsr()
        acc = acc + part + part.T
        buf_i.clear()
        buf_j.clear()
        pending = 0

    for doc in corpus:
        n = len(doc)
        if n < 2:
            continue
        ids = np.fromiter((index.get(t, -1) for t in doc), dtype=np.int64, count=n)
        for off in range(1, min(window_size, n - 1) + 1):
            a = ids[:-off]
            b = ids[off:]
            mask = (a >= 0) & (b >= 0)
            if mask.any():
                buf_i.append(a[mask])
                buf_j.append(b[mask])
                pending += int(mask.sum())
        if pending >= _FLUSH_PAIRS:
            flush()
    flush()
    acc.eliminate_zeros()
    return SparseCountMatrix(acc, window_size=window_size, vocab_hash=vocab.content_hash())


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w in vocab.words:
            fh.write(f"{w}\t{vocab.counts[w]}\n")


def load_vocabulary(path: str | Path) -> Vocabulary:
    words: list[str] = []
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'word<TAB>count'")
            try:
                count = int(parts[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer count {parts[1]!r}") from None
            words.append(parts[0])
            counts[parts[0]] = count
    if not words:
        raise DataError(f"{path}: empty vocabulary file")
    return Vocabulary(words, counts)


def save_counts(counts: SparseCountMatrix, path: str | Path) -> None:
    """Write the upper triangle (i <= j) as 'i j value' triples."""
    upper = sp.triu(counts.matrix).tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"COOC {counts.dim} {upper.nnz} {counts.window_size}\n")
        for i, j, v in zip(upper.row, upper.col, upper.data):
            fh.write(f"{i} {j} {v:.12g}\n")


def load_counts(path: str | Path, vocab_hash: str = "") -> SparseCountMatrix:
    """Load a count matrix, reconstructing symmetry from the stored triangle."""
    dim, window, rows, cols, vals = _load_triples(path, "COOC")
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    strict_upper = sp.triu(mat, k=1)
    full = (mat + strict_upper.T).tocsr()
    full.eliminate_zeros()
    return SparseCountMatrix(full, window_size=window, vocab_hash=vocab_hash)


def _load_triples(path: str | Path, tag: str):
    """Parse a '<TAG> dim nnz extra' header plus 'i j value' triple lines."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != tag:
            raise DataError(f"{path}: expected header '{tag} <dim> <nnz> <...>'")
        try:
            dim, nnz = int(header[1]), int(header[2])
            extra = float(header[3]) if "." in header[3] or "e" in header[3] else int(header[3])
        except ValueError:
            raise DataError(f"{path}: malformed header {' '.join(header)!r}") from None
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        k = 0
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3 or k >= nnz:
                raise DataError(f"{path}:{lineno}: bad triple line")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric triple") from None
            if not (0 <= i < dim and 0 <= j < dim):
                raise DataError(f"{path}:{lineno}: index out of range for dim {dim}")
            rows[k], cols[k], vals[k] = i, j, v
            k += 1
        if k != nnz:
            raise DataError(f"{path}: header promises {nnz} triples, found {k}")
    return dim, extra, rows, cols, vals
