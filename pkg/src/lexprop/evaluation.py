"""Lexicon evaluation: ranking AUC, ternary macro-F1 with class-mass
labeling, tie-corrected Kendall correlation, and lexicon-vs-lexicon
correlation over the most sentiment-bearing words.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DataError
from .propagation import LABELS, Lexicon

log = logging.getLogger(__name__)


@dataclass
class GoldLexicon:
    """Reference labels and/or continuous valence scores for evaluation."""

    binary: dict[str, str] = field(default_factory=dict)
    ternary: dict[str, str] = field(default_factory=dict)
    continuous: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, labels in (("binary", self.binary), ("ternary", self.ternary)):
            bad = {v for v in labels.values()} - set(LABELS)
            if bad:
                raise DataError(f"bad {name} label(s): {sorted(bad)}")
        if any(v == "neutral" for v in self.binary.values()):
            raise DataError("binary gold may not contain neutral labels")
        for w, lab in self.binary.items():
            if w in self.ternary and self.ternary[w] != lab:
                raise DataError(f"binary/ternary label conflict for {w!r}")
        if any(not math.isfinite(v) for v in self.continuous.values()):
            raise DataError("continuous gold values must be finite")

    @classmethod
    def from_tsv(cls, path: str | Path) -> "GoldLexicon":
        """Parse 'word<TAB>value' rows; value is a label or a decimal."""
        ternary: dict[str, str] = {}
        continuous: dict[str, float] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected 'word<TAB>value'")
                word, value = parts
                if value in LABELS:
                    ternary[word] = value
                else:
                    try:
                        continuous[word] = float(value)
                    except ValueError:
                        raise DataError(
                            f"{path}:{lineno}: {value!r} is neither a label nor a number"
                        ) from None
        if not ternary and not continuous:
            raise DataError(f"{path}: empty gold lexicon")
        binary = {w: l for w, l in ternary.items() if l != "neutral"}
        return cls(binary=binary, ternary=ternary, continuous=continuous)

    def add_neutral_words(self, words: Sequence[str]) -> None:
        """Mark extra words as neutral (for golds that only list polar words)."""
        for w in words:
            if self.binary.get(w):
                raise DataError(f"{w!r} already carries a polar gold label")
            self.ternary[w] = "neutral"


@dataclass
class ClassDistribution:
    """Target fractions of positive / neutral / negative labels."""

    frac_positive: float
    frac_neutral: float
    frac_negative: float

    def __post_init__(self) -> None:
        fracs = (self.frac_positive, self.frac_neutral, self.frac_negative)
        if any(not 0.0 <= f <= 1.0 for f in fracs):
            raise DataError(f"class fractions must lie in [0, 1], got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise DataError(f"class fractions must sum to 1, got {sum(fracs)!r}")

    @classmethod
    def from_labels(cls, labels: Sequence[str]) -> "ClassDistribution":
        n = len(labels)
        if n == 0:
            raise DataError("cannot derive a distribution from zero labels")
        pos = sum(1 for l in labels if l == "positive")
        neg = sum(1 for l in labels if l == "negative")
        return cls(pos / n, (n - pos - neg) / n, neg / n)


def auc_binary(lexicon: Lexicon, gold: GoldLexicon) -> float:
    """Area under the ROC curve of scores ranking gold-positive over
    gold-negative words; tied scores contribute one half."""
    scores = []
    is_pos = []
    for w, lab in gold.binary.items():
        if w in lexicon:
            scores.append(lexicon.score(w))
            is_pos.append(lab == "positive")
    n_pos = sum(is_pos)
    n_neg = len(is_pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError(
            f"need both gold classes in the lexicon (positive={n_pos}, negative={n_neg})"
        )
    ranks = rankdata(scores)
    rank_sum = float(ranks[np.asarray(is_pos)].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def class_mass_labels(lexicon: Lexicon, dist: ClassDistribution) -> Lexicon:
    """Label words so class proportions best match a known distribution.

    Sorts by score descending (ties by word position), makes the top block
    positive and the bottom block negative, leaving the middle neutral.
    The positive count rounds half up and the negative count half down,
    which keeps every class within one word of its target mass.
    """
    n = len(lexicon)
    if n == 0:
        raise DataError("empty lexicon")
    n_pos = math.floor(dist.frac_positive * n + 0.5)
    n_neg = math.ceil(dist.frac_negative * n - 0.5)
    n_neg = max(0, min(n_neg, n - n_pos))
    order = sorted(range(n), key=lambda i: (-lexicon.scores[i], i))
    labels = ["neutral"] * n
    for i in order[:n_pos]:
        labels[i] = "positive"
    for i in order[n - n_neg:]:
        labels[i] = "negative"
    return lexicon.with_labels(labels)


def ternary_f1(labeled: Lexicon, gold: GoldLexicon) -> float:
    """Macro-averaged F1 over the three classes on the shared vocabulary."""
    if labeled.labels is None:
        raise DataError("lexicon has no labels; run class_mass_labels first")
    pairs = [
        (labeled.label(w), gold.ternary[w])
        for w in labeled.words
        if w in gold.ternary
    ]
    if not pairs:
        raise DataError("no overlap between lexicon and ternary gold")
    total = 0.0
    for cls in LABELS:
        tp = sum(1 for p, g in pairs if p == cls and g == cls)
        fp = sum(1 for p, g in pairs if p == cls and g != cls)
        fn = sum(1 for p, g in pairs if p != cls and g == cls)
        denom = 2 * tp + fp + fn
        total += 2 * tp / denom if denom else 0.0
    return total / 3


class _Fenwick:
    """Binary indexed tree over ranks, for counting inserted values."""

    def __init__(self, size: int) -> None:
        self.tree = [0] * (size + 1)

    def add(self, i: int) -> None:
        i += 1
        while i < len(self.tree):
            self.tree[i] += 1
            i += i & (-i)

    def count_at_most(self, i: int) -> int:
        i += 1
        total = 0
        while i > 0:
            total += self.tree[i]
            i -= i & (-i)
        return total


def _tie_pairs(values: np.ndarray) -> int:
    _, counts = np.unique(values, return_counts=True)
    return int(sum(int(c) * (int(c) - 1) // 2 for c in counts))


def tau_b(x: np.ndarray, y: np.ndarray) -> float:
    """Tie-corrected Kendall rank correlation.

    Discordant pairs are counted in O(n log n) with a Fenwick tree over
    rank-compressed y values after sorting by (x, y).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    if n < 2:
        raise DataError("need at least 2 observations")
    order = np.lexsort((y, x))
    ys = y[order]
    y_ranks = np.searchsorted(np.unique(ys), ys)
    n_ranks = int(y_ranks.max()) + 1
    tree = _Fenwick(n_ranks)
    discordant = 0
    for i, r in enumerate(y_ranks):
        discordant += i - tree.count_at_most(int(r))
        tree.add(int(r))
    tot = n * (n - 1) // 2
    xtie = _tie_pairs(x)
    ytie = _tie_pairs(y)
    both = np.stack([x[order], ys])
    _, joint_counts = np.unique(both, axis=1, return_counts=True)
    ntie = int(sum(int(c) * (int(c) - 1) // 2 for c in joint_counts))
    d1 = tot - xtie
    d2 = tot - ytie
    if d1 == 0 or d2 == 0:
        raise DataError("undefined correlation: all values tied on one side")
    con_minus_dis = tot - xtie - ytie + ntie - 2 * discordant
    return con_minus_dis / math.sqrt(d1 * d2)


def kendall_tau(lexicon: Lexicon, gold_continuous: Mapping[str, float]) -> float:
    """Kendall tau-b between lexicon scores and continuous gold valences."""
    shared = [w for w in lexicon.words if w in gold_continuous]
    if len(shared) < 2:
        raise DataError(
            f"need at least 2 shared words for rank correlation, got {len(shared)}"
        )
    x = np.array([lexicon.score(w) for w in shared])
    y = np.array([float(gold_continuous[w]) for w in shared])
    return tau_b(x, y)


def _top_by_magnitude(lexicon: Lexicon, words: Sequence[str], n_top: int) -> set[str]:
    ranked = sorted(words, key=lambda w: (-abs(lexicon.score(w)), lexicon.position(w)))
    return set(ranked[:n_top])


def lexicon_tau_top(
    lex_a: Lexicon,
    lex_b: Lexicon,
    top_frac: float = 0.25,
    subset: str = "union",
) -> float:
    """Kendall tau-b restricted to the most sentiment-bearing shared words.

    Each lexicon ranks the shared vocabulary by absolute score and keeps its
    own top fraction; the correlation is computed on the union of the two
    top sets (or their intersection with ``subset='intersection'``).
    """
    if not 0.0 < top_frac <= 1.0:
        raise DataError(f"top_frac must be in (0, 1], got {top_frac}")
    if subset not in ("union", "intersection"):
        raise DataError(f"subset must be 'union' or 'intersection', got {subset!r}")
    shared = [w for w in lex_a.words if w in lex_b]
    if not shared:
        raise DataError("no shared vocabulary between the lexicons")
    n_top = max(1, math.ceil(top_frac * len(shared)))
    top_a = _top_by_magnitude(lex_a, shared, n_top)
    top_b = _top_by_magnitude(lex_b, shared, n_top)
    chosen = top_a | top_b if subset == "union" else top_a & top_b
    words = [w for w in shared if w in chosen]
    if len(words) < 2:
        raise DataError(f"top-word subset has {len(words)} word(s); need at least 2")
    x = np.array([lex_a.score(w) for w in words])
    y = np.array([lex_b.score(w) for w in words])
    return tau_b(x, y)


@dataclass
class PolaritySwitchReport:
    """Polarity drift between the first and last epochs of a lexicon series."""

    n_words: int
    head_epochs: int
    tail_epochs: int
    full_switch_words: list[str]
    changed_words: list[str]

    @property
    def fraction_full_switch(self) -> float:
        return len(self.full_switch_words) / self.n_words

    @property
    def fraction_changed(self) -> float:
        return len(self.changed_words) / self.n_words


def polarity_switch_report(
    lexicons: Sequence[Lexicon],
    dist: ClassDistribution,
    head_epochs: int,
    tail_epochs: int,
) -> PolaritySwitchReport:
    """Compare head-averaged and tail-averaged scores after class-mass labeling.

    Words flipping between positive and negative are full switches; any
    label difference (including to or from neutral) counts as a change.
    """
    if head_epochs < 1 or tail_epochs < 1:
        raise DataError("head_epochs and tail_epochs must be >= 1")
    if len(lexicons) < head_epochs + tail_epochs:
        raise DataError(
            f"insufficient epochs: need {head_epochs + tail_epochs}, got {len(lexicons)}"
        )
    head = lexicons[:head_epochs]
    tail = lexicons[len(lexicons) - tail_epochs:]
    shared = [
        w for w in head[0].words if all(w in lx for lx in list(head) + list(tail))
    ]
    if not shared:
        raise DataError("no vocabulary shared by all head and tail epochs")

    def averaged(epoch_lexicons: Sequence[Lexicon]) -> Lexicon:
        scores = np.mean(
            [[lx.score(w) for w in shared] for lx in epoch_lexicons], axis=0
        )
        return Lexicon(words=list(shared), scores=scores)

    head_labeled = class_mass_labels(averaged(head), dist)
    tail_labeled = class_mass_labels(averaged(tail), dist)
    full = []
    changed = []
    for w in shared:
        a, b = head_labeled.label(w), tail_labeled.label(w)
        if a != b:
            changed.append(w)
            if {a, b} == {"positive", "negative"}:
                full.append(w)
    return PolaritySwitchReport(
        n_words=len(shared),
        head_epochs=head_epochs,
        tail_epochs=tail_epochs,
        full_switch_words=full,
        changed_words=changed,
    )
