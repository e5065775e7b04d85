"""Semantic-fidelity metrics over original, quantized, and spike-decoded
word representations: SimLex Spearman correlation, top-1 analogy accuracy
(3CosAdd), top-10 nearest-neighbor overlap, and exact reconstruction
accuracy, assembled into a table-shaped report.

Out-of-vocabulary items are skipped and counted, never silently dropped.
All-zero vectors (possible after ternarization) get cosine similarity 0
and are excluded from neighbor rankings.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, asdict

import numpy as np

from .corpus_io import AnalogyQuad, EmbeddingSet, SimilarityPair, WordList
from .quantizer import TernarySet
from .spike_codec import CodecConfig, roundtrip

log = logging.getLogger(__name__)


class EvaluationError(ValueError):
    """Metric preconditions not met (degenerate or empty input)."""


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; zero-norm vectors compare as 0 (with a warning)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        log.warning("cosine of a zero-norm vector defined as 0")
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _fractional_ranks(xs: np.ndarray) -> np.ndarray:
    """Average-fractional ranks, 1-based; ties share their mean rank."""
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs), dtype=np.float64)
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("inputs must be equal-length 1-d sequences")
    if len(xs) < 2:
        raise EvaluationError("need at least 2 observations")
    if len(np.unique(xs)) < 2 or len(np.unique(ys)) < 2:
        raise EvaluationError("constant input has no rank correlation")
    rx = _fractional_ranks(xs)
    ry = _fractional_ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def simlex_eval(
    vectors: dict[str, np.ndarray], pairs: list[SimilarityPair]
) -> tuple[float, int, int]:
    """Spearman rho between model cosines and human scores.

    Pairs with either word out of vocabulary are skipped and counted.
    Returns (rho, used, skipped).
    """
    if not pairs:
        raise EvaluationError("no similarity pairs supplied")
    sims, scores = [], []
    skipped = 0
    for pair in pairs:
        if pair.word_a not in vectors or pair.word_b not in vectors:
            skipped += 1
            continue
        sims.append(cosine(vectors[pair.word_a], vectors[pair.word_b]))
        scores.append(pair.human_score)
    if len(sims) < 2:
        raise EvaluationError(
            f"only {len(sims)} in-vocabulary pairs ({skipped} skipped); need >= 2"
        )
    return spearman(sims, scores), len(sims), skipped


class _NeighborIndex:
    """Brute-force cosine search over a vocabulary.

    Rows are L2-normalized once; zero-norm words are excluded from
    rankings (their cosine is defined as 0, which would rank arbitrarily).
    """

    def __init__(self, vectors: dict[str, np.ndarray]):
        self.words = sorted(vectors)
        matrix = np.stack([np.asarray(vectors[w], dtype=np.float64) for w in self.words])
        norms = np.linalg.norm(matrix, axis=1)
        self.zero_norm = norms == 0.0
        if self.zero_norm.any():
            log.warning(
                "%d zero-norm vectors excluded from neighbor rankings",
                int(self.zero_norm.sum()),
            )
        safe = np.where(self.zero_norm, 1.0, norms)
        self.unit = matrix / safe[:, None]
        self.index = {w: i for i, w in enumerate(self.words)}

    def top_k(self, query_vec: np.ndarray, k: int, exclude: set[str]) -> list[str]:
        qnorm = float(np.linalg.norm(query_vec))
        if qnorm == 0.0:
            return []
        sims = self.unit @ (np.asarray(query_vec, dtype=np.float64) / qnorm)
        sims[self.zero_norm] = -np.inf
        for word in exclude:
            i = self.index.get(word)
            if i is not None:
                sims[i] = -np.inf
        n_valid = int(np.isfinite(sims).sum())
        k = min(k, n_valid)
        if k <= 0:
            return []
        # words are in lexicographic order, so sorting by (-sim, index)
        # breaks equal similarities toward the smaller token
        order = np.lexsort((np.arange(len(sims)), -sims))
        return [self.words[i] for i in order[:k]]


def neighbors(vectors: dict[str, np.ndarray], query: str, k: int) -> list[str]:
    """Top-k cosine nearest neighbors of a vocabulary word, query excluded.

    Ties break lexicographically; returns fewer than k words only when the
    vocabulary runs out.
    """
    if query not in vectors:
        raise EvaluationError(f"query {query!r} not in vocabulary")
    if k < 1:
        raise ValueError("k must be >= 1")
    index = _NeighborIndex(vectors)
    return index.top_k(np.asarray(vectors[query]), k, exclude={query})


def overlap_at_k(
    map_a: dict[str, np.ndarray],
    map_b: dict[str, np.ndarray],
    k: int,
    vocab: WordList | list[str] | None = None,
) -> float:
    """Mean |top-k(a) ∩ top-k(b)| / k over the shared vocabulary."""
    words = list(vocab) if vocab is not None else sorted(set(map_a) & set(map_b))
    words = [w for w in words if w in map_a and w in map_b]
    if not words:
        raise EvaluationError("empty shared vocabulary")
    index_a = _NeighborIndex(map_a)
    index_b = _NeighborIndex(map_b)
    fractions = []
    for word in words:
        top_a = set(index_a.top_k(np.asarray(map_a[word]), k, exclude={word}))
        top_b = set(index_b.top_k(np.asarray(map_b[word]), k, exclude={word}))
        fractions.append(len(top_a & top_b) / k)
    return float(np.mean(fractions))


def analogy_eval(
    vectors: dict[str, np.ndarray], quads: list[AnalogyQuad]
) -> tuple[float, int, int]:
    """Top-1 accuracy of 3CosAdd analogy solving.

    Predicts the nearest word to vec(b) - vec(a) + vec(c), excluding the
    three query words.  Quads with any OOV word are skipped and counted.
    Returns (accuracy, used, skipped).
    """
    if not quads:
        raise EvaluationError("no analogy quads supplied")
    index = _NeighborIndex(vectors)
    used = skipped = correct = 0
    for quad in quads:
        if any(w not in vectors for w in (quad.a, quad.b, quad.c, quad.d)):
            skipped += 1
            continue
        target = (
            np.asarray(vectors[quad.b], dtype=np.float64)
            - np.asarray(vectors[quad.a], dtype=np.float64)
            + np.asarray(vectors[quad.c], dtype=np.float64)
        )
        top = index.top_k(target, 1, exclude={quad.a, quad.b, quad.c})
        used += 1
        if top and top[0] == quad.d:
            correct += 1
    if used == 0:
        raise EvaluationError(f"all {skipped} analogy quads skipped (OOV)")
    return correct / used, used, skipped


def reconstruction_accuracy(
    ternary: TernarySet, decoded: TernarySet
) -> tuple[float, float, np.ndarray]:
    """Exact-reconstruction statistics between two ternary sets.

    Returns (fraction of words matching in every dimension, per-dimension
    accuracy, 3x3 confusion matrix with rows/cols ordered -1, 0, +1).
    """
    if ternary.words != decoded.words or ternary.dim != decoded.dim:
        raise ValueError("vocabulary or dimensionality mismatch")
    truth, pred = ternary.values, decoded.values
    word_exact = float(np.mean(np.all(truth == pred, axis=1)))
    per_dim = float(np.mean(truth == pred))
    confusion = np.zeros((3, 3), dtype=np.int64)
    for i, t in enumerate((-1, 0, 1)):
        mask = truth == t
        for j, p in enumerate((-1, 0, 1)):
            confusion[i, j] = int(np.sum(pred[mask] == p))
    return word_exact, per_dim, confusion


# Metric values reported by the original study, for context only: they
# depend on a proprietary embedding model and an unpublished analogy set,
# so they are annotations in the report, never test oracles.
REFERENCE_VALUES = {
    "simlex_rho": {"original": 0.540, "quantized": 0.542, "spike": 0.526},
    "analogy_accuracy": {"original": 0.375, "quantized": 0.375, "spike": 0.375},
    "overlap_at_10": {"quantized": 0.885, "spike": 0.727},
    "reconstruction_accuracy": {"spike": 1.0},
}


@dataclass
class RepresentationMetrics:
    simlex_rho: float | None = None
    simlex_used: int = 0
    simlex_skipped: int = 0
    analogy_accuracy: float | None = None
    analogy_used: int = 0
    analogy_skipped: int = 0
    overlap_at_10: float | None = None
    reconstruction_accuracy: float | None = None


@dataclass
class EvalReport:
    """Metrics for the original / quantized / spike-decoded representations."""

    original: RepresentationMetrics
    quantized: RepresentationMetrics
    spike: RepresentationMetrics
    per_dimension_accuracy: float | None = None
    confusion: list[list[int]] | None = None
    reference: dict = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def to_table(self) -> str:
        """Aligned-text table, one metric per row, one representation per column."""
        def fmt(value, pct=False):
            if value is None:
                return "N/A"
            return f"{100 * value:.2f}%" if pct else f"{value:.3f}"

        rows = [
            ("SimLex (Spearman rho)", [fmt(r.simlex_rho) for r in self._reps()]),
            ("Analogy accuracy", [fmt(r.analogy_accuracy, pct=True) for r in self._reps()]),
            ("Overlap@10 vs original", [fmt(r.overlap_at_10) for r in self._reps()]),
            ("Reconstruction accuracy", [fmt(r.reconstruction_accuracy, pct=True) for r in self._reps()]),
        ]
        header = ("Metric", ["Original", "Quantized", "Spike-based"])
        width = max(len(header[0]), *(len(name) for name, _ in rows)) + 2
        lines = [header[0].ljust(width) + "".join(c.rjust(14) for c in header[1])]
        lines.append("-" * len(lines[0]))
        for name, cells in rows:
            lines.append(name.ljust(width) + "".join(c.rjust(14) for c in cells))
        return "\n".join(lines)

    def _reps(self):
        return (self.original, self.quantized, self.spike)


def _metrics_for(
    vectors: dict[str, np.ndarray],
    original_map: dict[str, np.ndarray],
    pairs,
    quads,
    vocab,
) -> RepresentationMetrics:
    m = RepresentationMetrics()
    if pairs:
        m.simlex_rho, m.simlex_used, m.simlex_skipped = simlex_eval(vectors, pairs)
    if quads:
        m.analogy_accuracy, m.analogy_used, m.analogy_skipped = analogy_eval(vectors, quads)
    m.overlap_at_10 = overlap_at_k(original_map, vectors, 10, vocab)
    return m


def full_report(
    original: EmbeddingSet,
    cfg: CodecConfig,
    pairs: list[SimilarityPair] | None = None,
    quads: list[AnalogyQuad] | None = None,
) -> EvalReport:
    """Quantize and round-trip the embedding set, then evaluate all metrics
    for the original, quantized, and spike-decoded representations."""
    result = roundtrip(original, cfg)
    original_map = original.as_map()
    quantized_map = result.ternary.as_map()
    spike_map = result.decoded.as_map()
    vocab = list(original.words)

    report = EvalReport(
        original=_metrics_for(original_map, original_map, pairs, quads, vocab),
        quantized=_metrics_for(quantized_map, original_map, pairs, quads, vocab),
        spike=_metrics_for(spike_map, original_map, pairs, quads, vocab),
        reference=REFERENCE_VALUES,
    )
    word_exact, per_dim, confusion = reconstruction_accuracy(result.ternary, result.decoded)
    report.spike.reconstruction_accuracy = word_exact
    report.per_dimension_accuracy = per_dim
    report.confusion = confusion.tolist()
    return report
