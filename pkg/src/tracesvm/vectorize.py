"""N-gram extraction and tf-idf feature vectors over call sequences.

An n-gram is a space-joined window of n consecutive call names.  The
vocabulary is the union of all n-grams for n in [n_min, n_max] across the
corpus, with indices assigned in lexicographic order.  Inverse document
frequency uses the natural log of (1 + n_docs) / (1 + doc_frequency), so a
feature present in every document gets idf 0 and drops out of the tf-idf
vectors entirely; an optional flag adds 1 after the log to keep such
features alive.  Rows are L2-normalized before training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, EmptyVocabularyError
from .ingest import SyscallTrace


class SparseVector:
    """Immutable-by-convention sparse vector: parallel (indices, values) arrays.

    Indices are strictly increasing and < dim; values are finite and nonzero.
    """

    __slots__ = ("indices", "values", "dim")

    def __init__(self, indices, values, dim: int):
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if indices.ndim != 1 or values.ndim != 1 or indices.shape != values.shape:
            raise ValueError("indices and values must be parallel 1-d arrays")
        if dim < 0:
            raise ValueError("dim must be non-negative")
        if indices.size:
            if indices[0] < 0 or indices[-1] >= dim:
                raise ValueError("indices out of range")
            if indices.size > 1 and not np.all(np.diff(indices) > 0):
                raise ValueError("indices must be strictly increasing")
            if not np.all(np.isfinite(values)) or np.any(values == 0.0):
                raise ValueError("values must be finite and nonzero")
        self.indices = indices
        self.values = values
        self.dim = dim

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]], dim: int) -> SparseVector:
        pairs = sorted(pairs)
        idx = [i for i, _ in pairs]
        val = [v for _, v in pairs]
        return cls(idx, val, dim)

    @classmethod
    def from_dense(cls, dense) -> SparseVector:
        dense = np.asarray(dense, dtype=np.float64)
        idx = np.nonzero(dense)[0]
        return cls(idx, dense[idx], dense.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def dot_dense(self, w: np.ndarray) -> float:
        """Dot product against a dense vector of matching dimension."""
        if w.shape[0] != self.dim:
            raise DimensionMismatchError(f"vector dim {self.dim} vs dense dim {w.shape[0]}")
        return float(self.values @ w[self.indices])

    def norm(self) -> float:
        return float(math.sqrt(float(self.values @ self.values)))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"SparseVector(nnz={self.nnz}, dim={self.dim})"


@dataclass(frozen=True)
class Vocabulary:
    """Bijection between n-gram strings and column indices."""

    by_index: tuple[str, ...]
    n_min: int
    n_max: int

    def __post_init__(self):
        for gram in self.by_index:
            n = gram.count(" ") + 1
            if not self.n_min <= n <= self.n_max:
                raise ValueError(f"{gram!r} has {n} tokens, outside [{self.n_min}, {self.n_max}]")

    def __len__(self) -> int:
        return len(self.by_index)

    @property
    def ngram_to_index(self) -> dict[str, int]:
        # Rebuilt on demand; callers that loop should hold onto the result.
        return {g: i for i, g in enumerate(self.by_index)}


@dataclass(frozen=True)
class IdfModel:
    """Per-feature idf weights fitted on a corpus of n_docs documents."""

    idf: np.ndarray
    n_docs: int

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IdfModel)
            and self.n_docs == other.n_docs
            and np.array_equal(self.idf, other.idf)
        )


@dataclass
class FeatureMatrix:
    """A corpus as parallel sparse rows, row ids and optional labels."""

    rows: list[SparseVector]
    row_ids: list[str]
    labels: list[str] | None
    dim: int

    def __post_init__(self):
        if len(self.rows) != len(self.row_ids):
            raise ValueError("rows and row_ids must be parallel")
        if self.labels is not None and len(self.labels) != len(self.rows):
            raise ValueError("labels must parallel rows")
        for r in self.rows:
            if r.dim != self.dim:
                raise DimensionMismatchError(f"row dim {r.dim} != matrix dim {self.dim}")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def nnz(self) -> int:
        return sum(r.nnz for r in self.rows)


def extract_ngrams(calls: Sequence[str], n: int) -> list[str]:
    """All contiguous space-joined windows of length n, in order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [" ".join(calls[i : i + n]) for i in range(len(calls) - n + 1)]


def build_vocabulary(corpus: Sequence[SyscallTrace], n_min: int, n_max: int) -> Vocabulary:
    """Union of all n-grams for n in [n_min, n_max], indexed lexicographically."""
    if not 1 <= n_min <= n_max:
        raise ValueError(f"need 1 <= n_min <= n_max, got ({n_min}, {n_max})")
    if not corpus:
        raise ValueError("corpus is empty")
    grams: set[str] = set()
    for trace in corpus:
        for n in range(n_min, n_max + 1):
            grams.update(extract_ngrams(trace.calls, n))
    if not grams:
        raise EmptyVocabularyError(
            f"no trace yields an n-gram for n in [{n_min}, {n_max}]"
        )
    return Vocabulary(by_index=tuple(sorted(grams)), n_min=n_min, n_max=n_max)


def count_vector(trace: SyscallTrace, vocab: Vocabulary, _lookup: dict[str, int] | None = None) -> SparseVector:
    """Raw occurrence counts of vocabulary n-grams in one trace.

    N-grams absent from the vocabulary are ignored.
    """
    lookup = _lookup if _lookup is not None else vocab.ngram_to_index
    counts: dict[int, int] = {}
    for n in range(vocab.n_min, vocab.n_max + 1):
        for gram in extract_ngrams(trace.calls, n):
            j = lookup.get(gram)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
    return SparseVector.from_pairs([(j, float(c)) for j, c in counts.items()], len(vocab))


def count_matrix(corpus: Sequence[SyscallTrace], vocab: Vocabulary) -> FeatureMatrix:
    """Count vectors for a whole corpus, carrying ids and labels through."""
    lookup = vocab.ngram_to_index
    rows = [count_vector(t, vocab, _lookup=lookup) for t in corpus]
    labels = [t.label for t in corpus]
    have_labels = all(l is not None for l in labels)
    return FeatureMatrix(
        rows=rows,
        row_ids=[t.source_id for t in corpus],
        labels=list(labels) if have_labels else None,  # type: ignore[arg-type]
        dim=len(vocab),
    )


def fit_idf(counts: FeatureMatrix, add_one: bool = False) -> IdfModel:
    """idf[j] = ln((1 + n_docs) / (1 + df_j)), optionally + 1 after the log.

    Without the +1, a feature present in every document gets idf exactly 0.
    """
    if len(counts) == 0:
        raise ValueError("cannot fit idf on an empty corpus")
    df = np.zeros(counts.dim)
    for row in counts.rows:
        df[row.indices] += 1.0
    idf = np.log((1.0 + len(counts)) / (1.0 + df))
    if add_one:
        idf += 1.0
    return IdfModel(idf=idf, n_docs=len(counts))


def tfidf_vector(counts: SparseVector, idf_model: IdfModel) -> SparseVector:
    """Per-coordinate tf * idf; coordinates whose product is 0 are dropped."""
    if counts.dim != idf_model.idf.shape[0]:
        raise DimensionMismatchError(
            f"counts dim {counts.dim} vs idf dim {idf_model.idf.shape[0]}"
        )
    vals = counts.values * idf_model.idf[counts.indices]
    keep = vals != 0.0
    return SparseVector(counts.indices[keep], vals[keep], counts.dim)


def tfidf_transform(counts: FeatureMatrix, idf_model: IdfModel) -> FeatureMatrix:
    rows = [tfidf_vector(r, idf_model) for r in counts.rows]
    return FeatureMatrix(rows=rows, row_ids=list(counts.row_ids), labels=counts.labels, dim=counts.dim)


def l2_normalize(v: SparseVector) -> SparseVector:
    """Scale to unit Euclidean length; the empty vector is returned unchanged."""
    if v.nnz == 0:
        return v
    return SparseVector(v.indices, v.values / v.norm(), v.dim)


def normalize_matrix(m: FeatureMatrix) -> FeatureMatrix:
    return FeatureMatrix(
        rows=[l2_normalize(r) for r in m.rows],
        row_ids=list(m.row_ids),
        labels=m.labels,
        dim=m.dim,
    )


def fit_transform(
    corpus: Sequence[SyscallTrace], n_min: int, n_max: int, add_one_idf: bool = False
) -> tuple[Vocabulary, IdfModel, FeatureMatrix]:
    """Vocabulary + idf fitted on the corpus, and its normalized tf-idf rows."""
    vocab = build_vocabulary(corpus, n_min, n_max)
    counts = count_matrix(corpus, vocab)
    idf_model = fit_idf(counts, add_one=add_one_idf)
    return vocab, idf_model, normalize_matrix(tfidf_transform(counts, idf_model))


def transform(
    corpus: Sequence[SyscallTrace], vocab: Vocabulary, idf_model: IdfModel
) -> FeatureMatrix:
    """Vectorize new traces with an already-fitted vocabulary and idf.

    N-grams unseen at fit time are silently ignored.
    """
    counts = count_matrix(corpus, vocab)
    return normalize_matrix(tfidf_transform(counts, idf_model))


def write_matrix(matrix: FeatureMatrix, path: Path | str) -> None:
    """Triplet text export: a "rows cols nnz" header, then row<TAB>col<TAB>value."""
    lines = [f"{len(matrix)} {matrix.dim} {matrix.nnz}"]
    for r, row in enumerate(matrix.rows):
        for j, v in row.pairs():
            lines.append(f"{r}\t{j}\t{v!r}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def write_vocabulary(vocab: Vocabulary, path: Path | str) -> None:
    """index<TAB>ngram, one line per feature, in index order."""
    lines = [f"{i}\t{g}" for i, g in enumerate(vocab.by_index)]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
