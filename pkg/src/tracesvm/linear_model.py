"""Linear decision function shared by both trainers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionMismatchError
from .vectorize import FeatureMatrix, SparseVector


@dataclass
class LinearModel:
    """Dense weight vector, scalar bias, and provenance metadata."""

    weights: np.ndarray
    bias: float
    dim: int
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.dim,):
            raise DimensionMismatchError(
                f"weights shape {self.weights.shape} vs dim {self.dim}"
            )


def decision_function(model: LinearModel, x: SparseVector) -> float:
    """Signed score w . x + b."""
    if x.dim != model.dim:
        raise DimensionMismatchError(f"input dim {x.dim} vs model dim {model.dim}")
    return x.dot_dense(model.weights) + model.bias


def predict(model: LinearModel, x: SparseVector) -> int:
    """+1 (malicious) when the score is >= 0, else -1 (benign)."""
    return 1 if decision_function(model, x) >= 0.0 else -1


def decision_many(model: LinearModel, matrix: FeatureMatrix) -> np.ndarray:
    return np.array([decision_function(model, row) for row in matrix.rows])


def predict_many(model: LinearModel, matrix: FeatureMatrix) -> np.ndarray:
    scores = decision_many(model, matrix)
    return np.where(scores >= 0.0, 1, -1)
