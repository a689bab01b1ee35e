"""Stochastic subgradient descent for the regularized hinge objective.

The training objective is

    E(w, b) = (1/n) * sum_i hinge(w . x_i + b, y_i) + alpha * R(w)

with hinge(s, y) = max(0, 1 - y*s) and R one of

    l2:          R(w) = 1/2 * sum w_j^2
    l1:          R(w) = 1/2 * sum |w_j|
    elasticnet:  R(w) = phi/2 * sum w_j^2 + (1 - phi) * sum |w_j|

Note the elasticnet l1 term carries no 1/2, unlike standalone l1; phi = 1
makes elasticnet coincide with l2 exactly.  Each step updates

    w <- w - eta * (alpha * dR/dw + dL/dw),    eta(t) = 1 / (alpha * (t0 + t))

where dL/dw is -y*x when the margin is violated (y*(w.x+b) < 1) and 0
otherwise.  The bias moves with the loss term only and is never
regularized.  sign(0) is taken as 0 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DegenerateLabelsError, LengthMismatchError
from .linear_model import LinearModel
from .vectorize import FeatureMatrix, SparseVector

PENALTY_L1 = "l1"
PENALTY_L2 = "l2"
PENALTY_ELASTICNET = "elasticnet"
PENALTIES = (PENALTY_L1, PENALTY_L2, PENALTY_ELASTICNET)

# Rescale the scaled-weight representation before the factor underflows.
_SCALE_FLOOR = 1e-130


@dataclass(frozen=True)
class SgdConfig:
    penalty: str = PENALTY_L2
    alpha: float = 1e-4
    phi: float = 0.5
    epochs: int = 20
    t0: float | None = None  # None -> max(0, 1/alpha - 1)
    tol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.penalty not in PENALTIES:
            raise ConfigError(f"penalty must be one of {PENALTIES}, got {self.penalty!r}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if not 0.0 <= self.phi <= 1.0:
            raise ConfigError(f"phi must be in [0, 1], got {self.phi}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.t0 is not None and self.t0 < 0:
            raise ConfigError(f"t0 must be >= 0, got {self.t0}")
        if not self.tol >= 0:
            raise ConfigError(f"tol must be >= 0, got {self.tol}")

    def resolved_t0(self) -> float:
        return self.t0 if self.t0 is not None else max(0.0, 1.0 / self.alpha - 1.0)


def hinge_loss(score: float, label: int) -> float:
    return max(0.0, 1.0 - label * score)


def _penalty_coefficients(penalty: str, phi: float) -> tuple[float, float]:
    # (l2_coeff, l1_coeff) such that dR/dw = l2_coeff*w + l1_coeff*sign(w).
    if penalty == PENALTY_L2:
        return 1.0, 0.0
    if penalty == PENALTY_L1:
        return 0.0, 0.5
    return phi, 1.0 - phi


def regularizer_value(w: np.ndarray, penalty: str, phi: float = 0.5) -> float:
    l2c, l1c = _penalty_coefficients(penalty, phi)
    return float(0.5 * l2c * np.sum(w * w) + l1c * np.sum(np.abs(w)))


def regularizer_subgradient(w: np.ndarray, penalty: str, phi: float = 0.5) -> np.ndarray:
    l2c, l1c = _penalty_coefficients(penalty, phi)
    return l2c * w + l1c * np.sign(w)


def learning_rate(t: int, alpha: float, t0: float) -> float:
    """eta(t) = 1 / (alpha * (t0 + t)); decreasing in t."""
    if alpha <= 0:
        raise ConfigError(f"alpha must be > 0, got {alpha}")
    if t0 + t <= 0:
        raise ConfigError(f"t0 + t must be > 0, got {t0} + {t}")
    return 1.0 / (alpha * (t0 + t))


def sgd_step(
    w: np.ndarray,
    b: float,
    x: SparseVector,
    label: int,
    alpha: float,
    eta: float,
    penalty: str,
    phi: float = 0.5,
) -> tuple[np.ndarray, float]:
    """One update on one example; returns fresh (w, b), inputs untouched.

    Both subgradients are evaluated at the incoming (w, b).
    """
    score = x.dot_dense(w) + b
    grad = alpha * regularizer_subgradient(w, penalty, phi)
    w_new = w - eta * grad
    b_new = b
    if label * score < 1.0:
        w_new[x.indices] += eta * label * x.values
        b_new = b + eta * label
    return w_new, b_new


def objective(
    w: np.ndarray,
    b: float,
    matrix: FeatureMatrix,
    labels: Sequence[int],
    alpha: float,
    penalty: str,
    phi: float = 0.5,
) -> float:
    """Mean hinge loss plus alpha times the penalty; 1.0 at the zero model."""
    total = 0.0
    for row, y in zip(matrix.rows, labels):
        total += hinge_loss(row.dot_dense(w) + b, y)
    return total / len(matrix.rows) + alpha * regularizer_value(w, penalty, phi)


def validate_labels(labels: Sequence[int], n_rows: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n_rows,):
        raise LengthMismatchError(f"{y.shape[0] if y.ndim == 1 else y.shape} labels for {n_rows} rows")
    if not np.all(np.isin(y, (-1, 1))):
        raise DegenerateLabelsError("labels must be -1 or +1")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise DegenerateLabelsError("training needs both classes present")
    return y


def train_sgd(matrix: FeatureMatrix, labels: Sequence[int], config: SgdConfig) -> LinearModel:
    """Epoch-wise SGD with seeded reshuffling and early stopping.

    Stops after any epoch whose relative objective improvement falls below
    config.tol, or after config.epochs epochs.
    """
    y = validate_labels(labels, len(matrix))
    dim = matrix.dim
    alpha = config.alpha
    l2c, l1c = _penalty_coefficients(config.penalty, config.phi)
    t0 = config.resolved_t0()
    rng = np.random.default_rng(config.seed)

    idxs = [r.indices for r in matrix.rows]
    vals = [r.values for r in matrix.rows]

    # When there is no l1 term the multiplicative shrink is tracked as a
    # scalar on top of v, so each step touches only the active features.
    use_scaling = l1c == 0.0
    v = np.zeros(dim)
    scale = 1.0
    b = 0.0
    t = 0
    sign_buf = np.empty(dim)
    prev_obj = 1.0  # objective of the zero model
    epochs_run = 0
    final_obj = prev_obj

    for _ in range(config.epochs):
        for i in rng.permutation(len(y)):
            t += 1
            eta = 1.0 / (alpha * (t0 + t))
            xi = idxs[i]
            xv = vals[i]
            yi = y[i]
            score = scale * float(xv @ v[xi]) + b
            violated = yi * score < 1.0
            if use_scaling:
                factor = 1.0 - eta * alpha * l2c
                if factor == 0.0:
                    v[:] = 0.0
                    scale = 1.0
                else:
                    scale *= factor
                    if abs(scale) < _SCALE_FLOOR:
                        v *= scale
                        scale = 1.0
                if violated:
                    v[xi] += (eta * yi / scale) * xv
            else:
                if l2c:
                    v *= 1.0 - eta * alpha * l2c
                np.sign(v, out=sign_buf)
                v -= (eta * alpha * l1c) * sign_buf
                if violated:
                    v[xi] += (eta * yi) * xv
            if violated:
                b += eta * yi
        epochs_run += 1
        w_now = v * scale if scale != 1.0 else v
        final_obj = objective(w_now, b, matrix, y, alpha, config.penalty, config.phi)
        improvement = (prev_obj - final_obj) / max(abs(prev_obj), 1e-12)
        prev_obj = final_obj
        if improvement < config.tol:
            break

    w = np.multiply(v, scale) if scale != 1.0 else v.copy()
    return LinearModel(
        weights=w,
        bias=float(b),
        dim=dim,
        metadata={
            "trainer": "sgd",
            "penalty": config.penalty,
            "alpha": config.alpha,
            "phi": config.phi,
            "epochs": config.epochs,
            "epochs_run": epochs_run,
            "t0": t0,
            "tol": config.tol,
            "seed": config.seed,
            "final_objective": final_obj,
        },
    )
