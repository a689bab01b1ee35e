"""Coordinate descent on the dual of the soft-margin linear SVM.

Rows are bias-augmented with a constant 1 feature, so the bias is just the
last coordinate of the augmented weight vector.  With Q_ij = y_i y_j
(x_i . x_j) over augmented rows, the problem is

    min_a  1/2 a'Qa - sum(a)    subject to  0 <= a_i <= C.

One coordinate at a time is moved to its box-constrained univariate
minimum, a_i <- clip(a_i - G_i / Q_ii, 0, C) with G_i = y_i (w . x_i) - 1,
while w = sum_i a_i y_i x_i is maintained incrementally.  A sweep visits
the rows in a seeded random permutation; the optimizer stops when every
projected gradient magnitude falls below tol, or warns after max_outer
sweeps.  Rows that are empty before augmentation are skipped and keep
a_i = 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, NonConvergenceWarning
from .linear_model import LinearModel
from .sgd import validate_labels
from .vectorize import FeatureMatrix

# Projected gradients this small are numerical noise; skip the update.
_PG_EPS = 1e-14


@dataclass(frozen=True)
class DualConfig:
    C: float = 1.0
    tol: float = 1e-3
    max_outer: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigError(f"C must be > 0, got {self.C}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if self.max_outer < 1:
            raise ConfigError(f"max_outer must be >= 1, got {self.max_outer}")


@dataclass
class DualState:
    """Dual variables plus the maintained augmented primal vector."""

    alpha_dual: np.ndarray  # one per row, in [0, C]
    w: np.ndarray  # dim + 1; w[-1] is the bias coordinate
    outer_iter: int = 0


def _augmented_rows(matrix: FeatureMatrix) -> tuple[list[np.ndarray], list[np.ndarray]]:
    dim = matrix.dim
    idxs, vals = [], []
    for row in matrix.rows:
        idxs.append(np.append(row.indices, dim))
        vals.append(np.append(row.values, 1.0))
    return idxs, vals


def init_state(matrix: FeatureMatrix) -> DualState:
    return DualState(
        alpha_dual=np.zeros(len(matrix)), w=np.zeros(matrix.dim + 1), outer_iter=0
    )


def q_entry(i: int, j: int, matrix: FeatureMatrix, labels: Sequence[int]) -> float:
    """Q_ij = y_i y_j (x_i . x_j) over bias-augmented rows."""
    a, b = matrix.rows[i], matrix.rows[j]
    common, ia, ib = np.intersect1d(a.indices, b.indices, return_indices=True)
    dot = float(a.values[ia] @ b.values[ib]) + 1.0  # + bias coord product
    return labels[i] * labels[j] * dot


def gradient(i: int, state: DualState, matrix: FeatureMatrix, labels: Sequence[int]) -> float:
    """G_i = y_i (w . x_i) - 1 with x_i augmented."""
    row = matrix.rows[i]
    wx = float(row.values @ state.w[row.indices]) + state.w[-1]
    return labels[i] * wx - 1.0


def projected_gradient(
    i: int, state: DualState, matrix: FeatureMatrix, labels: Sequence[int], C: float
) -> float:
    """G_i projected onto the box: 0 at an active bound that G_i pushes against."""
    g = gradient(i, state, matrix, labels)
    a = state.alpha_dual[i]
    if a <= 0.0:
        return min(g, 0.0)
    if a >= C:
        return max(g, 0.0)
    return g


def cd_update(
    i: int, state: DualState, matrix: FeatureMatrix, labels: Sequence[int], C: float
) -> DualState:
    """Move coordinate i to its clipped univariate minimum; returns a new state."""
    row = matrix.rows[i]
    qii = float(row.values @ row.values) + 1.0
    g = gradient(i, state, matrix, labels)
    new_alpha = min(max(state.alpha_dual[i] - g / qii, 0.0), C)
    alpha_dual = state.alpha_dual.copy()
    w = state.w.copy()
    delta = new_alpha - alpha_dual[i]
    if delta != 0.0:
        alpha_dual[i] = new_alpha
        w[row.indices] += (delta * labels[i]) * row.values
        w[-1] += delta * labels[i]
    return DualState(alpha_dual=alpha_dual, w=w, outer_iter=state.outer_iter)


def dual_objective(state: DualState) -> float:
    """1/2 ||w||^2 - sum(a), using the maintained augmented w."""
    return 0.5 * float(state.w @ state.w) - float(np.sum(state.alpha_dual))


def train_dual_cd(
    matrix: FeatureMatrix,
    labels: Sequence[int],
    config: DualConfig,
    callback: Callable[[DualState], None] | None = None,
) -> LinearModel:
    """Run sweeps until max |projected gradient| < tol or max_outer is hit.

    The optional callback sees the live state after every coordinate update;
    it must not mutate it.
    """
    y = validate_labels(labels, len(matrix))
    dim = matrix.dim
    C = float(config.C)
    idxs, vals = _augmented_rows(matrix)
    qii = np.array([float(v @ v) for v in vals])
    active = np.array(
        [i for i, row in enumerate(matrix.rows) if row.nnz > 0], dtype=np.int64
    )
    rng = np.random.default_rng(config.seed)

    alpha = np.zeros(len(matrix))
    w = np.zeros(dim + 1)
    state = DualState(alpha_dual=alpha, w=w, outer_iter=0)
    yf = y.astype(np.float64)

    converged = False
    outer = 0
    while outer < config.max_outer:
        outer += 1
        state.outer_iter = outer
        max_pg = 0.0
        for i in rng.permutation(active):
            xi = idxs[i]
            xv = vals[i]
            g = yf[i] * float(xv @ w[xi]) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = g if g < 0.0 else 0.0
            elif a >= C:
                pg = g if g > 0.0 else 0.0
            else:
                pg = g
            apg = -pg if pg < 0.0 else pg
            if apg > max_pg:
                max_pg = apg
            if apg > _PG_EPS:
                new_alpha = a - g / qii[i]
                if new_alpha < 0.0:
                    new_alpha = 0.0
                elif new_alpha > C:
                    new_alpha = C
                delta = new_alpha - a
                if delta != 0.0:
                    alpha[i] = new_alpha
                    w[xi] += (delta * yf[i]) * xv
                if callback is not None:
                    callback(state)
        if max_pg < config.tol:
            # Sweep-time gradients are stale once later coordinates move;
            # confirm on a frozen pass before declaring convergence.
            if _max_abs_pg(active, idxs, vals, yf, alpha, w, C) < config.tol:
                converged = True
                break

    if not converged:
        warnings.warn(
            f"dual coordinate descent stopped after {outer} sweeps with "
            f"max projected gradient still >= tol={config.tol}",
            NonConvergenceWarning,
            stacklevel=2,
        )

    return LinearModel(
        weights=w[:dim].copy(),
        bias=float(w[dim]),
        dim=dim,
        metadata={
            "trainer": "dual-cd",
            "C": config.C,
            "tol": config.tol,
            "max_outer": config.max_outer,
            "seed": config.seed,
            "outer_iters": outer,
            "converged": converged,
            "dual_objective": 0.5 * float(w @ w) - float(np.sum(alpha)),
        },
    )


def _max_abs_pg(active, idxs, vals, yf, alpha, w, C) -> float:
    worst = 0.0
    for i in active:
        g = yf[i] * float(vals[i] @ w[idxs[i]]) - 1.0
        a = alpha[i]
        if a <= 0.0:
            pg = min(g, 0.0)
        elif a >= C:
            pg = max(g, 0.0)
        else:
            pg = g
        worst = max(worst, abs(pg))
    return worst
