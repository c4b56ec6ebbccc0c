"""Ordinal regression over rank features with two thresholds.

A single linear score w.x is cut by thresholds theta0 < theta1 into the
three impact categories.  Training minimizes the immediate-threshold
logistic loss (each sample only pays for the thresholds adjacent to its
own category) plus an L2 penalty on the weights; thresholds are not
penalized.  The ordering constraint is enforced by optimizing
(theta0, delta) with theta1 = theta0 + exp(delta), which keeps the
problem smooth and unconstrained.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.optimize

from ..aggregate import AggregatedRanking
from ..labels import ImpactCategory
from . import backend
from .features import NUM_FEATURES, TrainingSet, build_features

INIT_THETA0 = -1.0
INIT_DELTA = math.log(2.0)


def it_loss_and_gradient(
    X: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray,
    theta0: float,
    theta1: float,
    alpha: float,
) -> tuple[float, np.ndarray]:
    """Immediate-threshold loss and gradient wrt (weights, theta0, theta1).

    Delegates to the compiled kernel when available; both backends
    return identical values.  The gradient is a flat vector of length
    d + 2, ordered weights first.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if not theta0 < theta1:
        raise ValueError(f"thresholds must satisfy theta0 < theta1, got {theta0} >= {theta1}")
    return backend.loss_grad(X, y, weights, theta0, theta1, alpha)


@dataclass(frozen=True)
class OrdinalModel:
    """Fitted linear model: score w.x against thresholds (theta0, theta1)."""

    weights: np.ndarray
    theta0: float
    theta1: float
    alpha: float
    converged: bool
    grad_norm: float

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1:
            raise ValueError("weights must be a 1-d vector")
        if not self.theta0 < self.theta1:
            raise ValueError(
                f"thresholds must satisfy theta0 < theta1, got {self.theta0} >= {self.theta1}"
            )

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        return X @ self.weights

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Category = number of thresholds at or below the score."""
        s = self.decision_scores(X)
        return (s >= self.theta0).astype(np.int64) + (s >= self.theta1).astype(np.int64)

    def predict_category(self, x: np.ndarray) -> ImpactCategory:
        return ImpactCategory(int(self.predict(x)[0]))

    def to_json_dict(self) -> dict:
        return {
            "weights": [float(v) for v in self.weights],
            "theta0": float(self.theta0),
            "theta1": float(self.theta1),
            "alpha": float(self.alpha),
            "converged": bool(self.converged),
            "grad_norm": float(self.grad_norm),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "OrdinalModel":
        try:
            return cls(
                weights=np.asarray(data["weights"], dtype=np.float64),
                theta0=float(data["theta0"]),
                theta1=float(data["theta1"]),
                alpha=float(data["alpha"]),
                converged=bool(data["converged"]),
                grad_norm=float(data["grad_norm"]),
            )
        except KeyError as exc:
            raise ValueError(f"model JSON missing field {exc.args[0]!r}") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "OrdinalModel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def fit(
    training: TrainingSet,
    alpha: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 1000,
) -> OrdinalModel:
    """Minimize the immediate-threshold loss with BFGS.

    Deterministic: fixed start (w = 0, theta0 = -1, theta1 = 1) and no
    randomized steps, so identical inputs give identical models.
    """
    if len(training) == 0:
        raise ValueError("training set is empty")
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    X, y = training.X, training.y
    d = X.shape[1]

    def objective(params: np.ndarray) -> tuple[float, np.ndarray]:
        w = params[:d]
        theta0 = params[d]
        delta = params[d + 1]
        theta1 = theta0 + math.exp(delta)
        loss, grad = backend.loss_grad(X, y, w, theta0, theta1, alpha)
        # Chain rule through theta1 = theta0 + exp(delta).
        g = np.empty_like(params)
        g[:d] = grad[:d]
        g[d] = grad[d] + grad[d + 1]
        g[d + 1] = grad[d + 1] * math.exp(delta)
        return loss, g

    x0 = np.zeros(d + 2, dtype=np.float64)
    x0[d] = INIT_THETA0
    x0[d + 1] = INIT_DELTA
    result = scipy.optimize.minimize(
        objective,
        x0,
        jac=True,
        method="BFGS",
        options={"gtol": tol, "norm": 2, "maxiter": max_iter},
    )
    w = result.x[:d]
    theta0 = float(result.x[d])
    theta1 = theta0 + math.exp(float(result.x[d + 1]))
    _, grad = backend.loss_grad(X, y, w, theta0, theta1, alpha)
    grad_norm = float(np.linalg.norm(grad))
    return OrdinalModel(
        weights=w,
        theta0=theta0,
        theta1=theta1,
        alpha=alpha,
        converged=bool(result.success),
        grad_norm=grad_norm,
    )


def annotate_fused(
    fused: AggregatedRanking,
    model: OrdinalModel,
    run_ranks: dict[str, Sequence[float | None]],
    n_references: int,
) -> AggregatedRanking:
    """Replace each fused entry's predicted impact with the model's.

    ``run_ranks`` maps paper id -> per-run ranks (None where absent),
    exactly as used at training time; fusion order is untouched.
    """
    annotated = []
    for entry in fused.entries:
        try:
            slots = run_ranks[entry.paper_id]
        except KeyError:
            raise ValueError(
                f"no per-run ranks for fused entry {entry.paper_id!r}"
            ) from None
        category = model.predict_category(build_features(slots, n_references))
        annotated.append(replace(entry, predicted_impact=category))
    return replace(fused, entries=tuple(annotated))
