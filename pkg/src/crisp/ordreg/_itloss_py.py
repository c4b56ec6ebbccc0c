"""NumPy implementation of the immediate-threshold loss and gradient.

Fallback for environments without the compiled extension; same contract
as ``_itloss_c.loss_grad``.  The logistic surrogate is evaluated through
logaddexp/expit so large |margins| stay finite.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit


def loss_grad(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    theta0: float,
    theta1: float,
    alpha: float,
):
    """Total loss and gradient over (w, theta0, theta1).

    Per sample, with s = w.x and f(z) = log(1 + exp(-z)):
      y = 0 (low):    f(theta0 - s)
      y = 1 (medium): f(s - theta0) + f(theta1 - s)
      y = 2 (high):   f(s - theta1)
    plus the ridge term (alpha / 2) * ||w||^2 on the weights only.

    Returns (loss, grad) with grad laid out as [dw (d), dtheta0, dtheta1].
    """
    s = X @ w
    low = y == 0
    mid = y == 1
    high = y == 2

    def f(z):
        return np.logaddexp(0.0, -z)

    loss = (
        f(theta0 - s[low]).sum()
        + (f(s[mid] - theta0) + f(theta1 - s[mid])).sum()
        + f(s[high] - theta1).sum()
        + 0.5 * alpha * float(w @ w)
    )

    # dl/ds per sample
    ds = np.zeros_like(s)
    ds[low] = expit(s[low] - theta0)
    ds[mid] = -expit(theta0 - s[mid]) + expit(s[mid] - theta1)
    ds[high] = -expit(theta1 - s[high])

    grad_w = X.T @ ds + alpha * w
    grad_t0 = -expit(s[low] - theta0).sum() + expit(theta0 - s[mid]).sum()
    grad_t1 = -expit(s[mid] - theta1).sum() + expit(theta1 - s[high]).sum()

    grad = np.concatenate([grad_w, [grad_t0, grad_t1]])
    return float(loss), grad
