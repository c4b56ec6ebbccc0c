# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled immediate-threshold loss/gradient kernel.

Single sequential pass over the samples (deterministic accumulation
order); same contract as the NumPy fallback in ``_itloss_py``.
"""

from libc.math cimport exp, log1p

import numpy as np


cdef inline double softplus(double z) nogil:
    # log(1 + exp(z)) without overflow
    if z > 0.0:
        return z + log1p(exp(-z))
    return log1p(exp(z))


cdef inline double sigmoid(double z) nogil:
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    cdef double e = exp(z)
    return e / (1.0 + e)


def loss_grad(double[:, ::1] X, long[:] y, double[:] w,
              double theta0, double theta1, double alpha):
    """Total loss and gradient over (w, theta0, theta1).

    Returns (loss, grad) with grad laid out as [dw (d), dtheta0, dtheta1].
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    if y.shape[0] != n or w.shape[0] != d:
        raise ValueError("shape mismatch between X, y, and w")

    grad_np = np.zeros(d + 2, dtype=np.float64)
    cdef double[:] grad = grad_np
    cdef double loss = 0.0
    cdef double s, ds
    cdef Py_ssize_t i, j
    cdef long label

    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(d):
                s += X[i, j] * w[j]
            label = y[i]
            if label == 0:
                # f(theta0 - s) = softplus(s - theta0)
                loss += softplus(s - theta0)
                ds = sigmoid(s - theta0)
                grad[d] -= ds
            elif label == 1:
                loss += softplus(theta0 - s) + softplus(s - theta1)
                ds = -sigmoid(theta0 - s) + sigmoid(s - theta1)
                grad[d] += sigmoid(theta0 - s)
                grad[d + 1] -= sigmoid(s - theta1)
            else:
                loss += softplus(theta1 - s)
                ds = -sigmoid(theta1 - s)
                grad[d + 1] += sigmoid(theta1 - s)
            for j in range(d):
                grad[j] += ds * X[i, j]

    for j in range(d):
        grad[j] += alpha * w[j]
        loss += 0.5 * alpha * w[j] * w[j]
    return loss, grad_np
