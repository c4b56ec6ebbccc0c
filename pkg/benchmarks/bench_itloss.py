"""Time the compiled ordinal-loss kernel against the NumPy fallback.

Both backends compute the immediate-threshold loss and its gradient on
identical inputs; this script reports per-call times across problem
sizes and the resulting speedup.  Run from the repository root:

    python3 benchmarks/bench_itloss.py
"""

from __future__ import annotations

import timeit

import numpy as np

from crisp.ordreg import _itloss_py
from crisp.ordreg.backend import KERNEL_BACKEND, loss_grad
from crisp.ordreg.features import NUM_FEATURES

SIZES = [50, 500, 5_000, 50_000]
ALPHA = 1.0


def make_instance(n: int, rng: np.random.Generator):
    X = rng.normal(size=(n, NUM_FEATURES))
    y = rng.integers(0, 3, size=n).astype(np.int64)
    w = rng.normal(size=NUM_FEATURES)
    theta0 = -0.5
    theta1 = 1.0
    return X, y, w, theta0, theta1


def time_call(fn, args, repeat: int = 5) -> float:
    calls = max(1, 2_000_000 // args[0].shape[0])
    best = min(timeit.repeat(lambda: fn(*args, ALPHA), number=calls, repeat=repeat))
    return best / calls


def main() -> None:
    if KERNEL_BACKEND != "cython":
        print(
            "active backend is the NumPy fallback (no compiled kernel); "
            "timing it against itself is pointless"
        )
        return

    rng = np.random.default_rng(42)
    print(f"{'n':>8}  {'cython':>12}  {'numpy':>12}  {'speedup':>8}")
    for n in SIZES:
        args = make_instance(n, rng)

        loss_c, grad_c = loss_grad(*args, ALPHA)
        loss_p, grad_p = _itloss_py.loss_grad(*args, ALPHA)
        assert abs(loss_c - loss_p) <= 1e-9 * max(1.0, abs(loss_p))
        assert np.allclose(grad_c, grad_p, rtol=1e-9)

        t_c = time_call(loss_grad, args)
        t_p = time_call(_itloss_py.loss_grad, args)
        print(f"{n:>8}  {t_c * 1e6:>10.1f}us  {t_p * 1e6:>10.1f}us  {t_p / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
