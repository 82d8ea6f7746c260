"""Gaussian Mercer kernel over equalizer tap vectors.

The kernel value G(c, c') = exp(-alpha * ||c - c'||^2) equals the inner
product of the two inputs after the implicit mapping into the kernel-induced
feature space. That identity is the whole representation strategy here: the
(infinite-dimensional) feature vectors are never materialized, and every
consumer works through ``evaluate`` / ``evaluate_batch`` alone. Other Mercer
kernels can be added by providing the same two methods.

Squared distances are accumulated by direct summation of per-coordinate
squares; the expansion ||a||^2 + ||b||^2 - 2*a.b is avoided because it
cancels catastrophically for nearly identical vectors. The scalar path
delegates to the batch path so the two are bit-identical by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaussianKernel:
    """Gaussian kernel with bandwidth ``alpha`` > 0."""

    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"kernel bandwidth must be positive, got {self.alpha}")

    def evaluate_batch(self, vectors, query) -> np.ndarray:
        """Kernel values of ``query`` against each row of ``vectors``."""
        q = np.asarray(query, dtype=float)
        if q.ndim != 1:
            raise ValueError("query must be a one-dimensional vector")
        v = np.asarray(vectors, dtype=float)
        if v.size == 0:
            return np.empty(0)
        if v.ndim == 1:
            v = v.reshape(1, -1)
        if v.shape[1] != q.size:
            raise ValueError(
                f"dimension mismatch: dictionary is {v.shape[1]}-dimensional, "
                f"query is {q.size}-dimensional"
            )
        d = v - q
        s = np.einsum("ij,ij->i", d, d)
        np.multiply(s, -self.alpha, out=s)
        return np.exp(s, out=s)

    def evaluate(self, c, c_prime) -> float:
        """Kernel value for a single pair of equal-length vectors."""
        c = np.asarray(c, dtype=float)
        if c.ndim != 1:
            raise ValueError("inputs must be one-dimensional vectors")
        return float(self.evaluate_batch(c.reshape(1, -1), c_prime)[0])


def kernel_eval(kernel: GaussianKernel, c, c_prime) -> float:
    return kernel.evaluate(c, c_prime)


def kernel_eval_batch(kernel: GaussianKernel, dictionary, c_prime) -> np.ndarray:
    return kernel.evaluate_batch(dictionary, c_prime)
