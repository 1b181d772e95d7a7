"""Sorted-l1 norm, its dual norm, and its proximal operator.

The norm of a vector v under a non-increasing non-negative weight sequence
gamma is ``sum_i gamma_i |v|_(i)`` where ``|v|_(i)`` is the i-th largest
absolute entry.  The prox is computed exactly by soft-shifting the sorted
magnitudes and running a stack-based pool-adjacent-violators pass.
"""

from dataclasses import dataclass

import numpy as np

from .backend import jit


class WeightSequenceError(ValueError):
    """Raised when a candidate weight list violates monotonicity or sign."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class WeightSequence:
    """Non-increasing, non-negative penalty weights.

    Construct through :func:`validate`; the constructor itself does not check.
    """

    weights: np.ndarray

    def __len__(self):
        return self.weights.shape[0]

    def scaled(self, factor):
        return WeightSequence(self.weights * float(factor))


def validate(weights):
    """Check monotonicity/non-negativity and wrap into a WeightSequence.

    Raises WeightSequenceError carrying the index of the first violation.
    Comparison is exact; builders must produce monotone sequences themselves.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] < 1:
        raise WeightSequenceError("weights must be a non-empty 1-d sequence", 0)
    if not np.all(np.isfinite(w)):
        idx = int(np.flatnonzero(~np.isfinite(w))[0])
        raise WeightSequenceError(f"non-finite weight at index {idx}", idx)
    for i in range(w.shape[0]):
        if w[i] < 0.0:
            raise WeightSequenceError(f"negative weight at index {i}", i)
        if i > 0 and w[i] > w[i - 1]:
            raise WeightSequenceError(f"weights increase at index {i}", i)
    w.setflags(write=False)
    return WeightSequence(w)


def _check_dims(v, gamma):
    if v.shape[0] != gamma.weights.shape[0]:
        raise ValueError(
            f"dimension mismatch: vector has {v.shape[0]} entries, "
            f"weights have {gamma.weights.shape[0]}"
        )


def norm_eval(v, gamma):
    """Sorted-l1 norm: inner product of decreasing |v| with the weights."""
    v = np.asarray(v, dtype=np.float64)
    _check_dims(v, gamma)
    mags = np.sort(np.abs(v))[::-1]
    return float(mags @ gamma.weights)


def dual_norm_eval(u, gamma):
    """Norm dual to the sorted-l1 norm.

    Equals ``max_k (sum of k largest |u|) / (sum of first k weights)``,
    skipping prefixes with zero weight sum.
    """
    u = np.asarray(u, dtype=np.float64)
    _check_dims(u, gamma)
    cum_u = np.cumsum(np.sort(np.abs(u))[::-1])
    cum_g = np.cumsum(gamma.weights)
    pos = cum_g > 0.0
    if not np.any(pos):
        raise ValueError("dual norm undefined for an all-zero weight sequence")
    return float(np.max(cum_u[pos] / cum_g[pos]))


def _pava_nonincreasing(z):
    # Isotonic (non-increasing) fit of z, clipped at zero: exact solution of
    #   min 0.5*||x - z||^2  s.t.  x_1 >= x_2 >= ... >= 0.
    d = z.shape[0]
    out = np.empty(d, dtype=np.float64)
    blk_sum = np.empty(d, dtype=np.float64)
    blk_len = np.empty(d, dtype=np.int64)
    k = -1
    for i in range(d):
        k += 1
        blk_sum[k] = z[i]
        blk_len[k] = 1
        while k > 0 and blk_sum[k] * blk_len[k - 1] >= blk_sum[k - 1] * blk_len[k]:
            blk_sum[k - 1] += blk_sum[k]
            blk_len[k - 1] += blk_len[k]
            k -= 1
    pos = 0
    for j in range(k + 1):
        a = blk_sum[j] / blk_len[j]
        if a < 0.0:
            a = 0.0
        for _ in range(blk_len[j]):
            out[pos] = a
            pos += 1
    return out


_pava_kernel = jit(_pava_nonincreasing)


def prox(v, gamma, t=1.0):
    """Proximal operator of ``t * norm_eval(., gamma)``.

    Returns the unique minimizer of ``0.5*||w - v||^2 + t*||w||_gamma``.
    The scale t is folded into the weights, keeping one code path.
    """
    v = np.asarray(v, dtype=np.float64)
    _check_dims(v, gamma)
    if not t > 0.0:
        raise ValueError(f"prox scale must be positive, got {t}")
    absv = np.abs(v)
    # Stable sort: equal magnitudes stay in index order; equal inputs are
    # merged by the PAVA pass, so the result is tie-independent.
    order = np.argsort(-absv, kind="stable")
    z = absv[order] - t * gamma.weights
    x = _pava_kernel(z)
    out = np.empty_like(v)
    out[order] = x
    return np.sign(v) * out
