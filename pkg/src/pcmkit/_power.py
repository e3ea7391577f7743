"""Batched power iteration for dominant eigenpairs of positive matrices.

For a strictly positive matrix the dominant eigenvalue is real, simple,
and has a positive eigenvector, so iterating v <- A v from the uniform
vector converges for every input.  The batch variant runs a stack of
matrices in lockstep but freezes each matrix at its own stopping point,
so per-matrix results do not depend on what else shares the batch.
"""

from __future__ import annotations

import numpy as np

from .errors import NoConvergenceError


def power_iterate(mats: np.ndarray, tol: float, max_iter: int):
    """Dominant eigenpair of every matrix in a (B, n, n) stack.

    Stops a matrix once both the componentwise relative change of its
    normalized iterate and its eigen-residual max_i |(A w)_i - lam w_i| / w_i
    drop to tol (the residual scaled by lam).  Returns arrays
    (weights, lam, iterations, residual, converged) where weights rows sum
    to one and iterations counts matrix-vector products.
    """
    mats = np.asarray(mats, dtype=float)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError(f"expected a (B, n, n) stack, got shape {mats.shape}")
    batch, n, _ = mats.shape

    weights = np.full((batch, n), 1.0 / n)
    lam_out = np.zeros(batch)
    resid_out = np.full(batch, np.inf)
    iter_out = np.zeros(batch, dtype=np.int64)
    converged = np.zeros(batch, dtype=bool)

    idx = np.arange(batch)
    active = mats
    w = np.full((batch, n), 1.0 / n)

    for it in range(1, max_iter + 1):
        v = np.matmul(active, w[:, :, None])[:, :, 0]
        lam = (v / w).mean(axis=1)
        resid = np.max(np.abs(v - lam[:, None] * w) / w, axis=1)
        w_next = v / v.sum(axis=1)[:, None]
        change = np.max(np.abs(w_next - w) / w, axis=1)
        done = (change <= tol) & (resid <= tol * lam)
        if done.any():
            hit = idx[done]
            # Return the iterate the residual was measured at, so the
            # certificate resid <= tol * lam refers to the reported vector.
            weights[hit] = w[done]
            lam_out[hit] = lam[done]
            resid_out[hit] = resid[done]
            iter_out[hit] = it
            converged[hit] = True
            keep = ~done
            idx = idx[keep]
            active = active[keep]
            w = w_next[keep]
            if idx.size == 0:
                break
        else:
            w = w_next
    if idx.size:
        weights[idx] = w
        lam_out[idx] = lam[~done]
        resid_out[idx] = resid[~done]
        iter_out[idx] = max_iter

    return weights, lam_out, iter_out, resid_out, converged


def power_iterate_single(matrix: np.ndarray, tol: float, max_iter: int):
    """Single-matrix wrapper that raises on a blown iteration budget."""
    weights, lam, iters, resid, conv = power_iterate(matrix[None, :, :], tol, max_iter)
    if not conv[0]:
        raise NoConvergenceError(int(iters[0]), float(resid[0]))
    return weights[0], float(lam[0]), int(iters[0]), float(resid[0])
