"""Exact transitions of linear SDEs ``dX = A X dt + Sigma dW``."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import linalg

from ..errors import NonPSD
from ..model import DriftSystem


def apply_rows(M: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``X @ M.T`` along the last axis, computed column by column.

    Elementwise only, so each row's result is bit-identical whatever the
    batch it sits in.
    """
    out = np.zeros(X.shape[:-1] + (M.shape[0],))
    for i in range(M.shape[0]):
        acc = out[..., i]
        for j in range(M.shape[1]):
            if M[i, j] != 0.0:
                acc += M[i, j] * X[..., j]
    return out


def van_loan(A: np.ndarray, W: np.ndarray, h: float) -> tuple:
    """``(exp(hA), Q_h)`` with ``Q_h = int_0^h exp(sA) W exp(sA^T) ds``.

    Uses the exponential of the block matrix ``[[A, W], [0, -A^T]]`` on a step
    short enough that ``exp(-hA^T)`` does not blow up, then doubles
    ``Q_{2s} = Q_s + F_s Q_s F_s^T`` back to ``h``. A single block exponential
    over a long step loses all accuracy to cancellation.
    """
    n = A.shape[0]
    norm = float(np.abs(A).sum(axis=0).max()) * h
    k = max(0, int(np.ceil(np.log2(norm))) if norm > 1.0 else 0)
    s = h / 2**k
    blk = np.zeros((2 * n, 2 * n))
    blk[:n, :n] = A
    blk[:n, n:] = W
    blk[n:, n:] = -A.T
    E = linalg.expm(s * blk)
    F = E[:n, :n]
    Q = E[:n, n:] @ F.T
    Q = 0.5 * (Q + Q.T)
    for _ in range(k):
        Q = Q + F @ Q @ F.T
        Q = 0.5 * (Q + Q.T)
        F = F @ F
    if k:
        F = linalg.expm(h * A)
    return F, Q


def noise_factor(Q: np.ndarray) -> np.ndarray:
    """Lower factor ``L`` with ``L L^T = Q``.

    Cholesky, retried with a ``1e-12`` relative diagonal shift, then a clipped
    eigendecomposition for singular but PSD ``Q``.
    """
    scale = max(float(np.max(np.abs(np.diag(Q)))), 0.0)
    if scale == 0.0:
        return np.zeros_like(Q)
    for shift in (0.0, 1e-12 * scale):
        try:
            return np.linalg.cholesky(Q + shift * np.eye(len(Q)))
        except np.linalg.LinAlgError:
            pass
    w, U = np.linalg.eigh(Q)
    if w.min() < -1e-12 * scale:
        raise NonPSD(f"transition covariance has eigenvalue {w.min():.3e}")
    return U * np.sqrt(np.clip(w, 0.0, None))


@lru_cache(maxsize=256)
def _transition_cached(A_bytes: bytes, W_bytes: bytes, n: int, h: float):
    A = np.frombuffer(A_bytes).reshape(n, n)
    W = np.frombuffer(W_bytes).reshape(n, n)
    F, Q = van_loan(A, W, h)
    L = noise_factor(Q)
    for arr in (F, Q, L):
        arr.setflags(write=False)
    return F, Q, L


def ou_transition(A: np.ndarray, W: np.ndarray, h: float) -> tuple:
    """Cached ``(F, Q, L)``: mean map, covariance and its factor over a step ``h``."""
    A = np.ascontiguousarray(A, dtype=float)
    W = np.ascontiguousarray(W, dtype=float)
    return _transition_cached(A.tobytes(), W.tobytes(), A.shape[0], float(h))


def exact_ou_step(sys: DriftSystem, h: float, state: np.ndarray, rng) -> np.ndarray:
    """Draw from ``N(exp(hA) state, Q_h)``; ``state`` has the block coordinates on its last axis."""
    F, _, L = ou_transition(sys.A, sys.diffusion, h)
    state = np.asarray(state, dtype=float)
    xi = rng.standard_normal(state.shape)
    return apply_rows(F, state) + apply_rows(L, xi)
