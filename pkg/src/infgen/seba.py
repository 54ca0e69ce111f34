"""Sparse eigenbasis approximation (SEBA).

Rotates a set of orthonormal vectors into a sparse, nonnegative-leaning
basis whose supports isolate individual features.  The iteration alternates
columnwise soft-thresholding with the orthogonal polar factor of S^T V.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass
class SebaBasis:
    vectors: np.ndarray          # (p, r), columns rescaled to max = 1
    column_max: np.ndarray
    column_min: np.ndarray
    iterations: int
    rotation: np.ndarray
    mu: float
    converged: bool


def _soft_threshold(x, mu):
    return np.sign(x) * np.maximum(np.abs(x) - mu, 0.0)


def seba(V, mu=None, tol=1e-12, max_iter=5000, seed=42):
    """Sparse basis spanning approximately the same subspace as V's columns."""
    V = np.array(V, dtype=float)
    if V.ndim != 2:
        raise DomainError("V must be a 2-D array of column vectors")
    p, r = V.shape
    if mu is None:
        mu = 0.99 / np.sqrt(p)
    if not 0.0 < mu < 1.0:
        raise DomainError("mu must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    for jcol in range(r):
        col = V[:, jcol]
        if np.max(np.abs(col - col.mean())) < 1e-12 * max(1.0, np.max(np.abs(col))):
            V[:, jcol] = col + 1e-12 * rng.standard_normal(p)
    gram = V.T @ V
    if np.max(np.abs(gram - np.eye(r))) > 1e-8:
        q, rr = np.linalg.qr(V)
        if np.min(np.abs(np.diag(rr))) < 1e-12:
            raise DomainError("input vectors are rank deficient")
        V = q
    R = np.eye(r)
    converged = False
    it = 0
    S = V.copy()
    for it in range(1, max_iter + 1):
        S = _soft_threshold(V @ R.T, mu)
        norms = np.linalg.norm(S, axis=0)
        nz = norms > 1e-14
        S[:, nz] /= norms[nz]
        u, _, wt = np.linalg.svd(S.T @ V)
        R_new = u @ wt
        if np.linalg.norm(R_new - R) <= tol:
            R = R_new
            converged = True
            break
        R = R_new
    # orient, rescale to max 1, order by decreasing column minimum
    for jcol in range(r):
        col = S[:, jcol]
        if col[np.argmax(np.abs(col))] < 0:
            S[:, jcol] = -col
        top = S[:, jcol].max()
        if top > 0:
            S[:, jcol] /= top
    order = np.argsort(-S.min(axis=0), kind="stable")
    S = S[:, order]
    return SebaBasis(S, S.max(axis=0), S.min(axis=0), it, R, float(mu),
                     converged)


def extract_families(S, grid, n_t, cutoff):
    """Per-family, per-time-fibre supports of a SEBA basis above a cutoff.

    Returns one dict per column with fibre box-index lists, fibre areas and
    the birth/death fibres (first/last nonempty fibre, None if never born).
    """
    if not 0.0 <= cutoff < 1.0:
        raise DomainError("cutoff must lie in [0, 1)")
    S = np.asarray(S)
    n = grid.n_boxes
    families = []
    for jcol in range(S.shape[1]):
        col = S[:, jcol].reshape(n_t, n)
        fibres = [np.flatnonzero(col[l] > cutoff) for l in range(n_t)]
        areas = [float(grid.areas[f].sum()) for f in fibres]
        nonempty = [l for l, f in enumerate(fibres) if f.size]
        families.append({
            "fibres": fibres,
            "areas": areas,
            "birth": nonempty[0] if nonempty else None,
            "death": nonempty[-1] if nonempty else None,
        })
    return families
