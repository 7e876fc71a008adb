"""Normalized-Laplacian spectral embedding and k-means community detection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import linalg

from .errors import EmptyClusterError, GLPError, IsolatedVertexError
from .kernel import LPKernel

EIG_GAP_TOL = 1e-8


class UnstableEmbeddingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpectralEmbedding:
    eigenvalues: np.ndarray  # k - 1 retained values, descending
    u: np.ndarray  # n x (k - 1)
    trivial_value: float
    unstable: bool = False
    spectrum: np.ndarray = field(default=None, repr=False)  # nontrivial part, descending


@dataclass(frozen=True)
class ClusterAssignment:
    z: np.ndarray  # labels in 1..n_clusters
    inertia: float
    restarts_used: int
    n_clusters: int
    empty_clusters: int = 0

    @property
    def degenerate(self) -> bool:
        return self.empty_clusters > 0


def degrees(w: np.ndarray) -> np.ndarray:
    return np.asarray(w, dtype=float).sum(axis=1)


def laplacian(kernel: Union[LPKernel, np.ndarray]) -> np.ndarray:
    """D^{-1/2} W D^{-1/2} for a nonnegative weight matrix."""
    w = kernel.w if isinstance(kernel, LPKernel) else np.asarray(kernel, dtype=float)
    deg = degrees(w)
    bad = np.flatnonzero(deg <= 0)
    if bad.size:
        raise IsolatedVertexError(int(bad[0]))
    s = 1.0 / np.sqrt(deg)
    lap = w * s[:, None] * s[None, :]
    return 0.5 * (lap + lap.T)


def trivial_vector(w: np.ndarray) -> np.ndarray:
    v = np.sqrt(degrees(w))
    return v / np.linalg.norm(v)


def embed(lap: np.ndarray, k: int, w: np.ndarray = None, warn: bool = True) -> SpectralEmbedding:
    """Leading k - 1 eigenpairs of ``lap`` orthogonal to the trivial direction.

    The trivial eigenvector D^{1/2} 1 is deflated out before the symmetric
    eigendecomposition, so a repeated top eigenvalue (disconnected graph)
    still yields eigenvectors orthogonal to it. Without ``w`` the trivial
    direction is taken as the top eigenvector of ``lap``.
    """
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    if w is not None:
        v0 = trivial_vector(w)
    else:
        _, vecs = linalg.eigh(lap, subset_by_index=[n - 1, n - 1])
        v0 = vecs[:, 0]
    trivial_value = float(v0 @ lap @ v0)
    # spectrum of a normalized Laplacian lies in [-1, 1]; push v0 below it
    shift = 3.0 + abs(trivial_value)
    deflated = lap - shift * np.outer(v0, v0)
    deflated = 0.5 * (deflated + deflated.T)
    try:
        vals, vecs = linalg.eigh(deflated)
    except linalg.LinAlgError as exc:
        raise GLPError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order][: n - 1]
    vecs = vecs[:, order][:, : n - 1]
    keep = k - 1
    scale = max(1.0, np.max(np.abs(vals)))
    unstable = abs(trivial_value - vals[0]) <= EIG_GAP_TOL * scale
    if keep < n - 1:
        unstable |= abs(vals[keep - 1] - vals[keep]) <= EIG_GAP_TOL * scale
    if unstable and warn:
        warnings.warn(
            "eigenvalue multiplicity spans the retained/discarded boundary",
            UnstableEmbeddingWarning,
            stacklevel=2,
        )
    return SpectralEmbedding(
        eigenvalues=vals[:keep].copy(),
        u=vecs[:, :keep].copy(),
        trivial_value=trivial_value,
        unstable=bool(unstable),
        spectrum=vals,
    )


def _restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, restart])))


def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centers[c] = points[idx]
        closest = np.minimum(closest, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points, centers, max_iter):
    labels = None
    k = centers.shape[0]
    for _ in range(max_iter):
        dist = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(dist, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        counts = np.bincount(labels, minlength=k)
        if np.any(counts == 0):
            return labels, np.inf, int(np.sum(counts == 0))
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
    dist = ((points - centers[labels]) ** 2).sum()
    return labels, float(dist), 0


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Renumber labels 1..m by order of first occurrence."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    return (rank[inverse] + 1).astype(np.int64)


def kmeans(
    embedding: Union[SpectralEmbedding, np.ndarray],
    k: int,
    seed: int = 42,
    restarts: int = 30,
    max_iter: int = 300,
    strict: bool = False,
) -> ClusterAssignment:
    """Lloyd's algorithm with k-means++ seeding, best inertia over restarts.

    Restart r draws from a generator seeded by ``(seed, r)``; ties in
    inertia go to the lowest restart index. If every restart ends with an
    empty cluster, the least-bad partition is returned with
    ``empty_clusters`` set (or :class:`EmptyClusterError` when ``strict``).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    points = embedding.u if isinstance(embedding, SpectralEmbedding) else embedding
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    best = None
    fallback = None
    for r in range(restarts):
        rng = _restart_rng(seed, r)
        centers = _kmeans_pp(points, k, rng)
        labels, inertia, empty = _lloyd(points, centers, max_iter)
        if empty == 0:
            if best is None or inertia < best[1]:
                best = (labels, inertia, r)
        else:
            held = np.unique(labels).size
            if fallback is None or held > fallback[3]:
                fallback = (labels, inertia, r, held)
    if best is not None:
        z = canonical_labels(best[0])
        return ClusterAssignment(z=z, inertia=best[1], restarts_used=restarts, n_clusters=k)
    if strict:
        raise EmptyClusterError(f"k-means left an empty cluster in all {restarts} restarts")
    z = canonical_labels(fallback[0])
    m = int(z.max())
    centers = np.array([points[z == g].mean(axis=0) for g in range(1, m + 1)])
    inertia = float(((points - centers[z - 1]) ** 2).sum())
    return ClusterAssignment(
        z=z, inertia=inertia, restarts_used=restarts, n_clusters=m, empty_clusters=k - m
    )


def ncut_value(w: np.ndarray, partition) -> float:
    """Normalized cut: sum over parts of Cut(V_g, V - V_g) / Vol(V_g)."""
    w = np.asarray(w, dtype=float)
    partition = np.asarray(partition)
    deg = degrees(w)
    total = 0.0
    for g in np.unique(partition):
        inside = partition == g
        vol = deg[inside].sum()
        if not inside.any() or vol <= 0:
            raise ValueError(f"part {g} is empty or has zero volume")
        total += w[np.ix_(inside, ~inside)].sum() / vol
    return float(total)


def write_embedding_csv(embedding: SpectralEmbedding, path) -> None:
    k1 = embedding.u.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("row," + ",".join(f"u{j + 2}" for j in range(k1)) + "\n")
        fh.write("eigenvalue," + ",".join(f"{v:.17g}" for v in embedding.eigenvalues) + "\n")
        for i, row in enumerate(embedding.u):
            fh.write(f"{i + 1}," + ",".join(f"{v:.17g}" for v in row) + "\n")
