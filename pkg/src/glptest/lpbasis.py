"""Empirical LP orthonormal polynomial bases of mid-distribution transforms.

For a column with empirical distribution F, the score

    zeta(x) = sqrt(12) * (F_mid(x) - 1/2) / sqrt(1 - sum p^3)

has empirical mean 0 and variance 1 even in the presence of ties. The order-l
basis function T_l is the l-th Gram-Schmidt orthonormalization of
{zeta, zeta^2, ...} after centering, under the inner product
<f, g> = (1/n) sum_i f(x_i) g(x_i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data import ColumnSummary
from .errors import DegenerateColumnError

DROP_TOL = 1e-8
_SQRT12 = np.sqrt(12.0)


@dataclass(frozen=True)
class LPBasis:
    column: ColumnSummary
    order: int
    values: np.ndarray  # n x order


def zeta(summary: ColumnSummary, value):
    """Standardized mid-distribution score of ``value`` under ``summary``."""
    if summary.tie_factor <= 0:
        raise DegenerateColumnError("constant column has no LP basis")
    idx = summary.lookup(value)
    out = _SQRT12 * (summary.mid_cdf[idx] - 0.5) / np.sqrt(summary.tie_factor)
    return float(out) if np.ndim(out) == 0 else out


def max_order(summary: ColumnSummary) -> int:
    return max(summary.n_distinct - 1, 0)


def build_basis(summary: ColumnSummary, observed, max_order: int) -> LPBasis:
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if summary.n_distinct < 2:
        raise DegenerateColumnError("constant column has no LP basis")
    observed = np.asarray(observed, dtype=float)
    z = np.asarray(zeta(summary, observed), dtype=float)[:, None]
    caps = np.array([min(max_order, summary.n_distinct - 1)])
    values, m = orthonormal_powers(z, caps, max_order)
    return LPBasis(column=summary, order=int(m[0]), values=values[:, 0, : m[0]])


def zeta_matrix(x: np.ndarray):
    """Column-wise zeta scores for an n x d matrix.

    Returns ``(z, n_distinct)``; constant columns get an all-zero score.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    lo = rankdata(x, method="min", axis=0)
    hi = rankdata(x, method="max", axis=0)
    mid = (lo + hi) / 2.0 - 0.5  # average rank - 1/2 = #{<x} + #{=x}/2
    mid /= n
    ties = hi - lo + 1.0
    # sum over distinct values of p^3 == sum over observations of c(x)^2 / n^3
    tie_factor = 1.0 - np.sum(ties**2, axis=0) / float(n) ** 3
    n_distinct = rankdata(x, method="dense", axis=0).max(axis=0).astype(int)
    ok = n_distinct > 1
    z = np.zeros_like(mid)
    z[:, ok] = _SQRT12 * (mid[:, ok] - 0.5) / np.sqrt(tie_factor[ok])
    return z, n_distinct


def orthonormal_powers(z: np.ndarray, caps: np.ndarray, max_order: int):
    """Modified Gram-Schmidt with re-orthogonalization on powers of ``z``.

    Works on all d columns of ``z`` at once. Column j accepts at most
    ``caps[j]`` basis functions; a candidate power whose residual norm falls
    below ``DROP_TOL`` times its raw norm is skipped. Returns an
    ``(n, d, max_order)`` array, zero-filled past each column's count, and the
    per-column counts.
    """
    n, d = z.shape
    caps = np.minimum(np.asarray(caps, dtype=int), max_order)
    basis = np.zeros((n, d, max_order))
    count = np.zeros(d, dtype=int)
    cols = np.arange(d)
    power = 0
    # powers beyond |U| - 1 lie in the span already built, so this bound is generous
    while np.any(count < caps) and power < max_order + 8:
        power += 1
        v = z**power
        raw = np.sqrt(np.mean(v * v, axis=0))
        v = v - v.mean(axis=0)
        for _ in range(2):
            coef = np.einsum("nd,ndl->dl", v, basis) / n
            v = v - np.einsum("ndl,dl->nd", basis, coef)
            v = v - v.mean(axis=0)
        norm = np.sqrt(np.mean(v * v, axis=0))
        accept = (count < caps) & (norm > DROP_TOL * raw) & (raw > 0)
        if np.any(accept):
            j = cols[accept]
            basis[:, j, count[j]] = v[:, j] / norm[j]
            count[j] += 1
    return basis, count


def lp_transform(x: np.ndarray, max_order: int):
    """LP scores of every column up to ``max_order``.

    Returns ``(scores, counts)`` where ``scores[:, j, l - 1]`` is
    T_l(x_j) for ``l <= counts[j]``.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    z, n_distinct = zeta_matrix(x)
    return orthonormal_powers(z, n_distinct - 1, max_order)
