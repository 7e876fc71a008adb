"""LP-comeans between group labels and graph communities, and the GLP test.

The pipeline for one kernel is: normalized Laplacian -> k - 1 nontrivial
eigenvectors -> k-means communities Z -> LP-comeans of (Y, Z) -> GLP
statistic (sum of squared comeans) -> p-value from chi-square with
(k_y - 1)(k_z - 1) degrees of freedom applied to n * GLP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import special

from .data import Dataset
from .errors import ChartError, DegenerateLabelError, EmptyFeatureMapError
from .kernel import DEFAULT_C, LPKernel, feature_map, fuse, gram
from .lpbasis import lp_transform
from .spectral import ClusterAssignment, SpectralEmbedding, embed, kmeans, laplacian

DEFAULT_ALPHA = 0.05
DEFAULT_MAX_COMPONENT = 4
DEFAULT_SEED = 42
KMEANS_RESTARTS = 30


@dataclass(frozen=True)
class ComeanMatrix:
    values: np.ndarray  # (k_y - 1) x (k_z - 1)
    n: int


@dataclass
class GLPResult:
    statistic: float
    df: int
    p_asymptotic: float
    n: int
    order: Union[int, str] = 1
    p_permutation: Optional[float] = None
    permutations: int = 0
    z: Optional[ClusterAssignment] = None
    comeans: Optional[ComeanMatrix] = None
    embedding: Optional[SpectralEmbedding] = field(default=None, repr=False)
    kernel: Optional[LPKernel] = field(default=None, repr=False)
    warnings: List[str] = field(default_factory=list)

    @property
    def p_value(self) -> float:
        return self.p_asymptotic


@dataclass
class ChartRow:
    order: int
    result: Optional[GLPResult] = None
    significant: bool = False
    skipped: bool = False

    @property
    def statistic(self):
        return None if self.result is None else self.result.statistic

    @property
    def p_asymptotic(self):
        return None if self.result is None else self.result.p_asymptotic


@dataclass
class GLPChart:
    rows: List[ChartRow]
    overall: GLPResult
    fused_orders: List[int]
    overall_significant: bool
    alpha: float
    warnings: List[str] = field(default_factory=list)


def derive_seed(seed: int, *keys: int) -> int:
    """Independent child seed for a named sub-task of a seeded run."""
    return int(np.random.SeedSequence([int(seed), *keys]).generate_state(1)[0])


def _label_scores(labels: np.ndarray, name: str) -> np.ndarray:
    labels = np.asarray(labels)
    m = np.unique(labels).size
    if m < 2:
        raise DegenerateLabelError(f"{name} has a single distinct value")
    scores, counts = lp_transform(labels.astype(float)[:, None], m - 1)
    return scores[:, 0, : counts[0]]


def comeans(y, z) -> ComeanMatrix:
    """Empirical LP-comeans (1/n) sum_i T_j(y_i) T_l(z_i) for all j, l."""
    y = np.asarray(y)
    z = np.asarray(z)
    if y.shape != z.shape or y.ndim != 1:
        raise ValueError("y and z must be label vectors of equal length")
    ty = _label_scores(y, "y")
    tz = _label_scores(z, "z")
    return ComeanMatrix(values=ty.T @ tz / y.size, n=y.size)


def glp_statistic(cm: Union[ComeanMatrix, np.ndarray]) -> float:
    values = cm.values if isinstance(cm, ComeanMatrix) else np.asarray(cm, dtype=float)
    return float(np.sum(np.square(values)))


def p_asymptotic(statistic: float, n: int, df: int) -> float:
    """Upper tail P(chi2_df > n * statistic) via the regularized upper incomplete gamma."""
    if df < 1 or n < 1:
        raise ValueError("df and n must be >= 1")
    x = n * float(statistic)
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def _permutation_stats(ty, tz, b, rng, chunk=256) -> np.ndarray:
    n = ty.shape[0]
    out = np.empty(b)
    done = 0
    while done < b:
        m = min(chunk, b - done)
        perms = np.argsort(rng.random((m, n)), axis=1, kind="stable")
        cm = np.einsum("bna,nc->bac", ty[perms], tz) / n
        out[done : done + m] = np.sum(cm * cm, axis=(1, 2))
        done += m
    return out


def permutation_distribution(y, z, b: int, seed: int) -> np.ndarray:
    """GLP statistics for ``b`` shuffles of ``y`` with ``z`` held fixed."""
    ty = _label_scores(np.asarray(y), "y")
    tz = _label_scores(np.asarray(z), "z")
    rng = np.random.Generator(np.random.PCG64(seed))
    return _permutation_stats(ty, tz, b, rng)


def p_permutation(y, z, b: int, seed: int = DEFAULT_SEED) -> float:
    """Add-one Monte Carlo p-value (1 + #{perm >= observed}) / (1 + b).

    Permuted statistics within a relative 1e-9 of the observed one count as
    ties (the statistic lives on a lattice, so exact ties are common).
    """
    if b < 1:
        raise ValueError("b must be >= 1")
    observed = glp_statistic(comeans(y, z))
    null = permutation_distribution(y, z, b, seed)
    hits = int(np.sum(null >= observed - 1e-9 * max(observed, 1e-300)))
    return (1 + hits) / (1 + b)


def run_on_kernel(
    kernel: LPKernel,
    y,
    k: int,
    seed: int = DEFAULT_SEED,
    permutations: Optional[int] = None,
    restarts: int = KMEANS_RESTARTS,
) -> GLPResult:
    """Laplacian, embedding, k-means and the GLP statistic for one kernel."""
    y = np.asarray(y)
    n = y.size
    notes = []
    lap = laplacian(kernel)
    emb = embed(lap, k, w=kernel.w, warn=False)
    if emb.unstable:
        notes.append(
            f"order {kernel.order}: eigenvalue multiplicity at the embedding boundary; "
            "embedding unstable"
        )
    assign = kmeans(emb, k, seed=derive_seed(seed, 1), restarts=restarts)
    k_y = np.unique(y).size
    k_z = np.unique(assign.z).size
    if assign.empty_clusters:
        notes.append(
            f"order {kernel.order}: k-means found only {k_z} nonempty communities; "
            f"df reduced to {(k_y - 1) * (k_z - 1)}"
        )
    if k_z < 2:
        return GLPResult(
            statistic=0.0, df=0, p_asymptotic=1.0, n=n, order=kernel.order,
            p_permutation=1.0 if permutations else None,
            permutations=permutations or 0, z=assign, embedding=emb, kernel=kernel,
            warnings=notes,
        )
    cm = comeans(y, assign.z)
    stat = glp_statistic(cm)
    df = (k_y - 1) * (k_z - 1)
    p_perm = None
    if permutations:
        p_perm = p_permutation(y, assign.z, permutations, seed=derive_seed(seed, 2))
    return GLPResult(
        statistic=stat, df=df, p_asymptotic=p_asymptotic(stat, n, df), n=n,
        order=kernel.order, p_permutation=p_perm, permutations=permutations or 0,
        z=assign, comeans=cm, embedding=emb, kernel=kernel, warnings=notes,
    )


def _excluded_note(dataset: Dataset, fmap) -> List[str]:
    if fmap.excluded_columns.size == 0:
        return []
    names = dataset.names()
    dropped = ", ".join(names[j] for j in fmap.excluded_columns[:10])
    more = fmap.excluded_columns.size - 10
    if more > 0:
        dropped += f", ... (+{more})"
    return [
        f"order {fmap.order}: {fmap.excluded_columns.size} column(s) without an "
        f"order-{fmap.order} LP basis excluded: {dropped}"
    ]


def order_kernel(dataset: Dataset, order: int, c: float = DEFAULT_C, scale: str = "mean"):
    fmap = feature_map(dataset, order)
    return gram(fmap, c, scale), _excluded_note(dataset, fmap)


def glp_test(
    dataset: Dataset,
    order: Union[int, Sequence[int]] = 1,
    c: float = DEFAULT_C,
    seed: int = DEFAULT_SEED,
    permutations: Optional[int] = None,
    restarts: int = KMEANS_RESTARTS,
    scale: str = "mean",
) -> GLPResult:
    """Run the full GLP test at one LP order, or on fused orders if a list is given."""
    orders = [order] if np.isscalar(order) else list(order)
    kernels, notes = [], []
    for o in orders:
        kern, extra = order_kernel(dataset, int(o), c, scale)
        kernels.append(kern)
        notes.extend(extra)
    result = run_on_kernel(fuse(kernels), dataset.y, dataset.k, seed, permutations, restarts)
    result.warnings[:0] = notes
    return result


def holm(p_values: Sequence[float], alpha: float) -> np.ndarray:
    """Holm step-down rejections at family-wise level ``alpha``."""
    p = np.asarray(p_values, dtype=float)
    m = p.size
    reject = np.zeros(m, dtype=bool)
    for rank, idx in enumerate(np.argsort(p, kind="stable")):
        if p[idx] <= alpha / (m - rank):
            reject[idx] = True
        else:
            break
    return reject


def glp_chart(
    dataset: Dataset,
    max_component: int = DEFAULT_MAX_COMPONENT,
    c: float = DEFAULT_C,
    seed: int = DEFAULT_SEED,
    alpha: float = DEFAULT_ALPHA,
    permutations: Optional[int] = None,
    restarts: int = KMEANS_RESTARTS,
    scale: str = "mean",
) -> GLPChart:
    """Per-order GLP components, Holm flags, and the fused overall test."""
    if max_component < 1:
        raise ValueError("max_component must be >= 1")
    rows, kernels, notes = [], {}, []
    for order in range(1, max_component + 1):
        try:
            kern, extra = order_kernel(dataset, order, c, scale)
        except EmptyFeatureMapError:
            rows.append(ChartRow(order=order, skipped=True))
            notes.append(f"order {order}: no column supports this LP order; component skipped")
            continue
        notes.extend(extra)
        res = run_on_kernel(kern, dataset.y, dataset.k, seed, permutations, restarts)
        notes.extend(res.warnings)
        kernels[order] = kern
        rows.append(ChartRow(order=order, result=res))
    active = [r for r in rows if not r.skipped]
    if not active:
        raise ChartError("every LP order was skipped; nothing to chart")
    flags = holm([r.result.p_asymptotic for r in active], alpha)
    for row, flag in zip(active, flags):
        row.significant = bool(flag)
    fused_orders = [r.order for r in active if r.significant]
    if fused_orders:
        overall = run_on_kernel(
            fuse([kernels[o] for o in fused_orders]), dataset.y, dataset.k, seed,
            permutations, restarts,
        )
        notes.extend(overall.warnings)
        significant = True
    else:
        best = min(active, key=lambda r: (r.result.p_asymptotic, r.order))
        overall = best.result
        fused_orders = []
        significant = False
        notes.append(
            f"no component significant at alpha={alpha}; overall row repeats order {best.order}"
        )
    return GLPChart(
        rows=rows, overall=overall, fused_orders=fused_orders,
        overall_significant=significant, alpha=alpha, warnings=_dedupe(notes),
    )


def _dedupe(items):
    seen, out = set(), []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def export_lp_features(dataset: Dataset, orders: Sequence[int]):
    """Concatenate order-tagged LP feature maps; returns ``(matrix, column_names)``."""
    orders = list(orders)
    if not orders:
        raise ValueError("orders must be nonempty")
    names = dataset.names()
    blocks, cols = [], []
    for order in orders:
        try:
            fmap = feature_map(dataset, int(order))
        except EmptyFeatureMapError:
            continue
        blocks.append(fmap.values)
        cols.extend(f"{names[j]}_T{order}" for j in fmap.kept_columns)
    if not blocks:
        raise EmptyFeatureMapError(f"no LP features exist for orders {orders}")
    return np.hstack(blocks), cols
