"""LP feature maps and the degree-2 polynomial graph kernel."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .data import Dataset
from .errors import EmptyFeatureMapError
from .lpbasis import lp_transform

DEFAULT_C = 0.5
KERNEL_SCALES = ("mean", "sum")


@dataclass(frozen=True)
class LPFeatureMap:
    order: int
    values: np.ndarray  # n x d'
    kept_columns: np.ndarray
    excluded_columns: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))


@dataclass(frozen=True)
class LPKernel:
    order: Union[int, str]
    w: np.ndarray
    c: float


def feature_map(dataset: Union[Dataset, np.ndarray], order: int) -> LPFeatureMap:
    """Order-``order`` LP transform of every column that supports it."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x = dataset.x if isinstance(dataset, Dataset) else np.asarray(dataset, dtype=float)
    scores, counts = lp_transform(x, order)
    kept = np.flatnonzero(counts >= order)
    excluded = np.flatnonzero(counts < order)
    if kept.size == 0:
        raise EmptyFeatureMapError(f"no column supports an order-{order} LP basis")
    values = np.ascontiguousarray(scores[:, kept, order - 1])
    values.setflags(write=False)
    return LPFeatureMap(order=order, values=values, kept_columns=kept, excluded_columns=excluded)


def gram(
    fmap: Union[LPFeatureMap, np.ndarray], c: float = DEFAULT_C, scale: str = "mean"
) -> LPKernel:
    """Degree-2 polynomial kernel (c + <phi_i, phi_j>)^2 over feature rows.

    With ``scale="mean"`` (default) the inner product is divided by the
    number of features, so the offset ``c`` stays commensurate with it at any
    dimension. ``scale="sum"`` uses the raw inner product; there the squared
    term swamps ``c`` once d is large and groups on opposite sides of the
    pooled sample become indistinguishable from members of the same group.
    """
    if c < 0:
        raise ValueError("kernel offset c must be non-negative")
    if scale not in KERNEL_SCALES:
        raise ValueError(f"scale must be one of {KERNEL_SCALES}, got {scale!r}")
    phi = fmap.values if isinstance(fmap, LPFeatureMap) else np.asarray(fmap, dtype=float)
    inner = phi @ phi.T
    inner = 0.5 * (inner + inner.T)
    if scale == "mean" and phi.shape[1] > 0:
        inner /= phi.shape[1]
    w = (c + inner) ** 2
    w.setflags(write=False)
    order = fmap.order if isinstance(fmap, LPFeatureMap) else 0
    return LPKernel(order=order, w=w, c=c)


def fuse(kernels: Sequence[LPKernel]) -> LPKernel:
    """Entrywise sum of kernels built on the same n samples."""
    kernels = list(kernels)
    if not kernels:
        raise ValueError("cannot fuse an empty list of kernels")
    n = kernels[0].w.shape
    if any(k.w.shape != n for k in kernels):
        raise ValueError("kernels must share the same sample size")
    if len(kernels) == 1:
        return kernels[0]
    w = np.sum([k.w for k in kernels], axis=0)
    w.setflags(write=False)
    orders = []
    for k in kernels:
        orders.extend(_orders_of(k))
    label = "fused{" + ",".join(str(o) for o in orders) + "}"
    return LPKernel(order=label, w=w, c=kernels[0].c)


def _orders_of(kernel: LPKernel) -> list:
    if isinstance(kernel.order, str) and kernel.order.startswith("fused{"):
        return [int(o) for o in kernel.order[6:-1].split(",") if o]
    return [kernel.order]


def write_kernel_csv(kernel: LPKernel, path) -> None:
    np.savetxt(path, kernel.w, delimiter=",", fmt="%.17g")
