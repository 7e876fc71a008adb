"""Graph-based LP nonparametric (GLP) k-sample test."""

from .data import ColumnSummary, Dataset, load_csv, summarize_column
from .glp import (
    ComeanMatrix,
    GLPChart,
    GLPResult,
    comeans,
    export_lp_features,
    glp_chart,
    glp_statistic,
    glp_test,
    p_asymptotic,
    p_permutation,
)
from .kernel import LPFeatureMap, LPKernel, feature_map, fuse, gram
from .lpbasis import LPBasis, build_basis, max_order, zeta
from .spectral import ClusterAssignment, SpectralEmbedding, embed, kmeans, laplacian, ncut_value

__version__ = "0.1.0"
