"""taxodev: development measures and cluster similarity for indicator panels.

Two analysis tracks over an entity-by-period indicator panel:

* a taxonomic development measure (distance to a synthetic best-performer
  pattern, scaled to g = 1 - d/d0), with development paths, per-period
  rankings, and percent change over a horizon;
* unsupervised classification per analysis year via Ward agglomeration,
  seeded Lloyd k-means, and PAM, scored on a four-index validity grid
  (silhouette, Calinski-Harabasz, Dunn, Xie-Beni) with optimal-k flagging.

The functional API mirrors the pipeline steps; sklearn-style estimators
(:class:`WardClustering`, :class:`LloydKMeans`, :class:`PAMClustering`,
:class:`HellwigDevelopment`) wrap them for ecosystem composition.
"""

from . import errors
from .cluster import (
    Dendrogram,
    DistanceMatrix,
    LloydKMeans,
    Merge,
    PAMClustering,
    Partition,
    WardClustering,
    cut_dendrogram,
    euclidean_matrix,
    kmeans,
    pam,
    ward_linkage,
)
from .hellwig import (
    DevelopmentSeries,
    HellwigDevelopment,
    PatternVector,
    development_pattern,
    distances_to_pattern,
    hellwig_measure,
    percent_change,
    rank_within_periods,
)
from .normalize import NormalizedPanel, orient, pooled_standardize, standardize_columns
from .panel import (
    IndicatorPanel,
    VariableMeta,
    YearMatrix,
    aggregate_groups,
    extract_year,
    load_panel,
    write_panel,
)
from .report import PipelineConfig, load_config, run_describe, run_hellwig, run_pipeline, run_similarity
from .validity import (
    ValidityReport,
    calinski_harabasz,
    dunn,
    select_optima,
    silhouette,
    validity_grid,
    xie_beni,
)

__version__ = "0.1.0"

__all__ = [
    "Dendrogram",
    "DevelopmentSeries",
    "DistanceMatrix",
    "HellwigDevelopment",
    "IndicatorPanel",
    "LloydKMeans",
    "Merge",
    "NormalizedPanel",
    "PAMClustering",
    "Partition",
    "PatternVector",
    "PipelineConfig",
    "ValidityReport",
    "VariableMeta",
    "WardClustering",
    "YearMatrix",
    "aggregate_groups",
    "calinski_harabasz",
    "cut_dendrogram",
    "development_pattern",
    "distances_to_pattern",
    "dunn",
    "errors",
    "euclidean_matrix",
    "extract_year",
    "hellwig_measure",
    "kmeans",
    "load_config",
    "load_panel",
    "orient",
    "pam",
    "percent_change",
    "pooled_standardize",
    "rank_within_periods",
    "run_describe",
    "run_hellwig",
    "run_pipeline",
    "run_similarity",
    "select_optima",
    "silhouette",
    "standardize_columns",
    "validity_grid",
    "ward_linkage",
    "write_panel",
    "xie_beni",
]
