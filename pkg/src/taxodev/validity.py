"""Internal cluster validity: silhouette, Calinski-Harabasz, Dunn, Xie-Beni.

All four indices are evaluated over a (method x k) grid and the best k is
flagged per (method, index): silhouette, Calinski-Harabasz, and Dunn are
maximized, Xie-Beni is minimized. Cells where an index is undefined are kept
in the grid with an error tag and skipped by the optimum selection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_feature_matrix, sorted_by_entity
from .cluster import (
    Partition,
    as_distance_matrix,
    cut_dendrogram,
    euclidean_matrix,
    kmeans,
    pam,
    ward_linkage,
)
from .errors import IndexUndefined, NoMethods

INDICES = ("silhouette", "calinski_harabasz", "dunn", "xie_beni")
MINIMIZED_INDICES = ("xie_beni",)
METHODS = ("ward", "kmeans", "pam")

_METHOD_CODE = {name: code for code, name in enumerate(METHODS, start=1)}


def _aligned_labels(entities, partition: Partition) -> np.ndarray:
    return partition.labels_for(entities)


def silhouette(dist, partition: Partition) -> tuple[dict[str, float], float]:
    """Per-object silhouette widths and their average.

    s(i) = (b(i) - a(i)) / max(a(i), b(i)) with a the mean within-cluster
    dissimilarity (self excluded) and b the smallest mean dissimilarity to
    another cluster. Objects in singleton clusters get width 0. Defined for
    2 <= k <= n-1.
    """
    dist = as_distance_matrix(dist)
    n = dist.n
    k = partition.k
    if k < 2 or k >= n:
        raise IndexUndefined(f"silhouette needs 2 <= k <= n-1, got k={k}, n={n}")
    labels = _aligned_labels(dist.entities, partition)
    widths: dict[str, float] = {}
    for i, entity in enumerate(dist.entities):
        own = labels[i]
        same = np.flatnonzero(labels == own)
        if same.size == 1:
            widths[entity] = 0.0
            continue
        a = float(dist.d[i, same].sum() / (same.size - 1))
        b = np.inf
        for other in range(1, k + 1):
            if other == own:
                continue
            members = np.flatnonzero(labels == other)
            b = min(b, float(dist.d[i, members].mean()))
        denom = max(a, b)
        widths[entity] = 0.0 if denom == 0.0 else (b - a) / denom
    average = float(np.mean(list(widths.values())))
    return widths, average


def calinski_harabasz(matrix, partition: Partition, entities=None) -> float:
    """Pseudo-F: between-cluster over within-cluster dispersion, scaled by
    degrees of freedom. Defined for 2 <= k <= n-1 and nonzero within-scatter."""
    data, names = as_feature_matrix(matrix, entities)
    data, names = sorted_by_entity(data, names)
    n = data.shape[0]
    k = partition.k
    if k < 2 or k >= n:
        raise IndexUndefined(f"calinski_harabasz needs 2 <= k <= n-1, got k={k}, n={n}")
    labels = _aligned_labels(names, partition)
    grand = data.mean(axis=0)
    between = 0.0
    within = 0.0
    for cluster in range(1, k + 1):
        members = data[labels == cluster]
        center = members.mean(axis=0)
        between += members.shape[0] * float(np.sum((center - grand) ** 2))
        within += float(np.sum((members - center) ** 2))
    if within == 0.0:
        raise IndexUndefined("zero within-cluster scatter")
    return (between / (k - 1)) / (within / (n - k))


def dunn(dist, partition: Partition) -> float:
    """Minimum single-linkage inter-cluster distance over the maximum complete
    cluster diameter. Undefined when every diameter is zero."""
    dist = as_distance_matrix(dist)
    k = partition.k
    if k < 2:
        raise IndexUndefined(f"dunn needs k >= 2, got k={k}")
    labels = _aligned_labels(dist.entities, partition)
    diameter = 0.0
    separation = np.inf
    for a in range(1, k + 1):
        members_a = np.flatnonzero(labels == a)
        if members_a.size > 1:
            block = dist.d[np.ix_(members_a, members_a)]
            diameter = max(diameter, float(block.max()))
        for b in range(a + 1, k + 1):
            members_b = np.flatnonzero(labels == b)
            separation = min(
                separation, float(dist.d[np.ix_(members_a, members_b)].min())
            )
    if diameter == 0.0:
        raise IndexUndefined("all cluster diameters are zero")
    return separation / diameter


def xie_beni(matrix, partition: Partition, entities=None) -> float:
    """Crisp Xie-Beni: within-cluster squared scatter over n times the
    smallest squared centroid separation. Lower is better."""
    data, names = as_feature_matrix(matrix, entities)
    data, names = sorted_by_entity(data, names)
    n = data.shape[0]
    k = partition.k
    if k < 2:
        raise IndexUndefined(f"xie_beni needs k >= 2, got k={k}")
    labels = _aligned_labels(names, partition)
    centers = np.stack(
        [data[labels == cluster].mean(axis=0) for cluster in range(1, k + 1)]
    )
    within = float(np.sum((data - centers[labels - 1]) ** 2))
    min_sep = np.inf
    for a in range(k):
        for b in range(a + 1, k):
            min_sep = min(min_sep, float(np.sum((centers[a] - centers[b]) ** 2)))
    if min_sep == 0.0:
        raise IndexUndefined("coincident centroids")
    return within / (n * min_sep)


@dataclass(frozen=True)
class GridCell:
    """One (method, index, k) evaluation: a value or an error tag."""

    value: float | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class ValidityReport:
    """The (method x index x k) score grid with per-(method, index) optima.

    ``partitions`` keeps every successfully built partition and
    ``silhouette_widths`` the per-object widths of every cell where the
    silhouette succeeded (Fig-style plotting input).
    """

    methods: tuple[str, ...]
    ks: tuple[int, ...]
    scores: dict[tuple[str, str, int], GridCell]
    optima: dict[tuple[str, str], int]
    partitions: dict[tuple[str, int], Partition] = field(default_factory=dict)
    silhouette_widths: dict[tuple[str, int], dict[str, float]] = field(default_factory=dict)


def select_optima(
    scores: dict[tuple[str, str, int], GridCell]
) -> dict[tuple[str, str], int]:
    """Flag the best k per (method, index): argmax, except argmin for
    Xie-Beni. Failed cells are skipped; value ties go to the smallest k."""
    groups: dict[tuple[str, str], list[tuple[int, float]]] = {}
    for (method, index, k), cell in scores.items():
        if cell.ok:
            groups.setdefault((method, index), []).append((k, cell.value))
    optima: dict[tuple[str, str], int] = {}
    for (method, index), cells in groups.items():
        cells.sort()
        if index in MINIMIZED_INDICES:
            best_k = min(cells, key=lambda item: (item[1], item[0]))[0]
        else:
            best_k = max(cells, key=lambda item: (item[1], -item[0]))[0]
        optima[(method, index)] = best_k
    return optima


def _partition_for(method, k, data, names, dist, dendrogram, seed, restarts) -> Partition:
    if method == "ward":
        return cut_dendrogram(dendrogram, k)
    if method == "kmeans":
        cell_seed = (int(seed) ^ _METHOD_CODE[method] ^ k) & 0x7FFFFFFF
        return kmeans(data, k, seed=cell_seed, restarts=restarts, entities=names)
    if method == "pam":
        return pam(dist, k)
    raise NoMethods(f"unknown method {method!r}; choose from {METHODS}")


def validity_grid(
    matrix,
    dist,
    methods=METHODS,
    k_min: int = 2,
    k_max: int = 6,
    seed: int = 42,
    restarts: int = 50,
    entities=None,
) -> ValidityReport:
    """Evaluate all four indices for every method and k in [k_min, k_max].

    Infeasible or undefined cells are marked failed with their error tag and
    excluded from optimum selection; the grid always contains
    |methods| * 4 * |ks| cells.
    """
    methods = tuple(methods)
    if not methods:
        raise NoMethods("empty method list")
    for method in methods:
        if method not in METHODS:
            raise NoMethods(f"unknown method {method!r}; choose from {METHODS}")
    if k_min < 2 or k_max < k_min:
        raise IndexUndefined(f"need 2 <= k_min <= k_max, got [{k_min}, {k_max}]")
    data, names = as_feature_matrix(matrix, entities)
    data, names = sorted_by_entity(data, names)
    dist = euclidean_matrix(data, names) if dist is None else as_distance_matrix(dist)
    if dist.entities != names:
        raise IndexUndefined("distance matrix entities do not match the feature matrix")
    ks = tuple(range(k_min, k_max + 1))
    dendrogram = ward_linkage(dist) if "ward" in methods else None
    scores: dict[tuple[str, str, int], GridCell] = {}
    partitions: dict[tuple[str, int], Partition] = {}
    widths_store: dict[tuple[str, int], dict[str, float]] = {}
    for method in methods:
        for k in ks:
            try:
                partition = _partition_for(
                    method, k, data, names, dist, dendrogram, seed, restarts
                )
            except Exception as exc:
                tag = type(exc).__name__
                for index in INDICES:
                    scores[(method, index, k)] = GridCell(value=None, error=tag)
                continue
            partitions[(method, k)] = partition
            for index in INDICES:
                try:
                    if index == "silhouette":
                        widths, value = silhouette(dist, partition)
                        widths_store[(method, k)] = widths
                    elif index == "calinski_harabasz":
                        value = calinski_harabasz(data, partition, entities=names)
                    elif index == "dunn":
                        value = dunn(dist, partition)
                    else:
                        value = xie_beni(data, partition, entities=names)
                    scores[(method, index, k)] = GridCell(value=float(value))
                except IndexUndefined as exc:
                    scores[(method, index, k)] = GridCell(
                        value=None, error=type(exc).__name__
                    )
    return ValidityReport(
        methods=methods,
        ks=ks,
        scores=scores,
        optima=select_optima(scores),
        partitions=partitions,
        silhouette_widths=widths_store,
    )
