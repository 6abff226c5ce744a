"""Distance matrices and the three partitioning engines.

Ward agglomeration (merge costs via Lance-Williams updates), Lloyd k-means
with seeded probabilistic farthest-point initialization and restarts, and PAM
(k-medoids, BUILD then SWAP). Every engine canonicalizes its input into
ascending entity order and breaks all ties by smallest index, so identical
inputs produce bit-identical partitions regardless of row presentation order.

Both a functional API (``ward_linkage``, ``kmeans``, ``pam``, ...) and
sklearn-compatible estimators (:class:`WardClustering`, :class:`LloydKMeans`,
:class:`PAMClustering`) are exposed; the estimators wrap the functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from ._validation import (
    as_feature_matrix,
    auto_labels,
    require_min_objects,
    sorted_by_entity,
)
from .errors import InvalidK

MAX_LLOYD_ITER = 500


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative dissimilarities with a zero diagonal."""

    entities: tuple[str, ...]
    d: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = len(self.entities)
        if self.d.shape != (n, n):
            raise ValueError(f"distance matrix shape {self.d.shape}, expected ({n}, {n})")
        if np.any(self.d < 0):
            raise ValueError("negative dissimilarities")
        if np.any(np.abs(np.diag(self.d)) > 0):
            raise ValueError("nonzero diagonal")
        if np.max(np.abs(self.d - self.d.T)) > 1e-12:
            raise ValueError("matrix not symmetric within 1e-12")

    @property
    def n(self) -> int:
        return len(self.entities)


@dataclass(frozen=True)
class Merge:
    """One agglomeration step: node ids, merge cost, merged cluster size."""

    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Ordered merge tree. Leaf i is ``entities[i]``; merge j creates node
    ``n + j``. ``leaf_order`` is the left-to-right plotting order."""

    entities: tuple[str, ...]
    merges: tuple[Merge, ...]
    leaf_order: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "leaves": list(self.entities),
            "merges": [
                {"left": m.left, "right": m.right, "height": m.height, "size": m.size}
                for m in self.merges
            ],
        }


@dataclass(frozen=True)
class Partition:
    """Canonical flat clustering: cluster 1 holds the lexicographically
    smallest entity, cluster 2 the smallest entity outside cluster 1, etc."""

    assignment: dict[str, int]
    k: int
    objective: float | None = None
    representatives: dict[int, object] | None = None

    def clusters(self) -> dict[int, tuple[str, ...]]:
        out: dict[int, list[str]] = {label: [] for label in range(1, self.k + 1)}
        for entity in sorted(self.assignment):
            out[self.assignment[entity]].append(entity)
        return {label: tuple(members) for label, members in out.items()}

    def labels_for(self, entities) -> np.ndarray:
        return np.array([self.assignment[str(e)] for e in entities], dtype=int)


def _canonical_partition(
    entities, raw_labels, objective=None, raw_representatives=None
) -> Partition:
    """Relabel raw cluster ids so labels follow lexicographic entity order."""
    by_raw: dict[int, list[str]] = {}
    for entity, raw in zip(entities, raw_labels):
        by_raw.setdefault(int(raw), []).append(entity)
    order = sorted(by_raw, key=lambda raw: min(by_raw[raw]))
    relabel = {raw: new for new, raw in enumerate(order, start=1)}
    assignment = {
        entity: relabel[int(raw)] for entity, raw in zip(entities, raw_labels)
    }
    assignment = {entity: assignment[entity] for entity in sorted(assignment)}
    representatives = None
    if raw_representatives is not None:
        representatives = {
            relabel[raw]: rep for raw, rep in raw_representatives.items()
        }
        representatives = dict(sorted(representatives.items()))
    return Partition(
        assignment=assignment,
        k=len(order),
        objective=objective,
        representatives=representatives,
    )


# -- distances ----------------------------------------------------------------

def euclidean_matrix(matrix, entities=None) -> DistanceMatrix:
    """Pairwise Euclidean distances, rows sorted into entity order."""
    data, labels = as_feature_matrix(matrix, entities)
    require_min_objects(data.shape[0])
    data, labels = sorted_by_entity(data, labels)
    sq = np.sum(data**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (data @ data.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(entities=labels, d=d)


def as_distance_matrix(X, entities=None) -> DistanceMatrix:
    """Coerce a DistanceMatrix or square array into a validated, entity-sorted
    DistanceMatrix."""
    if isinstance(X, DistanceMatrix):
        labels, d = X.entities, np.asarray(X.d, dtype=float)
    else:
        d = np.asarray(X, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {d.shape}")
        labels = tuple(str(e) for e in entities) if entities is not None else auto_labels(d.shape[0])
    order = sorted(range(len(labels)), key=lambda i: labels[i])
    if order != list(range(len(labels))):
        d = d[np.ix_(order, order)]
        labels = tuple(labels[i] for i in order)
    return DistanceMatrix(entities=labels, d=d)


# -- Ward agglomeration ---------------------------------------------------------

def ward_linkage(dist) -> Dendrogram:
    """Agglomerate under the Ward criterion.

    Merge cost of clusters A, B is (|A||B|/(|A|+|B|)) * ||c_A - c_B||^2, seeded
    as d^2/2 for singleton pairs and maintained with the Lance-Williams update;
    heights are the merge costs. Cost ties break on the smallest (left, right)
    node-id pair.
    """
    dist = as_distance_matrix(dist)
    n = dist.n
    require_min_objects(n)
    sizes: dict[int, int] = {i: 1 for i in range(n)}
    delta: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            delta[(i, j)] = dist.d[i, j] ** 2 / 2.0
    active = sorted(sizes)
    merges: list[Merge] = []
    for step in range(n - 1):
        best_pair = None
        best_cost = np.inf
        for a_pos, a in enumerate(active):
            for b in active[a_pos + 1:]:
                cost = delta[(a, b)]
                if cost < best_cost:
                    best_cost = cost
                    best_pair = (a, b)
        a, b = best_pair
        new_id = n + step
        new_size = sizes[a] + sizes[b]
        merges.append(Merge(left=a, right=b, height=float(best_cost), size=new_size))
        for c in active:
            if c in (a, b):
                continue
            pad = delta[(min(a, c), max(a, c))]
            pbd = delta[(min(b, c), max(b, c))]
            updated = (
                (sizes[a] + sizes[c]) * pad
                + (sizes[b] + sizes[c]) * pbd
                - sizes[c] * best_cost
            ) / (new_size + sizes[c])
            delta[(c, new_id)] = updated
        sizes[new_id] = new_size
        active = [c for c in active if c not in (a, b)] + [new_id]
    leaf_order = tuple(dist.entities[i] for i in _leaf_traversal(n, merges))
    return Dendrogram(entities=dist.entities, merges=tuple(merges), leaf_order=leaf_order)


def _leaf_traversal(n: int, merges: list[Merge]) -> list[int]:
    """Left-to-right leaf indices of the final tree (left subtree first)."""
    if not merges:
        return list(range(n))

    def leaves(node: int) -> list[int]:
        if node < n:
            return [node]
        merge = merges[node - n]
        return leaves(merge.left) + leaves(merge.right)

    return leaves(n + len(merges) - 1)


def cut_dendrogram(dendrogram: Dendrogram, k: int) -> Partition:
    """Flat partition from the first n-k merges (undo the last k-1)."""
    n = len(dendrogram.entities)
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in [1, {n}], got {k}")
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for step in range(n - k):
        merge = dendrogram.merges[step]
        members[n + step] = members.pop(merge.left) + members.pop(merge.right)
    raw_labels = np.empty(n, dtype=int)
    for raw, (node, leaf_indices) in enumerate(sorted(members.items())):
        for i in leaf_indices:
            raw_labels[i] = raw
    return _canonical_partition(dendrogram.entities, raw_labels)


# -- Lloyd k-means ---------------------------------------------------------------

def _seed_centers(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Probabilistic farthest-point seeding: first center uniform, each next
    sampled with probability proportional to squared distance to the nearest
    chosen center. Zero total weight falls back to the lowest unchosen index."""
    n = data.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((data - data[chosen[0]]) ** 2, axis=1)
    while len(chosen) < k:
        total = float(d2.sum())
        if total > 0.0:
            cum = np.cumsum(d2 / total)
            idx = int(np.searchsorted(cum, rng.random(), side="right"))
            idx = min(idx, n - 1)
        else:
            taken = set(chosen)
            idx = next(i for i in range(n) if i not in taken)
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((data - data[idx]) ** 2, axis=1))
    return data[chosen].copy()


def _assign(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Nearest-center labels; ties resolve to the lowest center index."""
    d2 = np.sum((data[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)


def _repair_empty(data: np.ndarray, labels: np.ndarray, centers: np.ndarray, k: int) -> np.ndarray:
    """Reseed each empty cluster with the point farthest from its own center
    (ties to the lowest point index); singleton clusters are never robbed."""
    empties = [c for c in range(k) if not np.any(labels == c)]
    if not empties:
        return labels
    labels = labels.copy()
    dist_to_own = np.sqrt(np.sum((data - centers[labels]) ** 2, axis=1))
    for cluster in empties:
        counts = np.bincount(labels, minlength=k)
        movable = counts[labels] > 1
        if not np.any(movable):
            raise RuntimeError("empty-cluster repair failed")
        candidates = np.where(movable, dist_to_own, -np.inf)
        chosen = int(np.argmax(candidates))
        labels[chosen] = cluster
        dist_to_own[chosen] = -np.inf
    return labels


def _lloyd(
    data: np.ndarray, centers: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """Lloyd iterations to a fixed point; returns labels, centers, final WCSS,
    and the per-iteration WCSS history."""
    history: list[float] = []
    prev_labels = None
    for _ in range(MAX_LLOYD_ITER):
        labels = _assign(data, centers)
        labels = _repair_empty(data, labels, centers, k)
        centers = np.stack([data[labels == c].mean(axis=0) for c in range(k)])
        wcss = float(np.sum((data - centers[labels]) ** 2))
        history.append(wcss)
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels
    return labels, centers, history[-1], history


def kmeans(matrix, k: int, seed: int = 42, restarts: int = 50, entities=None) -> Partition:
    """Best-of-restarts Lloyd k-means; objective is the WCSS.

    Restart r runs with the derived seed ``seed + r``; the lowest-WCSS restart
    wins, ties going to the earlier restart.
    """
    data, names = as_feature_matrix(matrix, entities)
    data, names = sorted_by_entity(data, names)
    n = data.shape[0]
    if k < 2 or k > n:
        raise InvalidK(f"k must be in [2, {n}], got {k}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    best = None
    for restart in range(restarts):
        rng = np.random.default_rng(seed + restart)
        centers = _seed_centers(data, k, rng)
        assignment, centers, wcss, _ = _lloyd(data, centers, k)
        if best is None or wcss < best[2]:
            best = (assignment, centers, wcss)
    assignment, centers, wcss = best
    representatives = {c: centers[c].copy() for c in range(k)}
    return _canonical_partition(
        names, assignment, objective=wcss, raw_representatives=representatives
    )


# -- PAM (k-medoids) --------------------------------------------------------------

def _pam_cost(d: np.ndarray, medoids: list[int]) -> float:
    return float(np.min(d[:, medoids], axis=1).sum())


def _pam_core(d: np.ndarray, k: int) -> tuple[list[int], float, float, list[float]]:
    """BUILD then SWAP; returns (medoids, final cost, build cost, swap costs)."""
    n = d.shape[0]
    medoids = [int(np.argmin(d.sum(axis=1)))]
    nearest = d[:, medoids[0]].copy()
    while len(medoids) < k:
        best_gain = -np.inf
        best_candidate = None
        taken = set(medoids)
        for candidate in range(n):
            if candidate in taken:
                continue
            gain = float(np.maximum(nearest - d[:, candidate], 0.0).sum())
            if gain > best_gain:
                best_gain = gain
                best_candidate = candidate
        medoids.append(best_candidate)
        nearest = np.minimum(nearest, d[:, best_candidate])
    medoids.sort()
    build_cost = cost = _pam_cost(d, medoids)
    swap_costs: list[float] = []
    while True:
        best_cost = cost
        best_swap = None
        others = [h for h in range(n) if h not in set(medoids)]
        for m in medoids:
            for h in others:
                trial = sorted(set(medoids) - {m} | {h})
                trial_cost = _pam_cost(d, trial)
                if trial_cost < best_cost:
                    best_cost = trial_cost
                    best_swap = trial
        if best_swap is None:
            break
        medoids, cost = best_swap, best_cost
        swap_costs.append(cost)
    return medoids, cost, build_cost, swap_costs


def pam(dist, k: int) -> Partition:
    """Partitioning around medoids on a dissimilarity matrix.

    BUILD greedily seeds medoids (first minimizes total dissimilarity, each
    next maximizes cost reduction), then SWAP repeatedly applies the single
    best strictly improving (medoid, non-medoid) exchange. All ties break on
    the smallest index (pair). Objective is the total dissimilarity of objects
    to their nearest medoid.
    """
    dist = as_distance_matrix(dist)
    n = dist.n
    if k < 2 or k > n:
        raise InvalidK(f"k must be in [2, {n}], got {k}")
    medoids, cost, _, _ = _pam_core(dist.d, k)
    closest = np.argmin(dist.d[:, medoids], axis=1)
    representatives = {c: dist.entities[medoids[c]] for c in range(k)}
    return _canonical_partition(
        dist.entities, closest, objective=cost, raw_representatives=representatives
    )


# -- sklearn-style estimators ------------------------------------------------------

class WardClustering(ClusterMixin, BaseEstimator):
    """Ward agglomeration cut at ``n_clusters``.

    ``fit`` accepts a feature matrix (rows are observations) or, with
    ``metric="precomputed"``, a square dissimilarity matrix / DistanceMatrix.
    Labels are the canonical 1..k cluster ids.
    """

    def __init__(self, n_clusters: int = 2, metric: str = "euclidean"):
        self.n_clusters = n_clusters
        self.metric = metric

    def fit(self, X, y=None):
        if self.metric == "precomputed":
            dist = as_distance_matrix(X)
        elif self.metric == "euclidean":
            dist = euclidean_matrix(X)
        else:
            raise ValueError(f"metric must be 'euclidean' or 'precomputed', got {self.metric!r}")
        input_entities = X.entities if hasattr(X, "entities") else dist.entities
        self.dendrogram_ = ward_linkage(dist)
        self.partition_ = cut_dendrogram(self.dendrogram_, self.n_clusters)
        self.labels_ = self.partition_.labels_for(input_entities)
        return self


class LloydKMeans(ClusterMixin, BaseEstimator):
    """Seeded, restarted Lloyd k-means with deterministic tie-breaking."""

    def __init__(self, n_clusters: int = 2, seed: int = 42, restarts: int = 50):
        self.n_clusters = n_clusters
        self.seed = seed
        self.restarts = restarts

    def fit(self, X, y=None):
        data, entities = as_feature_matrix(X)
        self.partition_ = kmeans(
            data, self.n_clusters, seed=self.seed, restarts=self.restarts, entities=entities
        )
        self.labels_ = self.partition_.labels_for(entities)
        self.inertia_ = self.partition_.objective
        reps = self.partition_.representatives
        self.cluster_centers_ = np.stack([reps[label] for label in sorted(reps)])
        return self


class PAMClustering(ClusterMixin, BaseEstimator):
    """PAM k-medoids over Euclidean or precomputed dissimilarities."""

    def __init__(self, n_clusters: int = 2, metric: str = "euclidean"):
        self.n_clusters = n_clusters
        self.metric = metric

    def fit(self, X, y=None):
        if self.metric == "precomputed":
            dist = as_distance_matrix(X)
        elif self.metric == "euclidean":
            dist = euclidean_matrix(X)
        else:
            raise ValueError(f"metric must be 'euclidean' or 'precomputed', got {self.metric!r}")
        input_entities = X.entities if hasattr(X, "entities") else dist.entities
        self.partition_ = pam(dist, self.n_clusters)
        self.labels_ = self.partition_.labels_for(input_entities)
        self.inertia_ = self.partition_.objective
        self.medoids_ = tuple(
            self.partition_.representatives[label]
            for label in sorted(self.partition_.representatives)
        )
        return self
