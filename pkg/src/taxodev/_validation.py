"""Input coercion and validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import TooFewObjects
from .panel import YearMatrix


def auto_labels(n: int, prefix: str = "o") -> tuple[str, ...]:
    """Zero-padded synthetic row labels whose lexicographic order matches
    the numeric row order."""
    width = max(1, len(str(n - 1)))
    return tuple(f"{prefix}{i:0{width}d}" for i in range(n))


def as_feature_matrix(X, entities=None) -> tuple[np.ndarray, tuple[str, ...]]:
    """Coerce to a dense 2-D float matrix plus per-row entity labels.

    Accepts a YearMatrix, a 2-D array-like, or a 1-D array-like (treated as a
    single feature). Labels default to zero-padded row indices.
    """
    if isinstance(X, YearMatrix):
        if entities is not None:
            raise ValueError("entities cannot be overridden for a YearMatrix")
        return np.asarray(X.data, dtype=float), tuple(X.entities)
    data = np.asarray(X, dtype=float)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    if data.ndim != 2:
        raise ValueError(f"expected a 1-D or 2-D matrix, got ndim={data.ndim}")
    if not np.all(np.isfinite(data)):
        raise ValueError("matrix contains non-finite values")
    if entities is None:
        labels = auto_labels(data.shape[0])
    else:
        labels = tuple(str(e) for e in entities)
        if len(labels) != data.shape[0]:
            raise ValueError(
                f"{len(labels)} entities for {data.shape[0]} matrix rows"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("entity labels must be unique")
    return data, labels


def sorted_by_entity(
    data: np.ndarray, entities: tuple[str, ...]
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Reorder rows into ascending entity order (engines canonicalize on this
    so results are independent of row presentation order)."""
    order = sorted(range(len(entities)), key=lambda i: entities[i])
    if order == list(range(len(entities))):
        return data, entities
    return data[order], tuple(entities[i] for i in order)


def require_min_objects(n: int, minimum: int = 2) -> None:
    if n < minimum:
        raise TooFewObjects(f"need at least {minimum} objects, got {n}")
