"""Development pattern, distances, the 1 - d/d0 measure, paths, and rankings.

The pattern is the synthetic ideal object whose coordinates are per-variable
maxima of oriented z-scores over the whole pooled panel. Each entity-period is
scored by its Euclidean distance d to the pattern, scaled by the pooled
constant d0 = mean(d) + 2 * population sd(d), giving the measure g = 1 - d/d0.
g is near 1 for highly developed objects and may go negative for stragglers;
negative values are reported, never clipped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DegenerateSpread, NotOriented, SchemaMismatch, ZeroBaseline
from .normalize import NormalizedPanel, orient, pooled_standardize
from .panel import IndicatorPanel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PatternVector:
    """Per-variable maxima of oriented z-scores: the development pattern."""

    variables: tuple[str, ...]
    coordinates: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.coordinates)


@dataclass(frozen=True)
class DistanceTable:
    """Euclidean distances of complete entity-period vectors to the pattern."""

    cells: dict[tuple[str, int], float]
    pattern: PatternVector | None = None


@dataclass(frozen=True)
class DevelopmentCell:
    distance: float
    measure: float
    rank: int | None = None


@dataclass(frozen=True)
class DevelopmentSeries:
    """Per entity-period measure cells plus the shared pattern and d0 scale.

    Invariant: measure == 1 - distance/d0 for every cell. Ranks are None until
    :func:`rank_within_periods` fills them.
    """

    cells: dict[tuple[str, int], DevelopmentCell]
    d0: float
    pattern: PatternVector | None = None

    def periods(self) -> tuple[int, ...]:
        return tuple(sorted({period for _, period in self.cells}))

    def entities(self) -> tuple[str, ...]:
        return tuple(sorted({entity for entity, _ in self.cells}))

    def path(self, entity: str) -> dict[int, float]:
        """The development path g_t of one entity over its available periods."""
        return {
            period: cell.measure
            for (ent, period), cell in sorted(self.cells.items())
            if ent == entity
        }


def development_pattern(normalized: NormalizedPanel) -> PatternVector:
    """Componentwise maximum of oriented z-scores over the pooled panel."""
    if not normalized.oriented:
        raise NotOriented("development pattern requires an oriented panel")
    variables = tuple(sorted(normalized.variables))
    maxima = {variable: -np.inf for variable in variables}
    for (_, _, variable), z in normalized.values.items():
        if z > maxima[variable]:
            maxima[variable] = z
    return PatternVector(
        variables=variables,
        coordinates=tuple(float(maxima[v]) for v in variables),
    )


def distances_to_pattern(
    normalized: NormalizedPanel, pattern: PatternVector
) -> DistanceTable:
    """Euclidean distance of every complete entity-period vector to the pattern.

    Entity-periods with incomplete vectors are omitted with a logged notice.
    Raises SchemaMismatch when the pattern covers a different variable set.
    """
    if set(pattern.variables) != set(normalized.variables):
        raise SchemaMismatch(
            f"pattern variables {sorted(pattern.variables)} != "
            f"panel variables {sorted(normalized.variables)}"
        )
    target = pattern.as_array()
    cells: dict[tuple[str, int], float] = {}
    for entity in normalized.entities:
        for period in normalized.periods:
            vector = normalized.cell_vector(entity, period, pattern.variables)
            if vector is None:
                logger.warning(
                    "distances_to_pattern: skipping incomplete cell (%s, %d)",
                    entity,
                    period,
                )
                continue
            cells[(entity, period)] = float(np.linalg.norm(vector - target))
    return DistanceTable(cells=cells, pattern=pattern)


def hellwig_measure(distances) -> DevelopmentSeries:
    """Scale distances into g = 1 - d/d0 with d0 = mean + 2 * population sd.

    ``distances`` is a :class:`DistanceTable` or a plain mapping
    (entity, period) -> distance. d0 pools every cell, so paths are comparable
    across periods. Raises DegenerateSpread when d0 is zero (all objects sit
    exactly on the pattern).
    """
    if isinstance(distances, DistanceTable):
        cells, pattern = distances.cells, distances.pattern
    else:
        cells, pattern = dict(distances), None
    if not cells:
        raise DegenerateSpread("no distance cells")
    d = np.array([cells[key] for key in sorted(cells)])
    d0 = float(np.mean(d) + 2.0 * np.std(d))
    if d0 == 0.0:
        raise DegenerateSpread("all distances are zero; d0 = 0")
    series = {
        key: DevelopmentCell(distance=float(value), measure=1.0 - float(value) / d0)
        for key, value in sorted(cells.items())
    }
    return DevelopmentSeries(cells=series, d0=d0, pattern=pattern)


def rank_within_periods(series: DevelopmentSeries) -> DevelopmentSeries:
    """Assign rank 1 to the largest g in each period; ties go to the
    lexicographically smaller entity."""
    ranked: dict[tuple[str, int], DevelopmentCell] = {}
    for period in series.periods():
        present = [
            (entity, cell)
            for (entity, p), cell in series.cells.items()
            if p == period
        ]
        present.sort(key=lambda item: (-item[1].measure, item[0]))
        for position, (entity, cell) in enumerate(present, start=1):
            ranked[(entity, period)] = replace(cell, rank=position)
    ordered = {key: ranked[key] for key in sorted(ranked)}
    return DevelopmentSeries(cells=ordered, d0=series.d0, pattern=series.pattern)


def percent_change(
    series: DevelopmentSeries, period_from: int, period_to: int
) -> dict[str, float]:
    """100 * (g_to - g_from) / g_from per entity.

    Entities missing either boundary period are omitted with a logged notice.
    Raises ZeroBaseline when g_from is exactly zero for some entity.
    """
    changes: dict[str, float] = {}
    for entity in series.entities():
        start = series.cells.get((entity, period_from))
        end = series.cells.get((entity, period_to))
        if start is None or end is None:
            logger.warning(
                "percent_change: %s lacks period %d or %d, omitted",
                entity,
                period_from,
                period_to,
            )
            continue
        if start.measure == 0.0:
            raise ZeroBaseline(f"entity {entity!r} has g = 0 in period {period_from}")
        changes[entity] = 100.0 * (end.measure - start.measure) / start.measure
    return changes


class HellwigDevelopment(BaseEstimator):
    """Fit-shaped wrapper over the full measure chain.

    ``fit`` standardizes the panel (pooled z-scores), orients destimulants,
    builds the pattern, computes distances and the scaled measure, and ranks
    entities within each period. Fitted state lives in the trailing-underscore
    attributes.

    Attributes
    ----------
    pattern_ : PatternVector
    d0_ : float
    series_ : DevelopmentSeries (ranked)
    means_, sds_ : dict per-variable pooled statistics (audit)
    """

    def fit(self, panel: IndicatorPanel, y=None) -> "HellwigDevelopment":
        normalized = orient(pooled_standardize(panel))
        self.pattern_ = development_pattern(normalized)
        table = distances_to_pattern(normalized, self.pattern_)
        self.series_ = rank_within_periods(hellwig_measure(table))
        self.d0_ = self.series_.d0
        self.means_ = dict(normalized.means)
        self.sds_ = dict(normalized.sds)
        return self

    def percent_change(self, period_from: int, period_to: int) -> dict[str, float]:
        return percent_change(self.series_, period_from, period_to)
