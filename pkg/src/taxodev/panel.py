"""Indicator panel: loading, validation, slicing, and group aggregation.

The panel is a sparse long-format table of (entity, period, variable) -> value
observations plus a variable catalog carrying per-variable direction metadata
(stimulant / destimulant). All container types are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateObservation,
    EmptyCrossSection,
    EmptyGroup,
    MalformedRow,
    UnassignedEntity,
    UnknownPeriod,
    UnknownVariable,
)

logger = logging.getLogger(__name__)

DIRECTIONS = ("stimulant", "destimulant")

PANEL_HEADER = ["entity", "period", "variable", "value"]
CATALOG_HEADER = ["variable", "direction", "units"]


@dataclass(frozen=True)
class VariableMeta:
    """Catalog entry for one diagnostic variable."""

    name: str
    direction: str
    units: str = ""
    description: str = ""

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise UnknownVariable(
                f"variable {self.name!r}: direction must be one of {DIRECTIONS}, "
                f"got {self.direction!r}"
            )


@dataclass(frozen=True)
class IndicatorPanel:
    """Sparse entity x period x variable table with a variable catalog.

    ``entities`` and ``periods`` are kept sorted ascending; ``values`` maps
    (entity, period, variable) keys to finite floats. Treat all fields as
    read-only.
    """

    entities: tuple[str, ...]
    periods: tuple[int, ...]
    variables: dict[str, VariableMeta]
    values: dict[tuple[str, int, str], float]

    @classmethod
    def from_observations(cls, observations, catalog) -> "IndicatorPanel":
        """Build a validated panel from an iterable of (entity, period, variable, value).

        ``catalog`` is a mapping name -> VariableMeta or an iterable of
        VariableMeta. Raises DuplicateObservation on repeated keys and
        UnknownVariable when an observation references an uncataloged variable.
        """
        if not isinstance(catalog, dict):
            catalog = {meta.name: meta for meta in catalog}
        values: dict[tuple[str, int, str], float] = {}
        entities: set[str] = set()
        periods: set[int] = set()
        for entity, period, variable, value in observations:
            if variable not in catalog:
                raise UnknownVariable(
                    f"variable {variable!r} not in catalog (observation {entity}, {period})"
                )
            key = (str(entity), int(period), variable)
            if key in values:
                raise DuplicateObservation(f"duplicate observation for key {key}")
            value = float(value)
            if not np.isfinite(value):
                raise MalformedRow(0, f"non-finite value for key {key}")
            values[key] = value
            entities.add(key[0])
            periods.add(key[1])
        ordered = {
            key: values[key] for key in sorted(values)
        }
        return cls(
            entities=tuple(sorted(entities)),
            periods=tuple(sorted(periods)),
            variables=dict(catalog),
            values=ordered,
        )

    def value(self, entity: str, period: int, variable: str) -> float:
        return self.values[(entity, period, variable)]

    def has(self, entity: str, period: int, variable: str) -> bool:
        return (entity, period, variable) in self.values

    def variable_values(self, variable: str) -> np.ndarray:
        """All stored values of one variable, in sorted key order."""
        return np.array(
            [v for (e, p, var), v in self.values.items() if var == variable]
        )


@dataclass(frozen=True)
class YearMatrix:
    """Dense single-period cross-section: entities x variables, no gaps."""

    period: int
    entities: tuple[str, ...]
    variables: tuple[str, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.data.shape != (len(self.entities), len(self.variables)):
            raise ValueError(
                f"matrix shape {self.data.shape} does not match "
                f"{len(self.entities)} entities x {len(self.variables)} variables"
            )


def read_catalog(meta_file) -> dict[str, VariableMeta]:
    """Read a variable catalog CSV with header ``variable,direction,units``."""
    catalog: dict[str, VariableMeta] = {}
    with open(meta_file, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != CATALOG_HEADER:
            raise MalformedRow(1, f"catalog header must be {','.join(CATALOG_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 3:
                raise MalformedRow(lineno, f"expected 3 catalog columns, got {len(row)}")
            name, direction, units = row[0].strip(), row[1].strip(), row[2].strip()
            if direction not in DIRECTIONS:
                raise MalformedRow(
                    lineno, f"direction must be 'stimulant' or 'destimulant', got {direction!r}"
                )
            if name in catalog:
                raise DuplicateObservation(f"variable {name!r} listed twice in catalog")
            catalog[name] = VariableMeta(name=name, direction=direction, units=units)
    return catalog


def load_panel(panel_file, meta_file) -> IndicatorPanel:
    """Load and validate a long-format panel plus its variable catalog.

    The panel file must carry the header ``entity,period,variable,value``.
    Raises MalformedRow (with line number), DuplicateObservation, or
    UnknownVariable on contract violations.
    """
    catalog = read_catalog(meta_file)
    values: dict[tuple[str, int, str], float] = {}
    with open(panel_file, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:4]] != PANEL_HEADER:
            raise MalformedRow(1, f"panel header must be {','.join(PANEL_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 4:
                raise MalformedRow(lineno, f"expected 4 columns, got {len(row)}")
            entity = row[0].strip()
            try:
                period = int(row[1])
            except ValueError:
                raise MalformedRow(lineno, f"unparsable period {row[1]!r}") from None
            variable = row[2].strip()
            try:
                value = float(row[3])
            except ValueError:
                raise MalformedRow(lineno, f"unparsable value {row[3]!r}") from None
            if not np.isfinite(value):
                raise MalformedRow(lineno, f"non-finite value {row[3]!r}")
            if variable not in catalog:
                raise UnknownVariable(
                    f"line {lineno}: variable {variable!r} not in catalog"
                )
            key = (entity, period, variable)
            if key in values:
                raise DuplicateObservation(f"line {lineno}: duplicate key {key}")
            values[key] = value
    return IndicatorPanel.from_observations(
        ((e, p, v, x) for (e, p, v), x in values.items()), catalog
    )


def write_panel(panel: IndicatorPanel, panel_file, meta_file) -> None:
    """Write a panel back to the long format; reloading round-trips bit-exact.

    Values are serialized with ``repr`` so that float64 payloads survive the
    text round trip unchanged.
    """
    with open(meta_file, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CATALOG_HEADER)
        for name in sorted(panel.variables):
            meta = panel.variables[name]
            writer.writerow([meta.name, meta.direction, meta.units])
    with open(panel_file, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PANEL_HEADER)
        for (entity, period, variable), value in sorted(panel.values.items()):
            writer.writerow([entity, period, variable, repr(value)])


def extract_year(panel: IndicatorPanel, period: int, variables=None) -> YearMatrix:
    """Dense cross-section for one period.

    Entities missing any requested variable in that period are dropped with a
    logged notice. Raises UnknownPeriod for absent periods and
    EmptyCrossSection when no entity survives.
    """
    if period not in panel.periods:
        raise UnknownPeriod(f"period {period} not in panel (has {panel.periods})")
    if variables is None:
        variables = tuple(sorted(panel.variables))
    else:
        variables = tuple(variables)
        for variable in variables:
            if variable not in panel.variables:
                raise UnknownVariable(f"variable {variable!r} not in catalog")
    kept: list[str] = []
    rows: list[list[float]] = []
    for entity in panel.entities:
        try:
            rows.append([panel.value(entity, period, v) for v in variables])
        except KeyError:
            logger.warning(
                "extract_year: dropping %s for %d (incomplete variables)", entity, period
            )
            continue
        kept.append(entity)
    if not kept:
        raise EmptyCrossSection(f"no entity has complete data for period {period}")
    return YearMatrix(
        period=period,
        entities=tuple(kept),
        variables=variables,
        data=np.array(rows, dtype=float),
    )


def aggregate_groups(
    panel: IndicatorPanel, grouping: dict[str, str], variable: str, stat: str = "sum"
) -> dict[tuple[str, int], float]:
    """Aggregate one variable into per-group time series.

    ``grouping`` maps every panel entity to a group label. A (group, period)
    cell is emitted only when every member has a value for that period.
    ``stat`` is ``sum`` or ``mean``.
    """
    if variable not in panel.variables:
        raise UnknownVariable(f"variable {variable!r} not in catalog")
    if stat not in ("sum", "mean"):
        raise ValueError(f"stat must be 'sum' or 'mean', got {stat!r}")
    missing = [e for e in panel.entities if e not in grouping]
    if missing:
        raise UnassignedEntity(f"entities not assigned to any group: {missing}")
    members: dict[str, list[str]] = {}
    for entity, group in grouping.items():
        members.setdefault(group, [])
        if entity in panel.entities:
            members[group].append(entity)
    empty = sorted(g for g, m in members.items() if not m)
    if empty:
        raise EmptyGroup(f"groups without panel entities: {empty}")
    series: dict[tuple[str, int], float] = {}
    for group in sorted(members):
        for period in panel.periods:
            cells = [
                panel.values[(entity, period, variable)]
                for entity in members[group]
                if (entity, period, variable) in panel.values
            ]
            if len(cells) != len(members[group]):
                continue
            total = float(sum(cells))
            series[(group, period)] = total if stat == "sum" else total / len(cells)
    return series
