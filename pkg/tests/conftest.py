"""Shared fixtures: deterministic synthetic panels and file helpers."""

from __future__ import annotations

import csv

import numpy as np
import pytest

from taxodev.panel import IndicatorPanel, VariableMeta

# Nine diagnostic variables; the two market-share concentrations are
# destimulants (lower share = more competition).
VARIABLES = (
    ("life_penetration", "stimulant", "% of GDP"),
    ("pc_penetration", "stimulant", "% of GDP"),
    ("life_density", "stimulant", "EUR per capita"),
    ("pc_density", "stimulant", "EUR per capita"),
    ("assets_per_company", "stimulant", "EUR million"),
    ("investment_gdp", "stimulant", "% of GDP"),
    ("top5_life_share", "destimulant", "% of market"),
    ("top5_pc_share", "destimulant", "% of market"),
    ("companies_per_million", "stimulant", "per 1e6 inhabitants"),
)

YEARS = tuple(range(2004, 2019))


def make_catalog() -> dict[str, VariableMeta]:
    return {
        name: VariableMeta(name=name, direction=direction, units=units)
        for name, direction, units in VARIABLES
    }


def make_panel(
    n_entities: int = 24,
    years=YEARS,
    variables=VARIABLES,
    seed: int = 7,
    drop: tuple[tuple[str, int, str], ...] = (),
) -> IndicatorPanel:
    """Deterministic synthetic panel: per-entity level, mild trend, noise."""
    rng = np.random.default_rng(seed)
    entities = [f"C{i:02d}" for i in range(1, n_entities + 1)]
    catalog = {
        name: VariableMeta(name=name, direction=direction, units=units)
        for name, direction, units in variables
    }
    observations = []
    for v_idx, (name, _, _) in enumerate(variables):
        base = rng.uniform(1.0, 10.0, size=n_entities)
        trend = rng.uniform(-0.05, 0.08, size=n_entities)
        scale = 10.0 ** rng.integers(0, 3)
        for e_idx, entity in enumerate(entities):
            for t_idx, year in enumerate(years):
                value = scale * base[e_idx] * (1.0 + trend[e_idx]) ** t_idx
                value += scale * 0.05 * rng.standard_normal()
                key = (entity, year, name)
                if key in drop:
                    continue
                observations.append((entity, year, name, float(value)))
    return IndicatorPanel.from_observations(observations, catalog)


def write_panel_files(panel: IndicatorPanel, directory) -> tuple[str, str]:
    """Write CLI-format input files; returns (panel_path, catalog_path)."""
    panel_path = directory / "panel.csv"
    catalog_path = directory / "catalog.csv"
    with open(catalog_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["variable", "direction", "units"])
        for name in sorted(panel.variables):
            meta = panel.variables[name]
            writer.writerow([meta.name, meta.direction, meta.units])
    with open(panel_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["entity", "period", "variable", "value"])
        for (entity, period, variable), value in sorted(panel.values.items()):
            writer.writerow([entity, period, variable, repr(value)])
    return str(panel_path), str(catalog_path)


def write_grouping(panel: IndicatorPanel, directory, split: int | None = None) -> str:
    """Assign the first ``split`` entities to group a, the rest to group b."""
    path = directory / "groups.csv"
    if split is None:
        split = len(panel.entities) // 2
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["entity", "group"])
        for i, entity in enumerate(panel.entities):
            writer.writerow([entity, "a" if i < split else "b"])
    return str(path)


@pytest.fixture
def catalog():
    return make_catalog()


@pytest.fixture
def small_panel():
    return make_panel(n_entities=6, years=(2004, 2005, 2006), seed=11)


@pytest.fixture
def full_panel():
    return make_panel()
