from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from taxodev.errors import (
    DegenerateSpread,
    NotOriented,
    SchemaMismatch,
    ZeroBaseline,
)
from taxodev.hellwig import (
    HellwigDevelopment,
    PatternVector,
    development_pattern,
    distances_to_pattern,
    hellwig_measure,
    percent_change,
    rank_within_periods,
)
from taxodev.normalize import NormalizedPanel, orient, pooled_standardize
from taxodev.panel import IndicatorPanel, VariableMeta

from conftest import make_panel


def z_panel(cells, variables, oriented=True):
    """Fabricate a NormalizedPanel directly from z-values for distance tests."""
    catalog = {v: VariableMeta(v, "stimulant") for v in variables}
    entities = tuple(sorted({e for e, _, _, _ in cells}))
    periods = tuple(sorted({p for _, p, _, _ in cells}))
    return NormalizedPanel(
        entities=entities,
        periods=periods,
        variables=catalog,
        values={(e, p, v): float(z) for (e, p, v, z) in cells},
        means={v: 0.0 for v in variables},
        sds={v: 1.0 for v in variables},
        oriented=oriented,
    )


class TestDevelopmentPattern:
    def test_single_observation_is_its_own_pattern(self):
        panel = z_panel([("A", 2004, "x", 0.3), ("A", 2004, "y", -1.1)], ("x", "y"))
        pattern = development_pattern(panel)
        assert pattern.variables == ("x", "y")
        assert pattern.coordinates == (0.3, -1.1)

    def test_componentwise_max(self):
        cells = [
            ("A", 2004, "x", -1.4),
            ("B", 2004, "x", 0.0),
            ("A", 2005, "x", 0.9),
            ("B", 2005, "x", 0.2),
        ]
        pattern = development_pattern(z_panel(cells, ("x",)))
        assert pattern.coordinates == (0.9,)

    def test_destimulant_pattern_is_negated_min(self):
        catalog = {"v": VariableMeta("v", "destimulant")}
        panel = IndicatorPanel.from_observations(
            [("A", 2004, "v", 1.0), ("B", 2004, "v", 5.0), ("C", 2004, "v", 9.0)],
            catalog,
        )
        unoriented = pooled_standardize(panel)
        pattern = development_pattern(orient(unoriented))
        min_z = min(unoriented.values.values())
        assert pattern.coordinates[0] == pytest.approx(-min_z, abs=1e-12)

    def test_requires_orientation(self):
        panel = z_panel([("A", 2004, "x", 0.0)], ("x",), oriented=False)
        with pytest.raises(NotOriented):
            development_pattern(panel)


class TestDistances:
    def test_cell_equal_to_pattern_has_zero_distance(self):
        panel = z_panel([("A", 2004, "x", 1.5), ("A", 2004, "y", -0.5)], ("x", "y"))
        pattern = PatternVector(("x", "y"), (1.5, -0.5))
        table = distances_to_pattern(panel, pattern)
        assert table.cells[("A", 2004)] == 0.0

    def test_three_four_five_triangle(self):
        panel = z_panel([("A", 2004, "x", 0.0), ("A", 2004, "y", 0.0)], ("x", "y"))
        pattern = PatternVector(("x", "y"), (3.0, 4.0))
        table = distances_to_pattern(panel, pattern)
        assert table.cells[("A", 2004)] == pytest.approx(5.0, abs=1e-12)

    def test_one_variable_absolute_difference(self):
        z2 = 1.7
        panel = z_panel([("A", 2004, "x", 0.0), ("B", 2004, "x", z2)], ("x",))
        pattern = development_pattern(panel)
        table = distances_to_pattern(panel, pattern)
        assert table.cells[("A", 2004)] == pytest.approx(z2, abs=1e-12)
        assert table.cells[("B", 2004)] == pytest.approx(0.0, abs=1e-12)

    def test_schema_mismatch(self):
        panel = z_panel([("A", 2004, "x", 0.0)], ("x",))
        with pytest.raises(SchemaMismatch):
            distances_to_pattern(panel, PatternVector(("x", "y"), (0.0, 1.0)))

    def test_incomplete_cell_omitted_with_notice(self, caplog):
        cells = [
            ("A", 2004, "x", 0.1),
            ("A", 2004, "y", 0.2),
            ("B", 2004, "x", 0.3),  # B lacks y
        ]
        panel = z_panel(cells, ("x", "y"))
        with caplog.at_level(logging.WARNING):
            table = distances_to_pattern(panel, PatternVector(("x", "y"), (0.3, 0.2)))
        assert ("B", 2004) not in table.cells
        assert any("B" in record.message for record in caplog.records)


class TestHellwigMeasure:
    @pytest.mark.parametrize("d", [0.5, 1.0, 7.0, 123.456])
    def test_two_object_oracle(self, d):
        # mean d/2, popsd d/2, d0 = 1.5 d  =>  g = {1, 1/3}
        series = hellwig_measure({("A", 2004): 0.0, ("B", 2004): d})
        assert series.d0 == pytest.approx(1.5 * d, abs=1e-12)
        assert series.cells[("A", 2004)].measure == pytest.approx(1.0, abs=1e-12)
        assert series.cells[("B", 2004)].measure == pytest.approx(1 / 3, abs=1e-12)

    def test_three_distance_oracle(self):
        series = hellwig_measure(
            {("A", 2004): 1.0, ("B", 2004): 1.0, ("C", 2004): 4.0}
        )
        assert series.d0 == pytest.approx(2.0 + 2.0 * math.sqrt(2.0), abs=1e-9)
        g = {e: series.cells[(e, 2004)].measure for e in "ABC"}
        assert g["A"] == pytest.approx(0.792893, abs=1e-6)
        assert g["B"] == pytest.approx(0.792893, abs=1e-6)
        assert g["C"] == pytest.approx(0.171573, abs=1e-6)

    def test_all_zero_distances_degenerate(self):
        with pytest.raises(DegenerateSpread):
            hellwig_measure({("A", 2004): 0.0, ("B", 2004): 0.0})

    def test_measure_identity_invariant(self, full_panel):
        model = HellwigDevelopment().fit(full_panel)
        for cell in model.series_.cells.values():
            assert cell.measure == pytest.approx(
                1.0 - cell.distance / model.d0_, abs=1e-12
            )

    def test_g_at_most_one_and_one_iff_on_pattern(self, full_panel):
        model = HellwigDevelopment().fit(full_panel)
        for cell in model.series_.cells.values():
            assert cell.measure <= 1.0 + 1e-12
            assert (cell.measure == 1.0) == (cell.distance == 0.0)

    def test_negative_g_fraction_bounded_by_chebyshev(self):
        # d0 = mean + 2 popsd, so at most a quarter of cells may fall beyond it
        for seed in range(12):
            panel = make_panel(n_entities=10, years=(2004, 2005, 2006), seed=seed)
            model = HellwigDevelopment().fit(panel)
            g = [cell.measure for cell in model.series_.cells.values()]
            assert sum(1 for value in g if value < 0) / len(g) <= 0.25


class TestRanking:
    def test_rank_ordering(self):
        series = hellwig_measure(
            {("A", 2004): 1.0, ("B", 2004): 5.0, ("C", 2004): 3.0}
        )
        ranked = rank_within_periods(series)
        # g = {0.9, 0.5, 0.7}-shaped ordering: largest g -> rank 1
        assert ranked.cells[("A", 2004)].rank == 1
        assert ranked.cells[("C", 2004)].rank == 2
        assert ranked.cells[("B", 2004)].rank == 3

    def test_tie_broken_by_entity_id(self):
        series = hellwig_measure({("B", 2004): 2.0, ("A", 2004): 2.0, ("C", 2004): 0.0})
        ranked = rank_within_periods(series)
        assert ranked.cells[("C", 2004)].rank == 1
        assert ranked.cells[("A", 2004)].rank == 2
        assert ranked.cells[("B", 2004)].rank == 3

    def test_singleton_period(self):
        series = hellwig_measure({("A", 2004): 1.0, ("A", 2005): 2.0, ("B", 2005): 0.0})
        ranked = rank_within_periods(series)
        assert ranked.cells[("A", 2004)].rank == 1

    def test_ranks_are_permutation_within_each_period(self, full_panel):
        model = HellwigDevelopment().fit(full_panel)
        for period in model.series_.periods():
            ranks = sorted(
                cell.rank
                for (e, p), cell in model.series_.cells.items()
                if p == period
            )
            assert ranks == list(range(1, len(ranks) + 1))


class TestPercentChange:
    def test_measure_chain_changes_match_direct_formula(self):
        series = hellwig_measure(
            {("A", 2004): 2.0, ("A", 2018): 1.6, ("B", 2004): 6.0, ("B", 2018): 6.4}
        )
        g = {key: cell.measure for key, cell in series.cells.items()}
        changes = percent_change(series, 2004, 2018)
        for entity in ("A", "B"):
            expected = (
                100.0
                * (g[(entity, 2018)] - g[(entity, 2004)])
                / g[(entity, 2004)]
            )
            assert changes[entity] == pytest.approx(expected, abs=1e-12)

    def test_exact_arithmetic_cases(self):
        # g 0.5 -> 0.6 gives +20%; unchanged g gives 0%
        from taxodev.hellwig import DevelopmentCell, DevelopmentSeries

        series = DevelopmentSeries(
            cells={
                ("A", 2004): DevelopmentCell(distance=0.5, measure=0.5),
                ("A", 2018): DevelopmentCell(distance=0.4, measure=0.6),
                ("B", 2004): DevelopmentCell(distance=0.5, measure=0.5),
                ("B", 2018): DevelopmentCell(distance=0.5, measure=0.5),
            },
            d0=1.0,
        )
        changes = percent_change(series, 2004, 2018)
        assert changes["A"] == pytest.approx(20.0, abs=1e-12)
        assert changes["B"] == pytest.approx(0.0, abs=1e-12)

    def test_zero_baseline(self):
        from taxodev.hellwig import DevelopmentCell, DevelopmentSeries

        series = DevelopmentSeries(
            cells={
                ("A", 2004): DevelopmentCell(distance=1.0, measure=0.0),
                ("A", 2018): DevelopmentCell(distance=0.5, measure=0.5),
            },
            d0=1.0,
        )
        with pytest.raises(ZeroBaseline):
            percent_change(series, 2004, 2018)

    def test_missing_period_omitted_with_notice(self, caplog):
        series = hellwig_measure(
            {("A", 2004): 1.0, ("A", 2018): 2.0, ("B", 2004): 3.0}
        )
        with caplog.at_level(logging.WARNING):
            changes = percent_change(series, 2004, 2018)
        assert "A" in changes and "B" not in changes
        assert any("B" in record.message for record in caplog.records)


class TestPipelineProperties:
    def test_affine_transform_preserves_g_and_ranks(self):
        panel = make_panel(n_entities=8, years=(2004, 2005, 2006), seed=17)
        base = HellwigDevelopment().fit(panel)
        transformed = IndicatorPanel.from_observations(
            (
                (e, p, v, 3.7 * x + 11.0 if v == "pc_density" else x)
                for (e, p, v), x in panel.values.items()
            ),
            panel.variables,
        )
        scaled = HellwigDevelopment().fit(transformed)
        for key, cell in base.series_.cells.items():
            other = scaled.series_.cells[key]
            assert other.measure == pytest.approx(cell.measure, abs=1e-9)
            assert other.rank == cell.rank

    def test_improving_a_stimulant_does_not_decrease_g(self):
        # large panel so the pooled statistics barely move; improved value
        # stays below the variable maximum so the pattern is unaffected
        panel = make_panel(n_entities=20, years=tuple(range(2004, 2012)), seed=23)
        variable = "life_penetration"
        column = {
            key: value for key, value in panel.values.items() if key[2] == variable
        }
        max_key = max(column, key=column.get)
        target = ("C05", 2006, variable)
        assert target != max_key
        base = HellwigDevelopment().fit(panel)
        improved_value = column[target] + 0.25 * (column[max_key] - column[target])
        bumped = IndicatorPanel.from_observations(
            (
                (e, p, v, improved_value if (e, p, v) == target else x)
                for (e, p, v), x in panel.values.items()
            ),
            panel.variables,
        )
        improved = HellwigDevelopment().fit(bumped)
        key = (target[0], target[1])
        assert improved.series_.cells[key].measure >= (
            base.series_.cells[key].measure - 1e-9
        )


class TestEstimator:
    def test_fit_exposes_audit_state(self, small_panel):
        model = HellwigDevelopment().fit(small_panel)
        assert set(model.means_) == set(small_panel.variables)
        assert model.d0_ > 0
        assert model.pattern_.variables == tuple(sorted(small_panel.variables))
        path = model.series_.path("C01")
        assert sorted(path) == list(small_panel.periods)

    def test_percent_change_accessor(self, small_panel):
        model = HellwigDevelopment().fit(small_panel)
        changes = model.percent_change(2004, 2006)
        assert set(changes) <= set(small_panel.entities)

    def test_get_params_roundtrip(self):
        model = HellwigDevelopment()
        assert model.get_params() == {}
