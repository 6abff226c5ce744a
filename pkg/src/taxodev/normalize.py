"""Pooled z-score standardization and destimulant orientation.

Standardization pools every entity and period of a variable into one mean and
one population standard deviation, so that standardized values stay comparable
across years. Destimulants are then sign-flipped once, which turns every
column into "larger is better".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariable, DoubleOrientation, UnknownVariable
from .panel import IndicatorPanel, VariableMeta


@dataclass(frozen=True)
class NormalizedPanel:
    """Same index structure as :class:`IndicatorPanel`, values as z-scores.

    ``means`` and ``sds`` retain the pooled per-variable statistics for audit
    output. ``oriented`` records whether destimulants have been negated.
    """

    entities: tuple[str, ...]
    periods: tuple[int, ...]
    variables: dict[str, VariableMeta]
    values: dict[tuple[str, int, str], float]
    means: dict[str, float]
    sds: dict[str, float]
    oriented: bool = False

    def cell_vector(self, entity: str, period: int, variables) -> np.ndarray | None:
        """The z-vector of one entity-period, or None when incomplete."""
        out = np.empty(len(variables))
        for j, variable in enumerate(variables):
            key = (entity, period, variable)
            if key not in self.values:
                return None
            out[j] = self.values[key]
        return out


def pooled_standardize(panel: IndicatorPanel) -> NormalizedPanel:
    """Standardize each variable over all entities and periods jointly.

    z = (x - pooled mean) / pooled population standard deviation. Raises
    DegenerateVariable for zero-variance variables.
    """
    means: dict[str, float] = {}
    sds: dict[str, float] = {}
    for variable in sorted(panel.variables):
        column = panel.variable_values(variable)
        if column.size == 0:
            raise DegenerateVariable(f"variable {variable!r} has no observations")
        mean = float(np.mean(column))
        sd = float(np.std(column))
        if sd == 0.0:
            raise DegenerateVariable(f"variable {variable!r} has zero variance")
        means[variable] = mean
        sds[variable] = sd
    values = {
        (entity, period, variable): (raw - means[variable]) / sds[variable]
        for (entity, period, variable), raw in panel.values.items()
    }
    return NormalizedPanel(
        entities=panel.entities,
        periods=panel.periods,
        variables=dict(panel.variables),
        values=values,
        means=means,
        sds=sds,
        oriented=False,
    )


def orient(normalized: NormalizedPanel, catalog=None) -> NormalizedPanel:
    """Negate destimulant z-scores so every variable points toward development.

    ``catalog`` may be a mapping name -> VariableMeta or an iterable of
    VariableMeta; defaults to the panel's own catalog. Raises
    DoubleOrientation when called on an already oriented panel and
    UnknownVariable when a variable lacks direction metadata.
    """
    if normalized.oriented:
        raise DoubleOrientation("panel is already oriented")
    if catalog is None:
        catalog = normalized.variables
    elif not isinstance(catalog, dict):
        catalog = {meta.name: meta for meta in catalog}
    for variable in normalized.variables:
        if variable not in catalog:
            raise UnknownVariable(f"no direction metadata for variable {variable!r}")
    values = {
        (entity, period, variable): (
            -z if catalog[variable].direction == "destimulant" else z
        )
        for (entity, period, variable), z in normalized.values.items()
    }
    return NormalizedPanel(
        entities=normalized.entities,
        periods=normalized.periods,
        variables=dict(normalized.variables),
        values=values,
        means=dict(normalized.means),
        sds=dict(normalized.sds),
        oriented=True,
    )


def standardize_columns(data: np.ndarray) -> np.ndarray:
    """Column-wise z-scores with population standard deviation.

    Used for single-year cross-sections before clustering. Raises
    DegenerateVariable when a column has zero variance; the caller knows the
    column names and may re-raise with context.
    """
    data = np.asarray(data, dtype=float)
    means = data.mean(axis=0)
    sds = data.std(axis=0)
    degenerate = np.flatnonzero(sds == 0.0)
    if degenerate.size:
        raise DegenerateVariable(
            f"zero-variance column(s) at index {degenerate.tolist()}"
        )
    return (data - means) / sds
