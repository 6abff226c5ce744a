"""Pipeline configuration, orchestration, and file emission.

Every subcommand computes its artifacts fully in memory before touching the
output directory, then writes each file through a temp-and-rename step, so a
failure never leaves half-written output. All CSV output is UTF-8, comma
separated, decimal point, reals fixed to 6 decimals; reruns with identical
inputs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import shutil
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import _svg
from .cluster import euclidean_matrix, ward_linkage
from .errors import (
    ConfigError,
    DataError,
    DegeneracyError,
    MalformedRow,
    TaxodevError,
    UnknownPeriod,
)
from .hellwig import (
    development_pattern,
    distances_to_pattern,
    hellwig_measure,
    percent_change,
    rank_within_periods,
)
from .normalize import orient, pooled_standardize, standardize_columns
from .panel import IndicatorPanel, aggregate_groups, extract_year, load_panel
from .validity import INDICES, METHODS, validity_grid

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs; see README for the config file keys."""

    panel: Path
    catalog: Path
    out: Path = Path("out")
    years: tuple[int, ...] = ()
    hellwig_from: int | None = None
    hellwig_to: int | None = None
    variables: tuple[str, ...] | None = None
    methods: tuple[str, ...] = METHODS
    k_min: int = 2
    k_max: int = 6
    seed: int = 42
    restarts: int = 50
    svg: bool = False
    grouping: Path | None = None
    describe_variables: tuple[str, ...] | None = None
    describe_stat: str = "sum"

    def validate(self) -> "PipelineConfig":
        if self.k_min < 2:
            raise ConfigError(f"k_min must be >= 2, got {self.k_min}")
        if self.k_max < self.k_min:
            raise ConfigError(f"k_max ({self.k_max}) must be >= k_min ({self.k_min})")
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        for method in self.methods:
            if method not in METHODS:
                raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.describe_stat not in ("sum", "mean"):
            raise ConfigError(f"describe_stat must be 'sum' or 'mean', got {self.describe_stat!r}")
        return self


_CONFIG_KEYS = {
    "panel": Path,
    "catalog": Path,
    "out": Path,
    "years": tuple,
    "hellwig_from": int,
    "hellwig_to": int,
    "variables": tuple,
    "methods": tuple,
    "k_min": int,
    "k_max": int,
    "seed": int,
    "restarts": int,
    "svg": bool,
    "grouping": Path,
    "describe_variables": tuple,
    "describe_stat": str,
}


def load_config(config_file=None, overrides=None) -> PipelineConfig:
    """Assemble a validated config from an optional TOML file plus overrides
    (flag values win over file values)."""
    raw: dict = {}
    if config_file is not None:
        with open(config_file, "rb") as handle:
            try:
                raw = tomllib.load(handle)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"cannot parse config file {config_file}: {exc}") from exc
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(raw) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {unknown}")
    kwargs: dict = {}
    for key, value in raw.items():
        kind = _CONFIG_KEYS[key]
        try:
            if kind is Path:
                kwargs[key] = Path(value)
            elif kind is tuple:
                if isinstance(value, str):
                    value = [v.strip() for v in value.split(",") if v.strip()]
                kwargs[key] = tuple(
                    int(v) if key == "years" else str(v) for v in value
                )
            elif kind is bool:
                kwargs[key] = bool(value)
            elif kind is int:
                kwargs[key] = int(value)
            else:
                kwargs[key] = str(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for config key {key!r}: {value!r}") from exc
    if "panel" not in kwargs or "catalog" not in kwargs:
        raise ConfigError("config must provide 'panel' and 'catalog' paths")
    return PipelineConfig(**kwargs).validate()


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DegeneracyError):
        return EXIT_DEGENERATE
    if isinstance(exc, DataError):
        return EXIT_DATA
    if isinstance(exc, TaxodevError):
        return EXIT_DATA
    return 1


# -- formatting helpers ---------------------------------------------------------

def _real(x: float) -> str:
    return f"{x:.6f}"


def _round_audit(x: float) -> float:
    """Audit values rounded to a printable, rerun-stable precision."""
    return float(f"{x:.12g}")


def _csv_text(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _write_atomic(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.parent / f".tmp.{path.name}"
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def _write_tree(out_dir: Path, files: dict[str, str]) -> list[Path]:
    """Write a fully computed {relative name: content} tree."""
    written = []
    for name in sorted(files):
        target = out_dir / name
        _write_atomic(target, files[name])
        written.append(target)
    return written


def load_grouping(path) -> dict[str, str]:
    """Read an entity -> group mapping CSV with header ``entity,group``."""
    grouping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["entity", "group"]:
            raise MalformedRow(1, "grouping header must be entity,group")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise MalformedRow(lineno, f"expected 2 columns, got {len(row)}")
            grouping[row[0].strip()] = row[1].strip()
    return grouping


def _check_years(panel: IndicatorPanel, years) -> None:
    for year in years:
        if year not in panel.periods:
            raise UnknownPeriod(f"analysis year {year} not in panel periods {panel.periods}")


def _hellwig_window(panel: IndicatorPanel, config: PipelineConfig) -> tuple[int, int]:
    start = config.hellwig_from if config.hellwig_from is not None else panel.periods[0]
    end = config.hellwig_to if config.hellwig_to is not None else panel.periods[-1]
    _check_years(panel, (start, end))
    if start >= end:
        raise ConfigError(f"hellwig period range must satisfy from < to, got [{start}, {end}]")
    return start, end


def _restrict_periods(panel: IndicatorPanel, start: int, end: int) -> IndicatorPanel:
    if start == panel.periods[0] and end == panel.periods[-1]:
        return panel
    observations = (
        (e, p, v, x) for (e, p, v), x in panel.values.items() if start <= p <= end
    )
    return IndicatorPanel.from_observations(observations, panel.variables)


# -- subcommands ------------------------------------------------------------------

def run_hellwig(config: PipelineConfig, panel: IndicatorPanel | None = None) -> list[Path]:
    """Development measure pipeline: standardize, orient, pattern, distances,
    measure, ranks, percent change. Emits hellwig_paths.csv,
    hellwig_change.csv, hellwig_audit.json, and optionally hellwig_paths.svg."""
    if panel is None:
        panel = load_panel(config.panel, config.catalog)
    start, end = _hellwig_window(panel, config)
    window = _restrict_periods(panel, start, end)
    normalized = orient(pooled_standardize(window))
    pattern = development_pattern(normalized)
    series = rank_within_periods(
        hellwig_measure(distances_to_pattern(normalized, pattern))
    )
    changes = percent_change(series, start, end)

    path_rows = [
        [entity, period, _real(cell.distance), _real(cell.measure), cell.rank]
        for (entity, period), cell in sorted(series.cells.items())
    ]
    change_rows = [
        [entity, _real(value)] for entity, value in sorted(changes.items())
    ]
    audit = {
        "means": {v: _round_audit(m) for v, m in sorted(normalized.means.items())},
        "sds": {v: _round_audit(s) for v, s in sorted(normalized.sds.items())},
        "pattern": {
            v: _round_audit(c)
            for v, c in zip(pattern.variables, pattern.coordinates)
        },
        "d0": _round_audit(series.d0),
        "period_from": start,
        "period_to": end,
    }
    files = {
        "hellwig_paths.csv": _csv_text(
            ["entity", "period", "distance", "g", "rank"], path_rows
        ),
        "hellwig_change.csv": _csv_text(["entity", "percent"], change_rows),
        "hellwig_audit.json": json.dumps(audit, sort_keys=True, indent=2) + "\n",
    }
    if config.svg:
        paths = {
            entity: sorted(
                (float(period), cell.measure)
                for (ent, period), cell in series.cells.items()
                if ent == entity
            )
            for entity in series.entities()
        }
        files["hellwig_paths.svg"] = _svg.line_chart(
            paths, f"Development paths {start}-{end}"
        )
    return _write_tree(config.out, files)


def _similarity_year_files(config: PipelineConfig, panel: IndicatorPanel, year: int) -> dict[str, str]:
    cross = extract_year(panel, year, config.variables)
    data = standardize_columns(cross.data)
    dist = euclidean_matrix(data, cross.entities)
    report = validity_grid(
        data,
        dist,
        methods=config.methods,
        k_min=config.k_min,
        k_max=config.k_max,
        seed=config.seed,
        restarts=config.restarts,
        entities=cross.entities,
    )
    dendrogram = ward_linkage(dist)

    validity_rows = []
    for method in config.methods:
        for index in INDICES:
            for k in report.ks:
                cell = report.scores[(method, index, k)]
                value = _real(cell.value) if cell.ok else cell.error
                optimal = 1 if report.optima.get((method, index)) == k else 0
                validity_rows.append([method, index, k, value, optimal])

    files = {
        "validity.csv": _csv_text(
            ["method", "index", "k", "value", "optimal"], validity_rows
        ),
        "dendrogram.json": json.dumps(dendrogram.to_json_dict(), indent=2) + "\n",
    }

    for method in config.methods:
        flagged = sorted(
            {
                report.optima[(method, index)]
                for index in INDICES
                if (method, index) in report.optima
            }
        )
        for k in flagged:
            partition = report.partitions.get((method, k))
            if partition is None:
                continue
            rows = [
                [entity, label] for entity, label in sorted(partition.assignment.items())
            ]
            files[f"clusters_{method}_k{k}.csv"] = _csv_text(["entity", "cluster"], rows)

    best_cell = _best_silhouette_cell(config.methods, report)
    if best_cell is not None:
        method, k = best_cell
        partition = report.partitions[(method, k)]
        widths = report.silhouette_widths[(method, k)]
        rows = sorted(
            (
                (partition.assignment[entity], -width, entity)
                for entity, width in widths.items()
            )
        )
        silhouette_rows = [
            [entity, cluster, _real(-neg_width)] for cluster, neg_width, entity in rows
        ]
        files["silhouette.csv"] = _csv_text(
            ["entity", "cluster", "width"], silhouette_rows
        )
        if config.svg:
            files["silhouette.svg"] = _svg.bar_chart(
                [(e, c, -w) for c, w, e in rows],
                f"Silhouette widths {year} ({method}, k={k})",
            )
    if config.svg:
        files["dendrogram.svg"] = _svg.dendrogram_chart(
            dendrogram.entities,
            dendrogram.merges,
            dendrogram.leaf_order,
            f"Ward dendrogram {year}",
        )
    return files


def _best_silhouette_cell(methods, report):
    """The (method, k) cell with the highest average silhouette; ties resolve
    by the configured method order, then smaller k."""
    best = None
    for rank, method in enumerate(methods):
        for k in report.ks:
            cell = report.scores.get((method, "silhouette", k))
            if cell is None or not cell.ok:
                continue
            key = (-cell.value, rank, k)
            if best is None or key < best[0]:
                best = (key, (method, k))
    return None if best is None else best[1]


def run_similarity(
    config: PipelineConfig, panel: IndicatorPanel | None = None
) -> tuple[list[Path], dict[int, Exception]]:
    """Clustering/validity pipeline per analysis year.

    Returns written paths and a {year: exception} map of isolated per-year
    failures (successful years are still emitted)."""
    if panel is None:
        panel = load_panel(config.panel, config.catalog)
    if not config.years:
        raise ConfigError("similarity analysis requires at least one analysis year")
    _check_years(panel, config.years)
    per_year: dict[int, dict[str, str]] = {}
    failures: dict[int, Exception] = {}
    for year in config.years:
        try:
            per_year[year] = _similarity_year_files(config, panel, year)
        except TaxodevError as exc:
            logger.error("similarity analysis failed for %d: %s", year, exc)
            failures[year] = exc
    written: list[Path] = []
    for year, files in sorted(per_year.items()):
        year_dir = config.out / str(year)
        if year_dir.exists():
            shutil.rmtree(year_dir)
        written.extend(_write_tree(year_dir, files))
    return written, failures


def run_describe(config: PipelineConfig, panel: IndicatorPanel | None = None) -> list[Path]:
    """Group aggregation series, one CSV per requested variable."""
    if panel is None:
        panel = load_panel(config.panel, config.catalog)
    if config.grouping is None:
        raise ConfigError("describe requires a grouping file")
    grouping = load_grouping(config.grouping)
    variables = config.describe_variables or tuple(sorted(panel.variables))
    files: dict[str, str] = {}
    for variable in variables:
        series = aggregate_groups(panel, grouping, variable, stat=config.describe_stat)
        rows = [
            [group, period, _real(value)]
            for (group, period), value in sorted(series.items())
        ]
        files[f"series_{variable}.csv"] = _csv_text(["group", "period", "value"], rows)
    return _write_tree(config.out, files)


def run_pipeline(config: PipelineConfig) -> tuple[list[Path], dict[int, Exception]]:
    """Full run: hellwig + similarity, plus describe when a grouping is set."""
    panel = load_panel(config.panel, config.catalog)
    written = run_hellwig(config, panel=panel)
    more, failures = run_similarity(config, panel=panel)
    written.extend(more)
    if config.grouping is not None:
        written.extend(run_describe(config, panel=panel))
    return written, failures
