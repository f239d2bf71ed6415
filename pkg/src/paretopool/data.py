"""Catalog ingestion, filter feature selection, and synthetic catalog generation.

Catalogs are CSV files with a header row plus a JSON schema sidecar declaring
which columns are features, which are objectives, and each objective's
direction.  Row order is preserved end to end; snapping tie-breaks depend on it.
"""

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    EmptySelectionError,
    InsufficientDataError,
    InvalidArgumentError,
    ParseError,
    SchemaError,
)
from .metrics import direction_signs

DEFAULT_ROWS = 402

# Ductility code -> multiplicative objective level.  The top code is reserved
# for front rows; the remaining levels are capped (see _coverage_cap) so that
# every scaled curve point stays strictly inside the region dominated by the
# realized front grid, making front membership exact at any catalog size.
_BASE_LEVELS = np.array([0.10, 0.32, 0.52, 0.70])
_TOP_LEVEL = 1.0


@dataclass(frozen=True)
class CatalogSchema:
    """Column roles and objective directions for a catalog file."""

    feature_names: tuple[str, ...]
    objective_names: tuple[str, ...]
    directions: tuple[str, ...]

    def __post_init__(self):
        if not self.feature_names:
            raise SchemaError("schema must declare at least one feature column")
        if not self.objective_names:
            raise SchemaError("schema must declare at least one objective column")
        if len(self.directions) != len(self.objective_names):
            raise SchemaError("one direction is required per objective")
        direction_signs(self.directions)
        names = list(self.feature_names) + list(self.objective_names)
        if len(set(names)) != len(names):
            raise SchemaError("column names must be unique across features and objectives")

    def as_dict(self) -> dict:
        return {
            "features": list(self.feature_names),
            "objectives": list(self.objective_names),
            "directions": list(self.directions),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CatalogSchema":
        try:
            return cls(
                feature_names=tuple(payload["features"]),
                objective_names=tuple(payload["objectives"]),
                directions=tuple(payload["directions"]),
            )
        except KeyError as exc:
            raise SchemaError(f"schema is missing the {exc.args[0]!r} block") from exc


def load_schema(path) -> CatalogSchema:
    with open(path, encoding="utf-8") as handle:
        return CatalogSchema.from_dict(json.load(handle))


def save_schema(schema: CatalogSchema, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(schema.as_dict(), handle, indent=2)
        handle.write("\n")


@dataclass
class TabularDataset:
    """In-memory catalog: named feature/objective columns plus directions."""

    feature_names: list[str]
    features: np.ndarray                # (l, d)
    objective_names: list[str]
    objectives: np.ndarray | None       # (l, m); None while values are unmeasured
    directions: list[str]

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise InvalidArgumentError("a catalog needs at least one row")
        if self.features.shape[1] != len(self.feature_names):
            raise InvalidArgumentError("feature matrix width must match feature names")
        if not np.all(np.isfinite(self.features)):
            raise InvalidArgumentError("feature columns must not contain NaN or inf")
        if self.objectives is not None:
            if self.objectives.shape != (self.features.shape[0], len(self.objective_names)):
                raise InvalidArgumentError("objective matrix shape must match names and rows")
            if not np.all(np.isfinite(self.objectives)):
                raise InvalidArgumentError("objective columns must not contain NaN or inf")
        if len(self.directions) != len(self.objective_names):
            raise InvalidArgumentError("one direction is required per objective")
        direction_signs(self.directions)
        names = self.feature_names + self.objective_names
        if len(set(names)) != len(names):
            raise InvalidArgumentError("column names must be unique")

    @property
    def row_count(self) -> int:
        return self.features.shape[0]

    @property
    def schema(self) -> CatalogSchema:
        return CatalogSchema(
            tuple(self.feature_names), tuple(self.objective_names), tuple(self.directions)
        )


@dataclass(frozen=True)
class FeatureSetSpec:
    """A named group of selected feature columns."""

    name: str
    selected_features: tuple[str, ...]
    provenance: str = "manual"

    def __post_init__(self):
        if not self.selected_features:
            raise InvalidArgumentError("a feature set must name at least one feature")
        if self.provenance not in ("importance-threshold", "manual"):
            raise InvalidArgumentError("provenance must be importance-threshold or manual")


def load_catalog(path, schema: CatalogSchema) -> TabularDataset:
    """Parse a CSV catalog file under the given schema."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as handle:
        return _parse_catalog(csv.reader(handle), schema, str(path))


def parse_catalog_text(text: str, schema: CatalogSchema, source: str = "<inline>") -> TabularDataset:
    """Parse CSV content held in memory (e.g. an upload) under the schema."""
    return _parse_catalog(csv.reader(io.StringIO(text, newline="")), schema, source)


def _parse_catalog(reader, schema: CatalogSchema, source: str) -> TabularDataset:
    """Shared CSV parser.

    Objective columns must be present in the header; if every objective cell
    is empty the dataset is treated as unmeasured (live mode).
    """
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{source} is empty") from None
    rows = list(reader)
    if not rows:
        raise ParseError(f"{source} has a header but no data rows")

    positions = {name: i for i, name in enumerate(header)}
    for name in (*schema.feature_names, *schema.objective_names):
        if name not in positions:
            raise SchemaError(f"catalog {source} is missing declared column {name!r}")

    def parse_cell(raw: str, row_number: int, column: str) -> float:
        try:
            return float(raw)
        except ValueError:
            raise ParseError(
                f"non-numeric value {raw!r}", row=row_number, column=column
            ) from None

    features = np.empty((len(rows), len(schema.feature_names)))
    for i, row in enumerate(rows):
        for j, name in enumerate(schema.feature_names):
            # Row numbers are 1-based file lines; the header is line 1.
            features[i, j] = parse_cell(row[positions[name]], i + 2, name)

    objective_cells = [
        [row[positions[name]].strip() for name in schema.objective_names] for row in rows
    ]
    flat = [cell for row in objective_cells for cell in row]
    if all(cell == "" for cell in flat):
        objectives = None
    else:
        objectives = np.empty((len(rows), len(schema.objective_names)))
        for i, row in enumerate(objective_cells):
            for j, name in enumerate(schema.objective_names):
                if row[j] == "":
                    raise ParseError("missing objective value", row=i + 2, column=name)
                objectives[i, j] = parse_cell(row[j], i + 2, name)

    return TabularDataset(
        feature_names=list(schema.feature_names),
        features=features,
        objective_names=list(schema.objective_names),
        objectives=objectives,
        directions=list(schema.directions),
    )


def save_catalog(dataset: TabularDataset, path) -> None:
    """Write the dataset as CSV; floats use repr so reload is bit-exact."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(dataset.feature_names + dataset.objective_names)
        for i in range(dataset.row_count):
            row = [repr(float(v)) for v in dataset.features[i]]
            if dataset.objectives is None:
                row += ["" for _ in dataset.objective_names]
            else:
                row += [repr(float(v)) for v in dataset.objectives[i]]
            writer.writerow(row)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    sx = x.std()
    sy = y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0
    cov = float(np.mean((x - x.mean()) * (y - y.mean())))
    return cov / (sx * sy)


def feature_importance(dataset: TabularDataset, objective_name: str) -> dict[str, float]:
    """Absolute Pearson correlation of each feature with one objective."""
    if dataset.objectives is None:
        raise InvalidArgumentError("objective values are unmeasured; importance undefined")
    if objective_name not in dataset.objective_names:
        raise InvalidArgumentError(f"unknown objective {objective_name!r}")
    if dataset.row_count < 3:
        raise InsufficientDataError(
            "at least 3 rows are required to estimate correlations"
        )
    target = dataset.objectives[:, dataset.objective_names.index(objective_name)]
    return {
        name: abs(_pearson(dataset.features[:, j], target))
        for j, name in enumerate(dataset.feature_names)
    }


def select_feature_set(scores, threshold: float, name: str | None = None) -> FeatureSetSpec:
    """Features whose max score across objectives reaches the threshold.

    `scores` is either one {feature: score} mapping or a per-objective
    {objective: {feature: score}} mapping; aggregation across objectives is max.
    """
    if not (0.0 < threshold < 1.0):
        raise InvalidArgumentError("threshold must lie strictly between 0 and 1")
    if not scores:
        raise InvalidArgumentError("no scores given")
    per_objective = scores
    if not isinstance(next(iter(scores.values())), dict):
        per_objective = {"objective": scores}
    best: dict[str, float] = {}
    for table in per_objective.values():
        for feat, score in table.items():
            best[feat] = max(best.get(feat, -np.inf), float(score))
    selected = tuple(sorted(feat for feat, score in best.items() if score >= threshold))
    if not selected:
        raise EmptySelectionError(
            f"no feature reaches importance {threshold}; lower the threshold"
        )
    return FeatureSetSpec(
        name=name or f"importance-{threshold:g}",
        selected_features=selected,
        provenance="importance-threshold",
    )


def restrict_features(dataset: TabularDataset, feature_set: FeatureSetSpec) -> TabularDataset:
    """Dataset with only the selected feature columns (objectives unchanged)."""
    missing = [f for f in feature_set.selected_features if f not in dataset.feature_names]
    if missing:
        raise InvalidArgumentError(f"features not in the dataset: {missing}")
    cols = [dataset.feature_names.index(f) for f in feature_set.selected_features]
    return TabularDataset(
        feature_names=[dataset.feature_names[c] for c in cols],
        features=dataset.features[:, cols].copy(),
        objective_names=list(dataset.objective_names),
        objectives=None if dataset.objectives is None else dataset.objectives.copy(),
        directions=list(dataset.directions),
    )


# --- synthetic catalogs ------------------------------------------------------


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic bi-objective catalog generators.

    generator picks the front geometry ('convex' bulges toward the ideal
    point, 'concave' sags away from it); distractor_correlation tunes how
    strongly the 'm' distractor column tracks the latent curve position.
    """

    generator: str = "convex"
    front_rows: int = 12
    distractor_correlation: float = 0.0

    def __post_init__(self):
        if self.generator not in ("convex", "concave"):
            raise ConfigError(f"unknown generator {self.generator!r}")
        if self.front_rows < 2:
            raise ConfigError("at least two front rows are required")
        if not -1.0 <= self.distractor_correlation <= 1.0:
            raise ConfigError("distractor correlation must lie in [-1, 1]")


def _curve(generator: str, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Strictly monotone trade-off curve through (1,0) and (0,1), maximize both."""
    if generator == "convex":
        return np.sin(0.5 * np.pi * u), np.cos(0.5 * np.pi * u)
    return u**2, (1.0 - u) ** 2


def _coverage_cap(generator: str, grid_u: np.ndarray) -> float:
    """Largest s for which s * curve(u) is grid-dominated for every u in [0,1].

    A grid point g dominates s*curve(u) iff s <= min_j c_j(g)/c_j(u); the cap
    is the minimum over u of the best grid point, evaluated on a dense sample.
    """
    us = np.linspace(0.0, 1.0, 2048)
    g1, g2 = _curve(generator, grid_u)
    c1, c2 = _curve(generator, us)
    # Grid coordinates are strictly positive, so a zero curve coordinate
    # divides to +inf, correctly marking that constraint vacuous.
    with np.errstate(divide="ignore"):
        r1 = g1[None, :] / c1[:, None]
        r2 = g2[None, :] / c2[:, None]
    cover = np.minimum(r1, r2).max(axis=1)
    return float(min(cover.min(), 1.0))


def _generate(spec: SynthSpec, rows: int, seed: int) -> tuple[TabularDataset, np.ndarray]:
    if rows < 10:
        raise InvalidArgumentError("synthetic catalogs need at least 10 rows")
    rng = np.random.default_rng(seed)
    n_front = max(2, min(spec.front_rows, rows // 5))

    u = np.empty(rows)
    codes = np.empty(rows)
    front_idx = rng.choice(rows, size=n_front, replace=False)
    front_idx.sort()
    is_front = np.zeros(rows, dtype=bool)
    is_front[front_idx] = True
    grid = np.linspace(0.02, 0.98, n_front) + rng.uniform(-0.004, 0.004, n_front)
    u[front_idx] = grid
    u[~is_front] = rng.uniform(0.0, 1.0, rows - n_front)
    codes[front_idx] = len(_BASE_LEVELS)
    codes[~is_front] = rng.integers(0, len(_BASE_LEVELS), rows - n_front)

    cap = 0.95 * _coverage_cap(spec.generator, grid)
    level_table = (
        _BASE_LEVELS if cap >= _BASE_LEVELS[-1] else _BASE_LEVELS * (cap / _BASE_LEVELS[-1])
    )
    levels = np.append(level_table, _TOP_LEVEL)[codes.astype(int)]

    c1, c2 = _curve(spec.generator, u)
    bulk = 20.0 + 180.0 * levels * c1
    shear = 10.0 + 140.0 * levels * c2

    level_norm = levels / _TOP_LEVEL
    rho = spec.distractor_correlation
    u_std = (u - u.mean()) / max(u.std(), 1e-12)
    columns = {
        "Ductility": codes,
        "I_dist": u,
        "APF": 0.55 + 0.2 * u + 0.05 * rng.standard_normal(rows),
        "Col_A": np.round(5 * (0.6 * level_norm + 0.4 * rng.uniform(0, 1, rows))),
        "Type": rng.integers(0, 4, rows).astype(float),
        "m": rho * u_std + np.sqrt(1.0 - rho * rho) * rng.standard_normal(rows),
        "e_a": rng.standard_normal(rows),
        "Z": rng.integers(4, 31, rows).astype(float),
        "rad": 1.2 - 0.3 * level_norm + 0.1 * rng.standard_normal(rows),
        "vol": 40.0 + 15.0 * rng.standard_normal(rows),
    }
    dataset = TabularDataset(
        feature_names=list(columns),
        features=np.column_stack(list(columns.values())),
        objective_names=["bulk_modulus", "shear_modulus"],
        objectives=np.column_stack([bulk, shear]),
        directions=["max", "max"],
    )
    return dataset, front_idx


def synth_catalog(spec: SynthSpec | str = "convex", rows: int = DEFAULT_ROWS, seed: int = 0) -> TabularDataset:
    """Deterministic synthetic catalog from a named generator family."""
    if isinstance(spec, str):
        spec = SynthSpec(generator=spec)
    dataset, _ = _generate(spec, rows, seed)
    return dataset


def synth_front_indices(spec: SynthSpec | str = "convex", rows: int = DEFAULT_ROWS, seed: int = 0) -> np.ndarray:
    """Analytic true-front row indices of the identically-parameterized catalog."""
    if isinstance(spec, str):
        spec = SynthSpec(generator=spec)
    _, front_idx = _generate(spec, rows, seed)
    return front_idx


# --- bundled reference catalog ----------------------------------------------

_BUNDLE_SEED = 2024


def bundled_dataset_dir() -> Path:
    return Path(str(resources.files("paretopool").joinpath("datasets")))


def load_bundled_catalog(full_features: bool = False) -> TabularDataset:
    """The packaged 402-row synthetic catalog.

    The default schema exposes the informative (Ductility, I_dist) pair the
    campaigns run on; full_features=True loads every generated column for the
    feature-importance workflow.
    """
    base = bundled_dataset_dir()
    name = "synthetic_402_full.schema.json" if full_features else "synthetic_402.schema.json"
    return load_catalog(base / "synthetic_402.csv", load_schema(base / name))
