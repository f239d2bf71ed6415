"""Sequential optimization campaigns over a finite candidate catalog.

A campaign alternates propose -> snap -> observe -> refit over a pooled
catalog: surrogates are fit per objective on min-max scaled features,
scalarized expected improvement proposes a batch of continuous points, each
point snaps to its nearest unevaluated catalog row, and metric reports are
appended to a trace after every completed iteration.

Two modes share the loop.  Simulation mode reads objective values straight
from the catalog (it is its own ground truth, so PHV/APHV/GD/IGD are
computable and the threshold stopping rule applies).  Live mode emits
suggestion records and waits for externally measured values; only the
iteration budget can stop it.

All objectives are canonicalized internally: metrics operate on
canonical-maximization values (native * sign), surrogates are trained on
canonical-minimization values (their negation), so direction flags influence
nothing but the sign applied at ingestion.
"""

import hashlib
import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .acquisition import AcquisitionConfig, propose_batch
from .data import TabularDataset
from .errors import (
    CampaignStateError,
    ConfigError,
    DuplicateObservationError,
    ExhaustedCatalogError,
    InsufficientDataError,
    InvalidArgumentError,
    ProtocolError,
)
from .gp import KernelParams, TrainedSurrogate, build_surrogate, fit_surrogate
from .metrics import (
    MAXIMIZE,
    FrontReport,
    _nondominated_mask,
    aphv,
    direction_signs,
    gd,
    hypervolume,
    igd,
    pareto_front,
    phv,
)

SIMULATION = "simulation"
LIVE = "live"

RUNNING = "running"
STOPPED_ITERATIONS = "stopped_iterations"
STOPPED_THRESHOLD = "stopped_threshold"

STATE_VERSION = 1

# Fraction of the per-column observed span subtracted from the worst observed
# values to place the live-mode reference point.
_LIVE_REFERENCE_MARGIN = 0.01


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class CampaignConfig:
    """Loop settings; defaults mirror the reference study configuration."""

    max_iterations: int = 150
    initial_samples: int = 10
    batch_size: int = 5
    hv_threshold: float = 0.97
    aphv_alpha: float = 0.3
    aphv_beta: float = 0.7
    mode: str = SIMULATION
    seed: int = 0
    directions: tuple[str, ...] | None = None
    acquisition: AcquisitionConfig = AcquisitionConfig()
    refit_restarts: int = 2

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be non-negative")
        if self.initial_samples < 1:
            raise ConfigError("initial_samples must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if not 0.0 < self.hv_threshold <= 1.0:
            raise ConfigError("hv_threshold must lie in (0, 1]")
        if not (0.0 <= self.aphv_alpha <= 1.0 and 0.0 <= self.aphv_beta <= 1.0):
            raise ConfigError("aphv weights must lie in [0, 1]")
        if abs(self.aphv_alpha + self.aphv_beta - 1.0) > 1e-9:
            raise ConfigError("aphv_alpha + aphv_beta must equal 1")
        if self.mode not in (SIMULATION, LIVE):
            raise ConfigError(f"mode must be {SIMULATION!r} or {LIVE!r}")
        if self.refit_restarts < 1:
            raise ConfigError("refit_restarts must be positive")
        if self.directions is not None:
            direction_signs(self.directions)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "CampaignConfig":
        payload = dict(payload)
        payload["acquisition"] = AcquisitionConfig(**payload.get("acquisition", {}))
        if payload.get("directions") is not None:
            payload["directions"] = tuple(payload["directions"])
        return cls(**payload)


def effective_iterations(config: CampaignConfig, catalog_rows: int) -> int:
    """Iteration budget after capping by catalog size.

    The nominal budget may exceed what the pool can supply; the cap admits a
    final partial batch so the catalog can be evaluated exhaustively.
    """
    by_catalog = max(0, math.ceil((catalog_rows - config.initial_samples) / config.batch_size))
    return min(config.max_iterations, by_catalog)


@dataclass(frozen=True)
class ScaledFeatures:
    """Min-max scaled feature matrix with the transform needed to invert it."""

    matrix: np.ndarray          # (l, d) in [0, 1]
    lows: np.ndarray            # (d,)
    highs: np.ndarray           # (d,)
    constant_mask: np.ndarray   # (d,) bool; constant columns scale to 0

    def unscale(self, point: np.ndarray) -> np.ndarray:
        return self.lows + np.asarray(point, dtype=float) * (self.highs - self.lows)


def scale_inputs(dataset: TabularDataset) -> ScaledFeatures:
    """Column-wise min-max scaling of the catalog features to [0, 1]."""
    lows = dataset.features.min(axis=0)
    highs = dataset.features.max(axis=0)
    span = highs - lows
    constant = span == 0.0
    safe = np.where(constant, 1.0, span)
    matrix = (dataset.features - lows) / safe
    matrix[:, constant] = 0.0
    return ScaledFeatures(matrix=matrix, lows=lows, highs=highs, constant_mask=constant)


def nondomination_layers(canonical: np.ndarray) -> list[np.ndarray]:
    """Successive non-dominated peels (layer 0 is the front), best to worst."""
    remaining = np.arange(canonical.shape[0])
    layers = []
    while remaining.size:
        mask = _nondominated_mask(canonical[remaining])
        layers.append(remaining[mask])
        remaining = remaining[~mask]
    return layers


def snap_to_catalog(raw_point: np.ndarray, catalog_scaled: np.ndarray, evaluated) -> int:
    """Index of the Euclidean-nearest unevaluated row; ties take the lowest index."""
    raw_point = np.asarray(raw_point, dtype=float).ravel()
    distances = np.linalg.norm(catalog_scaled - raw_point, axis=1)
    excluded = np.fromiter(evaluated, dtype=int) if evaluated else np.empty(0, dtype=int)
    if excluded.size >= catalog_scaled.shape[0]:
        raise ExhaustedCatalogError("every catalog row has been evaluated")
    distances[excluded] = np.inf
    return int(np.argmin(distances))


@dataclass
class SuggestionRecord:
    """One proposed experiment: the raw optimizer point and its snapped row."""

    raw_point: np.ndarray
    snapped_index: int
    weights: np.ndarray
    acquisition_value: float
    created_at: str
    resolved_values: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {
            "raw_point": [float(v) for v in self.raw_point],
            "snapped_index": int(self.snapped_index),
            "weights": [float(v) for v in self.weights],
            "acquisition_value": float(self.acquisition_value),
            "created_at": self.created_at,
            "resolved_values": None
            if self.resolved_values is None
            else [float(v) for v in self.resolved_values],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SuggestionRecord":
        return cls(
            raw_point=np.asarray(payload["raw_point"], dtype=float),
            snapped_index=int(payload["snapped_index"]),
            weights=np.asarray(payload["weights"], dtype=float),
            acquisition_value=float(payload["acquisition_value"]),
            created_at=payload["created_at"],
            resolved_values=None
            if payload["resolved_values"] is None
            else np.asarray(payload["resolved_values"], dtype=float),
        )


@dataclass
class CampaignState:
    """Mutable loop state; one writer at a time (callers serialize mutations)."""

    directions: list[str]
    evaluated_indices: list[int]
    observed_objectives: np.ndarray | None   # (|X|, m), native orientation
    iteration: int
    trace: list[FrontReport]
    pending: list[SuggestionRecord]
    rng: np.random.Generator
    status: str
    reference: np.ndarray | None             # canonical-max orientation
    true_front: np.ndarray | None            # canonical-max; simulation only
    true_hv: float | None
    params: list[KernelParams] | None
    models: list[TrainedSurrogate] | None = field(default=None, repr=False)

    @property
    def signs(self) -> np.ndarray:
        return direction_signs(self.directions)

    def canonical_objectives(self) -> np.ndarray:
        return self.observed_objectives * self.signs


def _catalog_digest(dataset: TabularDataset) -> str:
    hasher = hashlib.sha256()
    hasher.update(",".join(dataset.feature_names).encode())
    hasher.update(",".join(dataset.objective_names).encode())
    hasher.update(",".join(dataset.directions).encode())
    hasher.update(np.ascontiguousarray(dataset.features).tobytes())
    if dataset.objectives is not None:
        hasher.update(np.ascontiguousarray(dataset.objectives).tobytes())
    return hasher.hexdigest()


def _resolve_directions(catalog: TabularDataset, config: CampaignConfig) -> list[str]:
    if config.directions is None:
        return list(catalog.directions)
    if len(config.directions) != len(catalog.objective_names):
        raise ConfigError(
            f"config declares {len(config.directions)} directions for "
            f"{len(catalog.objective_names)} objectives"
        )
    return list(config.directions)


def _fit_models(
    state: CampaignState, catalog_scaled: ScaledFeatures, config: CampaignConfig
) -> None:
    """Fit one surrogate per objective on canonical-minimization targets."""
    inputs = catalog_scaled.matrix[state.evaluated_indices]
    targets = -state.canonical_objectives()
    first_fit = state.params is None
    models, params = [], []
    for j in range(targets.shape[1]):
        if first_fit:
            model = fit_surrogate(inputs, targets[:, j], seed=config.seed)
        else:
            model = fit_surrogate(
                inputs,
                targets[:, j],
                seed=config.seed + state.iteration + 1,
                restarts=config.refit_restarts,
                warm_start=state.params[j],
            )
        models.append(model)
        params.append(model.params)
    state.models = models
    state.params = params


def _rebuild_models(state: CampaignState, catalog_scaled: ScaledFeatures) -> None:
    """Reassemble surrogates from persisted hyperparameters (no fitting)."""
    inputs = catalog_scaled.matrix[state.evaluated_indices]
    targets = -state.canonical_objectives()
    state.models = [
        build_surrogate(inputs, targets[:, j], p) for j, p in enumerate(state.params)
    ]


def _append_report(state: CampaignState, catalog_rows: int, config: CampaignConfig) -> None:
    native = state.observed_objectives
    front_idx = pareto_front(native, state.directions)
    canonical_front = state.canonical_objectives()[front_idx]
    max_dirs = [MAXIMIZE] * native.shape[1]
    utilization = len(state.evaluated_indices) / catalog_rows
    if state.true_front is not None:
        hv = hypervolume(canonical_front, state.reference, max_dirs)
        phv_value = phv(canonical_front, state.true_front, state.reference, max_dirs)
        report = FrontReport(
            front_indices=front_idx,
            hv=hv,
            utilization=utilization,
            phv=phv_value,
            aphv=aphv(phv_value, utilization, config.aphv_alpha, config.aphv_beta),
            gd=gd(canonical_front, state.true_front),
            igd=igd(canonical_front, state.true_front),
        )
    else:
        # Live points may fall below the fixed reference; they carry no
        # volume and the drop warning is expected noise here.
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            hv = hypervolume(canonical_front, state.reference, max_dirs)
        report = FrontReport(front_indices=front_idx, hv=hv, utilization=utilization)
    state.trace.append(report)


def _apply_stopping(state: CampaignState, config: CampaignConfig, budget: int) -> None:
    latest = state.trace[-1]
    if latest.phv is not None and latest.phv > config.hv_threshold:
        state.status = STOPPED_THRESHOLD
    elif state.iteration >= budget:
        state.status = STOPPED_ITERATIONS


def _draw_initial_indices(
    catalog: TabularDataset, config: CampaignConfig, signs: np.ndarray, rng
) -> np.ndarray:
    l = catalog.row_count
    k = config.initial_samples
    if config.mode == LIVE:
        return rng.choice(l, size=k, replace=False)

    canonical = catalog.objectives * signs
    layers = nondomination_layers(canonical)
    if len(layers) < 2:
        raise ConfigError(
            "every catalog row is on the true front; cannot initialize away from it"
        )
    # "Far from the front": sample from the worst half of the peels, never
    # layer 0, widening toward better layers only if the pool is too small.
    start = max(1, len(layers) // 2)
    pool = np.concatenate(layers[start:])
    while pool.size < k and start > 1:
        start -= 1
        pool = np.concatenate(layers[start:])
    if pool.size < k:
        raise ConfigError(
            f"only {pool.size} rows lie off the true front; cannot draw "
            f"{k} initial samples"
        )
    pool.sort()
    for _ in range(10):
        chosen = rng.choice(pool, size=k, replace=False)
        if np.unique(canonical[chosen], axis=0).shape[0] >= 2:
            return chosen
    raise InsufficientDataError(
        "initial samples collapse to one objective vector after 10 draws"
    )


def init_campaign(catalog: TabularDataset, config: CampaignConfig) -> CampaignState:
    """Draw initial samples and, in simulation mode, record trace[0].

    Live mode instead queues the initial indices as pending suggestions; the
    first report appears once all of them are observed.
    """
    directions = _resolve_directions(catalog, config)
    signs = direction_signs(directions)
    l = catalog.row_count
    if config.initial_samples > l:
        raise ConfigError(
            f"initial_samples k={config.initial_samples} exceeds catalog size l={l}"
        )
    if config.mode == SIMULATION and catalog.objectives is None:
        raise ConfigError("simulation mode needs a catalog with objective values")

    rng = np.random.default_rng(config.seed)
    scaled = scale_inputs(catalog)
    chosen = _draw_initial_indices(catalog, config, signs, rng)

    state = CampaignState(
        directions=directions,
        evaluated_indices=[],
        observed_objectives=None,
        iteration=0,
        trace=[],
        pending=[],
        rng=rng,
        status=RUNNING,
        reference=None,
        true_front=None,
        true_hv=None,
        params=None,
    )

    if config.mode == LIVE:
        now = _utcnow()
        m = len(catalog.objective_names)
        state.pending = [
            SuggestionRecord(
                raw_point=scaled.matrix[int(idx)].copy(),
                snapped_index=int(idx),
                weights=np.full(m, 1.0 / m),
                acquisition_value=0.0,
                created_at=now,
            )
            for idx in chosen
        ]
        return state

    canonical = catalog.objectives * signs
    front_rows = canonical[pareto_front(catalog.objectives, directions)]
    reference = canonical.min(axis=0)
    max_dirs = [MAXIMIZE] * canonical.shape[1]
    true_hv = hypervolume(front_rows, reference, max_dirs)
    if true_hv <= 0.0:
        raise ConfigError("catalog objectives are degenerate: true front has zero volume")

    state.evaluated_indices = [int(i) for i in chosen]
    state.observed_objectives = catalog.objectives[chosen].copy()
    state.reference = reference
    state.true_front = front_rows
    state.true_hv = true_hv
    _fit_models(state, scaled, config)
    _append_report(state, l, config)
    _apply_stopping(state, config, effective_iterations(config, l))
    return state


def _finalize_batch(
    state: CampaignState, catalog: TabularDataset, config: CampaignConfig
) -> None:
    """All pending suggestions resolved: refit, advance, report, maybe stop."""
    scaled = scale_inputs(catalog)
    first_report = not state.trace
    if first_report:
        canonical = state.canonical_objectives()
        worst = canonical.min(axis=0)
        span = canonical.max(axis=0) - worst
        margin = np.where(span > 0.0, span, np.maximum(1.0, np.abs(worst)))
        state.reference = worst - _LIVE_REFERENCE_MARGIN * margin
    else:
        state.iteration += 1
    _fit_models(state, scaled, config)
    state.pending = []
    _append_report(state, catalog.row_count, config)
    _apply_stopping(state, config, effective_iterations(config, catalog.row_count))


def submit_observation(
    state: CampaignState,
    catalog: TabularDataset,
    config: CampaignConfig,
    snapped_index: int,
    values,
) -> CampaignState:
    """Record measured objective values for one pending suggestion."""
    if state.status != RUNNING:
        raise CampaignStateError(f"campaign is {state.status}; cannot accept observations")
    record = next((r for r in state.pending if r.snapped_index == snapped_index), None)
    if record is None:
        raise ProtocolError(f"catalog index {snapped_index} is not a pending suggestion")
    if record.resolved_values is not None:
        raise DuplicateObservationError(
            f"catalog index {snapped_index} was already observed this batch"
        )
    values = np.asarray(values, dtype=float).ravel()
    m = len(catalog.objective_names)
    if values.shape[0] != m or not np.all(np.isfinite(values)):
        raise InvalidArgumentError(f"expected {m} finite objective values")

    record.resolved_values = values
    state.evaluated_indices.append(int(snapped_index))
    row = values[None, :]
    state.observed_objectives = (
        row if state.observed_objectives is None
        else np.vstack([state.observed_objectives, row])
    )
    if all(r.resolved_values is not None for r in state.pending):
        _finalize_batch(state, catalog, config)
    return state


def step(
    state: CampaignState, catalog: TabularDataset, config: CampaignConfig
) -> list[SuggestionRecord]:
    """Propose and snap the next batch; simulation mode also observes it.

    Returns the new suggestion records (live mode); simulation mode resolves
    them internally and returns them already observed.
    """
    if state.status != RUNNING:
        raise CampaignStateError(f"campaign is {state.status}; cannot step")
    if state.pending:
        raise CampaignStateError("pending suggestions must be observed before stepping")

    scaled = scale_inputs(catalog)
    l = catalog.row_count
    slots = min(config.batch_size, l - len(state.evaluated_indices))
    if slots < 1:
        raise ExhaustedCatalogError("every catalog row has been evaluated")
    acq_config = (
        config.acquisition
        if slots == config.acquisition.batch_size
        else replace(config.acquisition, batch_size=slots)
    )

    proposals = propose_batch(
        state.models, -state.canonical_objectives(), acq_config, state.rng
    )
    excluded = set(state.evaluated_indices)
    now = _utcnow()
    records = []
    for proposal in proposals:
        idx = snap_to_catalog(proposal.point, scaled.matrix, excluded)
        excluded.add(idx)
        records.append(
            SuggestionRecord(
                raw_point=proposal.point,
                snapped_index=idx,
                weights=proposal.weights,
                acquisition_value=proposal.acquisition_value,
                created_at=now,
            )
        )

    state.pending = records
    if config.mode == SIMULATION:
        for record in records:
            submit_observation(
                state, catalog, config, record.snapped_index,
                catalog.objectives[record.snapped_index],
            )
    return records


def run_simulation(catalog: TabularDataset, config: CampaignConfig) -> CampaignState:
    """Initialize then step until a stopping rule fires; seed-deterministic."""
    if config.mode != SIMULATION:
        raise ConfigError("run_simulation requires simulation mode")
    state = init_campaign(catalog, config)
    while state.status == RUNNING:
        step(state, catalog, config)
    return state


@dataclass
class StabilityResult:
    """Final APHV values across repeated seeded runs plus order statistics."""

    aphv_values: list[float]
    summary: dict[str, float]
    states: list[CampaignState]


def stability_study(
    catalog: TabularDataset, config: CampaignConfig, runs: int
) -> StabilityResult:
    """Independent campaigns at seeds seed, seed+1, ... with box-plot stats."""
    if runs < 1:
        raise InvalidArgumentError("runs must be positive")
    states = [
        run_simulation(catalog, replace(config, seed=config.seed + j)) for j in range(runs)
    ]
    values = [s.trace[-1].aphv for s in states]
    quartiles = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
    summary = {
        "min": float(quartiles[0]),
        "q1": float(quartiles[1]),
        "median": float(quartiles[2]),
        "q3": float(quartiles[3]),
        "max": float(quartiles[4]),
    }
    return StabilityResult(aphv_values=values, summary=summary, states=states)


# --- persistence --------------------------------------------------------------


def state_to_dict(state: CampaignState, config: CampaignConfig, catalog: TabularDataset) -> dict:
    return {
        "version": STATE_VERSION,
        "config": config.as_dict(),
        "catalog_digest": _catalog_digest(catalog),
        "catalog_rows": catalog.row_count,
        "directions": list(state.directions),
        "evaluated_indices": list(state.evaluated_indices),
        "observed_objectives": None
        if state.observed_objectives is None
        else [[float(v) for v in row] for row in state.observed_objectives],
        "iteration": state.iteration,
        "status": state.status,
        "reference": None if state.reference is None else [float(v) for v in state.reference],
        "true_front": None
        if state.true_front is None
        else [[float(v) for v in row] for row in state.true_front],
        "true_hv": state.true_hv,
        "params": None
        if state.params is None
        else [
            [p.lengthscale, p.signal_variance, p.noise_variance] for p in state.params
        ],
        "trace": [report.as_dict() for report in state.trace],
        "pending": [record.as_dict() for record in state.pending],
        "rng_state": state.rng.bit_generator.state,
    }


def state_from_dict(payload: dict, catalog: TabularDataset) -> tuple[CampaignState, CampaignConfig]:
    if payload.get("version") != STATE_VERSION:
        raise CampaignStateError(f"unsupported state version {payload.get('version')!r}")
    if payload["catalog_digest"] != _catalog_digest(catalog):
        raise CampaignStateError(
            "catalog does not match the one this campaign was created with"
        )
    config = CampaignConfig.from_dict(payload["config"])
    rng = np.random.default_rng(0)
    rng.bit_generator.state = payload["rng_state"]
    state = CampaignState(
        directions=list(payload["directions"]),
        evaluated_indices=[int(i) for i in payload["evaluated_indices"]],
        observed_objectives=None
        if payload["observed_objectives"] is None
        else np.asarray(payload["observed_objectives"], dtype=float),
        iteration=int(payload["iteration"]),
        trace=[FrontReport.from_dict(r) for r in payload["trace"]],
        pending=[SuggestionRecord.from_dict(r) for r in payload["pending"]],
        rng=rng,
        status=payload["status"],
        reference=None
        if payload["reference"] is None
        else np.asarray(payload["reference"], dtype=float),
        true_front=None
        if payload["true_front"] is None
        else np.asarray(payload["true_front"], dtype=float),
        true_hv=payload["true_hv"],
        params=None
        if payload["params"] is None
        else [KernelParams(*triple) for triple in payload["params"]],
    )
    if state.params is not None:
        _rebuild_models(state, scale_inputs(catalog))
    return state, config


def save_campaign(
    state: CampaignState, config: CampaignConfig, catalog: TabularDataset, path
) -> None:
    """Atomically persist the campaign as a versioned JSON document."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as handle:
        json.dump(state_to_dict(state, config, catalog), handle, indent=2)
        handle.write("\n")
    os.replace(tmp, path)


def load_campaign(path, catalog: TabularDataset) -> tuple[CampaignState, CampaignConfig]:
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    return state_from_dict(payload, catalog)
