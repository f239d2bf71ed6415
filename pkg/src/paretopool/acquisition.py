"""Random-weight Tchebycheff scalarization and Expected Improvement proposals.

Batches are built greedily: each slot draws a fresh weight vector, scalarizes
the normalized posterior, maximizes closed-form EI over the unit box, then
fantasizes the chosen point at its posterior mean so later slots spread out.
Objective values handled here are canonical-minimization (lower is better).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InvalidArgumentError, NumericalFailureError
from .gp import TrainedSurrogate, condition_on, predict_batch

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))

# Local refinement: shrinking-step coordinate descent over the unit box.
_INITIAL_STEP = 0.1
_STEP_HALVINGS = 6


@dataclass(frozen=True)
class AcquisitionConfig:
    """Budget knobs for batch proposal and acquisition optimization."""

    batch_size: int = 5
    num_restarts: int = 10
    raw_samples: int = 400
    mc_samples: int = 32
    rho: float = 0.05

    def __post_init__(self):
        for name in ("batch_size", "num_restarts", "raw_samples", "mc_samples"):
            if int(getattr(self, name)) < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer")
        if not (np.isfinite(self.rho) and self.rho > 0.0):
            raise InvalidArgumentError("rho must be a positive real")


@dataclass(frozen=True)
class ProposedPoint:
    """One batch slot: the raw point plus the scalarization that produced it."""

    point: np.ndarray
    weights: np.ndarray
    acquisition_value: float


def sample_weights(m: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the (m-1)-simplex via normalized exponentials."""
    if m < 1:
        raise InvalidArgumentError("need at least one objective to draw weights")
    draws = rng.standard_exponential(m)
    return draws / draws.sum()


def tchebycheff(objective_values: np.ndarray, weights: np.ndarray, rho: float = 0.05) -> float:
    """Augmented Tchebycheff value max_k(w_k f_k) + rho * sum_k(w_k f_k)."""
    values = np.asarray(objective_values, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if values.shape != w.shape:
        raise InvalidArgumentError(
            f"got {values.shape[0]} objective values but {w.shape[0]} weights"
        )
    weighted = w * values
    return float(weighted.max() + rho * weighted.sum())


def _tchebycheff_rows(values: np.ndarray, weights: np.ndarray, rho: float) -> np.ndarray:
    weighted = values * weights[None, :]
    return weighted.max(axis=1) + rho * weighted.sum(axis=1)


def _ei_values(means: np.ndarray, sds: np.ndarray, best: float) -> np.ndarray:
    """Vectorized closed-form EI for minimization; zero wherever sd is zero."""
    gap = best - means
    out = np.zeros_like(means)
    pos = sds > 0.0
    z = gap[pos] / sds[pos]
    pdf = np.exp(-0.5 * z * z) / _SQRT_2PI
    out[pos] = gap[pos] * ndtr(z) + sds[pos] * pdf
    return np.maximum(out, 0.0)


def expected_improvement(mean: float, sd: float, best: float) -> float:
    """Expected improvement of a Gaussian prediction over the incumbent best.

    `best` is the lowest evaluation obtained so far; sd = 0 returns exactly 0.
    """
    if not np.isfinite(sd) or sd < 0.0:
        raise InvalidArgumentError("standard deviation must be non-negative")
    return float(_ei_values(np.array([mean]), np.array([sd]), best)[0])


def _evaluate_acquisition(acq, points: np.ndarray) -> np.ndarray:
    values = np.asarray(acq(points), dtype=float).ravel()
    if values.shape[0] != points.shape[0]:
        raise InvalidArgumentError(
            "acquisition evaluator must return one value per point"
        )
    nan_rows = np.isnan(values)
    if np.any(nan_rows):
        bad = points[int(np.argmax(nan_rows))]
        raise NumericalFailureError(
            f"acquisition returned NaN at point {bad.tolist()}"
        )
    return values


def optimize_acquisition(
    acq, d: int, config: AcquisitionConfig, rng: np.random.Generator
) -> np.ndarray:
    """Maximize a (vectorized) acquisition over [0,1]^d.

    Raw uniform sampling picks the best num_restarts starts, each refined by
    shrinking-step coordinate descent run in lockstep.  Ties on the final
    value resolve to the start with the lowest raw-sample index.
    """
    if d < 1:
        raise InvalidArgumentError("dimension must be at least 1")
    raw = rng.uniform(0.0, 1.0, size=(config.raw_samples, d))
    raw_values = _evaluate_acquisition(acq, raw)

    n_restarts = max(1, min(config.num_restarts, config.raw_samples))
    order = np.argsort(-raw_values, kind="stable")[:n_restarts]
    points = raw[order].copy()
    values = raw_values[order].copy()

    step = _INITIAL_STEP
    for _ in range(_STEP_HALVINGS + 1):
        improved = True
        while improved:
            improved = False
            for j in range(d):
                for sign in (1.0, -1.0):
                    candidates = points.copy()
                    candidates[:, j] = np.clip(candidates[:, j] + sign * step, 0.0, 1.0)
                    cand_values = _evaluate_acquisition(acq, candidates)
                    better = cand_values > values
                    if np.any(better):
                        points[better] = candidates[better]
                        values[better] = cand_values[better]
                        improved = True
        step *= 0.5

    best_value = values.max()
    tied = np.flatnonzero(values == best_value)
    winner = tied[np.argmin(order[tied])]
    return np.clip(points[winner], 0.0, 1.0)


def _normalize_rows(values: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Affine min-max map per column; constant columns map to all zeros."""
    out = np.zeros_like(values, dtype=float)
    live = span > 0.0
    out[:, live] = (values[:, live] - lo[None, live]) / span[None, live]
    return out


def propose_batch(
    models: list[TrainedSurrogate],
    evaluated_objectives: np.ndarray,
    config: AcquisitionConfig,
    rng: np.random.Generator,
    monte_carlo: bool = False,
) -> list[ProposedPoint]:
    """Propose batch_size raw points in [0,1]^d, one scalarization per slot.

    `evaluated_objectives` holds canonical-minimization values for every
    evaluated point, row-aligned with the models' shared training set.  With
    monte_carlo=True the EI is estimated from mc_samples joint posterior
    samples (common random numbers per slot) instead of the closed form.
    """
    if not models:
        raise InvalidArgumentError("at least one objective model is required")
    objectives = np.asarray(evaluated_objectives, dtype=float)
    if objectives.ndim != 2 or objectives.shape[0] == 0:
        raise InvalidArgumentError("evaluated objective matrix must be non-empty")
    m = len(models)
    if objectives.shape[1] != m:
        raise InvalidArgumentError(
            f"objective matrix has {objectives.shape[1]} columns for {m} models"
        )
    d = models[0].dim
    if any(mod.dim != d for mod in models):
        raise InvalidArgumentError("all objective models must share one dimension")

    work_models = list(models)
    observed = objectives.copy()
    batch: list[ProposedPoint] = []
    for _ in range(config.batch_size):
        lam = sample_weights(m, rng)
        lo = observed.min(axis=0)
        span = observed.max(axis=0) - lo
        incumbent = float(
            _tchebycheff_rows(_normalize_rows(observed, lo, span), lam, config.rho).min()
        )
        noise = rng.standard_normal((config.mc_samples, m)) if monte_carlo else None

        def acq(points: np.ndarray) -> np.ndarray:
            mean_cols, var_cols = zip(*(predict_batch(mod, points) for mod in work_models))
            means = _normalize_rows(np.column_stack(mean_cols), lo, span)
            sds = np.zeros_like(means)
            live = span > 0.0
            sds[:, live] = np.sqrt(np.column_stack(var_cols))[:, live] / span[None, live]
            if noise is not None:
                samples = means[:, None, :] + sds[:, None, :] * noise[None, :, :]
                weighted = samples * lam[None, None, :]
                scal = weighted.max(axis=2) + config.rho * weighted.sum(axis=2)
                return np.maximum(incumbent - scal, 0.0).mean(axis=1)
            weighted = means * lam[None, :]
            scal_mean = weighted.max(axis=1) + config.rho * weighted.sum(axis=1)
            # Delta-method sd: gradient of the scalarization at the mean.
            k_star = weighted.argmax(axis=1)
            grad = np.full_like(means, config.rho) * lam[None, :]
            grad[np.arange(len(points)), k_star] += lam[k_star]
            scal_sd = np.sqrt(np.sum((grad * sds) ** 2, axis=1))
            return _ei_values(scal_mean, scal_sd, incumbent)

        point = optimize_acquisition(acq, d, config, rng)
        value = float(_evaluate_acquisition(acq, point[None, :])[0])
        batch.append(ProposedPoint(point=point, weights=lam, acquisition_value=value))

        fantasy = np.array(
            [predict_batch(mod, point[None, :])[0][0] for mod in work_models]
        )
        work_models = [
            condition_on(mod, point, fantasy[k]) for k, mod in enumerate(work_models)
        ]
        observed = np.vstack([observed, fantasy[None, :]])
    return batch
