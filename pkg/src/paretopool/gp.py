"""Exact Gaussian-process regression with an isotropic squared-exponential kernel.

One independent surrogate is trained per objective.  Targets are standardized
to zero mean and unit variance internally; predictions are reported in the
original target units.  All linear algebra goes through a jittered Cholesky
factorization of the noisy Gram matrix.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.optimize import minimize

from .errors import InvalidArgumentError, NumericalFailureError

# Hyperparameter search boxes (log-uniform starts, L-BFGS-B bounds).
LENGTHSCALE_BOUNDS = (1e-3, 10.0)
SIGNAL_VARIANCE_BOUNDS = (1e-3, 10.0)
NOISE_VARIANCE_BOUNDS = (1e-8, 1.0)
FIT_RESTARTS = 8

BASE_JITTER = 1e-8
MAX_JITTER = 1e-4

_LOG2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class KernelParams:
    """Isotropic squared-exponential kernel hyperparameters plus noise."""

    lengthscale: float
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        vals = (self.lengthscale, self.signal_variance, self.noise_variance)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidArgumentError("kernel parameters must be finite")
        if self.lengthscale <= 0.0:
            raise InvalidArgumentError("lengthscale must be positive")
        if self.signal_variance <= 0.0:
            raise InvalidArgumentError("signal variance must be positive")
        if self.noise_variance < 0.0:
            raise InvalidArgumentError("noise variance must be non-negative")


@dataclass(frozen=True)
class Prediction:
    """Posterior mean and variance at a single point, in raw target units."""

    mean: float
    variance: float


@dataclass
class TrainedSurrogate:
    """Fitted GP: training data, hyperparameters and cached factorization."""

    inputs: np.ndarray          # (t, d), inside the unit box
    targets: np.ndarray         # (t,), raw units
    params: KernelParams
    target_mean: float
    target_scale: float
    jitter: float
    chol_lower: np.ndarray      # lower Cholesky factor of K + (noise + jitter) I
    alpha: np.ndarray           # solve of the factorization against standardized targets

    @property
    def num_points(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]


def kernel_eval(x: np.ndarray, x2: np.ndarray, params: KernelParams) -> float:
    """Kernel value signal_variance * exp(-||x - x2||^2 / (2 lengthscale^2))."""
    a = np.asarray(x, dtype=float).ravel()
    b = np.asarray(x2, dtype=float).ravel()
    if a.shape != b.shape:
        raise InvalidArgumentError(
            f"kernel inputs must share a dimension, got {a.shape[0]} and {b.shape[0]}"
        )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidArgumentError("kernel inputs must be finite")
    sq = float(np.sum((a - b) ** 2))
    return float(params.signal_variance * np.exp(-sq / (2.0 * params.lengthscale**2)))


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped to be non-negative."""
    aa = np.sum(a * a, axis=1)[:, None]
    bb = np.sum(b * b, axis=1)[None, :]
    sq = aa + bb - 2.0 * (a @ b.T)
    return np.maximum(sq, 0.0)


def kernel_matrix(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    """Cross-kernel matrix between two point sets (rows are points)."""
    sq = _sq_dists(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return params.signal_variance * np.exp(-sq / (2.0 * params.lengthscale**2))


def _factorize(gram: np.ndarray, noise_variance: float) -> tuple[np.ndarray, float]:
    """Cholesky of gram + (noise + jitter) I with escalating jitter.

    Starts at BASE_JITTER and doubles on failure; gives up past MAX_JITTER.
    """
    t = gram.shape[0]
    jitter = BASE_JITTER
    while jitter <= MAX_JITTER:
        try:
            lower, _ = cho_factor(
                gram + (noise_variance + jitter) * np.eye(t), lower=True
            )
            return lower, jitter
        except np.linalg.LinAlgError:
            jitter *= 2.0
    raise NumericalFailureError(
        f"Gram matrix not positive definite even with jitter {MAX_JITTER:g}"
    )


def _validate_training_data(inputs: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float).ravel()
    if inputs.ndim != 2:
        raise InvalidArgumentError("training inputs must be a 2-d array (points x dims)")
    if inputs.shape[0] == 0:
        raise InvalidArgumentError("at least one training point is required")
    if targets.shape[0] != inputs.shape[0]:
        raise InvalidArgumentError(
            f"got {inputs.shape[0]} inputs but {targets.shape[0]} targets"
        )
    if not np.all(np.isfinite(inputs)):
        raise InvalidArgumentError("training inputs must be finite")
    if not np.all(np.isfinite(targets)):
        raise InvalidArgumentError("training targets must be finite")
    # Inputs live in the unit box; allow a hair of float slack from scaling.
    if np.any(inputs < -1e-9) or np.any(inputs > 1.0 + 1e-9):
        raise InvalidArgumentError("training inputs must lie inside the unit box")
    return inputs, targets


def _standardize(targets: np.ndarray) -> tuple[np.ndarray, float, float]:
    mean = float(np.mean(targets))
    scale = float(np.std(targets))
    if scale < 1e-12:
        scale = 1.0
    return (targets - mean) / scale, mean, scale


def _nlml_and_grad(log_params: np.ndarray, sqd: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Negative log marginal likelihood and its gradient in log-parameter space."""
    t = y.shape[0]
    ell, sv, nv = np.exp(log_params)
    gram = sv * np.exp(-sqd / (2.0 * ell * ell))
    try:
        lower, _ = cho_factor(gram + (nv + BASE_JITTER) * np.eye(t), lower=True)
    except np.linalg.LinAlgError:
        # Back the line search off from numerically hopeless regions.
        return 1e25, np.zeros(3)
    alpha = cho_solve((lower, True), y)
    lml = (
        -0.5 * float(y @ alpha)
        - float(np.sum(np.log(np.diag(lower))))
        - 0.5 * t * _LOG2PI
    )
    gram_inv = cho_solve((lower, True), np.eye(t))
    outer = np.outer(alpha, alpha) - gram_inv
    d_ell = gram * (sqd / (ell * ell))
    grad = 0.5 * np.array(
        [
            float(np.sum(outer * d_ell)),
            float(np.sum(outer * gram)),
            nv * float(np.trace(outer)),
        ]
    )
    return -lml, -grad


def fit_surrogate(
    inputs: np.ndarray,
    targets: np.ndarray,
    seed: int = 0,
    restarts: int = FIT_RESTARTS,
    warm_start: KernelParams | None = None,
) -> TrainedSurrogate:
    """Fit hyperparameters by maximizing the log marginal likelihood.

    Multi-start bounded search: `restarts` log-uniform starts inside the
    hyperparameter boxes, each refined with L-BFGS-B on the analytic gradient.
    When warm_start is given it replaces the first start, which lets refits
    on a growing dataset reuse the incumbent hyperparameters cheaply.
    Deterministic for identical inputs, seed, and warm start.
    """
    if restarts < 1:
        raise InvalidArgumentError("at least one optimizer start is required")
    inputs, targets = _validate_training_data(inputs, targets)
    y, mean, scale = _standardize(targets)
    sqd = _sq_dists(inputs, inputs)

    log_bounds = np.log(
        np.array([LENGTHSCALE_BOUNDS, SIGNAL_VARIANCE_BOUNDS, NOISE_VARIANCE_BOUNDS])
    )
    rng = np.random.default_rng(seed)
    starts = rng.uniform(log_bounds[:, 0], log_bounds[:, 1], size=(restarts, 3))
    if warm_start is not None:
        warm = np.log(
            [warm_start.lengthscale, warm_start.signal_variance, warm_start.noise_variance]
        )
        starts[0] = np.clip(warm, log_bounds[:, 0], log_bounds[:, 1])

    best_val = np.inf
    best_log = starts[0]
    for start in starts:
        result = minimize(
            _nlml_and_grad,
            start,
            args=(sqd, y),
            method="L-BFGS-B",
            jac=True,
            bounds=log_bounds,
            options={"maxiter": 100},
        )
        if result.fun < best_val:
            best_val = result.fun
            best_log = result.x

    ell, sv, nv = np.exp(best_log)
    params = KernelParams(float(ell), float(sv), float(nv))
    gram = sv * np.exp(-sqd / (2.0 * ell * ell))
    lower, jitter = _factorize(gram, params.noise_variance)
    alpha = cho_solve((lower, True), y)
    return TrainedSurrogate(
        inputs=inputs,
        targets=targets,
        params=params,
        target_mean=mean,
        target_scale=scale,
        jitter=jitter,
        chol_lower=lower,
        alpha=alpha,
    )


def build_surrogate(
    inputs: np.ndarray,
    targets: np.ndarray,
    params: KernelParams,
    target_mean: float | None = None,
    target_scale: float | None = None,
) -> TrainedSurrogate:
    """Assemble a surrogate at fixed hyperparameters (no fitting).

    When the standardization constants are omitted they are recomputed from
    the targets; passing them keeps an existing transform, which conditioning
    on fantasy observations relies on.
    """
    inputs, targets = _validate_training_data(inputs, targets)
    if target_mean is None or target_scale is None:
        y, target_mean, target_scale = _standardize(targets)
    else:
        y = (targets - target_mean) / target_scale
    gram = kernel_matrix(inputs, inputs, params)
    lower, jitter = _factorize(gram, params.noise_variance)
    alpha = cho_solve((lower, True), y)
    return TrainedSurrogate(
        inputs=inputs,
        targets=targets,
        params=params,
        target_mean=float(target_mean),
        target_scale=float(target_scale),
        jitter=jitter,
        chol_lower=lower,
        alpha=alpha,
    )


def condition_on(model: TrainedSurrogate, x: np.ndarray, value: float) -> TrainedSurrogate:
    """Return a surrogate additionally conditioned on (x, value).

    Hyperparameters and the standardization transform are reused unchanged;
    only the factorization is rebuilt.  Used for within-batch fantasies.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.dim:
        raise InvalidArgumentError(
            f"point has dimension {x.shape[0]}, model expects {model.dim}"
        )
    inputs = np.vstack([model.inputs, x[None, :]])
    targets = np.append(model.targets, float(value))
    return build_surrogate(
        inputs, targets, model.params, model.target_mean, model.target_scale
    )


def _cross_kernel(model: TrainedSurrogate, points: np.ndarray) -> np.ndarray:
    return kernel_matrix(model.inputs, points, model.params)


def predict(model: TrainedSurrogate, x: np.ndarray) -> Prediction:
    """Posterior mean and variance at one point, in raw target units."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.dim:
        raise InvalidArgumentError(
            f"point has dimension {x.shape[0]}, model expects {model.dim}"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("prediction point must be finite")
    means, variances = predict_batch(model, x[None, :])
    return Prediction(float(means[0]), float(variances[0]))


def predict_batch(model: TrainedSurrogate, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized posterior means and variances at many points (raw units)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != model.dim:
        raise InvalidArgumentError(
            f"points must be (n, {model.dim}), got {points.shape}"
        )
    k_star = _cross_kernel(model, points)                     # (t, n)
    mean_std = k_star.T @ model.alpha
    v = solve_triangular(model.chol_lower, k_star, lower=True)
    var_std = model.params.signal_variance - np.sum(v * v, axis=0)
    var_std = np.maximum(var_std, 0.0)
    means = mean_std * model.target_scale + model.target_mean
    variances = var_std * model.target_scale**2
    return means, variances


def log_marginal_likelihood(model: TrainedSurrogate) -> float:
    """Log marginal likelihood of the standardized targets under the model."""
    y = (model.targets - model.target_mean) / model.target_scale
    t = y.shape[0]
    return (
        -0.5 * float(y @ model.alpha)
        - float(np.sum(np.log(np.diag(model.chol_lower))))
        - 0.5 * t * _LOG2PI
    )
