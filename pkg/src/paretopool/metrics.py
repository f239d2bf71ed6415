"""Dominance analysis and front quality indicators.

All metric code canonicalizes to maximization internally: minimized objectives
are negated on entry.  GD and IGD follow the averaged-root form (the 1/|set|
factor sits outside the p-th root, p = 2), which differs from some literature
variants that keep the factor inside.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

MAXIMIZE = "max"
MINIMIZE = "min"


def direction_signs(directions) -> np.ndarray:
    """+1 for maximized objectives, -1 for minimized ones."""
    if len(directions) < 1:
        raise InvalidArgumentError("need at least one objective direction")
    signs = np.empty(len(directions))
    for i, d in enumerate(directions):
        if d == MAXIMIZE:
            signs[i] = 1.0
        elif d == MINIMIZE:
            signs[i] = -1.0
        else:
            raise InvalidArgumentError(f"unknown direction {d!r}, use 'max' or 'min'")
    return signs


def _as_objective_matrix(points, directions=None, allow_empty=False) -> np.ndarray:
    try:
        arr = np.asarray(points, dtype=float)
    except ValueError as exc:
        raise InvalidArgumentError(f"objective vectors must be rectangular: {exc}") from exc
    if arr.size == 0:
        if allow_empty:
            m = len(directions) if directions is not None else 0
            return arr.reshape(0, m)
        raise InvalidArgumentError("objective set must be non-empty")
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise InvalidArgumentError("objective vectors must form a rectangular matrix")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("objective values must be finite")
    if directions is not None and arr.shape[1] != len(directions):
        raise InvalidArgumentError(
            f"vectors have {arr.shape[1]} objectives but {len(directions)} directions given"
        )
    return arr


def _nondominated_mask(canonical: np.ndarray) -> np.ndarray:
    """Boolean mask of non-dominated rows, canonical-maximization input."""
    n = canonical.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        ge = np.all(canonical >= canonical[i], axis=1)
        gt = np.any(canonical > canonical[i], axis=1)
        if np.any(ge & gt):
            keep[i] = False
    return keep


def pareto_front(points, directions) -> np.ndarray:
    """Indices of the non-dominated rows; duplicates of front rows all kept."""
    signs = direction_signs(directions)
    values = _as_objective_matrix(points, directions)
    return np.flatnonzero(_nondominated_mask(values * signs))


def _canonical_front_for_volume(
    points, reference, directions
) -> tuple[np.ndarray, np.ndarray]:
    """Canonicalize, drop points below the reference (with a warning), dedupe."""
    signs = direction_signs(directions)
    ref = np.asarray(reference, dtype=float).ravel() * signs
    if ref.shape[0] != len(directions):
        raise InvalidArgumentError("reference point length must match directions")
    values = _as_objective_matrix(points, directions, allow_empty=True) * signs
    if values.shape[0]:
        ok = np.all(values >= ref[None, :], axis=1)
        if not np.all(ok):
            warnings.warn(
                f"{int((~ok).sum())} front point(s) do not dominate the reference "
                "and contribute zero hypervolume",
                RuntimeWarning,
                stacklevel=3,
            )
            values = values[ok]
    if values.shape[0]:
        values = np.unique(values, axis=0)
        values = values[_nondominated_mask(values)]
    return values, ref


def hypervolume(front, reference, directions) -> float:
    """Exact 2-D hypervolume by an x-sorted rectangle sweep.

    Only the bi-objective exact path exists; use hypervolume_monte_carlo for
    three or more objectives.
    """
    m = len(directions)
    if m == 1:
        raise InvalidArgumentError(
            "hypervolume is undefined for one objective; compare best values instead"
        )
    if m > 2:
        raise InvalidArgumentError(
            "exact hypervolume only supports two objectives; "
            "use hypervolume_monte_carlo for more"
        )
    values, ref = _canonical_front_for_volume(front, reference, directions)
    if values.shape[0] == 0:
        return 0.0
    order = np.argsort(-values[:, 0], kind="stable")
    values = values[order]
    total = 0.0
    prev_y = ref[1]
    for x, y in values:
        total += (x - ref[0]) * (y - prev_y)
        prev_y = y
    return float(total)


def hypervolume_monte_carlo(
    front,
    reference,
    directions,
    samples: int = 1_000_000,
    rng: np.random.Generator | None = None,
) -> float:
    """Monte-Carlo hypervolume estimate for any objective count >= 2."""
    if len(directions) < 2:
        raise InvalidArgumentError("hypervolume needs at least two objectives")
    if samples < 1:
        raise InvalidArgumentError("sample count must be positive")
    values, ref = _canonical_front_for_volume(front, reference, directions)
    if values.shape[0] == 0:
        return 0.0
    upper = values.max(axis=0)
    box = upper - ref
    volume = float(np.prod(box))
    if volume == 0.0:
        return 0.0
    if rng is None:
        rng = np.random.default_rng(0)
    draws = ref[None, :] + rng.uniform(size=(samples, len(ref))) * box[None, :]
    covered = np.zeros(samples, dtype=bool)
    for row in values:
        covered |= np.all(draws <= row[None, :], axis=1)
    return volume * float(covered.mean())


def phv(result_front, true_front, reference, directions) -> float:
    """Proportion of the true front's hypervolume enclosed by the result."""
    true_hv = hypervolume(true_front, reference, directions)
    if true_hv <= 0.0:
        raise InvalidArgumentError(
            "true front hypervolume is zero; the reference point is degenerate"
        )
    return hypervolume(result_front, reference, directions) / true_hv


def aphv(phv_value: float, utilization: float, alpha: float, beta: float) -> float:
    """Utilization-adjusted front quality alpha*(1 - K) + beta*PHV."""
    if not (0.0 <= phv_value <= 1.0):
        raise InvalidArgumentError("phv must lie in [0, 1]")
    if not (0.0 <= utilization <= 1.0):
        raise InvalidArgumentError("utilization must lie in [0, 1]")
    if alpha < 0.0 or beta < 0.0:
        raise InvalidArgumentError("alpha and beta must be non-negative")
    if abs(alpha + beta - 1.0) > 1e-9:
        raise InvalidArgumentError("alpha + beta must equal 1")
    return alpha * (1.0 - utilization) + beta * phv_value


def _min_distances(from_set: np.ndarray, to_set: np.ndarray) -> np.ndarray:
    diff = from_set[:, None, :] - to_set[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2)).min(axis=1)


def gd(result_set, reference_set) -> float:
    """Averaged-root distance from each result point to its nearest reference."""
    a = _as_objective_matrix(result_set)
    z = _as_objective_matrix(reference_set)
    if a.shape[1] != z.shape[1]:
        raise InvalidArgumentError("both sets must share the objective count")
    dists = _min_distances(a, z)
    return float(np.sqrt(np.sum(dists**2)) / a.shape[0])


def igd(result_set, reference_set) -> float:
    """gd with the roles swapped: reference points measured against results."""
    a = _as_objective_matrix(result_set)
    z = _as_objective_matrix(reference_set)
    if a.shape[1] != z.shape[1]:
        raise InvalidArgumentError("both sets must share the objective count")
    dists = _min_distances(z, a)
    return float(np.sqrt(np.sum(dists**2)) / z.shape[0])


@dataclass
class FrontReport:
    """Quality snapshot of the evaluated set after one campaign iteration.

    front_indices index into the evaluated set (not the catalog); phv, aphv,
    gd and igd are absent in live mode, where no ground-truth front exists.
    """

    front_indices: list[int]
    hv: float
    utilization: float
    phv: float | None = None
    aphv: float | None = None
    gd: float | None = None
    igd: float | None = None

    def as_dict(self) -> dict:
        return {
            "front_indices": [int(i) for i in self.front_indices],
            "hv": self.hv,
            "utilization": self.utilization,
            "phv": self.phv,
            "aphv": self.aphv,
            "gd": self.gd,
            "igd": self.igd,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FrontReport":
        return cls(
            front_indices=[int(i) for i in payload["front_indices"]],
            hv=float(payload["hv"]),
            utilization=float(payload["utilization"]),
            phv=None if payload.get("phv") is None else float(payload["phv"]),
            aphv=None if payload.get("aphv") is None else float(payload["aphv"]),
            gd=None if payload.get("gd") is None else float(payload["gd"]),
            igd=None if payload.get("igd") is None else float(payload["igd"]),
        )
