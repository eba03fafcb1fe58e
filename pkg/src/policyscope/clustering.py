"""Group countries by lockdown behavior: reaction lags + biweekly R averages.

Feature vector per country: days from first case to the first nonzero level
of each of the five indicators (cap: record length when never imposed),
concatenated with a fixed number of biweekly R means.  Columns are z-scored
so day-scale lags cannot drown the R values.  K-Means is Lloyd's algorithm
with seeded random-point initialization, best of several restarts; K is
picked where the inertia curve bends (max distance to the endpoint chord).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import INDICATORS, CountryRecord
from .errors import ParameterError, UnknownCountryError
from .rt import RtSeries, biweekly_rt_averages

KMEANS_MAX_ITER = 300
DEFAULT_RESTARTS = 20
DEFAULT_NUM_PERIODS = 12
LOW_CONFIDENCE_FRACTION = 0.05


@dataclass(frozen=True)
class PolicyFeatureVector:
    country: str
    reaction_lags: tuple[float, ...]
    rt_biweekly: tuple[float, ...]

    def combined(self) -> np.ndarray:
        return np.asarray(self.reaction_lags + self.rt_biweekly, dtype=float)


@dataclass(frozen=True)
class KMeansResult:
    k: int
    centers: np.ndarray
    assignments: dict[str, int]
    inertia: float


@dataclass(frozen=True)
class ElbowCurve:
    ks: tuple[int, ...]
    inertias: tuple[float, ...]
    chosen_k: int
    low_confidence: bool = field(default=False)


def extract_reaction_lags(record: CountryRecord) -> list[float]:
    """Days from the first reported case to each indicator's first nonzero level.

    Negative lags mean the restriction preceded the first case; indicators
    never imposed get the record length in days.
    """
    if record.first_case_date is None:
        raise ParameterError(f"{record.country}: no first case date, cannot extract lags")
    first_idx = record.cases.index_of(record.first_case_date)
    lags: list[float] = []
    for j in range(len(INDICATORS)):
        lag = float(len(record))
        for i, levels in enumerate(record.policy.levels):
            if levels[j] > 0:
                lag = float(i - first_idx)
                break
        lags.append(lag)
    return lags


def build_feature_vectors(
    records: dict[str, CountryRecord],
    rt_by_country: dict[str, RtSeries],
    num_periods: int = DEFAULT_NUM_PERIODS,
) -> list[PolicyFeatureVector]:
    """Assemble one feature vector per country present in both inputs."""
    vectors = []
    for country in sorted(records):
        if country not in rt_by_country:
            continue
        record = records[country]
        if record.first_case_date is None:
            continue
        lags = extract_reaction_lags(record)
        biweekly = biweekly_rt_averages(rt_by_country[country], num_periods)
        vectors.append(PolicyFeatureVector(country, tuple(lags), tuple(biweekly)))
    return vectors


def standardize(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int]]:
    """Z-score each column (population stddev).

    Returns (standardized matrix, means, stddevs, zero-variance column indices);
    zero-variance columns map to all zeros.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise ParameterError("standardize needs an n x d matrix with n >= 2")
    means = matrix.mean(axis=0)
    stds = matrix.std(axis=0)
    flagged = [int(j) for j in np.nonzero(stds == 0.0)[0]]
    safe = np.where(stds == 0.0, 1.0, stds)
    out = (matrix - means) / safe
    out[:, stds == 0.0] = 0.0
    return out, means, stds, flagged


def _assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)  # argmin takes the lowest index on ties


def _inertia(points: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> float:
    return float(((points - centers[labels]) ** 2).sum())


def lloyd(
    points: np.ndarray, k: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """One Lloyd run from a random-point initialization.

    Returns (centers, labels, inertia, per-iteration inertia history); the
    history is non-increasing.
    """
    n = points.shape[0]
    centers = points[rng.choice(n, size=k, replace=False)].copy()
    labels = _assign(points, centers)
    history = [_inertia(points, centers, labels)]
    for _ in range(KMEANS_MAX_ITER):
        for c in range(k):
            members = points[labels == c]
            if len(members) == 0:
                # reseed an emptied cluster with the point farthest from its own center
                dists = ((points - centers[labels]) ** 2).sum(axis=1)
                centers[c] = points[int(np.argmax(dists))]
            else:
                centers[c] = members.mean(axis=0)
        new_labels = _assign(points, centers)
        history.append(_inertia(points, centers, new_labels))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return centers, labels, history[-1], history


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
    labels: list[str] | None = None,
) -> KMeansResult:
    """Best-of-restarts Lloyd's K-Means, deterministic given the seed.

    ``labels`` names the rows (defaults to stringified indices); ties between
    restarts break toward the lower restart index.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    if labels is None:
        labels = [str(i) for i in range(n)]
    if len(labels) != n:
        raise ParameterError(f"{len(labels)} labels for {n} points")
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best: tuple[np.ndarray, np.ndarray, float] | None = None
    for s in streams:
        centers, assign, inertia, _ = lloyd(points, k, np.random.default_rng(s))
        if best is None or inertia < best[2]:
            best = (centers, assign, inertia)
    centers, assign, inertia = best
    return KMeansResult(k, centers, {labels[i]: int(assign[i]) for i in range(n)}, inertia)


def elbow_select(
    points: np.ndarray,
    k_min: int,
    k_max: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> ElbowCurve:
    """Inertia per K plus the K at the curve's elbow.

    The elbow is the interior K whose point on the normalized curve is
    farthest (perpendicular distance) from the chord joining the endpoints;
    flagged low-confidence when the curve is nearly straight.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if k_min < 1 or k_max > n or k_min >= k_max:
        raise ParameterError(f"need 1 <= k_min < k_max <= {n}, got [{k_min}, {k_max}]")
    ks = list(range(k_min, k_max + 1))
    if len(ks) < 3:
        raise ParameterError("elbow selection needs at least 3 candidate Ks")
    inertias = [kmeans(points, k, seed=seed, restarts=restarts).inertia for k in ks]
    xs = np.linspace(0.0, 1.0, len(ks))
    span = max(inertias) - min(inertias)
    ys = (np.asarray(inertias) - min(inertias)) / (span if span > 0 else 1.0)
    # perpendicular distance from each interior point to the endpoint chord
    p0 = np.array([xs[0], ys[0]])
    p1 = np.array([xs[-1], ys[-1]])
    chord = p1 - p0
    norm = np.hypot(*chord)
    dists = np.abs(chord[0] * (p0[1] - ys) - chord[1] * (p0[0] - xs)) / norm
    interior = dists[1:-1]
    chosen = ks[1 + int(np.argmax(interior))]
    return ElbowCurve(tuple(ks), tuple(inertias), chosen, bool(interior.max() < LOW_CONFIDENCE_FRACTION))


def cluster_of(result: KMeansResult, country: str) -> set[str]:
    """Every country sharing the query country's cluster, itself included."""
    if country not in result.assignments:
        raise UnknownCountryError(f"country {country!r} not present in clustering")
    target = result.assignments[country]
    return {c for c, idx in result.assignments.items() if idx == target}
