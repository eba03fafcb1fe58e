"""Real-time reproduction-number estimation.

A Bayesian update over a discretized R grid: the chance of observing k_t new
cases given R is Poisson with rate ``lambda = k_{t-1} * exp(gamma * (R - 1))``
(gamma = reciprocal of the mean serial interval).  The per-day posterior is
the normalized product of the likelihoods of the most recent ``m`` days under
a uniform base prior, so long-gone growth phases cannot pin the estimate.

Products are accumulated in log space and renormalized via max-subtraction;
windows of small Poisson probabilities underflow in linear space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np
from scipy.special import gammaln

from .data import CountryRecord, smooth_cases
from .errors import EstimatorError, NumericError, ParameterError

K_PREV_FLOOR = 1e-6  # keeps lambda positive on zero-count days


@dataclass(frozen=True)
class RtConfig:
    r_grid_max: float = 12.0
    r_grid_step: float = 0.01
    window_m: int = 7
    gamma: float = 1.0 / 7.0
    smoothing_window: int = 7

    def __post_init__(self):
        if self.r_grid_step <= 0:
            raise ParameterError(f"r_grid_step must be > 0, got {self.r_grid_step}")
        if self.r_grid_max <= self.r_grid_step:
            raise ParameterError("r_grid_max must exceed r_grid_step")
        if self.window_m < 1:
            raise ParameterError(f"window_m must be >= 1, got {self.window_m}")
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")

    def r_grid(self) -> np.ndarray:
        n = round(self.r_grid_max / self.r_grid_step) + 1
        return np.linspace(0.0, self.r_grid_max, n)


@dataclass(frozen=True)
class RtPosterior:
    """Probability vector over the R grid for one day."""

    date: date
    probabilities: np.ndarray

    def __post_init__(self):
        p = self.probabilities
        if np.any(p < 0) or not math.isclose(float(p.sum()), 1.0, abs_tol=1e-9):
            raise NumericError(f"posterior for {self.date} is not a probability vector")


@dataclass(frozen=True)
class RtPoint:
    date: date
    mode: float
    mean: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class RtSeries:
    country: str
    points: tuple[RtPoint, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.points)


def likelihood(k_t: float, k_prev: float, r: float, gamma: float) -> float:
    """Poisson probability of k_t cases at rate ``k_prev * exp(gamma*(r-1))``.

    k_t is a count; smoothed (fractional) counts are accepted through the
    gamma-function form of the factorial.  k_prev is floored at a tiny
    positive value so day-zero outbreaks stay well defined.
    """
    for name, v in (("k_t", k_t), ("k_prev", k_prev), ("r", r), ("gamma", gamma)):
        if not math.isfinite(v):
            raise NumericError(f"non-finite {name}: {v}")
    if k_t < 0 or k_prev < 0:
        raise NumericError(f"negative count: k_t={k_t}, k_prev={k_prev}")
    return float(np.exp(_log_likelihood_grid(k_t, k_prev, np.asarray([r], dtype=float), gamma)[0]))


def _log_likelihood_grid(k_t: float, k_prev: float, r: np.ndarray, gamma: float) -> np.ndarray:
    k_prev = max(float(k_prev), K_PREV_FLOOR)
    log_lam = math.log(k_prev) + gamma * (r - 1.0)
    return k_t * log_lam - np.exp(log_lam) - gammaln(k_t + 1.0)


def posterior_step(prior: RtPosterior, k_t: float, k_prev: float, config: RtConfig) -> RtPosterior:
    """One Bayesian update: prior times today's likelihood, renormalized.

    The evidence term is realized by the normalization.
    """
    grid = config.r_grid()
    if prior.probabilities.shape != grid.shape:
        raise ParameterError(
            f"prior has {prior.probabilities.shape[0]} entries, grid has {grid.shape[0]}"
        )
    lik = np.exp(_log_likelihood_grid(k_t, k_prev, grid, config.gamma))
    unnorm = prior.probabilities * lik
    total = unnorm.sum()
    if total <= 0.0 or not math.isfinite(total):
        raise EstimatorError(
            "posterior underflowed to zero in linear space; use the windowed "
            "log-space estimator for long products"
        )
    return RtPosterior(prior.date, unnorm / total)


def uniform_prior(config: RtConfig, day: date = date(2020, 1, 1)) -> RtPosterior:
    grid = config.r_grid()
    return RtPosterior(day, np.full(grid.shape, 1.0 / grid.shape[0]))


def windowed_posterior(counts, t: int, config: RtConfig) -> RtPosterior:
    """Posterior over R at day index ``t`` from the last ``m`` days of counts.

    Equals the normalized product of per-day likelihoods over days
    ``max(1, t-m+1)..t`` under a uniform base prior; accumulated in log space.
    ``counts`` is the (smoothed) case sequence indexed from day 0.
    """
    counts = np.asarray(counts, dtype=float)
    if t < 1 or t >= len(counts):
        raise ParameterError(f"day index {t} out of range [1, {len(counts) - 1}]")
    grid = config.r_grid()
    w0 = max(1, t - config.window_m + 1)
    log_post = np.zeros_like(grid)
    for d in range(w0, t + 1):
        log_post += _log_likelihood_grid(counts[d], counts[d - 1], grid, config.gamma)
    return RtPosterior(date(2020, 1, 1), _normalize_log(log_post))


def _normalize_log(log_post: np.ndarray) -> np.ndarray:
    m = np.max(log_post)
    if not math.isfinite(m):
        raise EstimatorError("all posterior mass vanished; counts may be degenerate")
    p = np.exp(log_post - m)
    return p / p.sum()


def _summarize(grid: np.ndarray, probs: np.ndarray, day: date, ci_mass: float = 0.9) -> RtPoint:
    mode = float(grid[int(np.argmax(probs))])
    mean = float(np.dot(grid, probs))
    # highest-density interval: take grid points by descending mass until ci_mass
    order = np.argsort(probs)[::-1]
    cum = np.cumsum(probs[order])
    cutoff = int(np.searchsorted(cum, ci_mass)) + 1
    chosen = order[:cutoff]
    return RtPoint(day, mode, mean, float(grid[chosen.min()]), float(grid[chosen.max()]))


def estimate_rt_series(record: CountryRecord, config: RtConfig = RtConfig()) -> RtSeries:
    """Per-day R estimates for one country, from the day after its first case.

    Cases are smoothed before estimation (reporting noise would otherwise whip
    the posterior around); mode, grid-expectation mean and a 90% HDI are
    reported per day.
    """
    if record.first_case_date is None:
        raise EstimatorError(f"{record.country}: no positive case count in record")
    if len(record.cases) < config.smoothing_window:
        raise EstimatorError(
            f"{record.country}: record shorter than the smoothing window"
        )
    smoothed = np.asarray(smooth_cases(record.cases, config.smoothing_window))
    f = record.cases.index_of(record.first_case_date)
    counts = smoothed[f:]
    if int(np.count_nonzero(counts > 0)) < config.window_m + 1:
        raise EstimatorError(
            f"{record.country}: needs at least {config.window_m + 1} days with positive "
            "smoothed counts after the first case"
        )
    grid = config.r_grid()
    # one log-likelihood row per transition day, then direct window sums per day
    t_max = len(counts) - 1
    ll = np.empty((t_max + 1, grid.shape[0]))
    ll[0] = 0.0
    k_prev = np.maximum(counts[:-1], K_PREV_FLOOR)
    log_lam = np.log(k_prev)[:, None] + config.gamma * (grid - 1.0)[None, :]
    ll[1:] = counts[1:, None] * log_lam - np.exp(log_lam) - gammaln(counts[1:] + 1.0)[:, None]
    points = []
    base = record.first_case_date
    for t in range(1, t_max + 1):
        w0 = max(1, t - config.window_m + 1)
        probs = _normalize_log(ll[w0 : t + 1].sum(axis=0))
        points.append(_summarize(grid, probs, base + timedelta(days=t)))
    return RtSeries(record.country, tuple(points))


def biweekly_rt_averages(series: RtSeries, num_periods: int) -> list[float]:
    """Mean posterior-mean R over consecutive 14-day blocks from the series start.

    Blocks with no data carry the previous block's value; the output always
    has ``num_periods`` entries.
    """
    if num_periods <= 0:
        raise ParameterError(f"num_periods must be positive, got {num_periods}")
    if len(series) == 0:
        raise ParameterError(f"empty Rt series for {series.country}")
    start = series.points[0].date
    sums = [0.0] * num_periods
    counts = [0] * num_periods
    for p in series.points:
        block = (p.date - start).days // 14
        if 0 <= block < num_periods:
            sums[block] += p.mean
            counts[block] += 1
    out: list[float] = []
    for i in range(num_periods):
        if counts[i] > 0:
            out.append(sums[i] / counts[i])
        else:
            out.append(out[-1])  # block 0 always has data: series is non-empty
    return out
