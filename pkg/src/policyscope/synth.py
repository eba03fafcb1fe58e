"""Seeded synthetic fixtures: real-world case/policy data cannot ship with the
repo, so the test suite runs on generators whose ground truth is known exactly.

Case dynamics follow the same observation model the estimator assumes:
expected next-day cases are ``k_t * exp(gamma * (R_eff - 1))`` where the
effective reproduction number responds to how far each indicator is from its
maximum::

    R_eff(t) = R_base + sum_j beta_j * (max_j - level_j(t)) / max_j

Positive ``beta_j`` means lifting sector ``j`` accelerates spread.  Every
preset's coefficients, seeds and schedules land in its manifest so tests can
assert against the generator instead of magic numbers.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .data import INDICATOR_MAXIMA, INDICATORS, DailyCaseSeries, PolicySeries, cases_to_csv, policy_to_csv

DEFAULT_START = date(2020, 2, 15)
# only schools and travel drive the planted dynamics; the rest are noise columns
PLANTED_BETAS = (0.3, 0.0, 0.0, 0.0, 0.35)
PLANTED_GAMMA = 1.0 / 7.0


@dataclass(frozen=True)
class SynthOutput:
    files: dict[str, str]
    manifest: dict


def expected_next_cases(k_t: float, levels: tuple[int, ...], r_base: float,
                        betas: tuple[float, ...] = PLANTED_BETAS,
                        gamma: float = PLANTED_GAMMA) -> float:
    """The generator's one-step conditional expectation."""
    r_eff = r_base + sum(
        b * (mx - lvl) / mx for b, mx, lvl in zip(betas, INDICATOR_MAXIMA, levels)
    )
    return k_t * float(np.exp(gamma * (r_eff - 1.0)))


def _simulate_cases(
    rng: np.random.Generator,
    k0: int,
    r_base: float,
    schedule: list[tuple[int, ...]],
    betas: tuple[float, ...],
    gamma: float,
) -> list[int]:
    out = [k0]
    for t in range(len(schedule) - 1):
        lam = expected_next_cases(max(out[-1], 1), schedule[t], r_base, betas, gamma)
        out.append(int(rng.poisson(lam)))
    return out


def _random_segments(
    rng: np.random.Generator, days: int, max_level: int, min_len: int = 8, max_len: int = 16
) -> list[int]:
    """Piecewise-constant levels with seeded segment lengths."""
    levels: list[int] = []
    while len(levels) < days:
        seg = int(rng.integers(min_len, max_len + 1))
        lvl = int(rng.integers(0, max_level + 1))
        levels.extend([lvl] * seg)
    return levels[:days]


# joint (school, travel) levels for the body of each planted schedule: the
# implied R_eff stays in a band around 1 so counts oscillate but cannot wander
# away, while levels still span most of both scales
BODY_LEVEL_POOL = (
    (1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 2), (2, 3), (2, 4), (3, 1),
)


def planted_policy_effect(
    seed: int, countries: int = 6, days: int = 150, start: date = DEFAULT_START
) -> SynthOutput:
    """Cluster-mate countries whose dynamics respond to school and travel levels.

    Each schedule has a body of mid-level (school, travel) segments, a planted
    fully-open phase from ``pre_flip_day``, and a snap back to both maxima at
    ``flip_day``.  Holding out the final weeks puts the snap inside the
    holdout, which is what separates models that can see the schedule from
    models that cannot.  The other three indicators are full-range noise
    columns with zero coefficients.
    """
    rng = np.random.default_rng(seed)
    case_series = []
    policy_series = []
    manifest_countries = {}
    for c in range(countries):
        name = f"C{c + 1:02d}"
        # R under full lockdown, centered so the body pool's mean R_eff sits
        # just above 1 and series drift mildly upward into the planted flip
        r_base = float(rng.uniform(0.72, 0.77))
        k0 = int(rng.integers(150, 401))
        pre_flip = int(rng.integers(112, 121))
        flip = int(rng.integers(130, 136))
        schedule_cols = [
            _random_segments(rng, days, ind.max_level) for ind in INDICATORS
        ]
        # school/travel body: joint mid-level segments
        t = 0
        while t < days:
            seg = int(rng.integers(8, 14))
            school, travel = BODY_LEVEL_POOL[int(rng.integers(0, len(BODY_LEVEL_POOL)))]
            for u in range(t, min(t + seg, days)):
                schedule_cols[0][u] = school
                schedule_cols[4][u] = travel
            t += seg
        # planted flip on the two causal indicators; direction alternates by
        # country so the case level alone cannot reveal which way the final
        # weeks go -- only the schedule can
        open_levels = (0, 0)
        shut_levels = (INDICATORS[0].max_level, INDICATORS[4].max_level)
        before, after = (open_levels, shut_levels) if c % 2 == 0 else (shut_levels, open_levels)
        for t in range(pre_flip, min(flip, days)):
            schedule_cols[0][t], schedule_cols[4][t] = before
        for t in range(flip, days):
            schedule_cols[0][t], schedule_cols[4][t] = after
        schedule = [tuple(col[t] for col in schedule_cols) for t in range(days)]
        cases = _simulate_cases(rng, k0, r_base, schedule, PLANTED_BETAS, PLANTED_GAMMA)
        case_series.append(DailyCaseSeries(name, start, tuple(cases)))
        policy_series.append(PolicySeries(name, start, tuple(schedule)))
        manifest_countries[name] = {
            "r_base": r_base,
            "k0": k0,
            "pre_flip_day": pre_flip,
            "flip_day": flip,
            "flip_direction": "open-then-shut" if c % 2 == 0 else "shut-then-open",
        }
    manifest = {
        "preset": "planted-policy-effect",
        "seed": seed,
        "days": days,
        "start": start.isoformat(),
        "gamma": PLANTED_GAMMA,
        "betas": {ind.column: b for ind, b in zip(INDICATORS, PLANTED_BETAS)},
        "extinction_floor": 1,
        "countries": manifest_countries,
    }
    return SynthOutput(
        {
            "cases.csv": cases_to_csv(case_series),
            "policy.csv": policy_to_csv(policy_series),
        },
        manifest,
    )


def constant_preset(
    seed: int, countries: int = 2, days: int = 60, value: int = 50, start: date = DEFAULT_START
) -> SynthOutput:
    """Flat case counts and frozen mid-range policy levels."""
    levels = tuple(mx // 2 for mx in INDICATOR_MAXIMA)
    case_series = []
    policy_series = []
    names = [f"K{c + 1:02d}" for c in range(countries)]
    for name in names:
        case_series.append(DailyCaseSeries(name, start, tuple([value] * days)))
        policy_series.append(PolicySeries(name, start, tuple([levels] * days)))
    manifest = {
        "preset": "constant",
        "seed": seed,
        "days": days,
        "value": value,
        "levels": list(levels),
        "start": start.isoformat(),
        "countries": names,
    }
    return SynthOutput(
        {
            "cases.csv": cases_to_csv(case_series),
            "policy.csv": policy_to_csv(policy_series),
        },
        manifest,
    )


BLOB_CENTERS = ((0.0, 0.0), (10.0, 0.0), (0.0, 10.0))


def blob_points(seed: int, points_per_blob: int = 30, spread: float = 1.0) -> np.ndarray:
    """The three-blobs points as an array, for direct clustering calls."""
    rng = np.random.default_rng(seed)
    return np.concatenate(
        [rng.normal(c, spread, size=(points_per_blob, 2)) for c in BLOB_CENTERS]
    )


def three_blobs(seed: int, points_per_blob: int = 30, spread: float = 1.0) -> SynthOutput:
    """Three planted Gaussian blobs, center separation 10x the spread."""
    points = blob_points(seed, points_per_blob, spread)
    rows = ["point_id,blob,x0,x1"]
    for idx, x in enumerate(points):
        b, i = divmod(idx, points_per_blob)
        rows.append(f"P{b}{i:03d},{b},{float(x[0])!r},{float(x[1])!r}")
    manifest = {
        "preset": "three-blobs",
        "seed": seed,
        "points_per_blob": points_per_blob,
        "spread": spread,
        "centers": [list(c) for c in BLOB_CENTERS],
    }
    return SynthOutput({"points.csv": "\n".join(rows) + "\n"}, manifest)


BLOB_COUNTRY_GROUPS = (
    # counts stay in the thousands so R estimates are tight within each group
    {"prefix": "A", "lag": 3, "r": 0.75, "k0": 30000},
    {"prefix": "B", "lag": 25, "r": 1.05, "k0": 3000},
    {"prefix": "C", "lag": 60, "r": 1.30, "k0": 500},
)


def blob_countries(
    seed: int, group_size: int = 30, days: int = 120, start: date = DEFAULT_START
) -> SynthOutput:
    """Countries in three behavioral groups: distinct reaction lags and R levels.

    The derived policy features (lags + biweekly R means) then form three
    planted blobs, so the full clustering pipeline should find K = 3.
    """
    rng = np.random.default_rng(seed)
    case_series = []
    policy_series = []
    groups = {}
    full_levels = (3, 2, 4, 2, 4)
    for g in BLOB_COUNTRY_GROUPS:
        for i in range(group_size):
            name = f"{g['prefix']}{i:02d}"
            r = float(g["r"] + rng.uniform(-0.03, 0.03))
            lam_mult = float(np.exp(PLANTED_GAMMA * (r - 1.0)))
            cases = [int(g["k0"])]
            for _ in range(days - 1):
                cases.append(int(rng.poisson(max(cases[-1], 1) * lam_mult)))
            levels = []
            lags = [int(g["lag"] + rng.integers(-2, 3)) for _ in INDICATORS]
            for t in range(days):
                levels.append(
                    tuple(
                        full if t >= lag else 0
                        for full, lag in zip(full_levels, lags)
                    )
                )
            case_series.append(DailyCaseSeries(name, start, tuple(cases)))
            policy_series.append(PolicySeries(name, start, tuple(levels)))
            groups[name] = {"group": g["prefix"], "r": r, "lags": lags}
    manifest = {
        "preset": "blob-countries",
        "seed": seed,
        "days": days,
        "group_size": group_size,
        "start": start.isoformat(),
        "groups": [dict(g) for g in BLOB_COUNTRY_GROUPS],
        "countries": groups,
    }
    return SynthOutput(
        {
            "cases.csv": cases_to_csv(case_series),
            "policy.csv": policy_to_csv(policy_series),
        },
        manifest,
    )


PRESETS = {
    "planted-policy-effect": planted_policy_effect,
    "constant": constant_preset,
    "three-blobs": three_blobs,
    "blob-countries": blob_countries,
}
