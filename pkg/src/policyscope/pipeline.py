"""Supervised dataset construction, variant training, forecasting, evaluation.

Sliding length-(L+1) windows over every cluster country's record become
training samples: cases min-max normalized per country (different countries
have wildly different scales), policy levels scaled by their per-indicator
maxima, target = the normalized next-day case count.

Three variants: the full two-pathway model on cluster data, the same model
without the policy pathway, and the full model on the target country's data
only.  Multi-day forecasts are recursive: each prediction re-enters the case
window for the following step.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum
from pathlib import Path

import numpy as np

from .data import INDICATOR_MAXIMA, CountryRecord, PolicySeries
from .errors import DatasetError, ForecastError, ShapeError
from .nn import (
    ModelHyperparams,
    TrainingConfig,
    TwoPathwayModel,
    forward_batch,
    init_model,
    model_from_dict,
    model_to_dict,
    train_loop,
)

ARTIFACT_FORMAT = "policyscope-model/1"


class ModelVariant(Enum):
    PROPOSED = "proposed"
    NO_LOCKDOWN_DATA = "no-lockdown"
    SINGLE_COUNTRY_ONLY = "single-country"


@dataclass(frozen=True)
class WindowedSample:
    country: str
    case_window: tuple[float, ...]
    policy_window: tuple[tuple[float, ...], ...]
    target: float
    target_date: date


@dataclass(frozen=True)
class NormalizationParams:
    """Per-country min/max of raw daily cases over the training range."""

    per_country: dict[str, tuple[float, float]]

    def normalize(self, country: str, value: float) -> float:
        lo, hi = self.per_country[country]
        if hi == lo:
            return 0.5
        return (value - lo) / (hi - lo)

    def denormalize(self, country: str, value: float) -> float:
        lo, hi = self.per_country[country]
        if hi == lo:
            return lo
        return lo + value * (hi - lo)


@dataclass(frozen=True)
class SupervisedDataset:
    samples: tuple[WindowedSample, ...]
    normalization: NormalizationParams
    target_country: str
    window: int


@dataclass(frozen=True)
class EvaluationReport:
    variant: ModelVariant | None
    rmse: float
    mae: float
    horizon_start: date | None = None
    horizon_end: date | None = None


@dataclass(frozen=True)
class ForecastSeries:
    country: str
    start: date
    values: tuple[float, ...]

    def date_at(self, index: int) -> date:
        return self.start + timedelta(days=index)


def scale_policy_window(levels: tuple[tuple[int, ...], ...]) -> tuple[tuple[float, ...], ...]:
    return tuple(
        tuple(lvl / mx for lvl, mx in zip(day, INDICATOR_MAXIMA)) for day in levels
    )


def build_dataset(
    records: dict[str, CountryRecord], window: int, target: str
) -> SupervisedDataset:
    """One sample per length-(window+1) sliding position per cluster country.

    Countries shorter than window+1 days, or with no positive case count,
    contribute nothing.  Ordering is country-lexicographic, then date.
    """
    if target not in records:
        raise DatasetError(f"target country {target!r} not among the records")
    samples: list[WindowedSample] = []
    per_country: dict[str, tuple[float, float]] = {}
    for country in sorted(records):
        record = records[country]
        values = record.cases.new_cases
        if len(values) < window + 1:
            continue
        lo, hi = float(min(values)), float(max(values))
        if hi == 0.0:
            continue  # all-zero series carries no signal and breaks normalization
        per_country[country] = (lo, hi)
        norm = [0.5 if hi == lo else (v - lo) / (hi - lo) for v in values]
        scaled_policy = scale_policy_window(record.policy.levels)
        for i in range(len(values) - window):
            samples.append(
                WindowedSample(
                    country=country,
                    case_window=tuple(norm[i : i + window]),
                    policy_window=tuple(scaled_policy[i : i + window]),
                    target=norm[i + window],
                    target_date=record.cases.date_at(i + window),
                )
            )
    if not samples:
        raise DatasetError(f"no country spans at least {window + 1} days with cases")
    if target not in per_country:
        raise DatasetError(f"target country {target!r} contributed no samples")
    return SupervisedDataset(tuple(samples), NormalizationParams(per_country), target, window)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a training run needs beyond the data and the seed."""

    hyper: ModelHyperparams = field(default_factory=ModelHyperparams)
    training: TrainingConfig = field(default_factory=TrainingConfig)

    @staticmethod
    def from_dict(doc: dict) -> "PipelineConfig":
        return PipelineConfig(
            hyper=ModelHyperparams(**doc.get("model", {})),
            training=TrainingConfig(**doc.get("training", {})),
        )


@dataclass(frozen=True)
class TrainedModel:
    """Self-describing artifact: network, variant, normalization, provenance."""

    model: TwoPathwayModel
    variant: ModelVariant
    target_country: str
    cluster_countries: tuple[str, ...]
    normalization: NormalizationParams
    metadata: dict

    @property
    def window(self) -> int:
        return self.model.hyper.window

    def to_dict(self) -> dict:
        doc = model_to_dict(self.model)
        return {
            "format": ARTIFACT_FORMAT,
            "variant": self.variant.value,
            "target_country": self.target_country,
            "cluster_countries": list(self.cluster_countries),
            "normalization": {c: [lo, hi] for c, (lo, hi) in sorted(self.normalization.per_country.items())},
            "policy_maxima": list(INDICATOR_MAXIMA),
            "hyperparams": doc["hyperparams"],
            "parameters": doc["parameters"],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @staticmethod
    def from_dict(doc: dict) -> "TrainedModel":
        if doc.get("format") != ARTIFACT_FORMAT:
            raise DatasetError(f"unsupported model artifact format {doc.get('format')!r}")
        return TrainedModel(
            model=model_from_dict(doc),
            variant=ModelVariant(doc["variant"]),
            target_country=doc["target_country"],
            cluster_countries=tuple(doc["cluster_countries"]),
            normalization=NormalizationParams(
                {c: (lo, hi) for c, (lo, hi) in doc["normalization"].items()}
            ),
            metadata=doc["metadata"],
        )

    @staticmethod
    def load(path: str | Path) -> "TrainedModel":
        return TrainedModel.from_dict(json.loads(Path(path).read_text()))


def _dataset_arrays(
    dataset: SupervisedDataset, include_policy: bool
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
    case_x = np.asarray([s.case_window for s in dataset.samples], dtype=float)[:, :, None]
    policy_x = None
    if include_policy:
        policy_x = np.asarray([s.policy_window for s in dataset.samples], dtype=float)
    targets = np.asarray([s.target for s in dataset.samples], dtype=float)
    return case_x, policy_x, targets


def train(
    variant: ModelVariant,
    dataset: SupervisedDataset,
    config: PipelineConfig,
    seed: int,
) -> TrainedModel:
    """Train one variant; deterministic given the seed."""
    if variant is ModelVariant.SINGLE_COUNTRY_ONLY:
        kept = tuple(s for s in dataset.samples if s.country == dataset.target_country)
        dataset = SupervisedDataset(
            kept, dataset.normalization, dataset.target_country, dataset.window
        )
    if not dataset.samples:
        raise DatasetError("empty dataset")
    include_policy = variant is not ModelVariant.NO_LOCKDOWN_DATA
    hyper = ModelHyperparams(
        window=dataset.window,
        recurrent_hidden=config.hyper.recurrent_hidden,
        pathway_dense=config.hyper.pathway_dense,
        head_hidden=config.hyper.head_hidden,
        include_policy=include_policy,
    )
    model = init_model(hyper, seed)
    case_x, policy_x, targets = _dataset_arrays(dataset, include_policy)
    model, meta = train_loop(model, case_x, policy_x, targets, config.training, seed)
    meta.update({"seed": seed, "variant": variant.value})
    countries = tuple(sorted(dataset.normalization.per_country))
    return TrainedModel(model, variant, dataset.target_country, countries, dataset.normalization, meta)


def predict_next_day(
    trained: TrainedModel, case_window: list[float], policy_window: list[tuple[int, ...]]
) -> float:
    """Next-day cases in raw units for raw-valued input windows, clamped at 0."""
    L = trained.window
    if len(case_window) != L or len(policy_window) != L:
        raise ShapeError(f"windows must have length {L}")
    country = trained.target_country
    norm_cases = np.asarray(
        [trained.normalization.normalize(country, v) for v in case_window], dtype=float
    ).reshape(1, L, 1)
    policy_x = None
    if trained.model.hyper.include_policy:
        policy_x = np.asarray(scale_policy_window(tuple(policy_window)), dtype=float)[None]
    y, _ = forward_batch(trained.model, norm_cases, policy_x)
    raw = trained.normalization.denormalize(country, float(y[0]))
    return max(raw, 0.0)


def rolling_forecast(
    trained: TrainedModel,
    record: CountryRecord,
    start: date,
    horizon: int,
    policy_schedule: PolicySeries,
) -> ForecastSeries:
    """Recursive multi-day forecast from ``start``.

    Case windows use observed values before ``start`` and the model's own
    predictions thereafter; policy windows use the record before ``start``
    and the schedule from ``start`` on.
    """
    L = trained.window
    if horizon < 1:
        raise ForecastError(f"horizon must be >= 1, got {horizon}")
    if record.start_date > start - timedelta(days=L) or record.end_date < start - timedelta(days=1):
        raise ForecastError(
            f"record [{record.start_date}..{record.end_date}] does not cover the "
            f"{L} days before {start}"
        )
    if policy_schedule.start_date > start or policy_schedule.end_date < start + timedelta(
        days=horizon - 1
    ):
        raise ForecastError(
            f"policy schedule [{policy_schedule.start_date}..{policy_schedule.end_date}] does "
            f"not cover [{start}..{start + timedelta(days=horizon - 1)}]"
        )

    def case_at(day: date) -> float:
        if day < start:
            return float(record.cases.new_cases[record.cases.index_of(day)])
        return predictions[(day - start).days]

    def policy_at(day: date) -> tuple[int, ...]:
        if day < start:
            return record.policy.levels[record.policy.index_of(day)]
        return policy_schedule.levels[policy_schedule.index_of(day)]

    predictions: list[float] = []
    for h in range(horizon):
        target_day = start + timedelta(days=h)
        window_days = [target_day - timedelta(days=L - j) for j in range(L)]
        case_window = [case_at(d) for d in window_days]
        policy_window = [policy_at(d) for d in window_days]
        predictions.append(predict_next_day(trained, case_window, policy_window))
    return ForecastSeries(record.country, start, tuple(predictions))


def evaluate(
    predicted,
    actual,
    variant: ModelVariant | None = None,
    start: date | None = None,
) -> EvaluationReport:
    """RMSE and MAE in raw case units."""
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape or predicted.size == 0:
        raise ShapeError(
            f"evaluate needs equal-length series, got {predicted.shape} vs {actual.shape}"
        )
    err = predicted - actual
    rmse = float(math.sqrt(np.mean(err**2)))
    mae = float(np.mean(np.abs(err)))
    end = start + timedelta(days=predicted.size - 1) if start is not None else None
    return EvaluationReport(variant, rmse, mae, start, end)
