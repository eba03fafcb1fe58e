"""HTTP facade over the pipeline.

Thin adapters only: every response body matches the corresponding CLI output
on the same inputs (the serializers are shared).  State lives in an in-memory
registry with write-through persistence of datasets and model artifacts to a
data directory; a restart re-scans the directory.  Training is the one
asynchronous operation: jobs queue FIFO onto a single worker thread and
publish their artifact atomically on completion.
"""
from __future__ import annotations

import hashlib
import json
import queue
import threading
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .cli import cluster_payload, forecast_rows, rt_series_rows, train_model
from .data import CountryRecord, build_records, parse_cases_csv, parse_policy_csv
from .errors import (
    EstimatorError,
    ForecastError,
    PolicyscopeError,
    UnknownCountryError,
    ValidationError,
)
from .pipeline import ModelVariant, PipelineConfig, TrainedModel
from .rt import RtConfig
from .whatif import run_scenario, scenario_from_dict, scenario_result_to_dict


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _not_found(what: str) -> ApiError:
    return ApiError(404, "not_found", what)


@dataclass
class DatasetEntry:
    dataset_id: str
    records: dict[str, CountryRecord]
    warnings: list[str]
    created_at: str

    def summary(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "countries": [
                {
                    "country": r.country,
                    "start": r.start_date.isoformat(),
                    "end": r.end_date.isoformat(),
                    "days": len(r),
                    "first_case_date": r.first_case_date.isoformat()
                    if r.first_case_date
                    else None,
                }
                for r in self.records.values()
            ],
            "warnings": self.warnings,
        }


@dataclass
class ModelEntry:
    model_id: str
    dataset_id: str
    trained: TrainedModel
    created_at: str

    def summary(self) -> dict:
        return {
            "model_id": self.model_id,
            "dataset_id": self.dataset_id,
            "target_country": self.trained.target_country,
            "variant": self.trained.variant.value,
            "cluster_countries": list(self.trained.cluster_countries),
            "created_at": self.created_at,
            "artifact": f"models/{self.model_id}/artifact.json",
            "metadata": self.trained.metadata,
        }


@dataclass
class Job:
    job_id: str
    kind: str
    status: str  # pending | running | done | failed
    detail: str = ""
    model_id: str | None = None

    def summary(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "status": self.status,
            "detail": self.detail,
            "model_id": self.model_id,
        }


@dataclass
class Registry:
    data_dir: Path
    datasets: dict[str, DatasetEntry] = field(default_factory=dict)
    models: dict[str, ModelEntry] = field(default_factory=dict)
    jobs: dict[str, Job] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    job_counter: int = 0

    def scan(self) -> None:
        """Rebuild the in-memory registry from the data directory."""
        for meta_path in sorted(self.data_dir.glob("datasets/*/meta.json")):
            meta = json.loads(meta_path.read_text())
            folder = meta_path.parent
            cases, warnings = parse_cases_csv((folder / "cases.csv").read_text())
            policy = parse_policy_csv((folder / "policy.csv").read_text())
            self.datasets[meta["dataset_id"]] = DatasetEntry(
                meta["dataset_id"], build_records(cases, policy), warnings, meta["created_at"]
            )
        for entry_path in sorted(self.data_dir.glob("models/*/entry.json")):
            meta = json.loads(entry_path.read_text())
            trained = TrainedModel.load(entry_path.parent / "artifact.json")
            self.models[meta["model_id"]] = ModelEntry(
                meta["model_id"], meta["dataset_id"], trained, meta["created_at"]
            )

    def add_dataset(self, cases_text: str, policy_text: str) -> DatasetEntry:
        dataset_id = hashlib.sha256(
            cases_text.encode() + b"\x00" + policy_text.encode()
        ).hexdigest()[:12]
        with self.lock:
            if dataset_id in self.datasets:
                return self.datasets[dataset_id]
        cases, warnings = parse_cases_csv(cases_text)
        policy = parse_policy_csv(policy_text)
        records = build_records(cases, policy)
        if not records:
            raise ValidationError("no country present in both cases and policy files")
        entry = DatasetEntry(
            dataset_id, records, warnings, datetime.now(timezone.utc).isoformat()
        )
        folder = self.data_dir / "datasets" / dataset_id
        folder.mkdir(parents=True, exist_ok=True)
        (folder / "cases.csv").write_text(cases_text)
        (folder / "policy.csv").write_text(policy_text)
        (folder / "meta.json").write_text(
            json.dumps({"dataset_id": dataset_id, "created_at": entry.created_at}) + "\n"
        )
        with self.lock:
            self.datasets[dataset_id] = entry
        return entry

    def publish_model(self, model_id: str, dataset_id: str, trained: TrainedModel) -> ModelEntry:
        folder = self.data_dir / "models" / model_id
        folder.mkdir(parents=True, exist_ok=True)
        entry = ModelEntry(model_id, dataset_id, trained, datetime.now(timezone.utc).isoformat())
        tmp = folder / "artifact.json.tmp"
        tmp.write_text(trained.to_json())
        tmp.rename(folder / "artifact.json")  # atomic publish: readers never see partials
        (folder / "entry.json").write_text(
            json.dumps(
                {
                    "model_id": model_id,
                    "dataset_id": dataset_id,
                    "created_at": entry.created_at,
                },
                sort_keys=True,
            )
            + "\n"
        )
        with self.lock:
            self.models[model_id] = entry
        return entry


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _map_domain_error(exc: PolicyscopeError) -> ApiError:
    if isinstance(exc, UnknownCountryError):
        return ApiError(404, "not_found", str(exc))
    if isinstance(exc, (EstimatorError, ForecastError)):
        return ApiError(422, "insufficient_data", str(exc))
    if exc.category == "validation":
        return ApiError(400, "validation_error", str(exc))
    return ApiError(500, "internal_error", str(exc))


def create_app(data_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    registry = Registry(data_dir)
    registry.scan()

    app = FastAPI(title="policyscope", version=__version__)
    app.state.registry = registry

    job_queue: queue.Queue = queue.Queue()

    def worker() -> None:
        while True:
            item = job_queue.get()
            if item is None:
                return
            job, request = item
            job.status = "running"
            try:
                trained = train_model(
                    registry.datasets[request["dataset_id"]].records,
                    request["country"],
                    ModelVariant(request["variant"]),
                    PipelineConfig.from_dict(request.get("config") or {}),
                    request["seed"],
                    train_end=request.get("train_end"),
                    countries=request.get("countries"),
                )
                entry = registry.publish_model(request["model_id"], request["dataset_id"], trained)
                job.model_id = entry.model_id
                job.status = "done"
                job.detail = "training complete"
            except Exception as exc:  # failed jobs carry the training error message
                job.status = "failed"
                job.detail = str(exc)

    threading.Thread(target=worker, daemon=True).start()

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return _error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(PolicyscopeError)
    async def handle_domain_error(request: Request, exc: PolicyscopeError):
        mapped = _map_domain_error(exc)
        return _error_response(mapped.status, mapped.code, mapped.message)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return _error_response(400, "validation_error", str(exc.errors()))

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/datasets", status_code=201)
    async def upload_dataset(cases: UploadFile, policy: UploadFile):
        cases_text = (await cases.read()).decode("utf-8")
        policy_text = (await policy.read()).decode("utf-8")
        if not cases_text.strip() or not policy_text.strip():
            raise ApiError(400, "validation_error", "empty upload body")
        entry = registry.add_dataset(cases_text, policy_text)
        return entry.summary()

    @app.get("/datasets")
    def list_datasets():
        with registry.lock:
            return [e.summary() for e in registry.datasets.values()]

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        entry = registry.datasets.get(dataset_id)
        if entry is None:
            raise _not_found(f"dataset {dataset_id!r}")
        return entry.summary()

    @app.get("/datasets/{dataset_id}/cases")
    def get_cases(dataset_id: str, country: str):
        entry = registry.datasets.get(dataset_id)
        if entry is None:
            raise _not_found(f"dataset {dataset_id!r}")
        record = entry.records.get(country)
        if record is None:
            raise _not_found(f"country {country!r} in dataset {dataset_id!r}")
        return [
            {"date": record.cases.date_at(i).isoformat(), "new_cases": v}
            for i, v in enumerate(record.cases.new_cases)
        ]

    @app.get("/datasets/{dataset_id}/rt")
    def get_rt(
        dataset_id: str,
        country: str,
        window_m: int = 7,
        gamma: float = 1.0 / 7.0,
        r_grid_max: float = 12.0,
        r_grid_step: float = 0.01,
        smoothing_window: int = 7,
    ):
        entry = registry.datasets.get(dataset_id)
        if entry is None:
            raise _not_found(f"dataset {dataset_id!r}")
        if country not in entry.records:
            raise _not_found(f"country {country!r} in dataset {dataset_id!r}")
        config = RtConfig(
            r_grid_max=r_grid_max,
            r_grid_step=r_grid_step,
            window_m=window_m,
            gamma=gamma,
            smoothing_window=smoothing_window,
        )
        rows = rt_series_rows(entry.records, country, config)
        return [
            {
                "date": r["date"],
                "mode": r["rt_mode"],
                "mean": r["rt_mean"],
                "ci_low": r["ci_low"],
                "ci_high": r["ci_high"],
            }
            for r in rows
        ]

    @app.post("/datasets/{dataset_id}/cluster")
    def cluster_dataset(dataset_id: str, body: dict):
        entry = registry.datasets.get(dataset_id)
        if entry is None:
            raise _not_found(f"dataset {dataset_id!r}")
        eligible = sum(1 for r in entry.records.values() if r.first_case_date is not None)
        if eligible < 3:
            raise ApiError(
                422, "insufficient_data", f"need at least 3 countries with cases, got {eligible}"
            )
        try:
            return cluster_payload(
                entry.records,
                RtConfig(**(body.get("rt") or {})),
                num_periods=body.get("num_periods", 12),
                k_min=body.get("k_min", 1),
                k_max=body.get("k_max", 10),
                seed=body.get("seed", 0),
                restarts=body.get("restarts", 20),
            )
        except ValidationError as exc:
            raise ApiError(422, "insufficient_data", str(exc)) from exc

    @app.post("/models", status_code=202)
    def submit_training(body: dict):
        for key in ("dataset_id", "country"):
            if key not in body:
                raise ApiError(400, "validation_error", f"missing field {key!r}")
        dataset_id = body["dataset_id"]
        entry = registry.datasets.get(dataset_id)
        if entry is None:
            raise _not_found(f"dataset {dataset_id!r}")
        country = body["country"]
        if country not in entry.records:
            raise _not_found(f"country {country!r} in dataset {dataset_id!r}")
        variant = body.get("variant", ModelVariant.PROPOSED.value)
        try:
            ModelVariant(variant)
        except ValueError:
            raise ApiError(400, "validation_error", f"unknown variant {variant!r}") from None
        seed = int(body.get("seed", 0))
        config = body.get("config") or {}
        train_end = None
        if body.get("train_end"):
            train_end = date.fromisoformat(body["train_end"])
        request = {
            "dataset_id": dataset_id,
            "country": country,
            "variant": variant,
            "seed": seed,
            "config": config,
            "train_end": train_end,
            "countries": body.get("countries"),
            "model_id": hashlib.sha256(
                json.dumps(
                    [dataset_id, country, variant, seed, config, body.get("train_end"), body.get("countries")],
                    sort_keys=True,
                ).encode()
            ).hexdigest()[:12],
        }
        with registry.lock:
            registry.job_counter += 1
            job = Job(f"job-{registry.job_counter}", "train", "pending")
            registry.jobs[job.job_id] = job
        job_queue.put((job, request))
        return job.summary()

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = registry.jobs.get(job_id)
        if job is None:
            raise _not_found(f"job {job_id!r}")
        return job.summary()

    @app.get("/models")
    def list_models():
        with registry.lock:
            return [e.summary() for e in registry.models.values()]

    @app.get("/models/{model_id}")
    def get_model(model_id: str):
        entry = registry.models.get(model_id)
        if entry is None:
            raise _not_found(f"model {model_id!r}")
        return entry.summary()

    def _model_and_records(model_id: str) -> tuple[ModelEntry, dict[str, CountryRecord]]:
        entry = registry.models.get(model_id)
        if entry is None:
            raise _not_found(f"model {model_id!r}")
        dataset = registry.datasets.get(entry.dataset_id)
        if dataset is None:
            raise _not_found(f"dataset {entry.dataset_id!r} backing model {model_id!r}")
        return entry, dataset.records

    @app.post("/models/{model_id}/forecast")
    def forecast(model_id: str, body: dict):
        entry, records = _model_and_records(model_id)
        horizon = int(body.get("horizon", 0))
        if horizon < 1 or "start" not in body:
            raise ApiError(400, "validation_error", "body needs start date and horizon >= 1")
        return forecast_rows(entry.trained, records, date.fromisoformat(body["start"]), horizon)

    @app.post("/models/{model_id}/whatif")
    def whatif(model_id: str, body: dict):
        entry, records = _model_and_records(model_id)
        try:
            scenario = scenario_from_dict(body)
        except (KeyError, ValueError) as exc:
            raise ApiError(400, "validation_error", f"bad scenario: {exc}") from exc
        country = entry.trained.target_country
        if country not in records:
            raise _not_found(f"country {country!r} in dataset {entry.dataset_id!r}")
        result = run_scenario(entry.trained, records[country], scenario)
        return scenario_result_to_dict(result)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
