"""Single executable driving every pipeline stage.

Exit codes: 0 success, 1 validation error (bad input), 2 runtime error,
64 usage error (unknown flag or subcommand).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import (
    DEFAULT_NUM_PERIODS,
    DEFAULT_RESTARTS,
    build_feature_vectors,
    elbow_select,
    kmeans,
    standardize,
)
from .data import build_records, parse_cases_csv, parse_policy_csv, truncate_record
from .errors import PolicyscopeError, UnknownCountryError, ValidationError
from .pipeline import (
    ModelVariant,
    PipelineConfig,
    TrainedModel,
    build_dataset,
    evaluate,
    rolling_forecast,
    train,
)
from .rt import RtConfig, estimate_rt_series
from .synth import PRESETS
from .whatif import baseline_schedule, run_scenario, scenario_from_dict, scenario_result_to_dict

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_EXIT)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def _rt_config(doc: dict) -> RtConfig:
    return RtConfig(**doc.get("rt", {}))


def _read_records(cases_path: str, policy_path: str | None):
    case_series, warnings = parse_cases_csv(Path(cases_path).read_text())
    if policy_path is None:
        # estimation-only path: a neutral all-zero schedule over each case range
        from .data import PolicySeries

        policy_series = [
            PolicySeries(s.country, s.start_date, tuple([(0, 0, 0, 0, 0)] * len(s)))
            for s in case_series
        ]
    else:
        policy_series = parse_policy_csv(Path(policy_path).read_text())
    return build_records(case_series, policy_series), warnings


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _write_json(doc: dict, out: str | None) -> None:
    _write_output(json.dumps(doc, sort_keys=True, indent=2) + "\n", out)


def cmd_ingest(args) -> int:
    records, warnings = _read_records(args.cases, args.policy)
    doc = {
        "countries": [
            {
                "country": r.country,
                "start": r.start_date.isoformat(),
                "end": r.end_date.isoformat(),
                "days": len(r),
                "first_case_date": r.first_case_date.isoformat() if r.first_case_date else None,
            }
            for r in records.values()
        ],
        "warnings": warnings,
    }
    _write_json(doc, args.out)
    return 0


def rt_series_rows(records, country: str, config: RtConfig) -> list[dict]:
    if country not in records:
        raise UnknownCountryError(f"country {country!r} not present in the data")
    series = estimate_rt_series(records[country], config)
    return [
        {
            "date": p.date.isoformat(),
            "rt_mode": p.mode,
            "rt_mean": p.mean,
            "ci_low": p.ci_low,
            "ci_high": p.ci_high,
        }
        for p in series.points
    ]


def cmd_rt(args) -> int:
    records, _ = _read_records(args.cases, args.policy)
    config = _rt_config(_load_config(args.config))
    rows = rt_series_rows(records, args.country, config)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["country", "date", "rt_mode", "rt_mean", "ci_low", "ci_high"])
    for row in rows:
        writer.writerow(
            [args.country, row["date"], row["rt_mode"], row["rt_mean"], row["ci_low"], row["ci_high"]]
        )
    _write_output(buf.getvalue(), args.out)
    return 0


def cluster_payload(
    records,
    rt_config: RtConfig,
    num_periods: int,
    k_min: int,
    k_max: int,
    seed: int,
    restarts: int = DEFAULT_RESTARTS,
) -> dict:
    rt_by_country = {}
    for country, record in records.items():
        if record.first_case_date is None:
            continue
        try:
            rt_by_country[country] = estimate_rt_series(record, rt_config)
        except PolicyscopeError:
            continue
    vectors = build_feature_vectors(records, rt_by_country, num_periods)
    if len(vectors) < 3:
        raise ValidationError(
            f"clustering needs at least 3 countries with sufficient data, got {len(vectors)}"
        )
    matrix = np.stack([v.combined() for v in vectors])
    standardized, _, _, _ = standardize(matrix)
    countries = [v.country for v in vectors]
    k_max = min(k_max, len(countries))
    curve = elbow_select(standardized, k_min, k_max, seed=seed, restarts=restarts)
    result = kmeans(standardized, curve.chosen_k, seed=seed, restarts=restarts, labels=countries)
    clusters = []
    for idx in range(result.k):
        members = sorted(c for c, a in result.assignments.items() if a == idx)
        clusters.append(
            {"id": idx, "countries": members, "center": [float(x) for x in result.centers[idx]]}
        )
    return {
        "chosen_k": curve.chosen_k,
        "low_confidence": curve.low_confidence,
        "elbow_curve": [[k, inertia] for k, inertia in zip(curve.ks, curve.inertias)],
        "inertia": result.inertia,
        "clusters": clusters,
    }


def cmd_cluster(args) -> int:
    records, _ = _read_records(args.cases, args.policy)
    config = _load_config(args.config)
    clustering_cfg = config.get("clustering", {})
    payload = cluster_payload(
        records,
        _rt_config(config),
        num_periods=args.num_periods or clustering_cfg.get("num_periods", DEFAULT_NUM_PERIODS),
        k_min=args.k_min or clustering_cfg.get("k_min", 1),
        k_max=args.k_max or clustering_cfg.get("k_max", 10),
        seed=args.seed,
        restarts=clustering_cfg.get("restarts", DEFAULT_RESTARTS),
    )
    _write_json(payload, args.out)
    return 0


def train_model(
    records,
    country: str,
    variant: ModelVariant,
    config: PipelineConfig,
    seed: int,
    train_end: date | None = None,
    countries: list[str] | None = None,
) -> TrainedModel:
    if country not in records:
        raise UnknownCountryError(f"country {country!r} not present in the data")
    if countries:
        missing = [c for c in countries if c not in records]
        if missing:
            raise UnknownCountryError(f"countries not in data: {', '.join(missing)}")
        records = {c: records[c] for c in countries}
        if country not in records:
            raise ValidationError(f"--countries must include the target {country!r}")
    if train_end is not None:
        records = {c: truncate_record(r, train_end) for c, r in records.items()}
    dataset = build_dataset(records, config.hyper.window, country)
    trained = train(variant, dataset, config, seed)
    if train_end is not None:
        trained.metadata["train_end"] = train_end.isoformat()
    return trained


def cmd_train(args) -> int:
    records, _ = _read_records(args.cases, args.policy)
    config = PipelineConfig.from_dict(_load_config(args.config))
    variant = ModelVariant(args.variant)
    countries = args.countries.split(",") if args.countries else None
    train_end = date.fromisoformat(args.train_end) if args.train_end else None
    trained = train_model(records, args.country, variant, config, args.seed, train_end, countries)
    trained.save(args.out)
    return 0


def forecast_rows(trained: TrainedModel, records, start: date, horizon: int) -> list[dict]:
    country = trained.target_country
    if country not in records:
        raise UnknownCountryError(f"country {country!r} not present in the data")
    record = records[country]
    schedule = baseline_schedule(record, start, horizon)
    forecast = rolling_forecast(trained, record, start, horizon, schedule)
    return [
        {"date": forecast.date_at(i).isoformat(), "predicted_cases": v}
        for i, v in enumerate(forecast.values)
    ]


def cmd_forecast(args) -> int:
    records, _ = _read_records(args.cases, args.policy)
    trained = TrainedModel.load(args.model)
    rows = forecast_rows(trained, records, date.fromisoformat(args.start), args.horizon)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["date", "predicted_cases"])
    for row in rows:
        writer.writerow([row["date"], row["predicted_cases"]])
    _write_output(buf.getvalue(), args.out)
    return 0


def cmd_evaluate(args) -> int:
    records, _ = _read_records(args.cases, args.policy)
    if args.country not in records:
        raise UnknownCountryError(f"country {args.country!r} not present in the data")
    record = records[args.country]
    reader = csv.DictReader(io.StringIO(Path(args.forecast).read_text()))
    predicted, actual, dates = [], [], []
    for row in reader:
        day = date.fromisoformat(row["date"])
        if not record.start_date <= day <= record.end_date:
            raise ValidationError(f"no recorded cases for forecast date {day}")
        predicted.append(float(row["predicted_cases"]))
        actual.append(float(record.cases.new_cases[record.cases.index_of(day)]))
        dates.append(day)
    if not predicted:
        raise ValidationError("empty forecast file")
    variant = ModelVariant(args.variant) if args.variant else None
    report = evaluate(predicted, actual, variant, dates[0])
    _write_json(
        {
            "variant": report.variant.value if report.variant else None,
            "rmse": report.rmse,
            "mae": report.mae,
            "horizon": {
                "start": report.horizon_start.isoformat(),
                "end": report.horizon_end.isoformat(),
            },
        },
        args.out,
    )
    return 0


def cmd_whatif(args) -> int:
    records, _ = _read_records(args.cases, args.policy)
    trained = TrainedModel.load(args.model)
    scenario = scenario_from_dict(json.loads(Path(args.scenario).read_text()))
    country = trained.target_country
    if country not in records:
        raise UnknownCountryError(f"country {country!r} not present in the data")
    result = run_scenario(trained, records[country], scenario)
    _write_json(scenario_result_to_dict(result), args.out)
    return 0


def cmd_synth(args) -> int:
    generator = PRESETS[args.preset]
    kwargs = {}
    if args.countries is not None:
        kwargs["countries"] = args.countries
    if args.days is not None:
        kwargs["days"] = args.days
    if args.group_size is not None:
        kwargs["group_size"] = args.group_size
    if args.points is not None:
        kwargs["points_per_blob"] = args.points
    output = generator(seed=args.seed, **kwargs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in output.files.items():
        (out_dir / name).write_text(content)
    manifest = dict(output.manifest)
    manifest["created_at"] = datetime.now(timezone.utc).isoformat()
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    if not args.data_dir:
        raise ValidationError("serve needs --data-dir (or POLICYSCOPE_DATA_DIR)")
    host, _, port = args.listen.rpartition(":")
    app = create_app(args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="policyscope", description=__doc__)
    parser.add_argument("--version", action="version", version=f"policyscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate and summarize a cases/policy CSV pair")
    p.add_argument("--cases", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rt", help="per-day reproduction-number estimates for one country")
    p.add_argument("--cases", required=True)
    p.add_argument("--policy")
    p.add_argument("--country", required=True)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rt)

    p = sub.add_parser("cluster", help="cluster countries by lockdown-policy behavior")
    p.add_argument("--cases", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--config")
    p.add_argument("--k-min", type=int, dest="k_min")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--num-periods", type=int, dest="num_periods")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("train", help="train a forecasting model variant")
    p.add_argument("--cases", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--country", required=True)
    p.add_argument(
        "--variant", default="proposed", choices=[v.value for v in ModelVariant]
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--train-end", dest="train_end", help="first held-out date (exclusive)")
    p.add_argument("--countries", help="comma-separated cluster countries to train on")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("forecast", help="recursive multi-day forecast from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="RMSE/MAE of a forecast against recorded cases")
    p.add_argument("--forecast", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--policy")
    p.add_argument("--country", required=True)
    p.add_argument("--variant", choices=[v.value for v in ModelVariant])
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("whatif", help="run a counterfactual policy scenario")
    p.add_argument("--model", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--countries", type=int)
    p.add_argument("--days", type=int)
    p.add_argument("--group-size", type=int, dest="group_size")
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--listen", default=os.environ.get("POLICYSCOPE_LISTEN", "127.0.0.1:8600"))
    p.add_argument("--data-dir", dest="data_dir", default=os.environ.get("POLICYSCOPE_DATA_DIR"))
    p.add_argument("--ui-dir", dest="ui_dir", default=os.environ.get("POLICYSCOPE_UI_DIR"))
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PolicyscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if exc.category == "validation" else 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
