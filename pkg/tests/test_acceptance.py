"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines as they complete.  The quantitative checks run against seeded synthetic
generators whose ground truth is recorded in their manifests.
"""
import itertools
import sys
import time
from contextlib import contextmanager
from datetime import timedelta

import numpy as np
import pytest
from scipy import stats as sps

from policyscope.clustering import elbow_select, kmeans, lloyd
from policyscope.data import build_records, parse_cases_csv, parse_policy_csv, truncate_record
from policyscope.nn import (
    ModelHyperparams,
    TrainingConfig,
    forward_batch,
    init_model,
    loss_and_gradients,
    mse_loss,
    train_loop,
)
from policyscope.pipeline import (
    ModelVariant,
    PipelineConfig,
    build_dataset,
    evaluate,
    rolling_forecast,
    train,
)
from policyscope.rt import RtConfig, estimate_rt_series, windowed_posterior
from policyscope.synth import blob_points, planted_policy_effect
from policyscope.whatif import Scenario, baseline_schedule, run_scenario, standard_scenarios

GAMMA = 1.0 / 7.0
PLANTED_SEEDS = (1, 2, 3, 4, 5)
HOLDOUT_DAYS = 20
TARGET = "C01"

ACCEPT_CONFIG = PipelineConfig(
    hyper=ModelHyperparams(window=14, recurrent_hidden=32, pathway_dense=16, head_hidden=16),
    training=TrainingConfig(epochs=120),
)


@contextmanager
def criterion(name: str, budget_seconds: float | None = None):
    start = time.time()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL ({time.time() - start:.1f}s)", file=sys.stderr)
        raise
    elapsed = time.time() - start
    print(f"[ACCEPTANCE] {name}: PASS ({elapsed:.1f}s)", file=sys.stderr)
    if budget_seconds is not None:
        assert elapsed < budget_seconds, f"{name} exceeded {budget_seconds}s budget: {elapsed:.1f}s"


def flat_record(counts, country="SY"):
    from datetime import date

    from policyscope.data import DailyCaseSeries, PolicySeries, align

    n = len(counts)
    start = date(2020, 2, 15)
    return align(
        DailyCaseSeries(country, start, tuple(int(v) for v in counts)),
        PolicySeries(country, start, tuple([(0, 0, 0, 0, 0)] * n)),
    )


def test_rt_oracle_equivalence():
    """windowed_posterior equals the brute-force normalized likelihood product."""
    with criterion("rt-oracle-equivalence", budget_seconds=10.0):
        config = RtConfig(r_grid_max=8.0, r_grid_step=0.02)
        grid = config.r_grid()
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(100):
            length = int(rng.integers(10, 35))
            counts = rng.integers(3, 250, size=length)
            t = int(rng.integers(1, length))
            post = windowed_posterior(counts, t, config).probabilities
            # brute-force product of scipy's independently-computed pmfs;
            # factors are combined as log values in extended precision because
            # adversarial windows span a wider dynamic range than float64
            # (a raw linear product hits subnormals and loses ~8 digits)
            log_prod = np.zeros(grid.shape, dtype=np.longdouble)
            for d in range(max(1, t - config.window_m + 1), t + 1):
                lam = max(counts[d - 1], 1e-6) * np.exp(config.gamma * (grid - 1.0))
                log_prod += sps.poisson.logpmf(counts[d], lam).astype(np.longdouble)
            prod = np.exp(log_prod - log_prod.max())
            oracle = (prod / prod.sum()).astype(float)
            worst = max(worst, float(np.max(np.abs(post - oracle))))
        assert worst <= 1e-12, f"max abs deviation {worst}"


def test_rt_recovery():
    """Piecewise-constant R in {0.7, 1.0, 1.5} recovered within 0.15 per segment."""
    with criterion("rt-recovery", budget_seconds=30.0):
        rng = np.random.default_rng(1)
        segments = [(0.7, 60), (1.0, 60), (1.5, 60)]
        counts = [20000]
        for r, days in segments:
            n_new = days - 1 if len(counts) == 1 else days
            for _ in range(n_new):
                lam = max(counts[-1], 1) * np.exp(GAMMA * (r - 1))
                counts.append(int(rng.poisson(lam)))
        record = flat_record(counts)
        series = estimate_rt_series(record, RtConfig())
        modes = {p.date: p.mode for p in series.points}
        start = record.first_case_date
        for si, (r, days) in enumerate(segments):
            lo = sum(d for _, d in segments[:si])
            vals = [
                modes[start + timedelta(days=t)]
                for t in range(max(lo, 1), lo + days)
                if start + timedelta(days=t) in modes
            ]
            deviation = abs(float(np.mean(vals)) - r)
            assert deviation <= 0.15, f"segment R={r}: mean mode off by {deviation:.3f}"


def exhaustive_optimum(points: np.ndarray, k: int) -> float:
    n = points.shape[0]
    best = np.inf
    for labels in itertools.product(range(k), repeat=n):
        inertia = 0.0
        for c in range(k):
            members = points[[i for i in range(n) if labels[i] == c]]
            if len(members):
                inertia += float(((members - members.mean(axis=0)) ** 2).sum())
        best = min(best, inertia)
    return best


def test_kmeans_optimality():
    """Best-of-20 restarts hits the exhaustive optimum on small instances;
    Lloyd's inertia never increases."""
    with criterion("kmeans-small-instance-optimality"):
        rng = np.random.default_rng(99)
        checked = 0
        for trial in range(12):
            n = int(rng.integers(3, 11))
            d = int(rng.integers(1, 3))
            k = int(rng.integers(1, min(3, n) + 1))
            points = rng.normal(size=(n, d)) * float(rng.uniform(0.5, 3.0))
            result = kmeans(points, k, seed=trial, restarts=20)
            optimum = exhaustive_optimum(points, k)
            assert result.inertia == pytest.approx(optimum, abs=1e-9), (
                f"n={n} d={d} k={k}: {result.inertia} vs optimum {optimum}"
            )
            for restart in range(20):
                _, _, _, history = lloyd(points, k, np.random.default_rng((trial, restart)))
                assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))
            checked += 1
        assert checked == 12


def test_elbow_detection():
    """chosen_k = 3 on the three-blobs preset for 10/10 seeds."""
    with criterion("elbow-detection", budget_seconds=10.0):
        for seed in range(10):
            points = blob_points(seed=seed, points_per_blob=30, spread=1.0)
            curve = elbow_select(points, 1, 8, seed=seed)
            assert curve.chosen_k == 3, f"seed {seed}: chose {curve.chosen_k}"


def test_gradient_check():
    """Every parameter of the full two-pathway model matches finite differences."""
    with criterion("gradient-check", budget_seconds=60.0):
        hyper = ModelHyperparams(window=4, recurrent_hidden=3, pathway_dense=2, head_hidden=2)
        model = init_model(hyper, seed=42)
        rng = np.random.default_rng(0)
        case_x = rng.normal(size=(3, 4, 1))
        policy_x = rng.uniform(size=(3, 4, 5))
        targets = rng.normal(size=3)
        _, grads = loss_and_gradients(model, case_x, policy_x, targets)
        eps = 1e-5
        worst = 0.0
        for name, arr in model.named_parameters():
            g = grads[name]
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + eps
                hi, _ = forward_batch(model, case_x, policy_x)
                arr[idx] = orig - eps
                lo, _ = forward_batch(model, case_x, policy_x)
                arr[idx] = orig
                fd = (mse_loss(hi, targets) - mse_loss(lo, targets)) / (2 * eps)
                rel = abs(fd - g[idx]) / max(abs(fd), abs(g[idx]), 1e-6)
                worst = max(worst, rel)
        assert worst <= 1e-4, f"worst relative gradient error {worst}"


def test_overfit_one_batch():
    """500 Adam steps on 32 synthetic samples cut MSE by at least 90%."""
    with criterion("overfit-one-batch", budget_seconds=120.0):
        rng = np.random.default_rng(0)
        case_x = rng.uniform(size=(32, 14, 1))
        policy_x = rng.uniform(size=(32, 14, 5))
        targets = rng.uniform(size=32)
        model = init_model(ModelHyperparams(), seed=7)
        pred0, _ = forward_batch(model, case_x, policy_x)
        initial = mse_loss(pred0, targets)
        config = TrainingConfig(epochs=500, batch_size=32, val_fraction=0.0)
        trained, _ = train_loop(model, case_x, policy_x, targets, config, seed=7)
        preds, _ = forward_batch(trained, case_x, policy_x)
        final = mse_loss(preds, targets)
        assert final <= 0.1 * initial, f"MSE only went {initial:.4f} -> {final:.4f}"


@pytest.fixture(scope="module")
def planted_experiments():
    """Train the variants on the planted preset for each seed.

    Holdout RMSE is averaged over every cluster country as the forecast
    target (the pooled network is target-agnostic; the single-country
    ablation retrains per target).  Scenario deltas are averaged over the
    countries whose final weeks actually have restrictions to lift.
    """
    from dataclasses import replace

    from policyscope.pipeline import SupervisedDataset

    experiments = {}
    t0 = time.time()
    for seed in PLANTED_SEEDS:
        out = planted_policy_effect(seed=seed)
        cases, _ = parse_cases_csv(out.files["cases.csv"])
        policy = parse_policy_csv(out.files["policy.csv"])
        records = build_records(cases, policy)
        countries = sorted(records)
        start = records[countries[0]].start_date + timedelta(days=150 - HOLDOUT_DAYS)
        train_records = {c: truncate_record(r, start) for c, r in records.items()}
        dataset = build_dataset(train_records, ACCEPT_CONFIG.hyper.window, countries[0])

        def rmse_for(model, country):
            full = records[country]
            sched = baseline_schedule(full, start, HOLDOUT_DAYS)
            forecast = rolling_forecast(
                replace(model, target_country=country), full, start, HOLDOUT_DAYS, sched
            )
            actual = [
                full.cases.new_cases[full.cases.index_of(start + timedelta(days=h))]
                for h in range(HOLDOUT_DAYS)
            ]
            return evaluate(forecast.values, actual).rmse

        prop = train(ModelVariant.PROPOSED, dataset, ACCEPT_CONFIG, seed)
        nld = train(ModelVariant.NO_LOCKDOWN_DATA, dataset, ACCEPT_CONFIG, seed)
        rmses = {
            ModelVariant.PROPOSED: float(np.mean([rmse_for(prop, c) for c in countries])),
            ModelVariant.NO_LOCKDOWN_DATA: float(np.mean([rmse_for(nld, c) for c in countries])),
        }
        sco_rmses = []
        sco_models = {}
        for c in countries:
            ds_c = SupervisedDataset(dataset.samples, dataset.normalization, c, dataset.window)
            sco_models[c] = train(ModelVariant.SINGLE_COUNTRY_ONLY, ds_c, ACCEPT_CONFIG, seed)
            sco_rmses.append(rmse_for(sco_models[c], c))
        rmses[ModelVariant.SINGLE_COUNTRY_ONLY] = float(np.mean(sco_rmses))

        restricted = [
            c for c in countries
            if out.manifest["countries"][c]["flip_direction"] == "open-then-shut"
        ]
        deltas = {name: [] for name in ("lift-schools", "lift-borders", "lift-transport")}
        for c in restricted:
            model_c = replace(prop, target_country=c)
            for scenario in standard_scenarios(HOLDOUT_DAYS, start):
                if scenario.name in deltas:
                    deltas[scenario.name].append(
                        run_scenario(model_c, records[c], scenario).cumulative_delta
                    )
        experiments[seed] = {
            "rmses": rmses,
            "deltas": {name: float(np.mean(values)) for name, values in deltas.items()},
            "models": {
                ModelVariant.PROPOSED: replace(prop, target_country=TARGET),
                ModelVariant.NO_LOCKDOWN_DATA: replace(nld, target_country=TARGET),
                ModelVariant.SINGLE_COUNTRY_ONLY: sco_models[TARGET],
            },
            "record": records[TARGET],
            "start": start,
        }
    experiments["elapsed"] = time.time() - t0
    return experiments


def test_variant_ordering(planted_experiments):
    """The full model beats both ablations on holdout RMSE in >= 4 of 5 seeds."""
    with criterion("variant-ordering"):
        beats_no_lockdown = 0
        beats_single = 0
        for seed in PLANTED_SEEDS:
            rmses = planted_experiments[seed]["rmses"]
            beats_no_lockdown += rmses[ModelVariant.PROPOSED] < rmses[ModelVariant.NO_LOCKDOWN_DATA]
            beats_single += rmses[ModelVariant.PROPOSED] < rmses[ModelVariant.SINGLE_COUNTRY_ONLY]
        assert planted_experiments["elapsed"] < 900.0, (
            f"training took {planted_experiments['elapsed']:.0f}s, budget 900s"
        )
        assert beats_no_lockdown >= 4, f"proposed < no-lockdown in only {beats_no_lockdown}/5 seeds"
        assert beats_single >= 4, f"proposed < single-country in only {beats_single}/5 seeds"


def test_whatif_sign_recovery(planted_experiments):
    """Lifting the planted-positive sectors raises predicted cases; the
    zero-coefficient sector moves less than borders."""
    with criterion("whatif-sign-recovery"):
        schools_up = 0
        borders_up = 0
        transport_smaller = 0
        for seed in PLANTED_SEEDS:
            deltas = planted_experiments[seed]["deltas"]
            schools_up += deltas["lift-schools"] > 0
            borders_up += deltas["lift-borders"] > 0
            transport_smaller += abs(deltas["lift-transport"]) < abs(deltas["lift-borders"])
        assert schools_up >= 4, f"lift-schools positive in only {schools_up}/5 seeds"
        assert borders_up >= 4, f"lift-borders positive in only {borders_up}/5 seeds"
        assert transport_smaller >= 4, (
            f"|transport| < |borders| in only {transport_smaller}/5 seeds"
        )


def test_null_scenario_neutrality(planted_experiments):
    """Identity scenarios give exactly zero delta on every trained model."""
    with criterion("null-scenario-neutrality"):
        for seed in PLANTED_SEEDS:
            exp = planted_experiments[seed]
            scenario = Scenario("identity", exp["start"], HOLDOUT_DAYS)
            for variant, model in exp["models"].items():
                result = run_scenario(model, exp["record"], scenario)
                assert result.delta == (0.0,) * HOLDOUT_DAYS, f"{variant} seed {seed}"
                assert result.cumulative_delta == 0.0


def test_cli_service_parity(tmp_path):
    """rt / forecast / whatif: CLI file output equals the endpoint body
    field-for-field on the same inputs and seed."""
    with criterion("cli-service-parity"):
        import csv
        import io
        import json

        from fastapi.testclient import TestClient

        from policyscope.cli import main
        from policyscope.service import create_app

        synth_dir = tmp_path / "synth"
        assert main(["synth", "--preset", "planted-policy-effect", "--seed", "21",
                     "--countries", "4", "--days", "70", "--out-dir", str(synth_dir)]) == 0
        config = {
            "model": {"window": 5, "recurrent_hidden": 4, "pathway_dense": 3, "head_hidden": 3},
            "training": {"epochs": 4, "batch_size": 16},
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config))
        model_path = tmp_path / "model.json"
        assert main(["train", "--cases", str(synth_dir / "cases.csv"),
                     "--policy", str(synth_dir / "policy.csv"), "--country", "C02",
                     "--variant", "proposed", "--seed", "13", "--config", str(config_path),
                     "--out", str(model_path)]) == 0

        rt_path = tmp_path / "rt.csv"
        assert main(["rt", "--cases", str(synth_dir / "cases.csv"),
                     "--policy", str(synth_dir / "policy.csv"),
                     "--country", "C02", "--out", str(rt_path)]) == 0
        forecast_path = tmp_path / "forecast.csv"
        assert main(["forecast", "--model", str(model_path),
                     "--cases", str(synth_dir / "cases.csv"),
                     "--policy", str(synth_dir / "policy.csv"),
                     "--start", "2020-04-20", "--horizon", "6",
                     "--out", str(forecast_path)]) == 0
        scenario = {"name": "lift-borders", "start": "2020-04-20", "horizon": 6,
                    "overrides": [{"indicator": "travel", "level": 0}]}
        scenario_path = tmp_path / "scenario.json"
        scenario_path.write_text(json.dumps(scenario))
        whatif_path = tmp_path / "whatif.json"
        assert main(["whatif", "--model", str(model_path),
                     "--cases", str(synth_dir / "cases.csv"),
                     "--policy", str(synth_dir / "policy.csv"),
                     "--scenario", str(scenario_path), "--out", str(whatif_path)]) == 0

        app = create_app(tmp_path / "data")
        with TestClient(app) as client:
            resp = client.post(
                "/datasets",
                files={
                    "cases": ("cases.csv", (synth_dir / "cases.csv").read_text(), "text/csv"),
                    "policy": ("policy.csv", (synth_dir / "policy.csv").read_text(), "text/csv"),
                },
            )
            dataset_id = resp.json()["dataset_id"]
            job = client.post(
                "/models",
                json={"dataset_id": dataset_id, "country": "C02", "variant": "proposed",
                      "seed": 13, "config": config},
            ).json()
            deadline = time.time() + 120
            while time.time() < deadline:
                done = client.get(f"/jobs/{job['job_id']}").json()
                if done["status"] in ("done", "failed"):
                    break
                time.sleep(0.05)
            assert done["status"] == "done", done
            model_id = done["model_id"]

            # the service-trained artifact is byte-identical to the CLI's
            artifact = (tmp_path / "data" / "models" / model_id / "artifact.json").read_bytes()
            assert artifact == model_path.read_bytes()

            api_rt = client.get(f"/datasets/{dataset_id}/rt", params={"country": "C02"}).json()
            cli_rt = list(csv.DictReader(io.StringIO(rt_path.read_text())))
            assert len(api_rt) == len(cli_rt)
            for a, c in zip(api_rt, cli_rt):
                assert a["date"] == c["date"]
                assert a["mode"] == float(c["rt_mode"])
                assert a["mean"] == float(c["rt_mean"])
                assert a["ci_low"] == float(c["ci_low"])
                assert a["ci_high"] == float(c["ci_high"])

            api_fc = client.post(
                f"/models/{model_id}/forecast", json={"start": "2020-04-20", "horizon": 6}
            ).json()
            cli_fc = list(csv.DictReader(io.StringIO(forecast_path.read_text())))
            assert len(api_fc) == len(cli_fc) == 6
            for a, c in zip(api_fc, cli_fc):
                assert a["date"] == c["date"]
                assert a["predicted_cases"] == float(c["predicted_cases"])

            api_wi = client.post(f"/models/{model_id}/whatif", json=scenario).json()
            cli_wi = json.loads(whatif_path.read_text())
            assert api_wi == cli_wi
