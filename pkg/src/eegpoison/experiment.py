"""Poison-rate x scenario x model x seed grids and their result tables."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .data import Dataset, RiskLabel, SynthSpec, load_csv, stratified_split, synthesize
from .errors import CellTimeout, ConfigError, MissingResults
from .metrics import MetricsReport, evaluate
from .models import fingerprint, fit, spec_from_dict, spec_to_dict
from .poison import PoisonSpec, apply_poison, parse_scenario
from .rng import child_seed

BASELINE = "clean"
DEFAULT_RATES = [0.0, 0.05, 0.25, 0.50, 0.75]
CSV_COLUMNS = ["model", "scenario", "rate", "seed", "accuracy", "macro_recall", "macro_precision",
               "macro_f1", "n_flipped", "clamped", "duration_ms", "status"]
METRIC_KEYS = ("accuracy", "macro_recall", "macro_precision", "macro_f1")


@dataclass
class ExperimentConfig:
    data: dict
    models: list
    scenarios: list = field(default_factory=lambda: ["to_target_high", "next_level"])
    rates: list = field(default_factory=lambda: list(DEFAULT_RATES))
    seeds: list = field(default_factory=lambda: [0])
    train_fraction: float = 0.8
    output_dir: str = "results"
    workers: int = 1
    cell_timeout_s: float = 120.0
    record_durations: bool = False
    base_dir: str = field(default=".", repr=False)

    def __post_init__(self):
        if not isinstance(self.data, dict) or len(self.data) != 1 or next(iter(self.data)) not in ("csv", "synth"):
            raise ConfigError('data must be {"csv": PATH} or {"synth": {...}}')
        if "synth" in self.data:
            try:
                SynthSpec(**self.data["synth"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad synth spec: {exc}") from None
        self.rates = [float(r) for r in self.rates]
        if not self.rates or any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ConfigError("rates must be a nonempty list within [0, 1]")
        if any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            raise ConfigError("rates must be strictly increasing")
        if not self.models:
            raise ConfigError("at least one model is required")
        if not self.scenarios:
            raise ConfigError("at least one scenario is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        self.seeds = [int(s) for s in self.seeds]
        if not 0.0 < float(self.train_fraction) < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if int(self.workers) < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.scenario_objs = [parse_scenario(s) for s in self.scenarios]
            self.model_specs = []
            for entry in self.models:
                entry = dict(entry)
                name = entry.pop("name", None) or entry.get("kind")
                self.model_specs.append((str(name), spec_from_dict(entry)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        names = [n for n, _ in self.model_specs]
        if len(set(names)) != len(names):
            raise ConfigError(f"model names must be unique: {names}")
        tags = [s.tag for s in self.scenario_objs]
        if len(set(tags)) != len(tags):
            raise ConfigError(f"duplicate scenarios: {tags}")

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)} - {"base_dir"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"data", "models"} - set(d)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        return cls(**d, base_dir=str(base_dir))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def resolve(self, path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def load_data(self) -> Dataset:
        if "csv" in self.data:
            return load_csv(self.resolve(self.data["csv"]))
        return synthesize(SynthSpec(**self.data["synth"]))


def set_path(d: dict, key: str, value) -> None:
    parts = key.split(".")
    for p in parts[:-1]:
        d = d.setdefault(p, {})
        if not isinstance(d, dict):
            raise ConfigError(f"cannot set {key}: {p} is not an object")
    d[parts[-1]] = value


def parse_override(item: str):
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not KEY=VALUE")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_config(path, overrides=()) -> ExperimentConfig:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    for item in overrides:
        set_path(d, *parse_override(item))
    return ExperimentConfig.from_dict(d, base_dir=path.parent)


@dataclass
class CellResult:
    model: str
    scenario: str
    rate: float
    seed: int
    status: str
    report: MetricsReport | None = None
    flips: dict = field(default_factory=dict)
    duration_ms: float = 0.0
    fingerprint: str = ""
    hyperparameters: dict = field(default_factory=dict)
    error: str = ""

    @property
    def key(self):
        return (self.model, self.scenario, self.rate, self.seed)

    def high_share(self) -> float:
        cm = self.report.confusion.counts
        return float(cm[:, RiskLabel.HIGH].sum() / cm.sum())

    def to_dict(self, durations=True) -> dict:
        d = {
            "model": self.model,
            "scenario": self.scenario,
            "rate": self.rate,
            "seed": self.seed,
            "status": self.status,
            "metrics": None if self.report is None else self.report.to_dict(),
            "flips": self.flips,
            "fingerprint": self.fingerprint,
            "hyperparameters": self.hyperparameters,
            "error": self.error,
        }
        if durations:
            d["duration_ms"] = self.duration_ms
        return d

    @classmethod
    def from_dict(cls, d) -> "CellResult":
        report = None if d.get("metrics") is None else MetricsReport.from_dict(d["metrics"])
        return cls(d["model"], d["scenario"], float(d["rate"]), int(d["seed"]), d["status"], report,
                   d.get("flips", {}), float(d.get("duration_ms", 0.0)), d.get("fingerprint", ""),
                   d.get("hyperparameters", {}), d.get("error", ""))


def seeded_spec(spec, seed: int, tag: str):
    """Give the model its own substream of the cell seed, keyed by model tag."""
    if any(f.name == "seed" for f in dataclasses.fields(spec)):
        return dataclasses.replace(spec, seed=child_seed(seed, "model", tag))
    return spec


def run_cell(train: Dataset, test: Dataset, model_tag: str, model_spec, scenario, rate: float,
             seed: int, timeout_s: float | None = None) -> CellResult:
    """Poison ``train``, fit, and score on the untouched ``test`` partition."""
    scenario_tag = BASELINE if rate == 0 else scenario.tag
    spec = seeded_spec(model_spec, seed, model_tag)
    start = time.perf_counter()
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    cell = CellResult(model_tag, scenario_tag, float(rate), int(seed), "ok",
                      fingerprint=fingerprint(spec), hyperparameters=spec_to_dict(spec))
    try:
        pspec = PoisonSpec(scenario, float(rate), int(seed))
        poisoned, flog = apply_poison(train, pspec)
        cell.flips = flog.summary()
        model = fit(spec, poisoned, deadline=deadline)
        cell.report = evaluate(test.y, model.predict_dataset(test))
    except CellTimeout as exc:
        cell.status, cell.error = "timed_out", str(exc)
    except Exception as exc:  # recorded per cell; the grid carries on
        cell.status, cell.error = "error", f"{type(exc).__name__}: {exc}"
    cell.duration_ms = (time.perf_counter() - start) * 1000.0
    return cell


def dataset_digest(ds: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.X).tobytes())
    h.update(np.ascontiguousarray(ds.y).tobytes())
    return h.hexdigest()


def plan_cells(config: ExperimentConfig):
    """Yield ``(seed, model_tag, spec, scenario, rate)``; rate 0 appears once per model and seed."""
    for seed in config.seeds:
        for tag, spec in config.model_specs:
            for rate in config.rates:
                if rate == 0:
                    yield seed, tag, spec, config.scenario_objs[0], 0.0
                    continue
                for scenario in config.scenario_objs:
                    yield seed, tag, spec, scenario, rate


def sort_key(cell: CellResult):
    return (cell.model, cell.scenario, cell.rate, cell.seed)


def run_grid(config: ExperimentConfig, progress=None, write=True):
    """Run every cell, write ``results.csv`` and ``results.json``, return the sorted cells."""
    ds = config.load_data()
    splits = {seed: stratified_split(ds, config.train_fraction, seed) for seed in config.seeds}
    digests = {seed: dataset_digest(test) for seed, (_, test) in splits.items()}
    jobs = list(plan_cells(config))
    results = []
    if config.workers == 1:
        for seed, tag, spec, scenario, rate in jobs:
            train, test = splits[seed]
            cell = run_cell(train, test, tag, spec, scenario, rate, seed, config.cell_timeout_s)
            results.append(cell)
            if progress:
                progress(cell)
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(run_cell, *splits[seed], tag, spec, scenario, rate, seed,
                                   config.cell_timeout_s)
                       for seed, tag, spec, scenario, rate in jobs]
            for fut in as_completed(futures):
                cell = fut.result()
                results.append(cell)
                if progress:
                    progress(cell)
    for seed, (_, test) in splits.items():
        if dataset_digest(test) != digests[seed]:
            raise RuntimeError("test partition changed during the grid")
    results.sort(key=sort_key)
    if write:
        out = config.resolve(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        meta = grid_metadata(config, ds, splits, digests)
        (out / "results.csv").write_text(results_csv(results, config.record_durations), encoding="utf-8")
        (out / "results.json").write_text(results_json(results, meta, config.record_durations), encoding="utf-8")
    return results


def grid_metadata(config, ds, splits, digests) -> dict:
    # worker count is execution detail; results must not depend on it
    cfg = {k: v for k, v in config.to_dict().items() if k != "workers"}
    return {
        "config": cfg,
        "model_order": [tag for tag, _ in config.model_specs],
        "scenario_order": [s.tag for s in config.scenario_objs],
        "n_samples": len(ds),
        "splits": {
            str(seed): {
                "train_counts": train.class_counts().tolist(),
                "test_counts": test.class_counts().tolist(),
                "test_sha256": digests[seed],
            }
            for seed, (train, test) in splits.items()
        },
        "notes": "One stratified split per seed is shared by every cell of that seed; "
                 "models are always scored on the clean test partition.",
    }


def _fmt_pct(x):
    return f"{100.0 * x:.4f}"


def results_csv(results, record_durations=False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in results:
        metrics = ([_fmt_pct(getattr(c.report, k)) for k in METRIC_KEYS]
                   if c.report is not None else [""] * 4)
        w.writerow([c.model, c.scenario, repr(c.rate), c.seed, *metrics,
                    c.flips.get("actual", ""), str(c.flips.get("clamped", "")).lower(),
                    f"{c.duration_ms:.1f}" if record_durations else "", c.status])
    return buf.getvalue()


def results_json(results, meta, record_durations=False) -> str:
    doc = {"meta": meta, "cells": [c.to_dict(durations=record_durations) for c in results]}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def load_results(results_dir):
    path = Path(results_dir) / "results.json"
    if not path.is_file():
        raise MissingResults(f"no results.json in {results_dir}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    if not doc.get("cells"):
        raise MissingResults(f"{path} holds no cells")
    return doc.get("meta", {}), [CellResult.from_dict(c) for c in doc["cells"]]


def _round2(x: float) -> str:
    return str(Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _cell_text(values):
    pcts = [100.0 * v for v in values]
    text = _round2(statistics.fmean(pcts))
    if len(pcts) > 1:
        text += " ± " + _round2(statistics.stdev(pcts))
    return text


def render_report(results_dir) -> str:
    """Markdown tables, one per scenario, with mean (± sample stdev) over seeds."""
    meta, cells = load_results(results_dir)
    models = meta.get("model_order") or sorted({c.model for c in cells})
    scenarios = meta.get("scenario_order") or sorted({c.scenario for c in cells} - {BASELINE})
    ok = [c for c in cells if c.status == "ok"]
    seeds = sorted({c.seed for c in cells})
    lines = [
        "# Label-flipping poisoning results",
        "",
        f"Seeds: {', '.join(map(str, seeds))}. Values are percentages, mean over seeds"
        + (" ± sample standard deviation." if len(seeds) > 1 else "."),
        meta.get("notes", ""),
        "",
    ]
    for scenario in scenarios:
        lines += [f"## Scenario: {scenario}", "",
                  "| Model | Poison rate [%] | Accuracy [%] | Recall [%] | Precision [%] | F1-Score [%] |",
                  "|---|---|---|---|---|---|"]
        for model in models:
            rates = sorted({c.rate for c in cells if c.model == model and c.scenario in (scenario, BASELINE)})
            for rate in rates:
                group = [c for c in ok if c.model == model and c.rate == rate
                         and c.scenario == (BASELINE if rate == 0 else scenario)]
                if group:
                    vals = [_cell_text([getattr(c.report, k) for c in group]) for k in METRIC_KEYS]
                else:
                    vals = ["n/a"] * 4
                lines.append(f"| {model} | {100 * rate:g} | " + " | ".join(vals) + " |")
        lines.append("")
    failed = [c for c in cells if c.status != "ok"]
    if failed:
        lines += ["## Failed cells", ""]
        lines += [f"- {c.model} / {c.scenario} / {c.rate} / seed {c.seed}: {c.status} {c.error}" for c in failed]
        lines.append("")
    return "\n".join(lines)
