"""``eegpoison`` command line.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 runtime failure.
Progress goes to stderr; stdout carries only the final summary line (or the
rendered report when ``report`` has no ``--out``).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .data import SynthSpec, load_csv, stratified_split_indices, synthesize, write_csv
from .errors import ConfigError, DataError, MissingResults
from .experiment import load_config, parse_override, plan_cells, render_report, run_grid
from .metrics import evaluate, pct
from .models import DEFAULT_SPECS, TrainedModel, fit, spec_from_dict, spec_to_dict
from .poison import PoisonSpec, apply_poison, parse_scenario

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _err(msg):
    print(msg, file=sys.stderr)


def _load(path):
    try:
        return load_csv(path)
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None


def cmd_synth(args):
    ds = synthesize(SynthSpec(args.per_class, args.separation, args.seed))
    write_csv(ds, args.out)
    print(f"wrote {len(ds)} samples to {args.out}")
    return EXIT_OK


def cmd_split(args):
    ds = _load(args.input)
    train_idx, test_idx = stratified_split_indices(ds.y, args.fraction, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, test = ds.subset(train_idx), ds.subset(test_idx)
    write_csv(train, out / "train.csv")
    write_csv(test, out / "test.csv")
    log = {
        "seed": args.seed,
        "train_fraction": args.fraction,
        "train_counts": train.class_counts().tolist(),
        "test_counts": test.class_counts().tolist(),
        "train_indices": train_idx.tolist(),
        "test_indices": test_idx.tolist(),
    }
    (out / "split.json").write_text(json.dumps(log, indent=1) + "\n", encoding="utf-8")
    _err(f"per-class train counts {log['train_counts']}, test counts {log['test_counts']}")
    print(f"train {len(train)} / test {len(test)} -> {out}")
    return EXIT_OK


def fliplog_paths(output):
    output = Path(output)
    stem = output.with_suffix("")
    return Path(f"{stem}.fliplog.csv"), Path(f"{stem}.fliplog.json")


def cmd_poison(args):
    ds = _load(args.input)
    try:
        spec = PoisonSpec(parse_scenario(args.scenario), args.rate, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    poisoned, flog = apply_poison(ds, spec)
    write_csv(poisoned, args.output)
    log_csv, log_json = fliplog_paths(args.output)
    flog.write_csv(log_csv)
    flog.write_json(log_json, spec)
    if flog.clamped:
        _err(f"warning: requested {flog.requested_count} flips but only {flog.actual_count} samples are eligible")
    print(f"requested={flog.requested_count} actual={flog.actual_count} clamped={str(flog.clamped).lower()}")
    return EXIT_OK


def _spec_with_overrides(kind, overrides, seed):
    if kind not in DEFAULT_SPECS:
        raise UsageError(f"unknown model {kind!r}; choose from {', '.join(DEFAULT_SPECS)}")
    d = spec_to_dict(DEFAULT_SPECS[kind])
    for item in overrides:
        key, value = parse_override(item)
        if key not in d or key == "kind":
            raise UsageError(f"{kind} has no parameter {key!r}")
        d[key] = value
    if seed is not None and "seed" in d:
        d["seed"] = seed
    try:
        return spec_from_dict(d)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_train(args):
    spec = _spec_with_overrides(args.model, args.set, args.seed)
    ds = _load(args.input)
    model = fit(spec, ds)
    model.save(args.out)
    print(f"trained {spec.kind} on {len(ds)} samples -> {args.out}")
    return EXIT_OK


def cmd_eval(args):
    try:
        model = TrainedModel.load(args.model)
    except FileNotFoundError:
        raise DataError(f"model file not found: {args.model}") from None
    except (ValueError, KeyError) as exc:
        raise DataError(f"{args.model}: {exc}") from None
    ds = _load(args.input)
    report = evaluate(ds.y, model.predict_dataset(ds))
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=1) + "\n", encoding="utf-8")
    print(f"n={report.n_evaluated} accuracy={pct(report.accuracy)} recall={pct(report.macro_recall)} "
          f"precision={pct(report.macro_precision)} f1={pct(report.macro_f1)}")
    return EXIT_OK


def cmd_grid(args):
    if not Path(args.config).is_file():
        raise UsageError(f"config file not found: {args.config}")
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"seeds=[{args.seed}]")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    if args.out is not None:
        overrides.append("output_dir=" + json.dumps(str(Path(args.out).resolve())))
    config = load_config(args.config, overrides)
    n_total = sum(1 for _ in plan_cells(config))
    done = [0]

    def progress(cell):
        done[0] += 1
        acc = f"acc={pct(cell.report.accuracy)}%" if cell.report else cell.error
        _err(f"[{done[0]}/{n_total}] {cell.model} {cell.scenario} rate={cell.rate} seed={cell.seed} "
             f"{cell.status} {acc} ({cell.duration_ms:.0f} ms)")

    try:
        config.load_data()
    except FileNotFoundError as exc:
        raise DataError(f"cannot load data: {exc}") from None
    results = run_grid(config, progress=progress)
    failed = [c for c in results if c.status != "ok"]
    out = config.resolve(config.output_dir)
    print(f"{len(results)} cells, {len(results) - len(failed)} ok, {len(failed)} failed -> {out / 'results.csv'}")
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_report(args):
    text = render_report(args.results)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"report written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="eegpoison", description="Label-flipping poisoning benchmark for EEG risk classifiers.",
                formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log debug messages to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write a synthetic band-power CSV", formatter_class=fmt)
    s.add_argument("--per-class", type=int, default=100, help="samples per risk label")
    s.add_argument("--separation", type=float, default=6.0, help="class mean separation in noise SD units")
    s.add_argument("--seed", type=int, default=0, help="generator seed")
    s.add_argument("--out", required=True, help="output CSV path")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("split", help="stratified train/test split of a CSV", formatter_class=fmt)
    s.add_argument("--input", required=True, help="input CSV")
    s.add_argument("--fraction", type=float, default=0.8, help="training fraction")
    s.add_argument("--seed", type=int, default=0, help="shuffle seed")
    s.add_argument("--out", required=True, help="directory for train.csv, test.csv, split.json")
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("poison", help="flip labels of a training CSV", formatter_class=fmt)
    s.add_argument("--input", required=True, help="training CSV")
    s.add_argument("--scenario", default="to_target_high",
                   help="to_target_high (or to_target_<label>) or next_level")
    s.add_argument("--rate", type=float, required=True, help="fraction of the training set to flip")
    s.add_argument("--seed", type=int, default=0, help="victim selection seed")
    s.add_argument("--output", required=True, help="poisoned CSV; flip logs are written beside it")
    s.set_defaults(func=cmd_poison)

    s = sub.add_parser("train", help="fit one classifier and save it as JSON", formatter_class=fmt)
    s.add_argument("--model", required=True, choices=sorted(DEFAULT_SPECS), help="model family")
    s.add_argument("--input", required=True, help="training CSV")
    s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a hyperparameter (repeatable)")
    s.add_argument("--seed", type=int, default=None, help="model seed (spec default when omitted)")
    s.add_argument("--out", required=True, help="model JSON path")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="score a saved model on a CSV", formatter_class=fmt)
    s.add_argument("--model", required=True, help="model JSON from `train`")
    s.add_argument("--input", required=True, help="evaluation CSV")
    s.add_argument("--out", default=None, help="optional metrics JSON path")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("grid", help="run the full experiment grid", formatter_class=fmt)
    s.add_argument("--config", required=True, help="experiment config JSON")
    s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, dotted paths allowed, JSON values (repeatable)")
    s.add_argument("--seed", type=int, default=None, help="run a single seed instead of the config's list")
    s.add_argument("--workers", type=int, default=None, help="parallel worker processes (config default 1)")
    s.add_argument("--out", default=None, help="results directory (config output_dir when omitted)")
    s.set_defaults(func=cmd_grid)

    s = sub.add_parser("report", help="render markdown tables from grid results", formatter_class=fmt)
    s.add_argument("--results", required=True, help="directory holding results.json")
    s.add_argument("--out", default=None, help="markdown output path (stdout when omitted)")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        _err(f"eegpoison {args.command}: {exc}")
        return EXIT_USAGE
    except (DataError, MissingResults) as exc:
        _err(f"eegpoison {args.command}: {exc}")
        return EXIT_DATA
    except Exception as exc:  # last-resort mapping to the runtime exit code
        _err(f"eegpoison {args.command}: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
