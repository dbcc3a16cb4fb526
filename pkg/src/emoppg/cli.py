"""Command-line surface: extract / train / eval / compile / bench / synth / infer.

All randomness flows from --seed.  An optional plain-text config file
(key=value lines) supplies defaults; explicit flags win on conflict.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import dataset, evaluate, hrv, synth
from . import models as models_mod
from .compile import CompiledEnsemble, compile_ensemble, predict_compiled
from .errors import EmoppgError
from .models.base import predict
from .signal import IbiSequence, signal_to_clean_ibi

MODEL_KINDS = ("logistic", "svm", "random_forest", "extra_trees", "gradient_boosted")


def _load_config(path):
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise EmoppgError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _train_one(kind, X, y, seed, normalization, feature_names, n_trees, rounds):
    if kind == "logistic":
        return models_mod.train_logistic(
            X, y, normalization=normalization, feature_names=feature_names
        )
    if kind == "svm":
        return models_mod.train_linear_svm(
            X, y, normalization=normalization, feature_names=feature_names
        )
    if kind == "random_forest":
        return models_mod.train_random_forest(
            X, y, n_trees=n_trees, seed=seed,
            normalization=normalization, feature_names=feature_names
        )
    if kind == "extra_trees":
        return models_mod.train_extra_trees(
            X, y, n_trees=n_trees, seed=seed,
            normalization=normalization, feature_names=feature_names
        )
    if kind == "gradient_boosted":
        return models_mod.train_gradient_boosted(
            X, y, rounds=rounds, normalization=normalization, feature_names=feature_names
        )
    raise EmoppgError(f"unknown model kind {kind!r}")


def cmd_synth(args):
    rng_offset = 0
    all_ibi_intervals, all_ibi_times, all_labels = [], [], []
    t_offset = 0.0
    for spec in args.segment:
        parts = spec.split(":")
        if len(parts) != 5:
            raise EmoppgError(f"--segment must be LABEL:MEAN_RR:SDNN:RSA:DURATION, got {spec!r}")
        label, mean_rr, sdnn, rsa, duration = (
            int(parts[0]),
            float(parts[1]),
            float(parts[2]),
            float(parts[3]),
            float(parts[4]),
        )
        profile = synth.StateProfile(
            label=label,
            mean_rr_ms=mean_rr,
            sdnn_target_ms=sdnn,
            rsa_depth_ms=rsa,
            seed=args.seed + rng_offset,
        )
        ibi, labels = synth.synth_ibi(profile, duration)
        all_ibi_intervals.append(ibi.intervals_ms)
        all_ibi_times.append(ibi.beat_times_s + t_offset)
        all_labels.append(labels)
        t_offset += duration
        rng_offset += 1
    ibi = IbiSequence(
        intervals_ms=np.concatenate(all_ibi_intervals),
        beat_times_s=np.concatenate(all_ibi_times),
    )
    labels = np.concatenate(all_labels)
    ppg = synth.render_ppg(
        ibi, rate_hz=args.rate_hz, noise_std=args.noise_std, duration_s=t_offset, seed=args.seed
    )
    prefix = args.out_prefix
    dataset.write_ppg_csv(f"{prefix}_ppg.csv", ppg)
    dataset.write_labels_csv(f"{prefix}_labels.csv", labels, rate_hz=64.0)
    dataset.write_ibi_csv(f"{prefix}_ibi.csv", ibi)
    print(f"wrote {prefix}_ppg.csv, {prefix}_labels.csv, {prefix}_ibi.csv")
    return 0


def cmd_extract(args):
    scenario = dataset.Scenario[args.scenario]
    if args.ibi:
        ibi = dataset.load_ibi_csv(args.ibi)
    elif args.ppg:
        signal = dataset.load_ppg_csv(args.ppg, rate_hz=args.rate_hz)
        ibi = signal_to_clean_ibi(signal)
    else:
        raise EmoppgError("extract needs --ppg or --ibi")
    labels, label_rate = dataset.load_labels_csv(args.labels)
    if args.label_downsample > 1:
        labels = dataset.downsample_labels(labels, args.label_downsample)
        label_rate = label_rate / args.label_downsample
    chest = dataset.load_ibi_csv(args.chest_ibi) if args.chest_ibi else None
    rows = dataset.make_windows(
        ibi,
        labels,
        scenario,
        width_s=args.window_s,
        step_s=args.step_s,
        label_rate_hz=label_rate,
        subject_id=args.subject,
        chest_ibi=chest,
    )
    dataset.write_features_csv(args.out, rows, scenario.feature_names)
    print(f"wrote {len(rows)} feature rows to {args.out}")
    return 0


def _split_rows(rows, seed, test_frac):
    _, y = dataset.feature_matrix(rows)
    return dataset.stratified_split(y, test_frac=test_frac, seed=seed)


def cmd_train(args):
    rows, feature_names = dataset.load_features_csv(args.features)
    split = _split_rows(rows, args.seed, args.test_frac)
    train_rows = [rows[i] for i in split.train]
    X, y = dataset.feature_matrix(train_rows)
    norm = dataset.fit_normalizer(X)
    Xn = dataset.apply_normalizer(norm, X)
    model = _train_one(
        args.model_kind, Xn, y, args.seed, norm, tuple(feature_names),
        args.n_trees, args.rounds,
    )
    size = models_mod.save_model(model, args.out)
    print(f"trained {args.model_kind} on {len(train_rows)} rows; wrote {size} bytes to {args.out}")
    return 0


def cmd_eval(args):
    model = models_mod.load_model(args.model)
    rows, _ = dataset.load_features_csv(args.features)
    if args.split == "all":
        subset = rows
    else:
        split = _split_rows(rows, args.seed, args.test_frac)
        idx = split.test if args.split == "test" else split.train
        subset = [rows[i] for i in idx]
    predictor = predict_compiled if isinstance(model, CompiledEnsemble) else predict
    preds = [predictor(model, r.features).label for r in subset]
    truths = [r.label for r in subset]
    report = evaluate.evaluate(truths, preds)
    sys.stdout.write(evaluate.report_to_text(report))
    if args.out:
        evaluate.save_report(report, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_compile(args):
    model = models_mod.load_model(args.model)
    if isinstance(model, CompiledEnsemble):
        raise EmoppgError(f"{args.model} is already compiled")
    compiled = compile_ensemble(model)
    size = models_mod.save_model(compiled, args.out)
    print(f"compiled {compiled.n_nodes} nodes across {len(compiled.tree_roots)} trees; "
          f"wrote {size} bytes to {args.out}")
    return 0


def cmd_bench(args):
    rng = np.random.default_rng(args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frontier = []
    for i, path in enumerate(args.model):
        model = models_mod.load_model(path)
        if args.probes:
            rows, _ = dataset.load_features_csv(args.probes)
            probes = np.stack([r.features for r in rows])
        else:
            probes = rng.standard_normal((64, model.n_features))
        name = Path(path).stem
        report = bench_mod.benchmark(
            model, probes, reps=args.reps, warmup=args.warmup, name=name
        )
        sys.stdout.write(bench_mod.report_to_text(report))
        bench_mod.save_report(report, out_dir / f"{name}_bench.json")
        if args.eval_report:
            eval_path = args.eval_report[min(i, len(args.eval_report) - 1)]
            macro_f1 = evaluate.load_report(eval_path).macro_f1
            frontier.append((name, report.variant, report.size_bytes, macro_f1))
    if args.frontier_csv and frontier:
        Path(args.frontier_csv).write_text(bench_mod.frontier_csv_rows(frontier))
        print(f"wrote {args.frontier_csv}")
    return 0


def cmd_infer(args):
    model = models_mod.load_model(args.model)
    ibi = dataset.load_ibi_csv(args.ibi)
    wrist = hrv.compute_hrv(ibi.intervals_ms)
    values = dict(zip(hrv.FEATURE_NAMES, wrist.as_array()))
    if args.chest_ibi:
        chest = hrv.compute_hrv(dataset.load_ibi_csv(args.chest_ibi).intervals_ms)
        values.update({f"chest_{n}": v for n, v in zip(hrv.FEATURE_NAMES, chest.as_array())})
    try:
        features = np.array([values[name] for name in model.feature_names])
    except KeyError as exc:
        raise EmoppgError(f"model needs feature {exc.args[0]!r}; supply --chest-ibi?") from None
    predictor = predict_compiled if isinstance(model, CompiledEnsemble) else predict
    pred = predictor(model, features)
    json.dump(
        {
            "label": pred.label,
            "label_name": evaluate.CLASS_NAMES[pred.label],
            "confidence": pred.confidence,
            "probabilities": pred.probabilities.tolist(),
        },
        sys.stdout,
    )
    sys.stdout.write("\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="emoppg", description=__doc__)
    parser.add_argument("--config", help="plain-text key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("synth", help="generate synthetic PPG/labels/IBI CSVs")
    common(p)
    p.add_argument("--segment", action="append", required=True,
                   metavar="LABEL:MEAN_RR:SDNN:RSA:DURATION")
    p.add_argument("--rate-hz", type=float, default=64.0)
    p.add_argument("--noise-std", type=float, default=0.0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="signals + labels -> features CSV")
    common(p)
    p.add_argument("--ppg")
    p.add_argument("--ibi", help="use a precomputed IBI CSV instead of --ppg")
    p.add_argument("--labels", required=True)
    p.add_argument("--chest-ibi")
    p.add_argument("--rate-hz", type=float, default=None)
    p.add_argument("--label-downsample", type=int, default=1)
    p.add_argument("--scenario", default="WRIST_ALL",
                   choices=[s.name for s in dataset.Scenario])
    p.add_argument("--window-s", type=float, default=120.0)
    p.add_argument("--step-s", type=float, default=60.0)
    p.add_argument("--subject", default="S0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="features CSV -> model file")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--model-kind", required=True, choices=MODEL_KINDS)
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--n-trees", type=int, default=200, help="forest size (tree models)")
    p.add_argument("--rounds", type=int, default=200, help="boosting rounds")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="model + features -> metrics report")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--split", default="test", choices=("test", "train", "all"))
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compile", help="model file -> compiled model file")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("bench", help="measure latency and size")
    common(p)
    p.add_argument("--model", action="append", required=True)
    p.add_argument("--probes", help="features CSV to draw probe rows from")
    p.add_argument("--reps", type=int, default=10000)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--eval-report", action="append",
                   help="eval JSON per model, for the frontier CSV")
    p.add_argument("--frontier-csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("infer", help="model + single-window IBI CSV -> prediction")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--ibi", required=True)
    p.add_argument("--chest-ibi")
    p.set_defaults(func=cmd_infer)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # Config defaults: parse --config first, then let explicit flags win.
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            config = _load_config(known.config)
        except EmoppgError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        for action in parser._subparsers._group_actions[0].choices.values():
            defaults = {}
            for sub_action in action._actions:
                if sub_action.dest in config:
                    raw = config[sub_action.dest]
                    defaults[sub_action.dest] = (
                        sub_action.type(raw) if callable(sub_action.type) else raw
                    )
            action.set_defaults(**defaults)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmoppgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
