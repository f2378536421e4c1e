"""Command-line experiments: descriptors, cross-validation, sweeps, noise, synthetic data."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .descriptor import DegenerateActionError, compute_descriptor, stacked_length
from .evaluation import SplitPlan, evaluate, mij_sweep, noise_sweep
from .ingest import (
    DatasetError,
    FilterSpec,
    SyntheticConfig,
    butterworth_filter,
    generate_synthetic,
    load_dataset,
    save_dataset,
)
from .similarity import Metric, MetricSpec

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # Input and usage errors exit with code 1; argparse's default is 2.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value: float) -> str:
    """Full-precision text for CSV cells (repr round-trips float64 exactly)."""
    return repr(float(value))


def _workers() -> int:
    raw = os.environ.get("CODE_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"CODE_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"CODE_THREADS must be at least 1, got {value}")
    return value


def _add_filter_flags(parser) -> None:
    parser.add_argument("--filter-cutoff", type=float, default=10.0, metavar="HZ",
                        help="low-pass cutoff frequency (default 10)")
    parser.add_argument("--filter-order", type=int, default=2, metavar="N",
                        help="Butterworth order (default 2)")
    parser.add_argument("--no-filter", action="store_true",
                        help="skip the low-pass preprocessing step")


def _filter_spec(args) -> FilterSpec | None:
    if args.no_filter:
        return None
    return FilterSpec(cutoff_hz=args.filter_cutoff, order=args.filter_order, zero_phase=True)


def _load_actions(args):
    actions = load_dataset(args.manifest)
    spec = _filter_spec(args)
    if spec is not None:
        actions = [butterworth_filter(a, spec) for a in actions]
    return actions


def _metric_spec(args) -> MetricSpec:
    return MetricSpec.parse(args.metric, args.features)


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(cell) for cell in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_confusion_csv(path, report) -> None:
    header = ["true\\predicted"] + list(report.class_labels)
    rows = [
        [label] + [int(n) for n in row]
        for label, row in zip(report.class_labels, report.confusion)
    ]
    _write_csv(path, header, rows)


def _report_payload(report, dataset_name, protocol) -> dict:
    payload = report.to_dict()
    payload["dataset"] = dataset_name
    payload["protocol"] = protocol
    return payload


def _write_report(args, report, protocol) -> None:
    out = Path(args.out)
    dataset_name = Path(args.manifest).stem
    if getattr(args, "format", "json") == "csv":
        rows = [
            ("accuracy_overall", _fmt(report.accuracy)),
            ("accuracy_mean", _fmt(report.accuracy_mean)),
            ("accuracy_std", _fmt(report.accuracy_std)),
            ("precision_macro", _fmt(report.macro_precision)),
            ("precision_mean", _fmt(report.precision_mean)),
            ("precision_std", _fmt(report.precision_std)),
            ("recall_macro", _fmt(report.macro_recall)),
            ("recall_mean", _fmt(report.recall_mean)),
            ("recall_std", _fmt(report.recall_std)),
            ("descriptor_time_s", _fmt(report.descriptor_time)),
            ("classify_time_s", _fmt(report.classify_time)),
        ]
        _write_csv(out, ["metric", "value"], rows)
    else:
        payload = _report_payload(report, dataset_name, protocol)
        out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_confusion_csv(out.with_suffix(out.suffix + ".confusion.csv"), report)


def _sanitize(name: str) -> str:
    return "".join(c if (c.isalnum() or c in "-_.") else "_" for c in name)


def cmd_describe(args) -> int:
    actions = _load_actions(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    descriptors = [compute_descriptor(a, args.jm) for a in actions]
    elapsed = time.perf_counter() - t0
    for action, desc in zip(actions, descriptors):
        payload = {
            "action_id": action.action_id,
            "jm": desc.jm,
            "mij": desc.mij.tolist(),
            "var_norm": desc.var_norm.tolist(),
            "vmax_norm": desc.vmax_norm.tolist(),
            "vmin_norm": desc.vmin_norm.tolist(),
            "corr": desc.corr.tolist(),
        }
        path = out_dir / f"{_sanitize(action.action_id)}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    summary = {
        "dataset": Path(args.manifest).stem,
        "actions": len(actions),
        "jm": args.jm,
        "stacked_length": stacked_length(args.jm),
        "descriptor_time_s": elapsed,
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(
        f"wrote {len(actions)} descriptors (stacked length {stacked_length(args.jm)}) "
        f"to {out_dir} in {elapsed:.3f}s"
    )
    return 0


def cmd_crossval(args) -> int:
    actions = _load_actions(args)
    spec = _metric_spec(args)
    plan = SplitPlan.stratified_kfold([a.class_label for a in actions], args.folds, args.seed)
    report = evaluate(actions, args.jm, spec, plan, workers=_workers())
    protocol = {
        "kind": "stratified-kfold",
        "folds": args.folds,
        "seed": args.seed,
        "jm": args.jm,
        "metric": args.metric,
        "features": args.features,
        "filter_cutoff_hz": None if args.no_filter else args.filter_cutoff,
    }
    _write_report(args, report, protocol)
    print(
        f"accuracy {report.accuracy_mean:.4f} +/- {report.accuracy_std:.4f} "
        f"({args.folds}-fold, jm={args.jm}, {args.metric})"
    )
    return 0


def cmd_cross_subject(args) -> int:
    actions = _load_actions(args)
    spec = _metric_spec(args)
    plan = SplitPlan.cross_subject(
        [a.subject_id for a in actions], _csv_list(args.train_subjects)
    )
    report = evaluate(actions, args.jm, spec, plan, workers=_workers())
    protocol = {
        "kind": "cross-subject",
        "train_subjects": _csv_list(args.train_subjects),
        "jm": args.jm,
        "metric": args.metric,
        "features": args.features,
        "filter_cutoff_hz": None if args.no_filter else args.filter_cutoff,
    }
    _write_report(args, report, protocol)
    print(f"cross-subject accuracy {report.accuracy:.4f} (jm={args.jm}, {args.metric})")
    return 0


def cmd_sweep(args) -> int:
    actions = _load_actions(args)
    jm_values = [int(x) for x in _csv_list(args.jm)]
    metrics = _csv_list(args.metric)
    features = _csv_list(args.features)
    specs = []
    for metric in metrics:
        if metric == Metric.CSM.value:
            specs.append(MetricSpec.parse(metric, "full"))
        else:
            specs.extend(MetricSpec.parse(metric, f) for f in features)
    plan = SplitPlan.stratified_kfold([a.class_label for a in actions], args.folds, args.seed)
    cells = mij_sweep(actions, jm_values, specs, plan, workers=_workers())
    rows = [
        (
            cell.jm,
            cell.spec.kind.value,
            cell.spec.features.value,
            _fmt(cell.accuracy_mean),
            _fmt(cell.accuracy_std),
            cell.descriptor_len,
        )
        for cell in cells
    ]
    _write_csv(args.out, ["jm", "metric", "features", "accuracy_mean", "accuracy_std", "descriptor_len"], rows)
    # Soft comparison, reported but never asserted: CSM tends to win at small jm.
    by_key = {(cell.jm, cell.spec.kind.value): cell.accuracy_mean for cell in cells}
    for jm in jm_values:
        csm_acc = by_key.get((jm, "csm"))
        man_acc = by_key.get((jm, "manhattan"))
        if csm_acc is not None and man_acc is not None:
            print(f"jm={jm}: csm {csm_acc:.4f} vs manhattan {man_acc:.4f}")
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    return 0


def cmd_noise(args) -> int:
    actions = load_dataset(args.manifest)  # raw: noise must land before filtering
    spec = _metric_spec(args)
    sigmas = sorted(float(x) for x in _csv_list(args.sigmas))
    if any(s < 0 for s in sigmas):
        raise ValueError("noise standard deviations must be non-negative")
    filter_spec = _filter_spec(args)
    prep = None if filter_spec is None else (lambda a: butterworth_filter(a, filter_spec))
    plan = SplitPlan.stratified_kfold([a.class_label for a in actions], args.folds, args.seed)
    rows = noise_sweep(
        actions,
        sigmas,
        args.jm,
        spec,
        plan,
        seed=args.seed,
        preprocess=prep,
        corrupt_train=args.corrupt_train,
        workers=_workers(),
    )
    _write_csv(
        args.out,
        ["sigma_deg", "accuracy_mean", "accuracy_std"],
        [(_fmt(r.sigma_deg), _fmt(r.accuracy_mean), _fmt(r.accuracy_std)) for r in rows],
    )
    print(f"wrote {len(rows)} noise rows to {args.out}")
    return 0


def cmd_gen_synth(args) -> int:
    config = SyntheticConfig(
        classes=args.classes,
        per_class=args.per_class,
        subjects=args.subjects,
        joints=args.joints,
        frames=args.frames,
        frame_rate=args.frame_rate,
        seed=args.seed,
        active_per_class=args.active_joints,
        amplitude_deg=args.amplitude,
        noise_deg=args.noise_std,
        disjoint_classes=args.disjoint,
    )
    actions, manifest = generate_synthetic(config)
    manifest_path = save_dataset(actions, manifest, args.out_dir)
    print(f"wrote {len(actions)} actions and {manifest_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="codemotion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def dataset_args(p, seed=False, metric=False, folds=False):
        p.add_argument("--manifest", required=True, metavar="PATH", help="dataset manifest JSON")
        p.add_argument("--jm", type=int, default=20, metavar="N",
                       help="number of most informative joints (default 20)")
        _add_filter_flags(p)
        if metric:
            p.add_argument("--metric", default="csm", choices=[m.value for m in Metric])
            p.add_argument("--features", default="full", choices=["var", "var-vel", "full"])
        if folds:
            p.add_argument("--folds", type=int, default=10, metavar="K")
        if seed:
            p.add_argument("--seed", type=int, required=True, metavar="N",
                           help="required: all randomness is explicit")

    p = sub.add_parser("describe", help="write one descriptor JSON per action plus a summary")
    dataset_args(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("crossval", help="stratified k-fold 1-NN evaluation")
    dataset_args(p, seed=True, metric=True, folds=True)
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("cross-subject", help="single train/test split by performer")
    dataset_args(p, metric=True)
    p.add_argument("--train-subjects", required=True, metavar="LIST",
                   help="comma-separated subject ids used for training")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=cmd_cross_subject)

    p = sub.add_parser("sweep", help="accuracy over MIJ counts and metrics")
    p.add_argument("--manifest", required=True, metavar="PATH")
    p.add_argument("--jm", default="5,10,20", metavar="LIST",
                   help="comma-separated MIJ counts (default 5,10,20)")
    p.add_argument("--metric", default="csm,euclidean,manhattan", metavar="LIST",
                   help="comma-separated metrics")
    p.add_argument("--features", default="var,var-vel,full", metavar="LIST",
                   help="comma-separated feature sets for the baseline metrics")
    p.add_argument("--folds", type=int, default=10, metavar="K")
    p.add_argument("--seed", type=int, required=True, metavar="N")
    _add_filter_flags(p)
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("noise", help="accuracy under additive Gaussian angle noise")
    dataset_args(p, seed=True, metric=True, folds=True)
    p.add_argument("--sigmas", default="0,1,2,3,4,5", metavar="LIST",
                   help="comma-separated noise standard deviations in degrees")
    p.add_argument("--corrupt-train", action="store_true",
                   help="corrupt training items too (default: test items only)")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("gen-synth", help="generate a synthetic coordinated-motion dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--subjects", type=int, required=True)
    p.add_argument("--joints", type=int, default=20)
    p.add_argument("--frames", type=int, default=240)
    p.add_argument("--frame-rate", type=float, default=30.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--active-joints", type=int, default=None,
                   help="active joints per class (default joints // 5, at least 2)")
    p.add_argument("--amplitude", type=float, default=30.0, help="sinusoid amplitude in degrees")
    p.add_argument("--noise-std", type=float, default=0.5, help="sample noise in degrees")
    p.add_argument("--disjoint", action="store_true",
                   help="give every class its own block of active joints")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.set_defaults(func=cmd_gen_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DatasetError, DegenerateActionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - anything else is an internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
