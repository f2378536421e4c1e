"""1-nearest-neighbor evaluation: split plans, metrics, MIJ and noise sweeps."""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .descriptor import ActionMatrix, CodeDescriptor, compute_descriptor
from .similarity import MetricSpec, similarity_matrix

__all__ = [
    "SplitPlan",
    "EvalReport",
    "SweepCell",
    "NoiseRow",
    "knn1_classify",
    "evaluate",
    "mij_sweep",
    "inject_agwn",
    "noise_sweep",
]


@dataclass(frozen=True, eq=False)
class SplitPlan:
    """A partition of dataset indices into (train, test) folds."""

    kind: str
    folds: tuple[tuple[np.ndarray, np.ndarray], ...]

    @staticmethod
    def stratified_kfold(labels, k: int, seed: int) -> "SplitPlan":
        """Seeded stratified k-fold: each class is spread across folds as evenly as counts allow.

        Classes with fewer items than folds trigger a warning and get a
        best-effort spread instead of an error.
        """
        labels = list(labels)
        n = len(labels)
        if n == 0:
            raise ValueError("cannot split an empty dataset")
        if not 2 <= k <= n:
            raise ValueError(f"fold count must be in [2, {n}], got {k}")
        rng = np.random.default_rng(seed)
        counts = {label: sum(1 for x in labels if x == label) for label in set(labels)}
        short = sorted(str(label) for label, c in counts.items() if c < k)
        if short:
            warnings.warn(
                f"{len(short)} class(es) have fewer than {k} items "
                f"({', '.join(short[:5])}{'...' if len(short) > 5 else ''}); "
                "stratification is best-effort",
                stacklevel=2,
            )
        buckets: list[list[int]] = [[] for _ in range(k)]
        cursor = 0
        for label in sorted(set(labels)):
            idx = np.array([i for i, x in enumerate(labels) if x == label])
            rng.shuffle(idx)
            for i in idx:
                buckets[cursor].append(int(i))
                cursor = (cursor + 1) % k
        everything = set(range(n))
        folds = []
        for bucket in buckets:
            test = np.array(sorted(bucket), dtype=np.intp)
            train = np.array(sorted(everything - set(bucket)), dtype=np.intp)
            folds.append((train, test))
        return SplitPlan("stratified-kfold", tuple(folds))

    @staticmethod
    def cross_subject(subject_ids, train_subjects) -> "SplitPlan":
        """Single train/test split by performer identity."""
        subject_ids = list(subject_ids)
        train_set = set(train_subjects)
        unknown = sorted(train_set - set(subject_ids))
        if unknown:
            raise ValueError(f"unknown subject(s): {', '.join(str(s) for s in unknown)}")
        train = np.array(
            [i for i, s in enumerate(subject_ids) if s in train_set], dtype=np.intp
        )
        test = np.array(
            [i for i, s in enumerate(subject_ids) if s not in train_set], dtype=np.intp
        )
        if train.size == 0:
            raise ValueError("training split is empty")
        if test.size == 0:
            raise ValueError("every subject is in the training set; test split is empty")
        return SplitPlan("cross-subject", ((train, test),))


@dataclass(eq=False)
class EvalReport:
    """Classification outcome: confusion counts, accuracy, precision/recall, timings."""

    class_labels: list[str]
    confusion: np.ndarray
    accuracy: float
    precision_per_class: np.ndarray
    recall_per_class: np.ndarray
    macro_precision: float
    macro_recall: float
    accuracy_mean: float
    accuracy_std: float
    precision_mean: float
    precision_std: float
    recall_mean: float
    recall_std: float
    fold_accuracies: list[float]
    fold_confusions: list[np.ndarray]
    descriptor_time: float
    classify_time: float

    def to_dict(self) -> dict:
        return {
            "classes": list(self.class_labels),
            "accuracy": {
                "overall": self.accuracy,
                "mean": self.accuracy_mean,
                "std": self.accuracy_std,
                "per_fold": list(self.fold_accuracies),
            },
            "precision": {
                "macro": self.macro_precision,
                "mean": self.precision_mean,
                "std": self.precision_std,
                "per_class": {
                    label: float(v)
                    for label, v in zip(self.class_labels, self.precision_per_class)
                },
            },
            "recall": {
                "macro": self.macro_recall,
                "mean": self.recall_mean,
                "std": self.recall_std,
                "per_class": {
                    label: float(v)
                    for label, v in zip(self.class_labels, self.recall_per_class)
                },
            },
            "confusion": self.confusion.tolist(),
            "folds": [
                {"index": i, "accuracy": acc, "confusion": conf.tolist()}
                for i, (acc, conf) in enumerate(zip(self.fold_accuracies, self.fold_confusions))
            ],
            "timing": {
                "descriptor_s": self.descriptor_time,
                "classify_s": self.classify_time,
            },
        }


def knn1_classify(test: CodeDescriptor, training, spec: MetricSpec):
    """Label of the nearest training item; ties go to the lowest training index."""
    training = list(training)
    if not training:
        raise ValueError("training set is empty")
    scores = similarity_matrix([test], [d for d, _ in training], spec)[0]
    best = int(scores.argmax()) if spec.higher_is_better else int(scores.argmin())
    return training[best][1]


def _class_index(labels) -> tuple[list[str], dict]:
    classes = sorted(set(labels))
    return classes, {c: i for i, c in enumerate(classes)}


def _fold_confusion(query_pool, ref_pool, labels, class_index, train_idx, test_idx, spec):
    queries = [query_pool[i] for i in test_idx]
    references = [ref_pool[i] for i in train_idx]
    matrix = similarity_matrix(queries, references, spec)
    best = matrix.argmax(axis=1) if spec.higher_is_better else matrix.argmin(axis=1)
    conf = np.zeros((len(class_index), len(class_index)), dtype=np.int64)
    for row, i in enumerate(test_idx):
        predicted = labels[int(train_idx[int(best[row])])]
        conf[class_index[labels[int(i)]], class_index[predicted]] += 1
    return conf


def _fold_metrics(conf: np.ndarray) -> tuple[float, float, float]:
    total = conf.sum()
    accuracy = float(np.trace(conf) / total)
    diag = np.diag(conf).astype(np.float64)
    col = conf.sum(axis=0).astype(np.float64)
    row = conf.sum(axis=1).astype(np.float64)
    precision = np.divide(diag, col, out=np.zeros_like(diag), where=col > 0)
    recall = np.divide(diag, row, out=np.zeros_like(diag), where=row > 0)
    present = row > 0  # classes missing from this fold's test set stay out of the macro
    return accuracy, float(precision[present].mean()), float(recall[present].mean())


def _run_folds(folds, fn, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, folds))
    return [fn(fold) for fold in folds]


def _aggregate_report(fold_confusions, descriptor_time, classify_time, class_labels):
    fold_stats = [_fold_metrics(conf) for conf in fold_confusions]
    fold_acc = [s[0] for s in fold_stats]
    fold_prec = [s[1] for s in fold_stats]
    fold_rec = [s[2] for s in fold_stats]
    confusion = np.sum(fold_confusions, axis=0)
    accuracy, macro_precision, macro_recall = _fold_metrics(confusion)
    diag = np.diag(confusion).astype(np.float64)
    col = confusion.sum(axis=0).astype(np.float64)
    row = confusion.sum(axis=1).astype(np.float64)
    precision_per_class = np.divide(diag, col, out=np.zeros_like(diag), where=col > 0)
    recall_per_class = np.divide(diag, row, out=np.zeros_like(diag), where=row > 0)
    return EvalReport(
        class_labels=class_labels,
        confusion=confusion,
        accuracy=accuracy,
        precision_per_class=precision_per_class,
        recall_per_class=recall_per_class,
        macro_precision=macro_precision,
        macro_recall=macro_recall,
        accuracy_mean=float(np.mean(fold_acc)),
        accuracy_std=float(np.std(fold_acc)),
        precision_mean=float(np.mean(fold_prec)),
        precision_std=float(np.std(fold_prec)),
        recall_mean=float(np.mean(fold_rec)),
        recall_std=float(np.std(fold_rec)),
        fold_accuracies=fold_acc,
        fold_confusions=list(fold_confusions),
        descriptor_time=descriptor_time,
        classify_time=classify_time,
    )


def evaluate(dataset, jm: int, spec: MetricSpec, plan: SplitPlan, workers: int = 1) -> EvalReport:
    """Run 1-NN classification over every fold of a plan and aggregate the metrics.

    Descriptors are computed once for the whole dataset. Folds are
    independent; with ``workers > 1`` they run in threads with results
    identical to the sequential order.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("dataset is empty")
    labels = [a.class_label for a in dataset]
    class_labels, class_index = _class_index(labels)
    t0 = time.perf_counter()
    descriptors = [compute_descriptor(a, jm) for a in dataset]
    descriptor_time = time.perf_counter() - t0

    def run(fold):
        train_idx, test_idx = fold
        return _fold_confusion(descriptors, descriptors, labels, class_index, train_idx, test_idx, spec)

    t1 = time.perf_counter()
    fold_confusions = _run_folds(plan.folds, run, workers)
    classify_time = time.perf_counter() - t1
    return _aggregate_report(fold_confusions, descriptor_time, classify_time, class_labels)


@dataclass(frozen=True, eq=False)
class SweepCell:
    """One (jm, metric) point of a MIJ-count sweep."""

    jm: int
    spec: MetricSpec
    accuracy_mean: float
    accuracy_std: float
    descriptor_len: int


def mij_sweep(dataset, jm_values, specs, plan: SplitPlan, workers: int = 1) -> list[SweepCell]:
    """Evaluate every (jm, spec) combination; also reports the stacked descriptor size."""
    dataset = list(dataset)
    if not dataset:
        raise ValueError("dataset is empty")
    num_joints = dataset[0].num_joints
    for jm in jm_values:
        if not 1 <= jm <= num_joints:
            raise ValueError(f"jm={jm} is outside [1, {num_joints}]")
    cells = []
    for jm in jm_values:
        for spec in specs:
            report = evaluate(dataset, jm, spec, plan, workers=workers)
            cells.append(
                SweepCell(
                    jm=int(jm),
                    spec=spec,
                    accuracy_mean=report.accuracy_mean,
                    accuracy_std=report.accuracy_std,
                    descriptor_len=jm * (jm + 7) // 2,
                )
            )
    return cells


def inject_agwn(action: ActionMatrix, sigma_deg: float, seed) -> ActionMatrix:
    """Additive Gaussian white noise on every sample, in degrees.

    Operates on raw angles, before any filtering; sigma 0 returns an
    identical copy. Deterministic for a fixed seed.
    """
    if sigma_deg < 0:
        raise ValueError(f"sigma_deg must be non-negative, got {sigma_deg}")
    if sigma_deg == 0:
        return action.with_samples(action.samples)
    rng = np.random.default_rng(seed)
    noisy = action.samples + rng.normal(0.0, sigma_deg, size=action.samples.shape)
    return action.with_samples(noisy)


@dataclass(frozen=True, eq=False)
class NoiseRow:
    sigma_deg: float
    accuracy_mean: float
    accuracy_std: float


def noise_sweep(
    dataset,
    sigmas,
    jm: int,
    spec: MetricSpec,
    plan: SplitPlan,
    seed: int,
    preprocess=None,
    corrupt_train: bool = False,
    workers: int = 1,
) -> list[NoiseRow]:
    """Accuracy as a function of injected noise level.

    Noise lands on raw angles and ``preprocess`` (typically the low-pass
    filter) runs afterwards, so the injection-before-filtering ordering
    holds by construction. By default only test items are corrupted;
    ``corrupt_train`` extends the corruption to the training pool. The
    per-item noise streams derive from (seed, sigma index, item index),
    independent of scheduling order.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("dataset is empty")
    prep = preprocess if preprocess is not None else (lambda action: action)
    labels = [a.class_label for a in dataset]
    class_labels, class_index = _class_index(labels)
    clean = [compute_descriptor(prep(a), jm) for a in dataset]
    rows = []
    for s_idx, sigma in enumerate(sigmas):
        noisy = [
            compute_descriptor(prep(inject_agwn(a, float(sigma), seed=[seed, s_idx, i])), jm)
            for i, a in enumerate(dataset)
        ]
        train_pool = noisy if corrupt_train else clean

        def run(fold):
            train_idx, test_idx = fold
            return _fold_confusion(noisy, train_pool, labels, class_index, train_idx, test_idx, spec)

        fold_confusions = _run_folds(plan.folds, run, workers)
        fold_acc = [_fold_metrics(conf)[0] for conf in fold_confusions]
        rows.append(
            NoiseRow(
                sigma_deg=float(sigma),
                accuracy_mean=float(np.mean(fold_acc)),
                accuracy_std=float(np.std(fold_acc)),
            )
        )
    return rows
