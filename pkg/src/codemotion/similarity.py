"""Similarity between action descriptors.

The correlation-based similarity measure (CSM) scores the MIJ pairs two
actions have in common: each common pair contributes the variance and
extreme-velocity mass of both actions at those joints, weighted by how
well the actions agree on that pair's correlation. Euclidean and
Manhattan distances over stacked feature slices serve as baselines.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .descriptor import CodeDescriptor

__all__ = [
    "Metric",
    "FeatureSet",
    "MetricSpec",
    "common_pairs",
    "correlation_weight",
    "csm",
    "baseline_distance",
    "similarity_matrix",
]


class Metric(Enum):
    CSM = "csm"
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"


class FeatureSet(Enum):
    VARIANCE = "var"
    VARIANCE_VELOCITY = "var-vel"
    FULL = "full"


@dataclass(frozen=True)
class MetricSpec:
    """Choice of similarity function and the feature subset it consumes."""

    kind: Metric
    features: FeatureSet = FeatureSet.FULL

    def __post_init__(self) -> None:
        if self.kind is Metric.CSM and self.features is not FeatureSet.FULL:
            raise ValueError(
                "CSM consumes variances, velocities and correlations; features must be 'full'"
            )

    @property
    def higher_is_better(self) -> bool:
        """CSM is a similarity (max wins); the baselines are distances (min wins)."""
        return self.kind is Metric.CSM

    @staticmethod
    def parse(kind: str, features: str = "full") -> "MetricSpec":
        try:
            metric = Metric(kind)
        except ValueError:
            names = ", ".join(m.value for m in Metric)
            raise ValueError(f"unknown metric {kind!r}; expected one of {names}") from None
        try:
            feats = FeatureSet(features)
        except ValueError:
            names = ", ".join(f.value for f in FeatureSet)
            raise ValueError(f"unknown feature set {features!r}; expected one of {names}") from None
        return MetricSpec(metric, feats)


def common_pairs(mij_a, mij_b) -> list[tuple[int, int]]:
    """Unordered joint-index pairs drawn from the shared MIJ of two descriptors.

    Each pair appears exactly once, as (i, j) with i < j, sorted.
    """
    shared = sorted(set(int(x) for x in mij_a) & set(int(x) for x in mij_b))
    return [(shared[u], shared[v]) for u in range(len(shared)) for v in range(u + 1, len(shared))]


def correlation_weight(corr_a: float, corr_b: float) -> float:
    """Agreement weight for one common pair: 1 - 0.5 * |c_a - c_b|, in [0, 1]."""
    return 1.0 - 0.5 * abs(corr_a - corr_b)


def _corr_at(descriptor: CodeDescriptor, p: int, q: int) -> float:
    # p, q are rank positions inside mij; corr is the row-major upper triangle.
    if p > q:
        p, q = q, p
    jm = descriptor.jm
    flat = p * jm - p * (p + 1) // 2 + (q - p - 1)
    return float(descriptor.corr[flat])


def csm(a: CodeDescriptor, b: CodeDescriptor) -> float:
    """Correlation-based similarity between two descriptors with the same jm.

    Sums, once per unordered common MIJ pair, the correlation-agreement
    weight times the two actions' normalized variances and signed extreme
    velocities at the pair's joints. Disjoint MIJ sets give exactly 0.
    Symmetric: csm(a, b) == csm(b, a) bit for bit.
    """
    if a.jm != b.jm:
        raise ValueError(f"descriptors built with different jm ({a.jm} vs {b.jm}) are not comparable")
    pos_a = {int(j): p for p, j in enumerate(a.mij)}
    pos_b = {int(j): p for p, j in enumerate(b.mij)}
    shared = sorted(pos_a.keys() & pos_b.keys())
    g_a = a.var_norm + a.vmax_norm + a.vmin_norm
    g_b = b.var_norm + b.vmax_norm + b.vmin_norm
    score = 0.0
    for u in range(len(shared)):
        for v in range(u + 1, len(shared)):
            i, j = shared[u], shared[v]
            weight = correlation_weight(
                _corr_at(a, pos_a[i], pos_a[j]), _corr_at(b, pos_b[i], pos_b[j])
            )
            # Grouped per descriptor first so the float result is symmetric in (a, b).
            mass_a = g_a[pos_a[i]] + g_a[pos_a[j]]
            mass_b = g_b[pos_b[i]] + g_b[pos_b[j]]
            score += weight * (mass_a + mass_b)
    return score


_FEATURE_SLICES = {
    FeatureSet.VARIANCE: ("var_norm",),
    FeatureSet.VARIANCE_VELOCITY: ("var_norm", "vmax_norm", "vmin_norm"),
    FeatureSet.FULL: ("var_norm", "vmax_norm", "vmin_norm", "corr"),
}


def _feature_vector(descriptor: CodeDescriptor, features: FeatureSet) -> np.ndarray:
    return np.concatenate([getattr(descriptor, name) for name in _FEATURE_SLICES[features]])


def baseline_distance(a: CodeDescriptor, b: CodeDescriptor, spec: MetricSpec) -> float:
    """L1 or L2 distance over the selected feature slices, aligned by MIJ rank.

    The mij index slots never enter the distance; joint indices are labels,
    not coordinates.
    """
    if spec.kind is Metric.CSM:
        raise ValueError("baseline_distance handles Euclidean/Manhattan only; use csm() for CSM")
    if a.jm != b.jm:
        raise ValueError(f"descriptors built with different jm ({a.jm} vs {b.jm}) are not comparable")
    diff = _feature_vector(a, spec.features) - _feature_vector(b, spec.features)
    if spec.kind is Metric.MANHATTAN:
        return float(np.abs(diff).sum())
    return float(np.sqrt((diff * diff).sum()))


def _check_uniform_jm(descriptors) -> int | None:
    jm = None
    for d in descriptors:
        if jm is None:
            jm = d.jm
        elif d.jm != jm:
            raise ValueError(f"descriptors built with different jm ({jm} vs {d.jm}) are not comparable")
    return jm


def similarity_matrix(queries, references, spec: MetricSpec) -> np.ndarray:
    """Dense score (CSM) or distance (baselines) matrix, queries by references.

    Rows are independent and the result is identical to evaluating every
    pair with :func:`csm` or :func:`baseline_distance` in a double loop,
    up to float summation order.
    """
    queries = list(queries)
    references = list(references)
    _check_uniform_jm(queries + references)
    if not queries or not references:
        return np.zeros((len(queries), len(references)), dtype=np.float64)
    if spec.kind is Metric.CSM:
        return _csm_matrix(queries, references)
    feats_q = np.stack([_feature_vector(d, spec.features) for d in queries])
    feats_r = np.stack([_feature_vector(d, spec.features) for d in references])
    metric = "cityblock" if spec.kind is Metric.MANHATTAN else "euclidean"
    return cdist(feats_q, feats_r, metric=metric)


@dataclass(eq=False)
class _DenseDescriptors:
    """Descriptor list scattered onto dense per-joint arrays for vectorized CSM."""

    mask: np.ndarray  # (n, num_joints) 1.0 where the joint is in mij
    mass: np.ndarray  # (n, num_joints) var_norm + vmax_norm + vmin_norm at that joint
    corr: np.ndarray  # (n, num_joints, num_joints) symmetric, 0 outside mij pairs


def _densify(descriptors, num_joints: int) -> _DenseDescriptors:
    n = len(descriptors)
    mask = np.zeros((n, num_joints))
    mass = np.zeros((n, num_joints))
    corr = np.zeros((n, num_joints, num_joints))
    for row, d in enumerate(descriptors):
        mij = d.mij
        mask[row, mij] = 1.0
        mass[row, mij] = d.var_norm + d.vmax_norm + d.vmin_norm
        if d.jm > 1:
            iu, ju = np.triu_indices(d.jm, k=1)
            corr[row, mij[iu], mij[ju]] = d.corr
            corr[row, mij[ju], mij[iu]] = d.corr
    return _DenseDescriptors(mask, mass, corr)


def _csm_matrix(queries, references) -> np.ndarray:
    num_joints = 1 + max(int(d.mij.max()) for d in queries + references)
    q = _densify(queries, num_joints)
    r = _densify(references, num_joints)
    off_diagonal = 1.0 - np.eye(num_joints)
    scores = np.empty((len(queries), len(references)))
    for row in range(len(queries)):
        shared = q.mask[row] * r.mask  # (nr, J)
        pair = shared[:, :, None] * shared[:, None, :] * off_diagonal
        weight = 1.0 - 0.5 * np.abs(q.corr[row][None, :, :] - r.corr)
        mass = q.mass[row][None, :] + r.mass  # (nr, J)
        bracket = mass[:, :, None] + mass[:, None, :]
        # Each unordered pair is counted twice in the full i != j sum.
        scores[row] = 0.5 * (pair * weight * bracket).sum(axis=(1, 2))
    return scores
