"""Brute-force reference implementations used to cross-check the library.

Everything here is written with explicit loops and scalar arithmetic so the
expected values stay independent of the vectorized code paths under test.
"""

import math

FLAT_FLOOR = 1e-12


def population_variance(column):
    n = len(column)
    mean = sum(column) / n
    return sum((x - mean) ** 2 for x in column) / n


def finite_difference_velocity(column, frame_rate):
    n = len(column)
    out = []
    for t in range(n):
        if t == 0:
            d = column[1] - column[0]
        elif t == n - 1:
            d = column[-1] - column[-2]
        else:
            d = (column[t + 1] - column[t - 1]) / 2.0
        out.append(d * frame_rate)
    return out


def pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    vx = sum((a - mx) ** 2 for a in x) / n
    vy = sum((b - my) ** 2 for b in y) / n
    if vx < FLAT_FLOOR or vy < FLAT_FLOOR:
        return 0.0
    return cov / (math.sqrt(vx) * math.sqrt(vy))


def correlation_matrix(descriptor):
    """Rebuild the full symmetric correlation matrix from the stored upper triangle."""
    jm = descriptor.jm
    matrix = [[1.0] * jm for _ in range(jm)]
    k = 0
    for p in range(jm):
        for q in range(p + 1, jm):
            matrix[p][q] = matrix[q][p] = float(descriptor.corr[k])
            k += 1
    return matrix


def csm_score(a, b):
    """Term-by-term CSM over unordered common MIJ pairs, explicit loops only."""
    assert a.jm == b.jm
    pos_a = {int(x): i for i, x in enumerate(a.mij)}
    pos_b = {int(x): i for i, x in enumerate(b.mij)}
    corr_a = correlation_matrix(a)
    corr_b = correlation_matrix(b)
    shared = sorted(set(pos_a) & set(pos_b))
    total = 0.0
    for u in range(len(shared)):
        for v in range(u + 1, len(shared)):
            i, j = shared[u], shared[v]
            ai, aj = pos_a[i], pos_a[j]
            bi, bj = pos_b[i], pos_b[j]
            weight = 1.0 - 0.5 * abs(corr_a[ai][aj] - corr_b[bi][bj])
            term = (
                float(a.var_norm[ai]) + float(a.var_norm[aj])
                + float(b.var_norm[bi]) + float(b.var_norm[bj])
            )
            term += (
                float(a.vmax_norm[ai]) + float(a.vmax_norm[aj])
                + float(b.vmax_norm[bi]) + float(b.vmax_norm[bj])
            )
            term += (
                float(a.vmin_norm[ai]) + float(a.vmin_norm[aj])
                + float(b.vmin_norm[bi]) + float(b.vmin_norm[bj])
            )
            total += weight * term
    return total


def _slices(descriptor, features):
    names = {
        "var": ("var_norm",),
        "var-vel": ("var_norm", "vmax_norm", "vmin_norm"),
        "full": ("var_norm", "vmax_norm", "vmin_norm", "corr"),
    }[features]
    values = []
    for name in names:
        values.extend(float(v) for v in getattr(descriptor, name))
    return values


def manhattan_distance(a, b, features):
    return sum(abs(x - y) for x, y in zip(_slices(a, features), _slices(b, features)))


def euclidean_distance(a, b, features):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(_slices(a, features), _slices(b, features))))
