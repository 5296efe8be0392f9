"""Pure numpy implementation of the tree kernels.

Must agree bit-for-bit with ``_ckernels.pyx``: both evaluate the Gini
decrease of a split as::

    sum_k (cl[k] * nr - cr[k] * nl) ** 2 / (n * nl * nr) / n

accumulated over classes in ascending order. Every term is an exact integer
in float64, so a zero decrease is detected exactly.
"""
import numpy as np

BACKEND = "python"


def best_split(X, y, idx, features, max_visits, n_classes, min_leaf):
    """Best threshold split of rows ``idx`` over candidate ``features``.

    Features are visited in the given order; constant ones are skipped and
    do not count towards ``max_visits``. Returns ``(feature, threshold,
    gain)`` with ``feature == -1`` when no split has positive gain. Ties go
    to the lower feature index, then the lower threshold.
    """
    n = idx.shape[0]
    best_f, best_t, best_g = -1, 0.0, 0.0
    if n < 2 * min_leaf or n < 2:
        return best_f, best_t, best_g
    yy = y[idx]
    visits = 0
    fn = float(n)
    for f in features:
        if visits >= max_visits:
            break
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        v = vals[order]
        if v[0] == v[-1]:
            continue
        visits += 1
        onehot = np.zeros((n, n_classes), dtype=np.float64)
        onehot[np.arange(n), yy[order]] = 1.0
        cl = np.cumsum(onehot, axis=0)[:-1]
        total = cl[-1] + onehot[-1]
        # candidate positions: split after row i when v[i] < v[i+1]
        pos = np.flatnonzero(v[:-1] < v[1:])
        nl = pos + 1
        ok = (nl >= min_leaf) & (n - nl >= min_leaf)
        pos = pos[ok]
        if pos.size == 0:
            continue
        nl = (pos + 1).astype(np.float64)
        nr = fn - nl
        cl = cl[pos]
        cr = total - cl
        acc = None
        for k in range(n_classes):
            d = cl[:, k] * nr - cr[:, k] * nl
            acc = d * d if acc is None else acc + d * d
        gain = acc / (fn * nl * nr) / fn
        j = int(np.argmax(gain))
        g = gain[j]
        if g <= 0.0:
            continue
        if g > best_g or (g == best_g and f < best_f):
            a, b = v[pos[j]], v[pos[j] + 1]
            t = 0.5 * (a + b)
            if t >= b:
                t = a
            best_f, best_t, best_g = int(f), float(t), float(g)
    return best_f, best_t, best_g


def apply_tree(X, feature, threshold, left, right):
    """Leaf node id reached by every row of ``X``."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    while active.size:
        f = feature[node[active]]
        internal = f >= 0
        active = active[internal]
        if not active.size:
            break
        cur = node[active]
        go_left = X[active, feature[cur]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
    return node
