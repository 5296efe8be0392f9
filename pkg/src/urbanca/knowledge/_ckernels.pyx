# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree kernels. Results are identical to ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libcpp.algorithm cimport sort
from libcpp.pair cimport pair

cnp.import_array()

BACKEND = "cython"


ctypedef pair[double, cnp.int64_t] Pair


def best_split(const double[:, ::1] X, const cnp.int64_t[::1] y,
               const cnp.int64_t[::1] idx, features, Py_ssize_t max_visits,
               Py_ssize_t n_classes, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t best_f = -1
    cdef double best_t = 0.0, best_g = 0.0
    if n < 2 * min_leaf or n < 2:
        return best_f, best_t, best_g

    cdef cnp.int64_t[::1] feats = np.ascontiguousarray(features, dtype=np.int64)
    cdef Py_ssize_t nf = feats.shape[0]
    cdef Pair* buf = <Pair*>malloc(n * sizeof(Pair))
    cdef double* cl = <double*>malloc(n_classes * sizeof(double))
    cdef double* tot = <double*>malloc(n_classes * sizeof(double))
    if buf == NULL or cl == NULL or tot == NULL:
        free(buf); free(cl); free(tot)
        raise MemoryError()

    cdef Py_ssize_t visits = 0, fi, f, i, k, nl_i
    cdef double fn = <double>n, nl, nr, acc, d, g, a, b, t
    cdef double feat_g, feat_t
    try:
        with nogil:
            for k in range(n_classes):
                tot[k] = 0.0
            for i in range(n):
                tot[y[idx[i]]] += 1.0
            for fi in range(nf):
                if visits >= max_visits:
                    break
                f = feats[fi]
                for i in range(n):
                    buf[i].first = X[idx[i], f]
                    buf[i].second = y[idx[i]]
                sort(buf, buf + n)
                if buf[0].first == buf[n - 1].first:
                    continue
                visits += 1
                for k in range(n_classes):
                    cl[k] = 0.0
                feat_g = 0.0
                feat_t = 0.0
                for i in range(n - 1):
                    cl[buf[i].second] += 1.0
                    if not (buf[i].first < buf[i + 1].first):
                        continue
                    nl_i = i + 1
                    if nl_i < min_leaf or n - nl_i < min_leaf:
                        continue
                    nl = <double>nl_i
                    nr = fn - nl
                    acc = 0.0
                    for k in range(n_classes):
                        d = cl[k] * nr - (tot[k] - cl[k]) * nl
                        if k == 0:
                            acc = d * d
                        else:
                            acc = acc + d * d
                    g = acc / (fn * nl * nr) / fn
                    if g > feat_g:
                        feat_g = g
                        a = buf[i].first
                        b = buf[i + 1].first
                        t = 0.5 * (a + b)
                        if t >= b:
                            t = a
                        feat_t = t
                if feat_g <= 0.0:
                    continue
                if feat_g > best_g or (feat_g == best_g and f < best_f):
                    best_f = f
                    best_t = feat_t
                    best_g = feat_g
    finally:
        free(buf)
        free(cl)
        free(tot)
    return best_f, best_t, best_g


def apply_tree(const double[:, ::1] X, const cnp.int64_t[::1] feature,
               const double[::1] threshold, const cnp.int64_t[::1] left,
               const cnp.int64_t[::1] right):
    cdef Py_ssize_t n = X.shape[0], i
    cdef cnp.int64_t node, f
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    with nogil:
        for i in range(n):
            node = 0
            f = feature[node]
            while f >= 0:
                if X[i, f] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
                f = feature[node]
            o[i] = node
    return out
