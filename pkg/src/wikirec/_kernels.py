"""Hot numeric loops behind the batch scoring path.

Each kernel exists twice: a numba @njit version and a pure-numpy version
with identical semantics. Set WIKIREC_DISABLE_NUMBA=1 to force the numpy
path (also used automatically when numba is unavailable). USING_NUMBA
reports which path is live.

All kernels take pre-sliced arrays; callers own window selection.
"""

from __future__ import annotations

import os

import numpy as np


def _np_scope_window_counts(edit_editors, edit_articles, scope_indptr, scope_indices,
                            n_editors, n_projects):
    # expand each edit into one (editor, project) hit per scoping project
    starts = scope_indptr[edit_articles]
    degrees = scope_indptr[edit_articles + 1] - starts
    rows = np.repeat(edit_editors, degrees)
    if rows.size == 0:
        return np.zeros((n_editors, n_projects), dtype=np.int64)
    # concatenated ranges starts[i]..starts[i]+degrees[i] without a python loop
    offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(degrees)[:-1])), degrees)
    cols = scope_indices[np.arange(rows.size) + offsets]
    flat = np.bincount(rows * n_projects + cols, minlength=n_editors * n_projects)
    return flat.reshape(n_editors, n_projects).astype(np.int64)


def _np_csr_dense_dot(indptr, indices, data, dense):
    n_rows = indptr.shape[0] - 1
    n_out, dim = dense.shape
    out = np.zeros((n_rows, n_out), dtype=np.float64)
    chunk = 2048
    dense_t = dense.T
    for lo in range(0, n_rows, chunk):
        hi = min(lo + chunk, n_rows)
        block = np.zeros((hi - lo, dim), dtype=np.float64)
        s, e = indptr[lo], indptr[hi]
        rows = np.repeat(np.arange(lo, hi), np.diff(indptr[lo:hi + 1])) - lo
        block[rows, indices[s:e]] = data[s:e]
        out[lo:hi] = block @ dense_t
    return out


def _np_member_dots(art_indptr, art_editors, art_counts,
                    mem_indptr, mem_articles, mem_counts, n_editors):
    n_members = mem_indptr.shape[0] - 1
    out = np.zeros((n_editors, n_members), dtype=np.float64)
    for m in range(n_members):
        col = out[:, m]
        for j in range(mem_indptr[m], mem_indptr[m + 1]):
            a = mem_articles[j]
            c = float(mem_counts[j])
            s, e = art_indptr[a], art_indptr[a + 1]
            # editor ids are unique within one article posting list
            col[art_editors[s:e]] += art_counts[s:e] * c
    return out


def _np_bonds_accumulate(pair_a, pair_b, pair_w, member_indptr, member_indices,
                         n_editors, n_projects):
    out = np.zeros((n_editors, n_projects), dtype=np.float64)
    is_member = np.zeros(n_editors, dtype=bool)
    for p in range(n_projects):
        members = member_indices[member_indptr[p]:member_indptr[p + 1]]
        if members.size == 0 or pair_a.size == 0:
            continue
        is_member[members] = True
        a_in = is_member[pair_a]
        b_in = is_member[pair_b]
        np.add.at(out[:, p], pair_b[a_in], pair_w[a_in])
        np.add.at(out[:, p], pair_a[b_in], pair_w[b_in])
        is_member[members] = False
    return out


USING_NUMBA = False
_disabled = os.environ.get("WIKIREC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

if not _disabled:
    try:
        from numba import njit

        @njit(cache=True)
        def _nb_scope_window_counts(edit_editors, edit_articles, scope_indptr,
                                    scope_indices, n_editors, n_projects):
            out = np.zeros((n_editors, n_projects), dtype=np.int64)
            for i in range(edit_editors.shape[0]):
                e = edit_editors[i]
                a = edit_articles[i]
                for j in range(scope_indptr[a], scope_indptr[a + 1]):
                    out[e, scope_indices[j]] += 1
            return out

        @njit(cache=True)
        def _nb_csr_dense_dot(indptr, indices, data, dense):
            n_rows = indptr.shape[0] - 1
            n_out = dense.shape[0]
            out = np.zeros((n_rows, n_out), dtype=np.float64)
            for r in range(n_rows):
                for j in range(indptr[r], indptr[r + 1]):
                    v = data[j]
                    c = indices[j]
                    for p in range(n_out):
                        out[r, p] += v * dense[p, c]
            return out

        @njit(cache=True)
        def _nb_member_dots(art_indptr, art_editors, art_counts,
                            mem_indptr, mem_articles, mem_counts, n_editors):
            n_members = mem_indptr.shape[0] - 1
            out = np.zeros((n_editors, n_members), dtype=np.float64)
            for m in range(n_members):
                for j in range(mem_indptr[m], mem_indptr[m + 1]):
                    a = mem_articles[j]
                    c = float(mem_counts[j])
                    for t in range(art_indptr[a], art_indptr[a + 1]):
                        out[art_editors[t], m] += art_counts[t] * c
            return out

        @njit(cache=True)
        def _nb_bonds_accumulate(pair_a, pair_b, pair_w, member_indptr,
                                 member_indices, n_editors, n_projects):
            out = np.zeros((n_editors, n_projects), dtype=np.float64)
            stamp = np.zeros(n_editors, dtype=np.int64)
            for p in range(n_projects):
                version = p + 1
                for j in range(member_indptr[p], member_indptr[p + 1]):
                    stamp[member_indices[j]] = version
                for k in range(pair_a.shape[0]):
                    a = pair_a[k]
                    b = pair_b[k]
                    w = pair_w[k]
                    if stamp[a] == version:
                        out[b, p] += w
                    if stamp[b] == version:
                        out[a, p] += w
            return out

        USING_NUMBA = True
    except ImportError:
        pass

if USING_NUMBA:
    scope_window_counts = _nb_scope_window_counts
    csr_dense_dot = _nb_csr_dense_dot
    member_dots = _nb_member_dots
    bonds_accumulate = _nb_bonds_accumulate
else:
    scope_window_counts = _np_scope_window_counts
    csr_dense_dot = _np_csr_dense_dot
    member_dots = _np_member_dots
    bonds_accumulate = _np_bonds_accumulate
