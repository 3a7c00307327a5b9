"""Timing comparison of the compiled kernels against their numpy fallbacks.

Runs each hot kernel on replay-sized random inputs, checks that both paths
agree, and prints min-of-5 wall times. Run with WIKIREC_DISABLE_NUMBA unset
to compare both paths; with it set only the numpy path exists.

    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from wikirec._kernels import (
    USING_NUMBA,
    _np_bonds_accumulate,
    _np_csr_dense_dot,
    _np_member_dots,
    _np_scope_window_counts,
    bonds_accumulate,
    csr_dense_dot,
    member_dots,
    scope_window_counts,
)


def random_csr(rng, n_rows, n_cols, nnz_per_row, value_range=(1, 9)):
    counts = rng.integers(0, 2 * nnz_per_row + 1, size=n_rows)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for r in range(n_rows):
        k = counts[r]
        indices[indptr[r]:indptr[r + 1]] = np.sort(
            rng.choice(n_cols, size=k, replace=False)
        ) if k else []
    data = rng.integers(*value_range, size=indptr[-1]).astype(np.float64)
    return indptr, indices, data


def build_inputs(rng, scale):
    n_editors = 10_000 * scale // 4 if scale < 4 else 10_000
    n_editors = max(n_editors, 500)
    n_articles = max(n_editors * 4 // 5, 200)
    n_projects = max(40 * scale, 10)
    n_categories = 40
    n_edits = n_editors * 40
    n_pairs = n_editors * 3

    scope_indptr, scope_indices, _ = random_csr(
        rng, n_articles, n_projects, nnz_per_row=1
    )
    edit_editors = rng.integers(0, n_editors, size=n_edits).astype(np.int64)
    edit_articles = rng.integers(0, n_articles, size=n_edits).astype(np.int64)

    ec_indptr, ec_indices, ec_data = random_csr(
        rng, n_editors, n_categories, nnz_per_row=6
    )
    proj_cat = rng.random((n_projects, n_categories))

    art_indptr, art_editors, art_counts = random_csr(
        rng, n_articles, n_editors, nnz_per_row=18
    )
    mem_indptr, mem_articles, mem_counts = random_csr(
        rng, 15, n_articles, nnz_per_row=25
    )

    pair_a = rng.integers(0, n_editors, size=n_pairs).astype(np.int64)
    pair_b = rng.integers(0, n_editors, size=n_pairs).astype(np.int64)
    keep = pair_a != pair_b
    pair_a, pair_b = pair_a[keep], pair_b[keep]
    pair_w = rng.random(pair_a.size) + 0.1
    member_indptr, member_indices, _ = random_csr(
        rng, n_projects, n_editors, nnz_per_row=6
    )

    return {
        "scope_window_counts": (
            (edit_editors, edit_articles, scope_indptr, scope_indices,
             n_editors, n_projects),
            scope_window_counts, _np_scope_window_counts,
        ),
        "csr_dense_dot": (
            (ec_indptr, ec_indices, ec_data, proj_cat),
            csr_dense_dot, _np_csr_dense_dot,
        ),
        "member_dots": (
            (art_indptr, art_editors, art_counts, mem_indptr, mem_articles,
             mem_counts, n_editors),
            member_dots, _np_member_dots,
        ),
        "bonds_accumulate": (
            (pair_a, pair_b, pair_w, member_indptr, member_indices,
             n_editors, n_projects),
            bonds_accumulate, _np_bonds_accumulate,
        ),
    }


def best_of(fn, args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="small inputs")
    args = parser.parse_args()
    scale = 1 if args.quick else 4

    rng = np.random.default_rng(7)
    cases = build_inputs(rng, scale)

    print(f"compiled path active: {USING_NUMBA}")
    header = f"{'kernel':<22} {'numpy (ms)':>12} {'compiled (ms)':>14} {'speedup':>9}  agree"
    print(header)
    print("-" * len(header))
    for name, (inputs, fast, plain) in cases.items():
        want = plain(*inputs)
        got = fast(*inputs)  # also triggers compilation before timing
        diff = float(np.max(np.abs(np.asarray(got, dtype=np.float64) - want))) if want.size else 0.0
        plain_t = best_of(plain, inputs)
        fast_t = best_of(fast, inputs)
        speedup = plain_t / fast_t if fast_t > 0 else float("inf")
        agree = "yes" if diff <= 1e-9 else f"MAX DIFF {diff:.2e}"
        print(f"{name:<22} {plain_t * 1e3:>12.2f} {fast_t * 1e3:>14.2f} "
              f"{speedup:>8.1f}x  {agree}")
        if diff > 1e-9:
            return 1
    if not USING_NUMBA:
        print("note: compiled column equals the numpy path (numba disabled or missing)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
