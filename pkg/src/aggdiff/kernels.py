"""Hot inner-loop kernels with a numba backend and a pure NumPy/Python fallback.

The backend is selected once at import time from the environment variable
``AGGDIFF_BACKEND``:

* ``auto`` (default) -- use numba if it imports, otherwise fall back;
* ``numba``          -- require numba, raise if unavailable;
* ``numpy``          -- force the plain-Python fallback.

Both backends execute the *same* function bodies (the numba path is the
fallback body compiled with ``@njit``), so results are bit-identical; only
speed differs.  ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

import numpy as np

_CHOICE = os.environ.get("AGGDIFF_BACKEND", "auto").strip().lower()
if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(f"AGGDIFF_BACKEND must be auto|numba|numpy, got {_CHOICE!r}")

if _CHOICE == "numpy":
    _njit = None
else:
    try:
        from numba import njit as _njit
    except ImportError:
        if _CHOICE == "numba":
            raise
        _njit = None

NUMBA_ENABLED = _njit is not None
BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def _maybe_jit(fn):
    if _njit is None:
        return fn
    return _njit(cache=True)(fn)


def sorted_intersection_counts(nbr_indptr, nbr_indices, src, dst, out):
    """Per edge e=(src[e],dst[e]), count |N_src ∩ N_dst| of sorted CSR rows."""
    for e in range(src.shape[0]):
        i = nbr_indptr[src[e]]
        i_end = nbr_indptr[src[e] + 1]
        j = nbr_indptr[dst[e]]
        j_end = nbr_indptr[dst[e] + 1]
        c = 0
        while i < i_end and j < j_end:
            a = nbr_indices[i]
            b = nbr_indices[j]
            if a == b:
                c += 1
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
        out[e] = c
    return out


def count_ic_attempts(out_indptr, out_indices, frontier, blocked):
    """Number of activation attempts the frontier will make this step.

    An attempt targets every out-neighbor that is not blocked (blocked =
    already active, or shielded from this cascade).
    """
    n = 0
    for fi in range(frontier.shape[0]):
        u = frontier[fi]
        for ptr in range(out_indptr[u], out_indptr[u + 1]):
            if not blocked[out_indices[ptr]]:
                n += 1
    return n


def ic_attempts(out_indptr, out_indices, w, frontier, blocked, uniforms,
                succ_u, succ_v):
    """One synchronous IC attempt round.

    Frontier nodes (ascending id) attempt each non-blocked out-neighbor in
    adjacency order, consuming one uniform draw per attempt.  Success is
    ``draw < weight`` so that a weight of 0 can never fire and a weight of
    1 always does.  Successful (activator, target) pairs are written to
    succ_u/succ_v; returns their count.
    """
    k = 0
    m = 0
    for fi in range(frontier.shape[0]):
        u = frontier[fi]
        for ptr in range(out_indptr[u], out_indptr[u + 1]):
            v = out_indices[ptr]
            if blocked[v]:
                continue
            p = uniforms[k]
            k += 1
            if p < w[ptr]:
                succ_u[m] = u
                succ_v[m] = v
                m += 1
    return m


def lt_step(in_indptr, in_indices, w_in, active, scores, theta, candidates,
            mean_mode, out_nodes, out_scores):
    """One synchronous LT evaluation over candidate nodes.

    For each candidate v the influence of its active in-neighbors is
    aggregated (sum, or mean when ``mean_mode``); v activates when the
    aggregate reaches theta[v] and at least one in-neighbor is active.
    The proposed new score is the mean score of the active in-neighbors.
    Reads are against the frozen ``active``/``scores`` arrays; the caller
    applies activations after the full sweep.
    """
    m = 0
    for ci in range(candidates.shape[0]):
        v = candidates[ci]
        wsum = 0.0
        ssum = 0.0
        cnt = 0
        for ptr in range(in_indptr[v], in_indptr[v + 1]):
            u = in_indices[ptr]
            if active[u]:
                wsum += w_in[ptr]
                ssum += scores[u]
                cnt += 1
        if cnt == 0:
            continue
        agg = wsum / cnt if mean_mode else wsum
        if agg >= theta[v]:
            out_nodes[m] = v
            out_scores[m] = ssum / cnt
            m += 1
    return m


sorted_intersection_counts_py = sorted_intersection_counts
count_ic_attempts_py = count_ic_attempts
ic_attempts_py = ic_attempts
lt_step_py = lt_step

sorted_intersection_counts = _maybe_jit(sorted_intersection_counts)
count_ic_attempts = _maybe_jit(count_ic_attempts)
ic_attempts = _maybe_jit(ic_attempts)
lt_step = _maybe_jit(lt_step)


def warmup():
    """Trigger JIT compilation of all kernels on tiny inputs."""
    indptr = np.array([0, 1, 2], dtype=np.int64)
    indices = np.array([1, 0], dtype=np.int64)
    w = np.array([0.5, 0.5])
    one = np.array([0], dtype=np.int64)
    flags = np.zeros(2, dtype=np.uint8)
    out_i = np.zeros(2, dtype=np.int64)
    out_f = np.zeros(2, dtype=np.float64)
    sorted_intersection_counts(indptr, indices, one, one, out_i)
    count_ic_attempts(indptr, indices, one, flags)
    ic_attempts(indptr, indices, w, one, flags, np.array([0.1]), out_i, out_i.copy())
    lt_step(indptr, indices, w, flags, out_f, out_f.copy(), one, False, out_i, out_f.copy())
