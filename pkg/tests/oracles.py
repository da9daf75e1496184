"""Independent brute-force oracles the engine tests check against.

Everything here is deliberately naive (enumeration, transitive closure,
full sweeps, O(n^2) pair counting) and shares no code with the package.
"""

import itertools
import math

import numpy as np


def scc_partition(n, edges):
    """Strongly connected components via transitive-closure reachability."""
    reach = [[False] * n for _ in range(n)]
    for i in range(n):
        reach[i][i] = True
    for u, v in edges:
        reach[u][v] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    comps = []
    assigned = [False] * n
    for i in range(n):
        if assigned[i]:
            continue
        comp = {j for j in range(n) if reach[i][j] and reach[j][i]}
        for j in comp:
            assigned[j] = True
        comps.append(frozenset(comp))
    return comps


def jaccard_by_sets(n, edges, u, v):
    """Neighborhood overlap recomputed with explicit python sets."""
    nbrs = [set() for _ in range(n)]
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    nu = nbrs[u] - {u}
    nv = nbrs[v] - {v}
    union = nu | nv
    if not union:
        return 0.0
    return len(nu & nv) / len(union)


def ic_exact_activation_probs(n, edges, w, seeds):
    """Exact per-node activation probabilities by live-edge enumeration.

    Each edge is independently live with probability w[e]; a node activates
    iff it is reachable from a seed over live edges.
    """
    m = len(edges)
    probs = np.zeros(n)
    for mask in range(1 << m):
        p = 1.0
        live = []
        for e in range(m):
            if mask >> e & 1:
                p *= w[e]
                live.append(edges[e])
            else:
                p *= 1.0 - w[e]
            if p == 0.0:
                break
        if p == 0.0:
            continue
        adj = [[] for _ in range(n)]
        for a, b in live:
            adj[a].append(b)
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        for v in seen:
            probs[v] += p
    return probs


def lt_fixpoint(n, edges, w, theta, seeds, scores0, mean_mode):
    """Naive synchronous LT: re-sweep every inactive node until no change.

    Activation needs at least one active in-neighbor and the (sum or mean)
    aggregated in-weight to reach theta; the new score is the mean score of
    the active in-neighbors at that moment.  In-neighbors are visited in
    ascending id order so float accumulation matches a sorted-CSR engine.
    """
    in_nbrs = [[] for _ in range(n)]
    for (a, b), x in zip(edges, w):
        in_nbrs[b].append((a, x))
    for lst in in_nbrs:
        lst.sort()
    active = [False] * n
    scores = list(map(float, scores0))
    for s in seeds:
        active[s] = True
    while True:
        newly = []
        for v in range(n):
            if active[v]:
                continue
            wsum = 0.0
            ssum = 0.0
            cnt = 0
            for u, x in in_nbrs[v]:
                if active[u]:
                    wsum += x
                    ssum += scores[u]
                    cnt += 1
            if cnt == 0:
                continue
            agg = wsum / cnt if mean_mode else wsum
            if agg >= theta[v]:
                newly.append((v, ssum / cnt))
        if not newly:
            break
        for v, s in newly:
            active[v] = True
            scores[v] = s
    return np.array(active), np.array(scores)


def auc_pairwise(scores, labels):
    """O(n^2) pairwise AUC with half-credit for ties."""
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    total = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                total += 1.0
            elif a == b:
                total += 0.5
    return total / (len(pos) * len(neg))


def percentile_by_sort(scores, pct):
    """Nearest-rank percentile by explicit sort-and-index."""
    s = sorted(scores)
    rank = max(1, math.ceil(pct / 100.0 * len(s)))
    return s[rank - 1]


def lambda_max_sym(dense_sym):
    return float(np.linalg.eigvalsh(dense_sym)[-1])


def eigendrop_after_node_removal(dense_sym, nodes):
    """Drop in the largest eigenvalue after zeroing the given rows/columns."""
    before = lambda_max_sym(dense_sym)
    cut = dense_sym.copy()
    for v in nodes:
        cut[v, :] = 0.0
        cut[:, v] = 0.0
    return before - lambda_max_sym(cut)


def eigendrop_after_edge_removal(dense_directed, edge_pairs):
    def lam(mat):
        sym = (mat + mat.T) / 2.0
        return float(np.linalg.eigvalsh(sym)[-1])
    before = lam(dense_directed)
    cut = dense_directed.copy()
    for u, v in edge_pairs:
        cut[u, v] = 0.0
    return before - lam(cut)


def metric_vector_by_enumeration(n, edges, agg0, agg1):
    """The 26 fractions counted with explicit loops."""
    def nf(x):
        return x / n
    def ef(x):
        return x / len(edges) if edges else 0.0
    vec = []
    vec.append(nf(sum(1 for v in range(n) if not agg1[v])))
    vec.append(nf(sum(1 for v in range(n) if agg1[v])))
    for s_lab, d_lab in ((0, 0), (0, 1), (1, 0), (1, 1)):
        vec.append(ef(sum(1 for a, b in edges
                          if agg1[a] == s_lab and agg1[b] == d_lab)))
    for lab0, lab1 in ((0, 0), (0, 1), (1, 0), (1, 1)):
        vec.append(nf(sum(1 for v in range(n)
                          if agg0[v] == lab0 and agg1[v] == lab1)))
    for st0 in itertools.product((0, 1), repeat=2):
        for st1 in itertools.product((0, 1), repeat=2):
            vec.append(ef(sum(1 for a, b in edges
                              if (agg0[a], agg0[b]) == st0
                              and (agg1[a], agg1[b]) == st1)))
    return np.array(vec)


def random_digraph(rng, n, p, ensure_cycle=False, max_edges=None):
    """Simple random digraph as an edge list (no self-loops, no duplicates)."""
    edges = set()
    if ensure_cycle:
        for i in range(n):
            edges.add((i, (i + 1) % n))
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < p:
                edges.add((u, v))
    edges = sorted(edges)
    if max_edges is not None and len(edges) > max_edges:
        idx = rng.choice(len(edges), size=max_edges, replace=False)
        edges = [edges[i] for i in sorted(idx)]
    return edges
