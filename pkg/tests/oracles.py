"""Reference implementations used only by the tests.

Nothing here imports the package's search, clique or coloring code; the
game oracles work on plain adjacency sets and Python ints.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import mpmath
import numpy as np


def adjacency(n, edges):
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return [sorted(a) for a in adj]


def _rank(a, nb, q):
    r = 0
    for w in nb:
        r = r * q + a[w]
    return r


def wins_everywhere(n, adj, q, tables):
    """Plain loop over all q**n assignments."""
    for a in itertools.product(range(q), repeat=n):
        if not any(tables[v][_rank(a, adj[v], q)] == a[v] for v in range(n)):
            return False
    return True


def lost_assignments(n, adj, q, tables):
    return [
        a
        for a in itertools.product(range(q), repeat=n)
        if not any(tables[v][_rank(a, adj[v], q)] == a[v] for v in range(n))
    ]


# exhaustive enumeration ---------------------------------------------------


def enumerate_winnable(n, adj, q, limit=2_000_000):
    """Enumerate every strategy, except that the largest-table vertex is solved.

    For a vertex ``v`` and a fixed strategy of the others, ``v`` can repair
    the losses iff, for every view of ``v``, the lost assignments with that
    view all give ``v`` the same color. So enumerating the other tables is
    exhaustive. Returns ``None`` when more than ``limit`` combinations
    would be needed.
    """
    if n == 0:
        return False
    sizes = [q ** len(adj[v]) for v in range(n)]
    v = max(range(n), key=lambda x: sizes[x])
    others = [x for x in range(n) if x != v]
    count = q ** sum(sizes[x] for x in others)
    if count > limit:
        return None
    assignments = list(itertools.product(range(q), repeat=n))
    for flat in itertools.product(range(q), repeat=sum(sizes[x] for x in others)):
        tables, pos = {}, 0
        for x in others:
            tables[x] = flat[pos : pos + sizes[x]]
            pos += sizes[x]
        need = {}
        ok = True
        for a in assignments:
            if any(tables[x][_rank(a, adj[x], q)] == a[x] for x in others):
                continue
            z = _rank(a, adj[v], q)
            if need.setdefault(z, a[v]) != a[v]:
                ok = False
                break
        if ok:
            return True
    return False


# exact cover (q == n) ------------------------------------------------------


def exact_cover_winnable(n, adj, q):
    """Algorithm X for the case ``q == n``.

    With ``q == n`` players each right on ``q**(n-1)`` assignments, a win
    covers every assignment exactly once. Rows are (vertex, view, guess);
    columns are assignments plus one column per table entry.
    """
    assert q == n
    X = {}
    Y = {}
    for v in range(n):
        for a in itertools.product(range(q), repeat=n):
            row = (v, _rank(a, adj[v], q), a[v])
            Y.setdefault(row, [("entry", v, row[1])]).append(("asg", a))
    for row, cols in Y.items():
        for c in cols:
            X.setdefault(c, set()).add(row)

    def select(r):
        removed = []
        for j in Y[r]:
            for i in X[j]:
                for k in Y[i]:
                    if k != j:
                        X[k].remove(i)
            removed.append(X.pop(j))
        return removed

    def deselect(r, removed):
        for j in reversed(Y[r]):
            X[j] = removed.pop()
            for i in X[j]:
                for k in Y[i]:
                    if k != j:
                        X[k].add(i)

    def solve():
        if not X:
            return True
        c = min(X, key=lambda col: len(X[col]))
        for r in list(X[c]):
            removed = select(r)
            if solve():
                return True
            deselect(r, removed)
        return False

    return solve()


# branching backtracker ------------------------------------------------------


def backtrack_winnable(n, adj, q, max_nodes=5_000_000):
    """DFS on table-entry domains, branching on the most constrained lost assignment.

    An assignment is alive while at least one of its entries may still take
    the assignment's own color. The search branches "entry i is right"
    over the live entries of the assignment with fewest of them, and keeps
    "entry i is wrong" for the later siblings. Constant-entry symmetry is
    not used. Returns tables, False, or None on budget.
    """
    entries = {}
    for v in range(n):
        for r in range(q ** len(adj[v])):
            entries[(v, r)] = len(entries)
    asg = []
    for a in itertools.product(range(q), repeat=n):
        asg.append([(entries[(v, _rank(a, adj[v], q))], a[v]) for v in range(n)])
    full = (1 << q) - 1
    nodes = [0]

    def dfs(dom):
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise TimeoutError
        best = None
        for lits in asg:
            live = []
            covered = False
            for e, c in lits:
                if dom[e] == 1 << c:
                    covered = True
                    break
                if dom[e] >> c & 1:
                    live.append((e, c))
            if covered:
                continue
            if not live:
                return None
            if best is None or len(live) < len(best):
                best = live
                if len(best) == 1:
                    break
        if best is None:
            return dom
        dom = list(dom)
        for e, c in best:
            child = list(dom)
            child[e] = 1 << c
            got = dfs(child)
            if got is not None:
                return got
            dom[e] &= ~(1 << c)
            if dom[e] == 0:
                return None
        return None

    try:
        got = dfs([full] * len(entries))
    except TimeoutError:
        return None
    if got is None:
        return False
    tables = [[0] * (q ** len(adj[v])) for v in range(n)]
    for (v, r), e in entries.items():
        tables[v][r] = (got[e] & -got[e]).bit_length() - 1
    assert wins_everywhere(n, adj, q, tables)
    return tables


def local_search(n, adj, q, steps=20_000, seed=0):
    """Min-conflicts walk over tables; a verified winning strategy or None.

    Only ever proves winnability, never the opposite.
    """
    rng = random.Random(seed)
    tables = [[rng.randrange(q) for _ in range(q ** len(adj[v]))] for v in range(n)]
    assignments = list(itertools.product(range(q), repeat=n))

    def losses():
        return sum(
            1 for a in assignments
            if not any(tables[v][_rank(a, adj[v], q)] == a[v] for v in range(n))
        )

    cur = losses()
    for _ in range(steps):
        if cur == 0:
            assert wins_everywhere(n, adj, q, tables)
            return tables
        lost = lost_assignments(n, adj, q, tables)
        a = rng.choice(lost)
        moves = []
        for v in range(n):
            r = _rank(a, adj[v], q)
            old = tables[v][r]
            tables[v][r] = a[v]
            moves.append((losses(), rng.random(), v, r))
            tables[v][r] = old
        if rng.random() < 0.1:
            best = rng.choice(moves)
        else:
            best = min(moves)
        cur, _, v, r = best
        tables[v][r] = a[v]
    return None


def oracle_winnable(n, adj, q):
    """Winnability by the first exhaustive method that applies."""
    if n == 0:
        return False
    if q == 1:
        return True
    if n < q:
        # sum over players of correct guesses is exactly n * q**(n-1) < q**n
        return False
    if q == n:
        return exact_cover_winnable(n, adj, q)
    got = enumerate_winnable(n, adj, q)
    if got is None:
        if local_search(n, adj, q, steps=500) is not None:
            return True
        got = backtrack_winnable(n, adj, q)
        if got is None:
            raise RuntimeError("oracle budget exhausted")
        return got is not False
    return got


def oracle_hg(n, adj, q_max):
    best = 0
    for q in range(1, q_max + 1):
        if not oracle_winnable(n, adj, q):
            break
        best = q
    return best


# cliques and colorings -------------------------------------------------------


def max_clique_size(n, adj):
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((u, v) for u in range(n) for v in adj[u] if u < v)
    return max((len(c) for c in nx.find_cliques(g)), default=0)


def chromatic_number(n, adj):
    """Smallest k with a proper k-coloring, by plain backtracking."""
    if n == 0:
        return 0
    order = sorted(range(n), key=lambda v: -len(adj[v]))
    for k in range(1, n + 1):
        col = {}

        def go(i):
            if i == n:
                return True
            v = order[i]
            used = {col[w] for w in adj[v] if w in col}
            for c in range(min(k, max(col.values(), default=-1) + 2)):
                if c not in used:
                    col[v] = c
                    if go(i + 1):
                        return True
                    del col[v]
            return False

        if go(0):
            return k
    return n


# numbers ------------------------------------------------------------------


def binomial_moments(m, p):
    p = Fraction(p)
    return m * p, m * p * (1 - p)


def binomial_cdf(m, p, k):
    """Exact ``P(Bin(m, p) <= k)`` as a Fraction."""
    p = Fraction(p)
    return sum(math.comb(m, i) * p**i * (1 - p) ** (m - i) for i in range(0, k + 1))


def xx_root(n, dps=50):
    """Bisection on ``x ln x = ln n`` in mpmath."""
    with mpmath.workdps(dps):
        target = mpmath.log(mpmath.mpf(n))
        lo, hi = mpmath.mpf(1), target + 2
        for _ in range(400):
            mid = (lo + hi) / 2
            if mid * mpmath.log(mid) < target:
                lo = mid
            else:
                hi = mid
        return lo


def choose_d_oracle(n, p):
    """Largest d >= 1 with d**(d+3) <= n p**d / 2 by brute scan, else 0."""
    p = Fraction(p)
    best = 0
    d = 1
    while d ** (d + 3) <= n:
        if d ** (d + 3) <= Fraction(n) * p**d / 2:
            best = d
        d += 1
    return best


# random graphs ----------------------------------------------------------

M64 = (1 << 64) - 1


def splitmix(z):
    z &= M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def coin_graph(n, p, seed):
    """Pure-Python G(n, p) from the documented pair-coin contract."""
    golden = 0x9E3779B97F4A7C15
    key = splitmix(seed + golden)
    thr = math.ceil(Fraction(p) * 2**53)
    adj = np.zeros((n, n), dtype=bool)
    idx = 0
    for u in range(n):
        for v in range(u + 1, n):
            z = splitmix((key + (idx + 1) * golden) & M64)
            if (z >> 11) < thr:
                adj[u, v] = adj[v, u] = True
            idx += 1
    return adj
