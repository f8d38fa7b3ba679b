"""Strategy-existence search engines behind :func:`hatguess.game.decide_winnable`.

Both engines work on the same covering formulation. Variable ``x`` is one
guess-table entry ``(vertex, view rank)`` with domain ``0..q-1``; clause ``a``
is one hat assignment and asks that some vertex's entry for its view in
``a`` equals its own color.

Symmetry breaking: relabeling the colors of one vertex maps winning
strategies to winning strategies. For an independent set ``I`` each
``v in I`` may therefore guess 0 on the all-zero view, and every other
vertex, relabeled by a permutation fixing 0, may guess 0 or 1 there. These
relabelings leave every all-zero view intact, so all restrictions hold at
once. A last round of relabelings fixing both 0 and 1 leaves every view
over colors {0, 1} intact; it lets each vertex use guesses ``t >= 3`` on
such views only after ``t - 1`` has appeared on an earlier one (value
precedence in lexicographic view order).

When ``q == n`` the ``n * q**(n-1)`` correct guesses of any strategy are
exactly enough for the ``q**n`` assignments, so a winning strategy covers
each assignment exactly once and pairwise exclusions are valid.
"""

from __future__ import annotations

import itertools
import time

import numpy as np

WINNABLE = "winnable"
UNWINNABLE = "unwinnable"
BUDGET = "budget_exceeded"


def all_assignments(n: int, q: int, lo: int = 0, hi: int | None = None) -> np.ndarray:
    """Assignments with lexicographic ranks ``lo..hi-1`` as rows (vertex 0 most significant)."""
    hi = q**n if hi is None else hi
    k = np.arange(lo, hi, dtype=np.int64)
    cols = np.empty((k.size, n), dtype=np.int64)
    for v in range(n - 1, -1, -1):
        k, cols[:, v] = np.divmod(k, q)
    return cols


def anchor_independent_set(nbs, order) -> list[int]:
    """Greedy independent set, smallest degree first (ties by the search order)."""
    pos = {v: i for i, v in enumerate(order)}
    chosen: list[int] = []
    blocked: set[int] = set()
    for v in sorted(order, key=lambda v: (len(nbs[v]), pos[v])):
        if v not in blocked:
            chosen.append(v)
            blocked.add(v)
            blocked.update(int(w) for w in nbs[v])
    return sorted(chosen)


class Encoding:
    def __init__(self, G, q: int, symmetry: bool = True):
        self.q = q
        self.n = n = G.n
        self.nbs = [G.neighbors(v) for v in range(n)]
        deg = [len(nb) for nb in self.nbs]
        # vertices by descending degree, ties by index
        self.order = sorted(range(n), key=lambda v: (-deg[v], v))
        self.base = {}
        self.var_owner: list[tuple[int, int]] = []
        for v in self.order:
            self.base[v] = len(self.var_owner)
            self.var_owner.extend((v, r) for r in range(q ** deg[v]))
        self.nvars = len(self.var_owner)

        assignments = all_assignments(n, q)
        K = assignments.shape[0]
        self.lit_var = np.empty((K, n), dtype=np.int64)
        self.lit_val = np.empty((K, n), dtype=np.int64)
        for col, v in enumerate(self.order):
            rank = np.zeros(K, dtype=np.int64)
            for w in self.nbs[v]:
                rank = rank * q + assignments[:, w]
            self.lit_var[:, col] = self.base[v] + rank
            self.lit_val[:, col] = assignments[:, v]

        # allowed guesses on each vertex's all-zero view
        self.anchors: dict[int, tuple[int, ...]] = {}
        if symmetry and q >= 2:
            indep = set(anchor_independent_set(self.nbs, self.order))
            for v in range(n):
                self.anchors[self.base[v]] = (0,) if v in indep else (0, 1)


class BudgetExceeded(Exception):
    pass


class NativeSearch:
    """Backtracking over table entries with unit propagation and a capacity cut.

    Each node branches on the open assignment with the fewest live literals,
    first forcing one literal and then forbidding it. The capacity cut drops
    a node when ``sum_x max_c cover[x][c]`` (open assignments each entry
    could still satisfy) falls short of the number of open assignments.
    """

    def __init__(self, enc: Encoding, max_nodes: int, time_limit: float):
        self.enc = enc
        self.q = q = enc.q
        self.n = n = enc.n
        self.max_nodes = max_nodes
        self.deadline = time.monotonic() + time_limit
        self.nodes = 0
        self.lit_var, self.lit_val = enc.lit_var, enc.lit_val
        K = enc.lit_var.shape[0]
        nvars = enc.nvars

        keys = (enc.lit_var * q + enc.lit_val).ravel()
        idx = np.argsort(keys, kind="stable")
        bounds = np.searchsorted(keys[idx], np.arange(nvars * q + 1))
        rows = idx // n
        self.occ = [
            [rows[bounds[x * q + c] : bounds[x * q + c + 1]] for c in range(q)]
            for x in range(nvars)
        ]
        self.dom = np.ones((nvars, q), dtype=bool)
        self.dsize = np.full(nvars, q, dtype=np.int64)
        self.nsat = np.zeros(K, dtype=np.int64)
        self.nfalse = np.zeros(K, dtype=np.int64)
        self.cover = np.diff(bounds).reshape(nvars, q).astype(np.int64)
        self.open = K
        self.trail: list[tuple] = []

    # primitive changes; _undo reverses them exactly

    def _remove(self, x: int, c: int, units: list) -> bool:
        self.dom[x, c] = False
        self.dsize[x] -= 1
        self.trail.append((0, x, c))
        A = self.occ[x][c]
        self.nfalse[A] += 1
        if self.dsize[x] == 0:
            return False
        live = A[self.nsat[A] == 0]
        if live.size:
            nf = self.nfalse[live]
            if (nf >= self.n).any():
                return False
            unit = live[nf == self.n - 1]
            if unit.size:
                units.append(unit)
        if self.dsize[x] == 1:
            self._fix(x, int(np.argmax(self.dom[x])))
        return True

    def _fix(self, x: int, c: int) -> None:
        A = self.occ[x][c]
        newly = A[self.nsat[A] == 0]
        self.nsat[A] += 1
        self.open -= newly.size
        if newly.size:
            np.subtract.at(self.cover, (self.lit_var[newly], self.lit_val[newly]), 1)
        self.trail.append((1, x, c, newly))

    def _undo(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            entry = trail.pop()
            if entry[0] == 0:
                _, x, c = entry
                self.dom[x, c] = True
                self.dsize[x] += 1
                self.nfalse[self.occ[x][c]] -= 1
            else:
                _, x, c, newly = entry
                self.nsat[self.occ[x][c]] -= 1
                self.open += newly.size
                if newly.size:
                    np.add.at(self.cover, (self.lit_var[newly], self.lit_val[newly]), 1)

    def _force(self, x: int, c: int, units: list) -> bool:
        if not self.dom[x, c]:
            return False
        for c2 in np.flatnonzero(self.dom[x]).tolist():
            if c2 != c and not self._remove(x, c2, units):
                return False
        return True

    def _propagate(self, units: list) -> bool:
        while units:
            for a in units.pop().tolist():
                if self.nsat[a]:
                    continue
                if self.nfalse[a] >= self.n:
                    return False
                live = self.dom[self.lit_var[a], self.lit_val[a]]
                col = int(np.argmax(live))
                if not self._force(int(self.lit_var[a, col]), int(self.lit_val[a, col]), units):
                    return False
        return self._capacity_ok()

    def _capacity_ok(self) -> bool:
        if self.open == 0:
            return True
        cap = np.where(self.dom, self.cover, 0).max(axis=1).sum()
        return cap >= self.open

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.max_nodes or (
            self.nodes & 63 == 0 and time.monotonic() > self.deadline
        ):
            raise BudgetExceeded

    def _choose(self) -> tuple[int, int]:
        live_rows = np.flatnonzero(self.nsat == 0)
        a = int(live_rows[np.argmax(self.nfalse[live_rows])])
        live = self.dom[self.lit_var[a], self.lit_val[a]]
        col = int(np.argmax(live))
        return int(self.lit_var[a, col]), int(self.lit_val[a, col])

    def _root(self) -> bool:
        units: list = [np.flatnonzero(self.nfalse == self.n - 1)]
        for x, allowed in self.enc.anchors.items():
            for c in range(self.q):
                if c not in allowed and self.dom[x, c] and not self._remove(x, c, units):
                    return False
        return self._propagate(units)

    def run(self) -> bool:
        if not self._root():
            return False
        stack: list[list] = []
        ok = True
        while True:
            if ok:
                self._tick()
                if self.open == 0:
                    return True
                x, c = self._choose()
                stack.append([len(self.trail), x, c, False])
                units: list = []
                ok = self._force(x, c, units) and self._propagate(units)
                continue
            while stack and stack[-1][3]:
                self._undo(stack.pop()[0])
            if not stack:
                return False
            frame = stack[-1]
            self._undo(frame[0])
            frame[3] = True
            self._tick()
            units = []
            ok = self._remove(frame[1], frame[2], units) and self._propagate(units)

    def values(self) -> np.ndarray:
        return np.argmax(self.dom, axis=1)


def native_search(enc: Encoding, max_nodes: int, time_limit: float):
    """Returns ``(status, entry_values or None, nodes)``."""
    search = NativeSearch(enc, max_nodes, time_limit)
    try:
        found = search.run()
    except BudgetExceeded:
        return BUDGET, None, search.nodes
    if found:
        return WINNABLE, search.values(), search.nodes
    return UNWINNABLE, None, search.nodes


def precedence_clauses(enc: Encoding) -> list[list[int]]:
    q = enc.q
    out = []
    for v in range(enc.n):
        d = len(enc.nbs[v])
        b = enc.base[v]
        # {0,1}-views after the all-zero one, in lexicographic order
        ranks = [
            sum(c * q ** (d - 1 - i) for i, c in enumerate(bits))
            for bits in itertools.product((0, 1), repeat=d)
        ][1:]
        for k, r in enumerate(ranks):
            for t in range(3, q):
                out.append(
                    [-((b + r) * q + t + 1)] + [(b + r2) * q + t for r2 in ranks[:k]]
                )
    return out


def cnf_clauses(enc: Encoding, exact_cover: bool = False) -> list[list[int]]:
    """CNF with boolean ``x*q + c + 1`` meaning entry ``x`` guesses ``c``.

    ``exact_cover`` adds at-most-one-correct clauses per assignment; only
    sound when ``q == n``.
    """
    q = enc.q
    lits = (enc.lit_var * q + enc.lit_val + 1).tolist()
    clauses = [list(row) for row in lits]
    if exact_cover:
        if q != enc.n:
            raise ValueError("exact cover clauses need q == n")
        for row in lits:
            clauses.extend([-a, -b] for a, b in itertools.combinations(row, 2))
    for x in range(enc.nvars):
        b = x * q + 1
        clauses.append([b + c for c in range(q)])
        for c1 in range(q):
            for c2 in range(c1 + 1, q):
                clauses.append([-(b + c1), -(b + c2)])
    for x, allowed in enc.anchors.items():
        b = x * q + 1
        clauses.append([b + c for c in allowed])
    if enc.anchors:
        clauses.extend(precedence_clauses(enc))
    return clauses


def deletion_bound_clauses(G, v: int, q: int) -> list[list[int]]:
    """CNF that is satisfiable whenever ``G`` is winnable with ``q`` colors.

    Fix a winning strategy and a color ``c`` for ``v``. Plugging ``c`` into
    the tables of ``v``'s neighbors gives a strategy on ``G - v`` whose
    losses all lie where ``v`` guesses ``c``, i.e. on colorings whose
    restriction to ``N(v)`` falls in the class ``f_v^{-1}(c)``. The ``q``
    classes partition the ``q**d`` neighbor patterns, so one has at most
    ``q**(d-1)`` of them. The formula asks for a strategy on ``G - v`` and a
    pattern set ``Z`` of that size such that every coloring outside ``Z`` is
    won. Per-vertex relabelings act on both, so the usual symmetry
    clauses stay sound. Unsatisfiable means ``G`` is unwinnable.
    """
    from pysat.card import CardEnc, EncType

    keep = [u for u in range(G.n) if u != v]
    H = G.induced_subgraph(keep)
    enc = Encoding(H, q)
    N = [keep.index(int(u)) for u in G.neighbors(v)]
    d = len(N)
    clauses = cnf_clauses(enc)
    top = enc.nvars * q
    pattern = np.zeros(q**H.n, dtype=np.int64)
    if d:
        A = all_assignments(H.n, q)
        for w in N:
            pattern = pattern * q + A[:, w]
    for k, z in enumerate(pattern.tolist()):
        clauses[k].append(top + 1 + z)
    zlits = list(range(top + 1, top + 1 + q**d))
    card = CardEnc.atmost(zlits, bound=q ** (d - 1) if d else 0, top_id=zlits[-1], encoding=EncType.seqcounter)
    clauses.extend(card.clauses)
    return clauses


CHUNK_CONFLICTS = 20_000


def _run_solver(clauses, max_conflicts: int, time_limit: float, solver: str):
    """``(result, model or None, conflicts)`` with ``result`` None on budget.

    CaDiCaL ignores ``interrupt()`` through this binding, so the wall clock
    is checked between conflict-budgeted chunks instead. Learned clauses
    survive from one chunk to the next.
    """
    from pysat.solvers import Solver

    deadline = time.monotonic() + max(time_limit, 0.0)
    res = None
    with Solver(name=solver, bootstrap_with=clauses) as s:
        conflicts = 0
        while conflicts < max_conflicts:
            s.conf_budget(min(CHUNK_CONFLICTS, max_conflicts - conflicts))
            res = s.solve_limited()
            now = int(s.accum_stats().get("conflicts", 0))
            if res is not None or time.monotonic() >= deadline or now == conflicts:
                conflicts = now
                break
            conflicts = now
        model = s.get_model() if res else None
    return res, model, conflicts


def deletion_bound(G, q: int, max_conflicts: int, time_limit: float, solver: str = "cadical195"):
    """Try the :func:`deletion_bound_clauses` test at each vertex, lowest degree first.

    Returns ``(vertex or None, conflicts)``; a vertex means ``G`` was proved
    unwinnable there.
    """
    t0 = time.monotonic()
    spent = 0
    order = sorted(range(G.n), key=lambda v: (G.degree(v), v))
    for i, v in enumerate(order):
        left = time_limit - (time.monotonic() - t0)
        if left <= 0 or spent >= max_conflicts:
            break
        share = (max_conflicts - spent) // (len(order) - i)
        res, _, used = _run_solver(deletion_bound_clauses(G, v, q), max(share, 1), left / (len(order) - i), solver)
        spent += used
        if res is False:
            return v, spent
    return None, spent


def sat_search(enc: Encoding, max_conflicts: int, time_limit: float, solver: str = "cadical195"):
    """Decide with a CDCL solver; ``max_conflicts`` plays the node budget."""
    q = enc.q
    clauses = cnf_clauses(enc, exact_cover=(q == enc.n))
    res, model, conflicts = _run_solver(clauses, max_conflicts, time_limit, solver)
    if res is None:
        return BUDGET, None, conflicts
    if not res:
        return UNWINNABLE, None, conflicts
    model = np.array(model, dtype=np.int64)
    truth = np.zeros(enc.nvars * q + 1, dtype=bool)
    truth[model[model > 0]] = True
    values = truth[1:].reshape(enc.nvars, q).argmax(axis=1)
    return WINNABLE, values, conflicts
