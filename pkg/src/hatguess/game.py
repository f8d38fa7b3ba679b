"""The hat guessing game on a graph.

Each of the ``n`` players wears one of ``q`` colors and sees only the colors
of its neighbors. A deterministic strategy gives every vertex a guess for
each possible view; the players win an assignment when at least one guess
is right. ``HG(G)`` is the largest ``q`` admitting a strategy that wins
every one of the ``q**n`` assignments.

A view of vertex ``v`` is the tuple of its neighbors' colors in ascending
neighbor order, ranked in mixed radix ``q`` with the lowest-index neighbor
most significant. Strategy tables are indexed by that rank.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field

import numpy as np

from hatguess import _search
from hatguess._search import all_assignments
from hatguess.graph import Graph

_CHUNK = 1 << 18


@dataclass(frozen=True)
class View:
    owner: int
    neighbor_colors: tuple[int, ...]


def view_of(G: Graph, v: int, assignment) -> View:
    assignment = _check_assignment(G, assignment)
    nb = G.neighbors(v)
    return View(int(v), tuple(int(assignment[w]) for w in nb))


def view_rank(colors, q: int) -> int:
    r = 0
    for c in colors:
        r = r * q + int(c)
    return r


def _check_assignment(G: Graph, assignment, q: int | None = None) -> np.ndarray:
    a = np.asarray(assignment, dtype=np.int64)
    if a.shape != (G.n,):
        raise ValueError(f"assignment length {a.size} does not match n={G.n}")
    if a.size and a.min() < 0:
        raise ValueError("colors must be nonnegative")
    if q is not None and a.size and a.max() >= q:
        raise ValueError(f"color out of range for q={q}")
    return a


class StrategyTable:
    """Per-vertex guess tables for a fixed graph and color count.

    ``tables[v]`` has ``q ** deg(v)`` entries; entry ``r`` is the guess of
    ``v`` when its view has rank ``r``.
    """

    def __init__(self, q: int, neighbors, tables):
        if q < 1:
            raise ValueError("q must be at least 1")
        self.q = int(q)
        self.neighbors = tuple(tuple(int(w) for w in nb) for nb in neighbors)
        if len(tables) != len(self.neighbors):
            raise ValueError("one table per vertex is required")
        clean = []
        for v, (nb, t) in enumerate(zip(self.neighbors, tables)):
            t = np.asarray(t, dtype=np.int64)
            if t.shape != (self.q ** len(nb),):
                raise ValueError(
                    f"vertex {v}: table has {t.size} entries, expected {self.q ** len(nb)}"
                )
            if t.size and (t.min() < 0 or t.max() >= self.q):
                raise ValueError(f"vertex {v}: guess outside 0..{self.q - 1}")
            t.setflags(write=False)
            clean.append(t)
        self.tables = tuple(clean)

    @property
    def n(self) -> int:
        return len(self.tables)

    @classmethod
    def constant(cls, G: Graph, q: int, color: int = 0) -> "StrategyTable":
        nbs = [G.neighbors(v) for v in range(G.n)]
        return cls(q, nbs, [np.full(q ** len(nb), color) for nb in nbs])

    @classmethod
    def from_function(cls, G: Graph, q: int, fn) -> "StrategyTable":
        """Build from ``fn(v, view_tuple) -> guess``."""
        nbs = [G.neighbors(v) for v in range(G.n)]
        tables = []
        for v, nb in enumerate(nbs):
            d = len(nb)
            t = [fn(v, _unrank(r, d, q)) for r in range(q**d)]
            tables.append(t)
        return cls(q, nbs, tables)

    def guess(self, v: int, colors) -> int:
        return int(self.tables[v][view_rank(colors, self.q)])

    def matches(self, G: Graph) -> bool:
        return self.n == G.n and all(
            tuple(G.neighbors(v).tolist()) == self.neighbors[v] for v in range(G.n)
        )

    def to_json(self) -> str:
        doc = {
            "schema": "strategy-v1",
            "q": self.q,
            "n": self.n,
            "neighbors": {str(v): list(nb) for v, nb in enumerate(self.neighbors)},
            "strategy": {str(v): t.tolist() for v, t in enumerate(self.tables)},
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str, G: Graph | None = None) -> "StrategyTable":
        doc = json.loads(text)
        n = int(doc["n"])
        strat = doc["strategy"]
        if set(strat) != {str(v) for v in range(n)}:
            raise ValueError("strategy must list every vertex 0..n-1 exactly once")
        if G is not None:
            nbs = [G.neighbors(v) for v in range(n)]
        else:
            nbs = [doc["neighbors"][str(v)] for v in range(n)]
        return cls(int(doc["q"]), nbs, [strat[str(v)] for v in range(n)])

    def __eq__(self, other):
        if not isinstance(other, StrategyTable):
            return NotImplemented
        return (
            self.q == other.q
            and self.neighbors == other.neighbors
            and all(np.array_equal(a, b) for a, b in zip(self.tables, other.tables))
        )


def _unrank(r: int, d: int, q: int) -> tuple[int, ...]:
    out = []
    for _ in range(d):
        r, c = divmod(r, q)
        out.append(c)
    return tuple(reversed(out))


@dataclass(frozen=True)
class GameOutcome:
    winning: bool
    counterexample: tuple[int, ...] | None = None


def correct_guessers(G: Graph, S: StrategyTable, assignments: np.ndarray) -> np.ndarray:
    """Boolean matrix: entry (i, v) says vertex v guesses right on assignment row i."""
    q = S.q
    out = np.zeros(assignments.shape, dtype=bool)
    for v in range(G.n):
        rank = np.zeros(assignments.shape[0], dtype=np.int64)
        for w in S.neighbors[v]:
            rank = rank * q + assignments[:, w]
        out[:, v] = S.tables[v][rank] == assignments[:, v]
    return out


def verify_strategy(G: Graph, q: int, S: StrategyTable) -> GameOutcome:
    """Check ``S`` against all ``q**n`` assignments.

    Returns the lexicographically least losing assignment when there is one.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    if S.q != q:
        raise ValueError(f"strategy is for q={S.q}, not q={q}")
    if not S.matches(G):
        raise ValueError("strategy table does not fit this graph's neighborhoods")
    total = q**G.n
    for lo in range(0, total, _CHUNK):
        hi = min(total, lo + _CHUNK)
        block = all_assignments(G.n, q, lo, hi)
        won = correct_guessers(G, S, block).any(axis=1)
        if not won.all():
            i = int(np.argmin(won))
            return GameOutcome(False, tuple(int(c) for c in block[i]))
    return GameOutcome(True)


def modular_strategy(n: int, q: int) -> StrategyTable:
    """Sum-mod-q strategy on K_n: vertex ``i < q`` bets the total is ``i`` mod ``q``."""
    if not 1 <= q <= n:
        raise ValueError("modular strategy needs 1 <= q <= n")
    nbs = [[w for w in range(n) if w != v] for v in range(n)]
    tables = []
    for i in range(n):
        views = all_assignments(n - 1, q)
        if i < q:
            tables.append((i - views.sum(axis=1)) % q)
        else:
            tables.append(np.zeros(q ** (n - 1), dtype=np.int64))
    return StrategyTable(q, nbs, tables)


# strategy existence ------------------------------------------------------


class Status(enum.Enum):
    WINNABLE = "winnable"
    UNWINNABLE = "unwinnable"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass
class Decision:
    status: Status
    q: int
    strategy: StrategyTable | None = None
    nodes: int = 0
    elapsed: float = 0.0
    reason: str = ""

    @property
    def winnable(self) -> bool:
        return self.status is Status.WINNABLE


ENGINES = ("auto", "sat", "search")


def reduce_instance(G: Graph, q: int) -> list[list[int]]:
    """Vertex sets whose induced subgraphs decide winnability of ``G`` at ``q >= 2``.

    ``G`` is winnable iff one of the returned pieces is. Three exact rules
    are applied until none fires:

    * components: a strategy on one component wins only if that component
      wins on its own, since no player sees across components;
    * isolated vertices (any ``q >= 2``): one guesses a constant ``k``, so
      fixing its color to ``c != k`` leaves the rest to win alone;
    * leaves (``q >= 3``): if the leaf's guess map from its neighbor's color
      is not onto, a missed color plays the role of ``c`` above. If it is a
      bijection, for each view of the neighbor ``u`` at most one color of
      ``u`` can leave the other players all wrong (two such colors and a
      third value of the leaf would force ``u`` to guess both), and ``u``
      bets on that color without looking at the leaf.
    """
    alive = set(range(G.n))
    rows = [set(G.neighbors(v).tolist()) for v in range(G.n)]
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            deg = len(rows[v] & alive)
            if deg == 0 or (deg == 1 and q >= 3):
                alive.discard(v)
                changed = True
    pieces = []
    seen: set[int] = set()
    for v in sorted(alive):
        if v in seen:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            w = stack.pop()
            comp.append(w)
            for x in rows[w] & alive:
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        pieces.append(sorted(comp))
    return pieces


def lift_strategy(G: Graph, vertices, S: StrategyTable) -> StrategyTable:
    """Extend a strategy for the subgraph induced on ``vertices`` to all of ``G``.

    Members ignore neighbors outside the set; everyone else guesses 0.
    """
    vertices = sorted(int(v) for v in vertices)
    pos = {v: i for i, v in enumerate(vertices)}
    q = S.q
    nbs = [G.neighbors(v) for v in range(G.n)]
    tables = []
    for v in range(G.n):
        d = len(nbs[v])
        if v not in pos:
            tables.append(np.zeros(q**d, dtype=np.int64))
            continue
        views = all_assignments(d, q)
        rank = np.zeros(q**d, dtype=np.int64)
        for col, w in enumerate(nbs[v].tolist()):
            if w in pos:
                rank = rank * q + views[:, col]
        tables.append(S.tables[pos[v]][rank])
    return StrategyTable(q, nbs, tables)


def _solve_piece(H: Graph, q: int, max_nodes: int, time_limit: float, engine: str):
    enc = _search.Encoding(H, q)
    if engine == "sat":
        status, values, nodes = _search.sat_search(enc, max_nodes, time_limit)
    else:
        status, values, nodes = _search.native_search(enc, max_nodes, time_limit)
    strategy = None
    if status == _search.WINNABLE:
        tables = [np.zeros(q ** len(nb), dtype=np.int64) for nb in enc.nbs]
        for x, (v, r) in enumerate(enc.var_owner):
            tables[v][r] = values[x]
        strategy = StrategyTable(q, enc.nbs, tables)
    return status, strategy, nodes


def decide_winnable(
    G: Graph,
    q: int,
    max_nodes: int = 10**7,
    time_limit: float = 60.0,
    engine: str = "auto",
    reduce: bool = True,
) -> Decision:
    """Decide whether ``q`` colors admit a winning strategy on ``G``.

    The instance is first cut down by :func:`reduce_instance`; each piece
    with at least ``q`` vertices then goes to an engine. ``engine="sat"``
    (the ``"auto"`` choice) first tries the vertex-deletion necessary
    condition of :func:`hatguess._search.deletion_bound_clauses` on a
    quarter of the budget, then hands the covering formulation to a CDCL
    solver, with ``max_nodes`` capping conflicts; ``engine="search"`` runs
    the in-house backtracker alone. WINNABLE always carries a strategy for all of
    ``G`` that passed :func:`verify_strategy`; BUDGET_EXCEEDED is never a
    verdict.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if engine == "auto":
        engine = "sat"
    t0 = time.monotonic()

    def done(status, strategy=None, nodes=0, reason=""):
        return Decision(status, q, strategy, nodes, time.monotonic() - t0, reason)

    if G.n == 0:
        # no players, so the single (empty) assignment is always lost
        return done(Status.UNWINNABLE, reason="no players")
    if q == 1:
        return done(Status.WINNABLE, StrategyTable.constant(G, 1), reason="single color")

    pieces = reduce_instance(G, q) if reduce else [list(range(G.n))]
    total_nodes = 0
    inconclusive = False
    proofs: list[str] = []
    for piece in pieces:
        if len(piece) < q:
            # every vertex is right on exactly q**(n-1) assignments
            continue
        left = time_limit - (time.monotonic() - t0)
        if left <= 0:
            inconclusive = True
            break
        H = G.induced_subgraph(piece)
        if engine == "sat" and len(piece) > q:
            # cheap necessary condition first; q == n is settled fast by exact cover
            v, used = _search.deletion_bound(H, q, max(max_nodes // 4, 1), left / 4)
            total_nodes += used
            if v is not None:
                proofs.append(f"deletion bound at vertex {piece[v]}")
                continue
            left = time_limit - (time.monotonic() - t0)
        status, strategy, nodes = _solve_piece(H, q, max_nodes, left, engine)
        total_nodes += nodes
        if status == _search.WINNABLE:
            strategy = lift_strategy(G, piece, strategy)
            if not verify_strategy(G, q, strategy).winning:
                raise AssertionError("search returned a strategy that does not verify")
            return done(Status.WINNABLE, strategy, total_nodes, f"{engine} on vertices {piece}")
        if status == _search.BUDGET:
            inconclusive = True
        else:
            proofs.append(f"{engine} on vertices {piece}")
    if inconclusive:
        return done(Status.BUDGET_EXCEEDED, nodes=total_nodes, reason=engine)
    if not any(len(pc) >= q for pc in pieces):
        return done(Status.UNWINNABLE, nodes=total_nodes, reason="reduction and counting")
    return done(Status.UNWINNABLE, nodes=total_nodes, reason="; ".join(proofs))


@dataclass
class HGResult:
    """Exact HG when ``exact``; otherwise HG lies in ``[lower, upper]`` (upper None = unknown).

    ``capped`` marks that ``q_max`` itself was winnable, so ``lower`` is only
    a lower bound.
    """

    lower: int
    upper: int | None
    evidence: list[Decision] = field(default_factory=list)
    capped: bool = False

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.upper == self.lower

    @property
    def value(self) -> int:
        if not self.exact:
            raise ValueError(f"HG not determined: interval [{self.lower}, {self.upper}]")
        return self.lower


def hg_exact(
    G: Graph,
    q_max: int,
    max_nodes: int = 10**7,
    time_limit: float = 60.0,
    engine: str = "auto",
    reduce: bool = True,
) -> HGResult:
    """Largest ``q <= q_max`` with a winning strategy, searching upward from 1.

    Relies on monotonicity in ``q``: once some ``q`` is unwinnable, every
    larger ``q`` is too. After an inconclusive ``q`` the scan goes on, since
    a larger winnable ``q`` still raises the lower end and an unwinnable one
    caps the interval; three inconclusive values in a row end it. Budgets apply to each decision separately.
    """
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    evidence: list[Decision] = []
    best = 0
    open_at = None
    for q in range(1, q_max + 1):
        dec = decide_winnable(G, q, max_nodes, time_limit, engine, reduce)
        evidence.append(dec)
        if dec.status is Status.WINNABLE:
            best = q
            open_at = None
        elif dec.status is Status.UNWINNABLE:
            return HGResult(best, q - 1, evidence)
        elif open_at is None:
            open_at = q
        elif q > open_at + 1:
            # three inconclusive values in a row; stop spending budget
            break
    if open_at is not None:
        return HGResult(best, None, evidence)
    # q_max winnable: exact relative to the cap, HG itself may be larger
    return HGResult(best, best, evidence, capped=True)
