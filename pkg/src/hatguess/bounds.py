"""Certificate pipelines for lower and upper bounds on HG.

Lower bounds come from book subgraphs: a ``d``-clique core whose common
neighborhood holds at least ``d**(d+3)`` petals certifies ``HG >= d**(d-2)``.
Upper bounds come from a proper coloring with ``chi_ub >= 4`` classes,
giving ``floor((1 - 1/(2*chi_ub)) * n)``, a bound that only holds for large
``n`` and is flagged ``asymptotic``. Below 4 classes the trivial bound ``n``
is emitted instead.

All ``d``-dependent arithmetic is exact (Python integers and Fractions).
"""

from __future__ import annotations

import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from hatguess._rng import derive_seed
from hatguess.graph import Graph, as_fraction

# exact arithmetic --------------------------------------------------------


def _book_fits(d: int, n, p: Fraction) -> bool:
    # d^(d+3) <= n p^d / 2, cleared of denominators
    n = Fraction(n)
    return 2 * d ** (d + 3) * p.denominator**d * n.denominator <= n.numerator * p.numerator**d


def choose_d(n, p) -> int:
    """Largest ``d >= 1`` with ``d**(d+3) <= n * p**d / 2``; 0 if ``d = 1`` already fails."""
    p = as_fraction(p)
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    if Fraction(n) < 1:
        raise ValueError("n must be at least 1")
    # the left side grows and the right side shrinks in d, so stop at the first failure
    d = 0
    while _book_fits(d + 1, n, p):
        d += 1
    return d


def required_petals(d: int) -> int:
    if d < 1:
        raise ValueError("d must be at least 1")
    return d ** (d + 3)


def book_lower_value(d: int) -> int:
    """``d**(d-2)`` as an exact integer, with ``d = 1`` floored to the trivial bound 1."""
    if d < 1:
        raise ValueError("d must be at least 1")
    return d ** (d - 2) if d >= 2 else 1


def chromatic_upper_value(n: int, chi: int) -> int:
    """``floor((1 - 1/(2*chi)) * n)`` exactly."""
    return n * (2 * chi - 1) // (2 * chi)


# cliques -----------------------------------------------------------------


def _lex_best(cliques):
    best = None
    for c in cliques:
        key = (-len(c), c)
        if best is None or key < best[0]:
            best = (key, c)
    return best[1] if best else ()


def _greedy_run(G: Graph, order: np.ndarray) -> tuple[int, ...]:
    cand = np.ones(G.n, dtype=bool)
    clique = []
    while True:
        live = cand[order]
        if not live.any():
            break
        v = int(order[int(np.argmax(live))])
        clique.append(v)
        cand &= G.row(v)
    return tuple(sorted(clique))


def greedy_clique(G: Graph, restarts: int = 8, seed: int = 0, threads: int = 1) -> tuple[int, ...]:
    """Best maximal clique over ``restarts`` greedy passes in seeded random vertex orders.

    Ties between equally large cliques go to the lexicographically least one,
    so the result does not depend on ``threads``.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if G.n == 0:
        return ()

    def one(r):
        rng = np.random.default_rng(derive_seed(seed, r))
        return _greedy_run(G, rng.permutation(G.n))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            found = list(pool.map(one, range(restarts)))
    else:
        found = [one(r) for r in range(restarts)]
    return _lex_best(found)


@dataclass(frozen=True)
class CliqueResult:
    clique: tuple[int, ...]
    exact: bool
    nodes: int

    @property
    def size(self) -> int:
        return len(self.clique)


class _Budget(Exception):
    pass


def max_clique_exact(G: Graph, max_nodes: int = 10**7, time_limit: float = 60.0) -> CliqueResult:
    """Maximum clique by branch and bound with greedy-coloring bounds.

    On budget exhaustion the incumbent is returned with ``exact=False``; it
    is always a valid clique.
    """
    n = G.n
    if n == 0:
        return CliqueResult((), True, 0)
    rows = G.row_ints()
    deadline = time.monotonic() + time_limit
    best = list(_greedy_run(G, np.argsort(-G.degrees(), kind="stable")))
    nodes = 0

    def color_sort(P: int):
        # greedy coloring of P; vertices come out grouped by ascending color
        verts, colors = [], []
        k = 0
        while P:
            k += 1
            Q = P
            while Q:
                low = Q & -Q
                v = low.bit_length() - 1
                verts.append(v)
                colors.append(k)
                P &= ~low
                Q &= ~low & ~rows[v]
        return verts, colors

    def expand(R: list, P: int):
        nonlocal nodes, best
        verts, colors = color_sort(P)
        for i in range(len(verts) - 1, -1, -1):
            if len(R) + colors[i] <= len(best):
                return
            nodes += 1
            if nodes > max_nodes or (nodes & 1023 == 0 and time.monotonic() > deadline):
                raise _Budget
            v = verts[i]
            R.append(v)
            NP = P & rows[v]
            if NP:
                expand(R, NP)
            elif len(R) > len(best):
                best = list(R)
            R.pop()
            P &= ~(1 << v)

    try:
        expand([], (1 << n) - 1)
    except _Budget:
        return CliqueResult(tuple(sorted(best)), False, nodes)
    return CliqueResult(tuple(sorted(best)), True, nodes)


# coloring ----------------------------------------------------------------


@dataclass(frozen=True)
class Coloring:
    colors: tuple[int, ...]
    num_colors: int


def dsatur_coloring(G: Graph) -> Coloring:
    """DSATUR: color the vertex with most distinct neighbor colors next.

    Ties go to the larger degree, then the lower index. Each vertex takes
    the smallest color absent from its neighborhood.
    """
    n = G.n
    if n == 0:
        return Coloring((), 0)
    deg = G.degrees().astype(np.int64)
    colors = np.full(n, -1, dtype=np.int64)
    seen = np.zeros((n, 16), dtype=bool)  # seen[v, c]: some neighbor of v has color c
    sat = np.zeros(n, dtype=np.int64)
    scale = int(deg.max()) + 1
    k = 0
    for _ in range(n):
        key = np.where(colors < 0, sat * scale + deg, -1)
        v = int(np.argmax(key))
        free = np.flatnonzero(~seen[v, : k + 1])
        c = int(free[0])
        colors[v] = c
        if c == k:
            k += 1
            if k >= seen.shape[1]:
                seen = np.concatenate([seen, np.zeros_like(seen)], axis=1)
        nb = G.row(v)
        fresh = nb & ~seen[:, c]
        seen[fresh, c] = True
        sat[fresh] += 1
    return Coloring(tuple(colors.tolist()), k)


# book embeddings ---------------------------------------------------------


@dataclass(frozen=True)
class BookEmbedding:
    d: int
    core: tuple[int, ...]
    petals: tuple[int, ...]
    required_petals: int


def _packed(mask: np.ndarray) -> np.ndarray:
    return np.packbits(mask, bitorder="little")


def _grow_core(G: Graph, start: int, d: int, need: int):
    core = [start]
    cand = G.row(start)
    while len(core) < d:
        idx = np.flatnonzero(cand)
        if idx.size < need + d - len(core):
            return None
        counts = np.bitwise_count(G.bits[idx] & _packed(cand)).sum(axis=1)
        v = int(idx[int(np.argmax(counts))])
        core.append(v)
        cand = cand & G.row(v)
    if int(cand.sum()) < need:
        return None
    return tuple(sorted(core)), tuple(np.flatnonzero(cand).tolist())


def find_book_embedding(
    G: Graph,
    d: int,
    required: int | None = None,
    max_nodes: int = 10**6,
    time_limit: float = 60.0,
    restarts: int = 8,
    seed: int = 0,
) -> BookEmbedding | None:
    """A ``d``-clique whose common neighborhood has at least ``required`` vertices.

    Greedy restarts come first: a core grows from a start vertex, each step
    taking the candidate with the most candidate neighbors. Then a bounded
    exhaustive walk over ``d``-cliques prunes any partial core with too few
    common neighbors. All common neighbors become petals. ``None`` means
    nothing was found within the budget.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    need = required_petals(d) if required is None else int(required)
    if need < 0:
        raise ValueError("required petal count must be nonnegative")
    n = G.n
    if d + need > n:
        return None

    deg = G.degrees()
    starts = [int(np.argmax(deg))]
    rng = np.random.default_rng(derive_seed(seed, d))
    starts += rng.integers(0, n, size=max(0, restarts - 1)).tolist()
    for s in starts:
        if deg[s] < need + d - 1:
            continue
        got = _grow_core(G, s, d, need)
        if got is not None:
            return BookEmbedding(d, got[0], got[1], need)

    rows = G.row_ints()
    deadline = time.monotonic() + time_limit
    nodes = 0
    full = (1 << n) - 1

    def walk(core: list, common: int, ext: int):
        # ext: common neighbors above the last core vertex, candidates to extend
        nonlocal nodes
        if len(core) == d:
            return tuple(core), common
        while ext:
            nodes += 1
            if nodes > max_nodes or (nodes & 1023 == 0 and time.monotonic() > deadline):
                raise _Budget
            low = ext & -ext
            v = low.bit_length() - 1
            ext &= ~low
            nc = common & rows[v]
            if nc.bit_count() >= need + d - len(core) - 1:
                hit = walk(core + [v], nc, nc & ext)
                if hit:
                    return hit
        return None

    try:
        hit = walk([], full, full)
    except _Budget:
        return None
    if hit is None:
        return None
    core, common = hit
    petals = tuple(v for v in range(n) if common >> v & 1)
    return BookEmbedding(d, core, petals, need)


# certificates ------------------------------------------------------------

LOWER_BOOK = "LowerBook"
LOWER_TRIVIAL = "LowerTrivial"
UPPER_CHROMATIC = "UpperChromatic"
UPPER_TRIVIAL = "UpperTrivial"
KINDS = (LOWER_BOOK, LOWER_TRIVIAL, UPPER_CHROMATIC, UPPER_TRIVIAL)


@dataclass(frozen=True)
class BoundCertificate:
    kind: str
    value: int
    n: int
    graph_hash: str
    d: int | None = None
    core: tuple[int, ...] = ()
    petals: tuple[int, ...] = ()
    coloring: tuple[int, ...] | None = None
    chi_ub: int | None = None
    asymptotic: bool = False

    @property
    def is_lower(self) -> bool:
        return self.kind.startswith("Lower")

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "n": self.n,
            "d": self.d,
            "core": list(self.core),
            "petals": list(self.petals),
            "value": str(self.value),
            "asymptotic": self.asymptotic,
            "graph_hash": self.graph_hash,
        }
        if self.d is not None:
            doc["required_petals"] = str(required_petals(self.d))
        if self.coloring is not None:
            doc["coloring"] = list(self.coloring)
            doc["chi_ub"] = self.chi_ub
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "BoundCertificate":
        coloring = doc.get("coloring")
        return cls(
            kind=doc["kind"],
            value=int(doc["value"]),
            n=int(doc["n"]),
            graph_hash=doc["graph_hash"],
            d=doc.get("d"),
            core=tuple(doc.get("core", ())),
            petals=tuple(doc.get("petals", ())),
            coloring=None if coloring is None else tuple(coloring),
            chi_ub=doc.get("chi_ub"),
            asymptotic=bool(doc.get("asymptotic", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "BoundCertificate":
        return cls.from_dict(json.loads(text))


def _candidate_ds(n: int, p_hint) -> list[int]:
    if p_hint is not None:
        top = choose_d(n, p_hint) if n >= 1 else 0
    else:
        top = 0
        while (top + 1) ** (top + 4) <= n:
            top += 1
    return list(range(top, 1, -1))


def lower_bound_certificate(
    G: Graph,
    p_hint=None,
    max_nodes: int = 10**6,
    time_limit: float = 60.0,
    restarts: int = 8,
    seed: int = 0,
) -> BoundCertificate:
    """Largest book lower bound found, falling back to the trivial bound.

    With ``p_hint`` the search starts at ``choose_d(n, p_hint)``; without it
    at the largest ``d`` with ``d**(d+3) <= n``. Every ``d >= 2`` below that
    is tried in turn, then ``d = 1`` (an edge), then a lone vertex.
    """
    h = G.graph_hash()
    for d in _candidate_ds(G.n, p_hint):
        emb = find_book_embedding(G, d, None, max_nodes, time_limit, restarts, seed)
        if emb is not None:
            return BoundCertificate(
                LOWER_BOOK, book_lower_value(d), G.n, h, d, emb.core, emb.petals
            )
    deg = G.degrees()
    if G.n and deg.max() > 0:
        u = int(np.argmax(deg))
        return BoundCertificate(
            LOWER_BOOK, 1, G.n, h, 1, (u,), tuple(G.neighbors(u).tolist())
        )
    # q = 1 is always winnable once there is a player
    return BoundCertificate(LOWER_TRIVIAL, min(G.n, 1), G.n, h)


def upper_bound_certificate(G: Graph) -> BoundCertificate:
    col = dsatur_coloring(G)
    h = G.graph_hash()
    if col.num_colors >= 4:
        value = chromatic_upper_value(G.n, col.num_colors)
        return BoundCertificate(
            UPPER_CHROMATIC, value, G.n, h,
            coloring=col.colors, chi_ub=col.num_colors, asymptotic=True,
        )
    return BoundCertificate(UPPER_TRIVIAL, G.n, G.n, h)


# verification: reads only the serialized document -------------------------


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = "ok"

    def __bool__(self) -> bool:
        return self.ok


_INT = re.compile(r"-?[0-9]+\Z")


def _int_list(x, n) -> list[int] | None:
    if not isinstance(x, list):
        return None
    out = []
    for v in x:
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < n:
            return None
        out.append(v)
    return out


def verify_certificate(G: Graph, cert) -> Verdict:
    """Re-check a certificate against ``G`` from its serialized fields alone."""
    if isinstance(cert, BoundCertificate):
        doc = cert.to_dict()
    elif isinstance(cert, str):
        try:
            doc = json.loads(cert)
        except ValueError:
            return Verdict(False, "malformed")
    else:
        doc = cert
    if not isinstance(doc, dict):
        return Verdict(False, "malformed")
    kind = doc.get("kind")
    if kind not in KINDS:
        return Verdict(False, "unknown-kind")
    if doc.get("graph_hash") != G.graph_hash():
        return Verdict(False, "hash-mismatch")
    raw = doc.get("value")
    if not isinstance(raw, str) or not _INT.match(raw):
        return Verdict(False, "malformed")
    value = int(raw)
    n = G.n
    bits = G.bits

    def adjacent(us: np.ndarray, v: int) -> np.ndarray:
        return (bits[us, v >> 3] >> np.uint8(v & 7)) & 1 == 1

    if kind == LOWER_BOOK:
        d = doc.get("d")
        if isinstance(d, bool) or not isinstance(d, int) or d < 1:
            return Verdict(False, "malformed")
        core = _int_list(doc.get("core"), n)
        petals = _int_list(doc.get("petals"), n)
        if core is None or petals is None:
            return Verdict(False, "malformed")
        if len(set(core)) != len(core) or len(core) != d:
            return Verdict(False, "core-size")
        if len(set(petals)) != len(petals):
            return Verdict(False, "duplicate-petal")
        if set(core) & set(petals):
            return Verdict(False, "petal-in-core")
        core_arr = np.array(core, dtype=np.int64)
        for i, c in enumerate(core):
            if not adjacent(core_arr[i + 1 :], c).all():
                return Verdict(False, "core-not-clique")
        petal_arr = np.array(petals, dtype=np.int64)
        for c in core:
            if petal_arr.size and not adjacent(petal_arr, c).all():
                return Verdict(False, "petal-not-adjacent")
        if len(petals) < d ** (d + 3):
            return Verdict(False, "petal-count")
        expect = 1 if d == 1 else d ** (d - 2)
        return Verdict(True) if value == expect else Verdict(False, "value-mismatch")

    if kind == LOWER_TRIVIAL:
        return Verdict(True) if value == (1 if n else 0) else Verdict(False, "value-mismatch")

    if kind == UPPER_TRIVIAL:
        return Verdict(True) if value == n else Verdict(False, "value-mismatch")

    # UpperChromatic
    chi = doc.get("chi_ub")
    col = doc.get("coloring")
    if isinstance(chi, bool) or not isinstance(chi, int) or not isinstance(col, list):
        return Verdict(False, "malformed")
    if len(col) != n or any(isinstance(c, bool) or not isinstance(c, int) for c in col):
        return Verdict(False, "malformed")
    if chi < 4:
        return Verdict(False, "chi-too-small")
    col_arr = np.array(col, dtype=np.int64)
    if n and (col_arr.min() < 0 or col_arr.max() >= chi or np.unique(col_arr).size != chi):
        return Verdict(False, "class-count")
    if n:
        onehot = np.zeros((chi, n), dtype=bool)
        onehot[col_arr, np.arange(n)] = True
        masks = np.packbits(onehot, axis=1, bitorder="little")
        if (bits & masks[col_arr]).any():
            return Verdict(False, "improper-coloring")
    if doc.get("asymptotic") is not True:
        return Verdict(False, "asymptotic-flag")
    expect = n * (2 * chi - 1) // (2 * chi)
    return Verdict(True) if value == expect else Verdict(False, "value-mismatch")
