"""Dense undirected graphs backed by a packed bit matrix.

Row ``v`` of :attr:`Graph.bits` holds the neighborhood of ``v`` with vertex
``j`` at byte ``j >> 3``, bit ``j & 7`` (little bit order), so
``np.unpackbits(row, bitorder="little")[:n]`` recovers the boolean row.

Random graphs come from a counter-based generator: the coin for pair
``{u, v}`` depends only on ``(seed, pair_index(u, v))``, which keeps sampling
order-independent and identical under any thread count.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from pathlib import Path
from typing import Iterable

import numba
import numpy as np

from hatguess._rng import GOLDEN, mix64, seed_key

__all__ = [
    "EdgeListError",
    "GnpParams",
    "Graph",
    "book",
    "complete",
    "cycle",
    "empty",
    "pair_index",
    "path",
    "read_edge_list",
    "sample_gnp",
    "write_edge_list",
]

_UNIFORM_BITS = 53


class EdgeListError(ValueError):
    """Malformed edge-list input; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class Graph:
    """Immutable simple graph on vertices ``0..n-1``."""

    def __init__(self, n: int, bits: np.ndarray):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        bits = np.ascontiguousarray(bits, dtype=np.uint8)
        if bits.shape != (n, _row_bytes(n)):
            raise ValueError(f"bit matrix shape {bits.shape} does not fit n={n}")
        bits.setflags(write=False)
        self.n = n
        self.bits = bits
        self._row_int_cache: list[int] | None = None
        self._degrees: np.ndarray | None = None

    # construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        bits = np.zeros((n, _row_bytes(n)), dtype=np.uint8)
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            bits[u, v >> 3] |= np.uint8(1 << (v & 7))
            bits[v, u >> 3] |= np.uint8(1 << (u & 7))
        return cls(n, bits)

    @classmethod
    def from_dense(cls, adj) -> "Graph":
        adj = np.asarray(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise ValueError("adjacency must have a zero diagonal")
        n = adj.shape[0]
        if n == 0:
            return cls(0, np.zeros((0, 0), dtype=np.uint8))
        return cls(n, np.packbits(adj, axis=1, bitorder="little"))

    def with_edge(self, u: int, v: int) -> "Graph":
        """Copy of this graph with edge ``{u, v}`` added."""
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        bits = self.bits.copy()
        bits[u, v >> 3] |= np.uint8(1 << (v & 7))
        bits[v, u >> 3] |= np.uint8(1 << (u & 7))
        return Graph(self.n, bits)

    def induced_subgraph(self, vertices: Iterable[int]) -> "Graph":
        """Subgraph induced on ``vertices``, relabeled ``0..k-1`` in ascending order."""
        keep = sorted({self._check_vertex(v) for v in vertices})
        if not keep:
            return Graph(0, np.zeros((0, 0), dtype=np.uint8))
        return Graph.from_dense(self.to_dense()[np.ix_(keep, keep)])

    # queries ------------------------------------------------------------

    def _check_vertex(self, v) -> int:
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            raise TypeError(f"vertex must be an integer, got {v!r}")
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for n={self.n}")
        return int(v)

    def has_edge(self, u: int, v: int) -> bool:
        u = self._check_vertex(u)
        v = self._check_vertex(v)
        return bool(self.bits[u, v >> 3] >> (v & 7) & 1)

    def row(self, v: int) -> np.ndarray:
        """Boolean neighborhood indicator of ``v``."""
        v = self._check_vertex(v)
        return np.unpackbits(self.bits[v], bitorder="little")[: self.n].astype(bool)

    def neighbors(self, v: int) -> np.ndarray:
        """Neighbors of ``v`` in ascending order."""
        return np.flatnonzero(self.row(v))

    def degree(self, v: int) -> int:
        return int(self.degrees()[self._check_vertex(v)])

    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            self._degrees = np.bitwise_count(self.bits).sum(axis=1, dtype=np.int64)
        return self._degrees

    @property
    def edge_count(self) -> int:
        return int(self.degrees().sum()) // 2

    def row_ints(self) -> list[int]:
        """Neighborhoods as Python integer bitsets (bit ``j`` = vertex ``j``)."""
        if self._row_int_cache is None:
            self._row_int_cache = [int.from_bytes(r.tobytes(), "little") for r in self.bits]
        return self._row_int_cache

    def to_dense(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros((0, 0), dtype=bool)
        return np.unpackbits(self.bits, axis=1, bitorder="little")[:, : self.n].astype(bool)

    def edges(self) -> np.ndarray:
        """All edges ``(u, v)`` with ``u < v`` in lexicographic order, shape (m, 2)."""
        chunks = []
        for u in range(self.n):
            nb = self.neighbors(u)
            nb = nb[nb > u]
            if nb.size:
                chunks.append(np.column_stack([np.full(nb.size, u), nb]))
        if not chunks:
            return np.zeros((0, 2), dtype=np.int64)
        return np.concatenate(chunks).astype(np.int64)

    def common_neighbors(self, vertices: Iterable[int]) -> np.ndarray:
        """Vertices outside ``vertices`` adjacent to every member; all of V for the empty set."""
        members = sorted({self._check_vertex(s) for s in vertices})
        if not members:
            return np.arange(self.n)
        acc = np.bitwise_and.reduce(self.bits[members], axis=0)
        mask = np.unpackbits(acc, bitorder="little")[: self.n].astype(bool)
        # a vertex is never its own neighbor, so members drop out already
        return np.flatnonzero(mask)

    def is_clique(self, vertices: Iterable[int]) -> bool:
        members = sorted({self._check_vertex(s) for s in vertices})
        rows = self.row_ints()
        for i, u in enumerate(members):
            need = 0
            for w in members[i + 1 :]:
                need |= 1 << w
            if rows[u] & need != need:
                return False
        return True

    # identity -----------------------------------------------------------

    def canonical_bytes(self) -> bytes:
        return b"hatguess-graph-v1" + self.n.to_bytes(8, "little") + self.bits.tobytes()

    def graph_hash(self) -> str:
        """SHA-256 over the canonical bit matrix (a bijection with the canonical edge list)."""
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.canonical_bytes())

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"


def _row_bytes(n: int) -> int:
    return (n + 7) // 8


def pair_index(u: int, v: int, n: int) -> int:
    """Rank of the unordered pair ``{u, v}`` among all pairs in lexicographic order."""
    a, b = (u, v) if u < v else (v, u)
    return a * n - a * (a + 1) // 2 + (b - a - 1)


# random graphs ----------------------------------------------------------


@dataclass(frozen=True)
class GnpParams:
    n: int
    p: Fraction | float | str
    seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        p = as_fraction(self.p)
        if not 0 < p < 1:
            raise ValueError(f"edge probability must lie in (0, 1), got {p}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "p", p)


def as_fraction(p) -> Fraction:
    """Exact rational from ``"num/den"``, a decimal string, a Fraction, int or float."""
    if isinstance(p, Fraction):
        return p
    if isinstance(p, str):
        return Fraction(p.strip())
    if isinstance(p, float):
        return Fraction(p)
    return Fraction(p)


def edge_threshold(p) -> int:
    """Integer threshold T with ``u < p`` iff ``k < T`` for ``u = k / 2**53``."""
    return ceil(as_fraction(p) * 2**_UNIFORM_BITS)


@numba.njit(cache=True, nogil=True, inline="always")
def _mix64_nb(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True, parallel=True)
def _sample_bits(n, key, threshold):
    # a worker owns a block of 8 consecutive u: rows u and byte column u >> 3 of
    # every row, so the mirrored writes never race
    nbytes = (n + 7) // 8
    out = np.zeros((n, nbytes), dtype=np.uint8)
    golden = np.uint64(0x9E3779B97F4A7C15)
    for blk in numba.prange(nbytes):
        for u in range(blk * 8, min(blk * 8 + 8, n)):
            base = np.uint64(u * n - u * (u + 1) // 2)
            ubit = np.uint8(1 << (u & 7))
            ctr = key + (base + np.uint64(1)) * golden
            for v in range(u + 1, n):
                z = _mix64_nb(ctr)
                ctr += golden
                if (z >> np.uint64(11)) < threshold:
                    out[u, v >> 3] |= np.uint8(1 << (v & 7))
                    out[v, blk] |= ubit
    return out


_SAMPLER_LOCK = threading.Lock()


def pair_uniform_k(seed: int, idx: int) -> int:
    """53-bit draw for pair rank ``idx``; pure-Python twin of the compiled sampler."""
    z = (seed_key(seed) + (idx + 1) * GOLDEN) & 0xFFFFFFFFFFFFFFFF
    return mix64(z) >> 11


def sample_gnp(params: GnpParams | None = None, *, n=None, p=None, seed=0) -> Graph:
    """Draw G(n, p); identical parameters give the identical graph."""
    if params is None:
        params = GnpParams(n, p, seed)
    n = params.n
    if n == 0:
        return empty(0)
    # numba's fallback threading layer rejects concurrent parallel launches
    with _SAMPLER_LOCK:
        bits = _sample_bits(
            np.int64(n), np.uint64(seed_key(params.seed)), np.uint64(edge_threshold(params.p))
        )
    return Graph(n, bits)


# named families ---------------------------------------------------------


def empty(n: int) -> Graph:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return Graph(n, np.zeros((n, _row_bytes(n)), dtype=np.uint8))


def complete(n: int) -> Graph:
    if n < 0:
        raise ValueError("n must be nonnegative")
    adj = ~np.eye(n, dtype=bool)
    return Graph.from_dense(adj)


def path(n: int) -> Graph:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def book(d: int, m: int) -> Graph:
    """K_d on ``0..d-1`` plus ``m`` independent petals ``d..d+m-1`` joined to the whole core."""
    if d < 1 or m < 0:
        raise ValueError("book graph needs d >= 1 and m >= 0")
    n = d + m
    adj = np.zeros((n, n), dtype=bool)
    adj[:d, :] = True
    adj[:, :d] = True
    np.fill_diagonal(adj, False)
    return Graph.from_dense(adj)


# edge-list text format --------------------------------------------------


def format_edge_list(G: Graph) -> str:
    lines = [f"{G.n} {G.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in G.edges().tolist())
    return "\n".join(lines) + "\n"


def write_edge_list(G: Graph, path, comment: str | None = None) -> None:
    """Write the canonical edge list; an optional ``#`` comment goes after the last edge."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{G.n} {G.edge_count}\n")
        for u in range(G.n):
            nb = G.neighbors(u)
            nb = nb[nb > u]
            if nb.size:
                fh.write("".join(f"{u} {v}\n" for v in nb.tolist()))
        if comment is not None:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text(encoding="ascii"))


def parse_edge_list(text: str) -> Graph:
    header = None
    edges: list[tuple[int, int]] = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise EdgeListError(f"expected two nonnegative integers, got {raw!r}", lineno)
        a, b = int(parts[0]), int(parts[1])
        if header is None:
            header = (a, b)
            continue
        n = header[0]
        if a >= n or b >= n:
            raise EdgeListError(f"vertex out of range for n={n}", lineno)
        if a == b:
            raise EdgeListError("self-loop", lineno)
        key = (min(a, b), max(a, b))
        if key in seen:
            raise EdgeListError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append(key)
    if header is None:
        raise EdgeListError("missing 'n m' header")
    if len(edges) != header[1]:
        raise EdgeListError(f"header declares {header[1]} edges, found {len(edges)}")
    return Graph.from_edges(header[0], edges)

