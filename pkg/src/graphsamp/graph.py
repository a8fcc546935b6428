"""Graphs, synthetic generators, edge-list IO and the normalized Laplacian.

Node indices are 0-based everywhere, including the edge-list files.
"""
from __future__ import annotations

import os
import tempfile
import warnings
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (DuplicateEdge, EmptyGraph, GenerationFailed,
                     IsolatedNode, ParseError, SelfLoop)

MAX_RETRIES = 100


@dataclass(frozen=True, eq=False)
class Graph:
    """Weighted undirected simple graph.

    Edges are stored canonically: ``edges[e] = (i, j)`` with ``i < j``,
    rows sorted lexicographically, one entry per unordered pair.
    """
    n: int
    edges: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n, edges, weights=None):
        """Build a graph from ``(i, j)`` pairs, validating the simple-graph invariants."""
        n = int(n)
        if n <= 0:
            raise EmptyGraph("graph has no nodes")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=float).ravel()
        if len(w) != len(e):
            raise ValueError("weights and edges differ in length")
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"edge endpoint outside [0, {n})")
        if np.any(e[:, 0] == e[:, 1]):
            i = int(e[e[:, 0] == e[:, 1]][0, 0])
            raise SelfLoop(f"self-loop at node {i}")
        if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
            raise ValueError("edge weights must be finite and strictly positive")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        dup = (np.diff(lo) == 0) & (np.diff(hi) == 0)
        if np.any(dup):
            k = int(np.flatnonzero(dup)[0])
            raise DuplicateEdge(f"edge ({lo[k]}, {hi[k]}) appears more than once")
        canon = np.column_stack([lo, hi])
        canon.setflags(write=False)
        w.setflags(write=False)
        return cls(n, canon, w)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> sp.csr_array:
        """Symmetric weighted adjacency matrix W."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        W = sp.coo_array((np.concatenate([self.weights, self.weights]),
                          (np.concatenate([i, j]), np.concatenate([j, i]))),
                         shape=(self.n, self.n))
        W = W.tocsr()
        W.sort_indices()
        return W

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n)
        np.add.at(d, self.edges[:, 0], self.weights)
        np.add.at(d, self.edges[:, 1], self.weights)
        return d

    @property
    def connected(self) -> bool:
        ncomp, _ = connected_components(self.adjacency(), directed=False)
        return ncomp == 1

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_weighted_edges_from((int(i), int(j), float(w))
                                  for (i, j), w in zip(self.edges, self.weights))
        return G

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None


def normalized_laplacian(g: Graph) -> sp.csr_array:
    """Symmetric normalized Laplacian ``I - D^{-1/2} W D^{-1/2}`` as a CSR array."""
    if g.n == 0:
        raise EmptyGraph("graph has no nodes")
    d = g.degrees()
    if np.any(d <= 0):
        raise IsolatedNode(f"node {int(np.flatnonzero(d <= 0)[0])} has zero degree")
    s = 1.0 / np.sqrt(d)
    i, j = g.edges[:, 0], g.edges[:, 1]
    off = -g.weights * s[i] * s[j]
    rows = np.concatenate([i, j, np.arange(g.n)])
    cols = np.concatenate([j, i, np.arange(g.n)])
    vals = np.concatenate([off, off, np.ones(g.n)])
    L = sp.coo_array((vals, (rows, cols)), shape=(g.n, g.n)).tocsr()
    L.sort_indices()
    return L


# --------------------------------------------------------------------------
# generators

def _from_nx(G: nx.Graph) -> Graph:
    return Graph.from_edges(G.number_of_nodes(), list(G.edges()))


def gen_small_world(n, degree, rewire_p, seed) -> Graph:
    """Connected unweighted Watts-Strogatz graph.

    A ring lattice where every node links to ``degree/2`` neighbours on each
    side, each lattice edge rewired with probability ``rewire_p``. Draws that
    come out disconnected are regenerated with ``seed + 1, seed + 2, ...``.
    """
    if degree % 2 or degree <= 0:
        raise ValueError(f"degree must be a positive even number, got {degree}")
    if degree >= n:
        raise ValueError(f"degree ({degree}) must be smaller than n ({n})")
    if not 0.0 <= rewire_p <= 1.0:
        raise ValueError(f"rewire_p must lie in [0, 1], got {rewire_p}")
    for attempt in range(MAX_RETRIES):
        G = nx.watts_strogatz_graph(n, degree, rewire_p, seed=seed + attempt)
        g = _from_nx(G)
        if g.connected:
            return g
    raise GenerationFailed(f"no connected small-world graph after {MAX_RETRIES} draws")


def gen_community(n, communities=10, p_in=0.2, p_out=0.002, seed=0) -> Graph:
    """Connected planted-partition graph with near-equal community sizes."""
    if communities < 2:
        raise ValueError("need at least two communities")
    if communities > n:
        raise ValueError("more communities than nodes")
    if not (0 < p_out <= p_in <= 1):
        raise ValueError(f"need 0 < p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}")
    base, extra = divmod(n, communities)
    sizes = [base + (1 if c < extra else 0) for c in range(communities)]
    for attempt in range(MAX_RETRIES):
        G = nx.random_partition_graph(sizes, p_in, p_out, seed=seed + attempt)
        g = _from_nx(G)
        if g.connected:
            return g
    raise GenerationFailed(f"no connected community graph after {MAX_RETRIES} draws")


def community_labels(n, communities) -> np.ndarray:
    """Block membership used by :func:`gen_community` for the same ``(n, communities)``."""
    base, extra = divmod(n, communities)
    sizes = [base + (1 if c < extra else 0) for c in range(communities)]
    return np.repeat(np.arange(communities), sizes)


# --------------------------------------------------------------------------
# edge-list IO

def parse_graph(text: str, *, warn_disconnected=True) -> Graph:
    header = None
    edges, weights = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise ParseError("header must be 'n m'", lineno)
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise ParseError(f"bad header {line!r}", lineno) from None
            if header[0] <= 0 or header[1] < 0:
                raise ParseError("header counts out of range", lineno)
            continue
        if len(parts) != 3:
            raise ParseError(f"expected 'i j w', got {line!r}", lineno)
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"cannot parse {line!r}", lineno) from None
        if i == j:
            raise SelfLoop(f"line {lineno}: self-loop at node {i}")
        if not (0 <= i < header[0] and 0 <= j < header[0]):
            raise ParseError(f"node index outside [0, {header[0]})", lineno)
        if not (w > 0 and np.isfinite(w)):
            raise ParseError(f"weight must be positive, got {parts[2]}", lineno)
        edges.append((i, j))
        weights.append(w)
    if header is None:
        raise ParseError("missing header line")
    if len(edges) != header[1]:
        raise ParseError(f"header announces {header[1]} edges, found {len(edges)}")
    g = Graph.from_edges(header[0], np.array(edges, dtype=np.int64).reshape(-1, 2), weights)
    if warn_disconnected and not g.connected:
        warnings.warn("loaded graph is not connected", RuntimeWarning, stacklevel=2)
    return g


def load_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def format_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.num_edges}"]
    lines += [f"{i} {j} {float(w)!r}" for (i, j), w in zip(g.edges.tolist(), g.weights)]
    return "\n".join(lines) + "\n"


def save_graph(g: Graph, path) -> None:
    atomic_write_text(path, format_graph(g))


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
