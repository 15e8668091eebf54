"""Immutable CSR graphs: parsing, cleaning, generation, and adjacency queries.

Graphs are undirected and simple.  Loading an edge list always cleans the
input the same way: self loops are dropped, parallel edges are merged (their
weights summed), the largest connected component is extracted, and vertices
are relabeled to contiguous ids ``0..n-1`` ordered by their original labels.
Every algorithm in this package may therefore assume a connected graph with
positive degrees.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import IO, Union

import numpy as np

from .errors import EmptyGraphError, GraphFormatError, UnsupportedInputError

__all__ = [
    "Graph",
    "load_edge_list",
    "save_edge_list",
    "load_cache",
    "save_cache",
    "degree",
    "neighbor_slice",
    "jump",
    "bfs_hops",
    "triangle_weight",
    "generate_er",
    "generate_ba",
]

_CACHE_MAGIC = b"RDG1"

Source = Union[str, Path, IO]


@dataclass(frozen=True)
class Graph:
    """An undirected weighted graph in compressed sparse row form.

    Each undirected edge {u, v} is stored as the two arcs (u, v) and (v, u).
    The neighbor slice of a vertex is sorted ascending and contains neither
    duplicates nor the vertex itself.  Instances are immutable and safe to
    share across workers.

    Attributes
    ----------
    offsets : int64 array, shape (n + 1,)
        CSR row pointers; the arcs of vertex ``u`` occupy
        ``offsets[u]:offsets[u + 1]``.
    neighbors : int64 array, shape (2m,)
        Arc heads.
    weights : float64 array, shape (2m,)
        Arc weights, strictly positive; ``1.0`` throughout for unweighted
        graphs.
    weighted_degrees : float64 array, shape (n,)
        Per-vertex sums of incident edge weights.
    old_ids : int64 array, shape (n,)
        Maps a contiguous vertex id back to the label it carried in the
        original input.
    """

    offsets: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray
    weighted_degrees: np.ndarray
    old_ids: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def edge_count(self) -> int:
        return len(self.neighbors) // 2

    @cached_property
    def is_unweighted(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    @cached_property
    def sqrt_degrees(self) -> np.ndarray:
        return np.sqrt(self.weighted_degrees)

    @cached_property
    def inv_sqrt_degrees(self) -> np.ndarray:
        """1 / sqrt(weighted degree), used by the normalized operators."""
        return 1.0 / self.sqrt_degrees

    @cached_property
    def inv_degrees(self) -> np.ndarray:
        return 1.0 / self.weighted_degrees

    @cached_property
    def label_index(self) -> dict:
        """Original label -> contiguous id (inverse of ``old_ids``)."""
        return {int(old): new for new, old in enumerate(self.old_ids)}

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        kind = "unweighted" if self.is_unweighted else "weighted"
        return f"Graph(n={self.node_count}, m={self.edge_count}, {kind})"


# ---------------------------------------------------------------------------
# construction pipeline
# ---------------------------------------------------------------------------


def _csr_from_canonical(n: int, eu: np.ndarray, ev: np.ndarray, w: np.ndarray):
    """Assemble CSR arrays from deduplicated canonical edges (eu < ev)."""
    src = np.concatenate([eu, ev])
    dst = np.concatenate([ev, eu])
    ww = np.concatenate([w, w])
    order = np.lexsort((dst, src))
    src, dst, ww = src[order], dst[order], ww[order]
    counts = np.bincount(src, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    degrees = np.bincount(src, weights=ww, minlength=n)
    return offsets, dst.astype(np.int64), ww.astype(np.float64), degrees


def _gather_frontier(offsets: np.ndarray, neighbors: np.ndarray, frontier: np.ndarray):
    """Concatenate the neighbor slices of every vertex in ``frontier``."""
    starts = offsets[frontier]
    counts = offsets[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return neighbors[:0]
    group_starts = np.repeat(starts, counts)
    group_bases = np.concatenate([[0], np.cumsum(counts)[:-1]])
    within = np.arange(total, dtype=np.int64) - np.repeat(group_bases, counts)
    return neighbors[group_starts + within]


def _bfs_layers(offsets, neighbors, source, hops):
    """BFS from ``source`` writing hop counts into ``hops`` (in place)."""
    hops[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    while frontier.size:
        nxt = np.unique(_gather_frontier(offsets, neighbors, frontier))
        nxt = nxt[hops[nxt] < 0]
        d += 1
        hops[nxt] = d
        frontier = nxt


def _component_labels(offsets: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    n = len(offsets) - 1
    label = np.full(n, -1, dtype=np.int64)
    current = 0
    for seed in range(n):
        if label[seed] >= 0:
            continue
        hops = np.full(n, -1, dtype=np.int64)
        _bfs_layers(offsets, neighbors, seed, hops)
        label[hops >= 0] = current
        current += 1
    return label


def _build_graph(u_raw: np.ndarray, v_raw: np.ndarray, w_raw: np.ndarray) -> Graph:
    """Clean raw (label, label, weight) triples into a canonical Graph.

    Applies the full pipeline: self-loop removal, parallel-edge merging,
    largest-connected-component extraction, and relabeling to contiguous
    ids ordered by original label.
    """
    keep = u_raw != v_raw
    u_raw, v_raw, w_raw = u_raw[keep], v_raw[keep], w_raw[keep]
    if u_raw.size == 0:
        raise EmptyGraphError("no edges remain after removing self loops")

    labels = np.unique(np.concatenate([u_raw, v_raw]))
    u = np.searchsorted(labels, u_raw)
    v = np.searchsorted(labels, v_raw)

    pairs = np.stack([np.minimum(u, v), np.maximum(u, v)], axis=1)
    uniq, inverse = np.unique(pairs, axis=0, return_inverse=True)
    merged_w = np.bincount(inverse, weights=w_raw, minlength=len(uniq))

    n_all = len(labels)
    offsets, neighbors, weights, _ = _csr_from_canonical(
        n_all, uniq[:, 0], uniq[:, 1], merged_w
    )

    comp = _component_labels(offsets, neighbors)
    counts = np.bincount(comp)
    best = int(np.argmax(counts))
    kept = np.where(comp == best)[0]

    edge_mask = comp[uniq[:, 0]] == best
    eu = np.searchsorted(kept, uniq[edge_mask, 0])
    ev = np.searchsorted(kept, uniq[edge_mask, 1])
    ew = merged_w[edge_mask]

    offsets, neighbors, weights, degrees = _csr_from_canonical(len(kept), eu, ev, ew)
    return Graph(
        offsets=offsets,
        neighbors=neighbors,
        weights=weights,
        weighted_degrees=degrees,
        old_ids=labels[kept].astype(np.int64),
    )


# ---------------------------------------------------------------------------
# edge-list I/O
# ---------------------------------------------------------------------------


def _iter_lines(source: Source):
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from fh
    else:
        data = source.read()
        if isinstance(data, str):
            data = data.encode()
        yield from io.BytesIO(data)


def load_edge_list(source: Source, weighted: bool = False) -> Graph:
    """Parse a whitespace-delimited edge list and return the cleaned graph.

    Each non-blank line is ``u v`` or ``u v w`` with nonnegative integer
    vertex labels; lines starting with ``#`` are comments.  With
    ``weighted=True`` the third column is required and must be positive;
    otherwise any third column is ignored.

    Parameters
    ----------
    source : str, Path, or file-like
        Path to the file, or an open text/binary stream.
    weighted : bool
        Whether to read the third column as an edge weight.

    Raises
    ------
    GraphFormatError
        On any malformed line (carries the line number).
    EmptyGraphError
        If no edges remain after cleaning.
    """
    us, vs, ws = [], [], []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.decode("utf-8", errors="replace").strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise GraphFormatError(lineno, f"expected 'u v [w]', got {line!r}")
        try:
            u = int(parts[0])
            v = int(parts[1])
        except ValueError:
            raise GraphFormatError(
                lineno, f"vertex labels must be integers, got {line!r}"
            ) from None
        if u < 0 or v < 0:
            raise GraphFormatError(lineno, "vertex labels must be nonnegative")
        if weighted:
            if len(parts) < 3:
                raise GraphFormatError(lineno, "weighted load requires a third column")
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(
                    lineno, f"edge weight must be a number, got {parts[2]!r}"
                ) from None
            if not np.isfinite(w) or w <= 0.0:
                raise GraphFormatError(lineno, f"edge weight must be positive, got {w}")
        else:
            w = 1.0
        us.append(u)
        vs.append(v)
        ws.append(w)
    if not us:
        raise EmptyGraphError("edge list contains no edges")
    return _build_graph(
        np.asarray(us, dtype=np.int64),
        np.asarray(vs, dtype=np.int64),
        np.asarray(ws, dtype=np.float64),
    )


def save_edge_list(g: Graph, path: Source) -> None:
    """Write ``g`` as an edge list over its contiguous internal ids.

    Weights are written as a third column unless the graph is unweighted.
    Reloading the file reproduces the graph exactly.
    """
    eu, ev, w = edge_arrays(g)
    lines = []
    if g.is_unweighted:
        for a, b in zip(eu.tolist(), ev.tolist()):
            lines.append(f"{a} {b}\n")
    else:
        for a, b, x in zip(eu.tolist(), ev.tolist(), w.tolist()):
            lines.append(f"{a} {b} {x!r}\n")
    text = "".join(lines)
    if isinstance(path, (str, Path)):
        with open(path, "w") as fh:
            fh.write(text)
    else:
        path.write(text)


def edge_arrays(g: Graph):
    """Canonical undirected edge arrays ``(eu, ev, w)`` with ``eu < ev``.

    Edges are ordered lexicographically by ``(eu, ev)``.
    """
    n = g.node_count
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(g.offsets))
    mask = rows < g.neighbors
    return rows[mask], g.neighbors[mask], g.weights[mask]


# ---------------------------------------------------------------------------
# binary cache
# ---------------------------------------------------------------------------


def save_cache(g: Graph, path: Union[str, Path]) -> None:
    """Write ``g`` to the binary cache format.

    Layout: magic ``RDG1``, then little-endian uint64 ``n`` and ``m``,
    then the raw ``offsets`` (int64, n+1), ``neighbors`` (int64, 2m),
    ``weights`` (float64, 2m), and ``old_ids`` (int64, n) arrays.
    """
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<QQ", g.node_count, g.edge_count))
        fh.write(g.offsets.astype("<i8").tobytes())
        fh.write(g.neighbors.astype("<i8").tobytes())
        fh.write(g.weights.astype("<f8").tobytes())
        fh.write(g.old_ids.astype("<i8").tobytes())


def load_cache(path: Union[str, Path]) -> Graph:
    """Read a graph previously written by :func:`save_cache`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _CACHE_MAGIC:
        raise GraphFormatError(1, "not a graph cache file (bad magic)")
    try:
        n, m = struct.unpack_from("<QQ", blob, 4)
    except struct.error:
        raise GraphFormatError(1, "truncated graph cache file") from None
    pos = 4 + 16

    def take(count, dtype):
        nonlocal pos
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=pos)
        pos += arr.nbytes
        return arr.copy()

    try:
        offsets = take(n + 1, "<i8")
        neighbors = take(2 * m, "<i8")
        weights = take(2 * m, "<f8")
        old_ids = take(n, "<i8")
    except ValueError:
        raise GraphFormatError(1, "truncated graph cache file") from None
    degrees = np.bincount(
        np.repeat(np.arange(n, dtype=np.int64), np.diff(offsets)),
        weights=weights,
        minlength=n,
    )
    return Graph(offsets, neighbors, weights, degrees, old_ids)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


def _check_vertex(g: Graph, u: int) -> None:
    if not 0 <= u < g.node_count:
        raise IndexError(f"vertex {u} out of range for graph with n={g.node_count}")


def degree(g: Graph, u: int) -> float:
    """Weighted degree of ``u`` (the count of neighbors when unweighted)."""
    _check_vertex(g, u)
    return float(g.weighted_degrees[u])


def neighbor_slice(g: Graph, u: int) -> list:
    """The ``(neighbor, weight)`` pairs of ``u``, sorted by neighbor id."""
    _check_vertex(g, u)
    lo, hi = g.offsets[u], g.offsets[u + 1]
    return list(zip(g.neighbors[lo:hi].tolist(), g.weights[lo:hi].tolist()))


def jump(g: Graph, rng: np.random.Generator) -> int:
    """A uniformly random vertex id drawn from ``rng``."""
    return int(rng.integers(0, g.node_count))


def bfs_hops(g: Graph, source: int) -> np.ndarray:
    """Hop distance from ``source`` to every vertex (-1 if unreachable)."""
    _check_vertex(g, source)
    hops = np.full(g.node_count, -1, dtype=np.int64)
    _bfs_layers(g.offsets, g.neighbors, source, hops)
    return hops


# ---------------------------------------------------------------------------
# derived weights
# ---------------------------------------------------------------------------


def triangle_weight(g: Graph) -> Graph:
    """Reweight an unweighted graph by per-edge triangle counts.

    The weight of each edge becomes the number of triangles it closes;
    edges in no triangle get weight 1 so connectivity is preserved.
    Weighted degrees are recomputed.  The vertex set and id map are
    unchanged.
    """
    if not g.is_unweighted:
        raise UnsupportedInputError("triangle reweighting expects an unweighted graph")
    eu, ev, _ = edge_arrays(g)
    offsets, neighbors = g.offsets, g.neighbors
    new_w = np.empty(len(eu), dtype=np.float64)
    for i, (a, b) in enumerate(zip(eu.tolist(), ev.tolist())):
        na = neighbors[offsets[a] : offsets[a + 1]]
        nb = neighbors[offsets[b] : offsets[b + 1]]
        t = np.intersect1d(na, nb, assume_unique=True).size
        new_w[i] = t if t > 0 else 1.0
    new_offsets, new_neighbors, new_weights, degrees = _csr_from_canonical(
        g.node_count, eu, ev, new_w
    )
    return Graph(new_offsets, new_neighbors, new_weights, degrees, g.old_ids.copy())


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def generate_er(n: int, m_target: int, seed: int) -> Graph:
    """Uniform random graph with ``n`` vertices and ``m_target`` distinct edges.

    Edges are sampled uniformly without replacement from all unordered
    pairs.  The returned graph is the largest connected component, so its
    vertex count may be below ``n``.  Deterministic for a given seed.
    """
    if n < 2:
        raise ValueError("generate_er requires n >= 2")
    max_edges = n * (n - 1) // 2
    if not 1 <= m_target <= max_edges:
        raise ValueError(
            f"m_target must be in [1, {max_edges}] for n={n}, got {m_target}"
        )
    rng = np.random.default_rng(seed)
    chosen: set = set()
    while len(chosen) < m_target:
        need = m_target - len(chosen)
        a = rng.integers(0, n, size=2 * need + 8)
        b = rng.integers(0, n, size=2 * need + 8)
        for u, v in zip(a.tolist(), b.tolist()):
            if u == v:
                continue
            code = (u * n + v) if u < v else (v * n + u)
            chosen.add(code)
            if len(chosen) >= m_target:
                break
    codes = np.fromiter(sorted(chosen), dtype=np.int64, count=m_target)
    us = codes // n
    vs = codes % n
    return _build_graph(us, vs, np.ones(m_target, dtype=np.float64))


def generate_ba(n: int, attach: int, seed: int) -> Graph:
    """Preferential-attachment random graph.

    Starts from a star over the first ``attach + 1`` vertices; every later
    vertex attaches to ``attach`` distinct existing vertices chosen with
    probability proportional to current degree.  Always connected, so the
    whole graph is returned.  Deterministic for a given seed.
    """
    if attach < 1:
        raise ValueError("attach must be >= 1")
    if n < attach + 1:
        raise ValueError(f"generate_ba requires n >= attach + 1 = {attach + 1}")
    rng = np.random.default_rng(seed)
    us: list = []
    vs: list = []
    # degree-proportional sampling pool: each endpoint appears once per
    # incident edge
    pool: list = []
    for v in range(1, attach + 1):
        us.append(0)
        vs.append(v)
        pool.extend((0, v))
    for v in range(attach + 1, n):
        targets: set = set()
        while len(targets) < attach:
            pick = pool[int(rng.integers(0, len(pool)))]
            targets.add(pick)
        for t in sorted(targets):
            us.append(v)
            vs.append(t)
            pool.extend((v, t))
    m = len(us)
    return _build_graph(
        np.asarray(us, dtype=np.int64),
        np.asarray(vs, dtype=np.int64),
        np.ones(m, dtype=np.float64),
    )
