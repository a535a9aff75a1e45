"""Graphs, graph6 ingestion, structural predicates and matchings."""

from __future__ import annotations

import gzip
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Optional, Sequence

import networkx as nx
import numpy as np


class GraphError(ValueError):
    pass


class Graph6Error(GraphError):
    pass


class InstanceTooLarge(GraphError):
    pass


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph on vertices ``0..n-1`` with positive edge weights.

    Edges are stored as ``(i, j, w)`` with ``i < j``, in the order given.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise GraphError(f"vertex count must be >= 1, got {self.n}")
        normalized = []
        seen = set()
        for e in self.edges:
            if len(e) == 2:
                i, j, w = e[0], e[1], 1.0
            else:
                i, j, w = e
            i, j = int(i), int(j)
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if not (0 <= i and j < self.n):
                raise GraphError(f"edge ({i}, {j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i}, {j})")
            w = float(w)
            if not w > 0:
                raise GraphError(f"edge ({i}, {j}) has non-positive weight {w}")
            seen.add((i, j))
            normalized.append((i, j, w))
        object.__setattr__(self, "edges", tuple(normalized))

    @classmethod
    def unweighted(cls, n: int, pairs) -> "WeightedGraph":
        return cls(n, tuple((i, j, 1.0) for i, j in pairs))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j, _ in self.edges]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    @cached_property
    def adjacency_masks(self) -> tuple[int, ...]:
        """Neighbourhood of each vertex as an integer bitmask."""
        masks = [0] * self.n
        for i, j, _ in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(i, j): k for k, (i, j, _) in enumerate(self.edges)}

    def neighbors(self, i: int) -> list[int]:
        mask = self.adjacency_masks[i]
        return [j for j in range(self.n) if mask >> j & 1]

    def degree(self, i: int) -> int:
        return self.adjacency_masks[i].bit_count()

    def degrees(self) -> list[int]:
        return [mask.bit_count() for mask in self.adjacency_masks]

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency_masks[i] >> j & 1)

    def subgraph_on_edges(self, edge_ids: Sequence[int]) -> "WeightedGraph":
        """Same vertex set, restricted edge set (isolated vertices are kept)."""
        return WeightedGraph(self.n, tuple(self.edges[k] for k in edge_ids))

    def scaled(self, factor: float) -> "WeightedGraph":
        return WeightedGraph(self.n, tuple((i, j, w * factor) for i, j, w in self.edges))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges)
        return g

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [[i, j, w] for i, j, w in self.edges]}

    @classmethod
    def from_json(cls, doc: dict) -> "WeightedGraph":
        try:
            n = int(doc["n"])
            edges = tuple(tuple(e) for e in doc["edges"])
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph document: {exc}") from exc
        return cls(n, edges)


def load_graph_json(path) -> WeightedGraph:
    with open(path) as fh:
        return WeightedGraph.from_json(json.load(fh))


# ---------------------------------------------------------------- graph6

def _decode_n(data: bytes) -> tuple[int, int]:
    """Return (n, header length)."""
    if not data:
        raise Graph6Error("empty graph6 string")
    b0 = data[0]
    if b0 < 63 or b0 > 126:
        raise Graph6Error(f"malformed header byte {b0!r}")
    if b0 != 126:
        return b0 - 63, 1
    if len(data) >= 2 and data[1] == 126:
        # 8-byte form, n up to 2^36 - 1
        if len(data) < 8:
            raise Graph6Error("truncated long-form header")
        chunk = data[2:8]
        offset = 8
    else:
        if len(data) < 4:
            raise Graph6Error("truncated long-form header")
        chunk = data[1:4]
        offset = 4
    n = 0
    for c in chunk:
        if c < 63 or c > 126:
            raise Graph6Error(f"malformed header byte {c!r}")
        n = (n << 6) | (c - 63)
    return n, offset


def parse_graph6(data: bytes | str) -> WeightedGraph:
    """Decode one graph6 record into a unit-weight graph."""
    if isinstance(data, str):
        data = data.encode("ascii")
    data = data.strip()
    if data.startswith(b">>graph6<<"):
        data = data[len(b">>graph6<<"):]
    n, offset = _decode_n(data)
    if n < 1:
        raise Graph6Error("graph6 record with zero vertices")
    payload = data[offset:]
    nbits = n * (n - 1) // 2
    nbytes = (nbits + 5) // 6
    if len(payload) < nbytes:
        raise Graph6Error(f"truncated payload: need {nbytes} bytes, got {len(payload)}")
    if len(payload) > nbytes:
        raise Graph6Error(f"trailing bytes after payload ({len(payload) - nbytes})")
    bits = 0
    for c in payload:
        if c < 63 or c > 126:
            raise Graph6Error(f"invalid payload byte {c!r}")
        bits = (bits << 6) | (c - 63)
    pad = 6 * nbytes - nbits
    if bits & ((1 << pad) - 1):
        raise Graph6Error("non-zero padding bits")
    bits >>= pad
    edges = []
    pos = nbits - 1
    for j in range(1, n):
        for i in range(j):
            if bits >> pos & 1:
                edges.append((i, j, 1.0))
            pos -= 1
    edges.sort()
    return WeightedGraph(n, tuple(edges))


def to_graph6(g: WeightedGraph) -> str:
    """Encode the edge set (weights dropped) as graph6."""
    n = g.n
    if n <= 62:
        header = chr(n + 63)
    elif n <= 258047:
        header = "~" + "".join(chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    else:
        raise Graph6Error(f"n={n} too large for graph6")
    masks = g.adjacency_masks
    bits = []
    for j in range(1, n):
        for i in range(j):
            bits.append(masks[i] >> j & 1)
    bits.extend([0] * (-len(bits) % 6))
    body = "".join(
        chr(63 + int("".join(map(str, bits[k:k + 6])), 2)) for k in range(0, len(bits), 6)
    )
    return header + body


def iter_graph6_file(path) -> Iterator[WeightedGraph]:
    """Yield graphs from a .g6 (optionally gzipped) file, skipping blank lines."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield parse_graph6(line)
            except Graph6Error as exc:
                raise Graph6Error(f"{path}:{lineno}: {exc}") from exc


def iter_graph6_lines(path) -> Iterator[bytes]:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield line


# ------------------------------------------------------------ predicates

def is_triangle_free(g: WeightedGraph) -> bool:
    masks = g.adjacency_masks
    for i, j, _ in g.edges:
        if masks[i] & masks[j]:
            return False
    return True


@dataclass(frozen=True)
class Bipartition:
    side: tuple[int, ...]

    def part(self, label: int) -> list[int]:
        return [v for v, s in enumerate(self.side) if s == label]


def bipartition(g: WeightedGraph) -> Optional[Bipartition]:
    """BFS 2-colouring of every component; ``None`` if an odd cycle exists."""
    side = [-1] * g.n
    masks = g.adjacency_masks
    for root in range(g.n):
        if side[root] >= 0:
            continue
        side[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            nb = masks[v]
            while nb:
                low = nb & -nb
                u = low.bit_length() - 1
                nb ^= low
                if side[u] < 0:
                    side[u] = 1 - side[v]
                    queue.append(u)
                elif side[u] == side[v]:
                    return None
    return Bipartition(tuple(side))


def is_connected(g: WeightedGraph) -> bool:
    masks = g.adjacency_masks
    seen = 1
    frontier = 1
    full = (1 << g.n) - 1
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= masks[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        seen |= nxt
    return seen == full


def is_biconnected(g: WeightedGraph) -> bool:
    """Connected with no articulation vertex (needs n >= 3)."""
    if g.n < 3:
        raise GraphError("biconnectivity is undefined for fewer than 3 vertices")
    if not is_connected(g):
        return False
    masks = g.adjacency_masks
    full = (1 << g.n) - 1
    for v in range(g.n):
        rest = full & ~(1 << v)
        start = rest & -rest
        seen = start
        frontier = start
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= masks[low.bit_length() - 1]
                f ^= low
            nxt &= rest
            frontier = nxt & ~seen
            seen |= nxt
        if seen != rest:
            return False
    return True


def vertex_cover_number(g: WeightedGraph) -> int:
    """Exact minimum vertex cover size by branch and bound.

    Degree-0/1 vertices are reduced greedily; otherwise branch on a maximum
    degree vertex v: either v is in the cover, or all of N(v) is.
    """
    if g.n > 40:
        raise InstanceTooLarge(f"vertex cover is exact-only; n={g.n} > 40")
    best = [g.n]

    def lower_bound(masks, alive):
        # maximal matching bound
        used = 0
        count = 0
        a = alive
        while a:
            low = a & -a
            v = low.bit_length() - 1
            a ^= low
            if used >> v & 1:
                continue
            nb = masks[v] & alive & ~used
            if nb:
                u = (nb & -nb).bit_length() - 1
                used |= low | (1 << u)
                count += 1
        return count

    def solve(masks, alive, taken):
        # drop isolated vertices, take neighbours of pendant vertices
        changed = True
        while changed:
            changed = False
            a = alive
            while a:
                low = a & -a
                v = low.bit_length() - 1
                a ^= low
                if not alive >> v & 1:
                    continue
                nb = masks[v] & alive
                d = nb.bit_count()
                if d == 0:
                    alive &= ~low
                    changed = True
                elif d == 1:
                    alive &= ~(low | nb)
                    taken += 1
                    changed = True
        if taken >= best[0]:
            return
        if alive == 0 or not any(masks[v] & alive for v in _bits(alive)):
            best[0] = min(best[0], taken)
            return
        if taken + lower_bound(masks, alive) >= best[0]:
            return
        v = max(_bits(alive), key=lambda x: (masks[x] & alive).bit_count())
        nb = masks[v] & alive
        solve(masks, alive & ~(1 << v), taken + 1)
        solve(masks, alive & ~nb & ~(1 << v), taken + nb.bit_count())

    solve(g.adjacency_masks, (1 << g.n) - 1, 0)
    return best[0]


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def stable_set_property_ok(g: WeightedGraph, max_set_size: int) -> bool:
    """Every stable set S with |S| <= max_set_size has |N(S)| >= |S| + 1."""
    masks = g.adjacency_masks
    n = g.n
    for size in range(1, max_set_size + 1):
        for subset in itertools.combinations(range(n), size):
            union = 0
            stable = True
            for v in subset:
                if union & (1 << v):
                    stable = False
                    break
                union |= masks[v]
            if not stable:
                continue
            # a vertex of S adjacent to an earlier one is caught above only one
            # way round; check pairwise membership explicitly
            smask = sum(1 << v for v in subset)
            if union & smask:
                continue
            if union.bit_count() < size + 1:
                return False
    return True


@dataclass(frozen=True)
class FilterOutcome:
    passed: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


def candidate_filter(g: WeightedGraph, stable_set_size: int = 0) -> FilterOutcome:
    """Candidate filter for the odd-set verification on s = n vertices.

    Checks, cheapest first: 2 <= deg <= (s-1)/2, |E| >= s, non-bipartite,
    triangle-free, biconnected, and the neighbourhood-expansion property for
    stable sets of size <= ``stable_set_size`` (0 disables it).
    """
    s = g.n
    if s < 3 or s % 2 == 0:
        raise GraphError(f"filter expects an odd vertex count >= 3, got {s}")
    degs = g.degrees()
    if min(degs) < 2:
        return FilterOutcome(False, "min-degree")
    if max(degs) > (s - 1) // 2:
        return FilterOutcome(False, "max-degree")
    if g.m < s:
        return FilterOutcome(False, "edge-count")
    if bipartition(g) is not None:
        return FilterOutcome(False, "bipartite")
    if not is_triangle_free(g):
        return FilterOutcome(False, "triangle")
    if not is_biconnected(g):
        return FilterOutcome(False, "not-biconnected")
    if stable_set_size and not stable_set_property_ok(g, stable_set_size):
        return FilterOutcome(False, "stable-set")
    return FilterOutcome(True)


# -------------------------------------------------------------- matching

@dataclass(frozen=True)
class Matching:
    selected: tuple[bool, ...]

    def edges(self) -> list[int]:
        return [k for k, s in enumerate(self.selected) if s]

    def weight(self, g: WeightedGraph) -> float:
        return float(sum(w for (_, _, w), s in zip(g.edges, self.selected) if s))

    def vector(self) -> np.ndarray:
        return np.array(self.selected, dtype=float)

    def is_valid(self, g: WeightedGraph) -> bool:
        if len(self.selected) != g.m:
            return False
        used = 0
        for (i, j, _), s in zip(g.edges, self.selected):
            if s:
                bits = (1 << i) | (1 << j)
                if used & bits:
                    return False
                used |= bits
        return True


def max_weight_matching(g: WeightedGraph) -> Matching:
    """Maximum weight matching (Edmonds' blossom algorithm via networkx)."""
    if g.m == 0:
        return Matching(())
    pairs = nx.max_weight_matching(g.to_networkx(), maxcardinality=False, weight="weight")
    chosen = {(min(a, b), max(a, b)) for a, b in pairs}
    return Matching(tuple((i, j) in chosen for i, j, _ in g.edges))


def brute_force_matching(g: WeightedGraph, max_edges: int = 24) -> Matching:
    """Exact optimum by recursion over edges; test oracle only."""
    if g.m > max_edges:
        raise InstanceTooLarge(f"{g.m} edges exceeds brute-force limit {max_edges}")
    edges = g.edges
    best_w = -1.0
    best_sel: tuple[int, ...] = ()

    def rec(k, used, weight, chosen):
        nonlocal best_w, best_sel
        if k == len(edges):
            if weight > best_w:
                best_w, best_sel = weight, tuple(chosen)
            return
        i, j, w = edges[k]
        bits = (1 << i) | (1 << j)
        if not used & bits:
            chosen.append(k)
            rec(k + 1, used | bits, weight + w, chosen)
            chosen.pop()
        rec(k + 1, used, weight, chosen)

    rec(0, 0, 0.0, [])
    sel = set(best_sel)
    return Matching(tuple(k in sel for k in range(g.m)))


MAX_POLYTOPE_VERTICES = 15


def in_matching_polytope(g: WeightedGraph, x, tol: float = 1e-8) -> bool:
    """Membership in the matching polytope by full odd-set enumeration."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.m,):
        raise GraphError(f"expected {g.m} edge values, got shape {x.shape}")
    if g.n > MAX_POLYTOPE_VERTICES:
        raise InstanceTooLarge(f"odd-set enumeration capped at n={MAX_POLYTOPE_VERTICES}")
    if np.any(x < -tol):
        return False
    load = np.zeros(g.n)
    for (i, j, _), v in zip(g.edges, x):
        load[i] += v
        load[j] += v
    if np.any(load > 1 + tol):
        return False
    ends = np.array([[i, j] for i, j, _ in g.edges], dtype=np.int64).reshape(-1, 2)
    if g.m == 0:
        return True
    ebits = (1 << ends[:, 0]) | (1 << ends[:, 1])
    for size in range(3, g.n + 1, 2):
        for subset in itertools.combinations(range(g.n), size):
            smask = sum(1 << v for v in subset)
            inside = (ebits & smask) == ebits
            if x[inside].sum() > (size - 1) / 2 + tol:
                return False
    return True
