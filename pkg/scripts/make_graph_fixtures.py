#!/usr/bin/env python3
"""Write the graph6 streams used by the verification pipeline.

s = 5 and s = 7: every graph on s vertices, taken from the networkx atlas.
s = 9: every triangle-free graph on 9 vertices (1897 of them), grown by
vertex augmentation over independent sets and deduplicated up to
isomorphism. Graphs with a triangle can never pass the candidate filter,
so this stream yields the same survivors as the full 274668-graph census.
"""

from __future__ import annotations

import argparse
import itertools
from pathlib import Path

import networkx as nx

from qmc.graph_core import WeightedGraph, to_graph6

TRIANGLE_FREE_COUNTS = {1: 1, 2: 2, 3: 3, 4: 7, 5: 14, 6: 38, 7: 107, 8: 410, 9: 1897}


def atlas_graphs(n: int) -> list[nx.Graph]:
    return [g for g in nx.graph_atlas_g() if g.number_of_nodes() == n]


def _independent_sets(g: nx.Graph):
    nodes = list(g.nodes)
    for r in range(len(nodes) + 1):
        for subset in itertools.combinations(nodes, r):
            if not any(g.has_edge(a, b) for a, b in itertools.combinations(subset, 2)):
                yield subset


def triangle_free_graphs(n: int) -> list[nx.Graph]:
    """All triangle-free graphs on n vertices up to isomorphism."""
    layer = [nx.empty_graph(1)]
    for size in range(2, n + 1):
        buckets: dict[str, list[nx.Graph]] = {}
        for g in layer:
            for subset in _independent_sets(g):
                h = g.copy()
                h.add_node(size - 1)
                h.add_edges_from((v, size - 1) for v in subset)
                key = nx.weisfeiler_lehman_graph_hash(h, iterations=4)
                bucket = buckets.setdefault(key, [])
                if not any(nx.is_isomorphic(h, other) for other in bucket):
                    bucket.append(h)
        layer = [g for bucket in buckets.values() for g in bucket]
        expected = TRIANGLE_FREE_COUNTS.get(size)
        if expected is not None and len(layer) != expected:
            raise RuntimeError(f"{len(layer)} triangle-free graphs on {size} vertices, expected {expected}")
    return layer


def _key(g: nx.Graph):
    edges = sorted(tuple(sorted(e)) for e in g.edges)
    return (len(edges), edges)


def write_stream(graphs, path: Path) -> int:
    graphs = sorted(graphs, key=_key)  # neighbours in the stream share most edges
    with open(path, "w") as fh:
        for g in graphs:
            fh.write(to_graph6(WeightedGraph.unweighted(g.number_of_nodes(), list(g.edges))) + "\n")
    return len(graphs)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "data")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    print("s5_all.g6", write_stream(atlas_graphs(5), args.out / "s5_all.g6"))
    print("s7_all.g6", write_stream(atlas_graphs(7), args.out / "s7_all.g6"))
    print("s9_trianglefree.g6", write_stream(triangle_free_graphs(9), args.out / "s9_trianglefree.g6"))


if __name__ == "__main__":
    main()
