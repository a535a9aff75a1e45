import itertools
import os
from pathlib import Path

import networkx as nx
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qmc.graph_core import WeightedGraph

settings.register_profile(
    "repro", derandomize=True, deadline=None, print_blob=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))

DATA = Path(__file__).resolve().parents[1] / "data"


def unit(n, pairs):
    return WeightedGraph.unweighted(n, pairs)


def cycle(n):
    return unit(n, [(i, (i + 1) % n) for i in range(n)])


def path(n):
    return unit(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return unit(n, list(itertools.combinations(range(n), 2)))


def star(leaves):
    return unit(leaves + 1, [(0, k) for k in range(1, leaves + 1)])


def from_nx(g: nx.Graph) -> WeightedGraph:
    mapping = {v: k for k, v in enumerate(sorted(g.nodes))}
    return unit(len(mapping), [(mapping[a], mapping[b]) for a, b in g.edges])


def all_graphs(n):
    """Every labelled-up-to-isomorphism graph on n <= 7 vertices (networkx atlas)."""
    return [from_nx(g) for g in nx.graph_atlas_g() if g.number_of_nodes() == n]


@st.composite
def graphs(draw, min_n=1, max_n=7, weighted=False, min_edges=0):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=min(min_edges, len(pairs)))
                  if pairs else st.just([]))
    if weighted:
        ws = draw(st.lists(st.floats(0.1, 5.0), min_size=len(chosen), max_size=len(chosen)))
    else:
        ws = [1.0] * len(chosen)
    return WeightedGraph(n, tuple((i, j, w) for (i, j), w in zip(chosen, ws)))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
