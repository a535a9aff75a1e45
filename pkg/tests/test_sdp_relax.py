import functools
import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, cycle, graphs, path, star, unit
from qmc.graph_core import WeightedGraph, vertex_cover_number
from qmc.pauli_sim import PauliString, lambda_max
from qmc.sdp_relax import (EdgeValues, GramVectors, build_moment_structure, c_value, c_value_exact,
                           check_monogamy, check_pair_bound, check_triangles, dump_solution,
                           edge_values, gram_vectors, moment_basis, moment_basis_size, pair_bound,
                           solve_sdp, word_character)

TOL = 1e-6
MATS = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1.0 + 0j, -1.0])}


def kron_word(letters):
    return functools.reduce(np.kron, [MATS[c] for c in letters])


@functools.lru_cache(maxsize=None)
def _solved(g: WeightedGraph, k: int = 2):
    return solve_sdp(g, k)


# ---- basis and structure

@pytest.mark.parametrize("n, k, size", [(2, 1, 7), (9, 2, 352), (5, 5, 1024), (4, 2, 67)])
def test_basis_sizes(n, k, size):
    assert moment_basis_size(n, k) == size
    if size < 400:
        basis = moment_basis(n, k)
        assert len(basis) == size and len(set(basis.words)) == size


def test_basis_order_is_canonical():
    words = [w.letters for w in moment_basis(2, 1).words]
    assert words == ["II", "XI", "YI", "ZI", "IX", "IY", "IZ"]
    with pytest.raises(ValueError):
        moment_basis(3, 0)


def test_cell_rules():
    s = build_moment_structure(moment_basis(2, 2))
    x1, y1, x2 = PauliString("XI"), PauliString("YI"), PauliString("IX")
    assert s.cell(x1, x1) == (1, PauliString("II"))
    assert s.cell(x1, y1) is None
    assert s.cell(x1, x2) == (1, PauliString("XX"))


def test_structure_matches_dense_products():
    """Every real cell is +-(reduced word); every dropped cell has an imaginary phase."""
    basis = moment_basis(3, 2)
    s = build_moment_structure(basis)
    for a, u in enumerate(basis.words):
        for b, v in enumerate(basis.words):
            prod = kron_word(u.letters) @ kron_word(v.letters)
            cell = s.cell(u, v)
            if cell is None:
                coeffs = [np.trace(kron_word(w.letters).conj().T @ prod) / 8 for w in s.var_words]
                assert any(abs(c.imag) > 0.5 for c in coeffs) or not any(abs(c) > 0.5 for c in coeffs)
            else:
                sign, word = cell
                assert np.allclose(prod, sign * kron_word(word.letters))


def test_word_character_matches_conjugation():
    for letters in itertools.product("IXYZ", repeat=2):
        w = "".join(letters)
        m = kron_word(w)
        gx, gz = kron_word("XX"), kron_word("ZZ")
        label = word_character(PauliString(w))
        assert np.allclose(gx @ m @ gx, (-1) ** (label & 1) * m)
        assert np.allclose(gz @ m @ gz, (-1) ** (label >> 1) * m)


# ---- solver examples

@pytest.mark.parametrize("k", [1, 2])
def test_k2_objective(k):
    sol = _solved(unit(2, [(0, 1)]), k)
    assert sol.optimal
    assert sol.objective == pytest.approx(4, abs=TOL)


def test_k2_edge_values_and_gram():
    sol = _solved(unit(2, [(0, 1)]))
    vals = edge_values(sol)
    assert vals.g[0] == pytest.approx(4, abs=TOL)
    assert vals.h[0] == pytest.approx(1, abs=TOL)
    assert vals.h_plus[0] == pytest.approx(1, abs=TOL)
    gv = gram_vectors(sol)
    assert gv.inner(0, 1) == pytest.approx(-1, abs=1e-5)


def test_triangle_sum_nonpositive():
    sol = _solved(complete(3))
    assert sol.objective / 2 - 3 <= TOL
    assert check_triangles(edge_values(sol), complete(3)).ok


def test_c5_value_bracket():
    c = c_value(cycle(5))
    assert lambda_max(cycle(5)) / 2 - 5 - TOL <= c <= 2 + TOL


def test_edge_value_arithmetic():
    v = EdgeValues.from_g([2.0, 1.0, 4.0])
    assert np.allclose(v.h, [0, -0.5, 1]) and np.allclose(v.h_plus, [0, 0, 1])
    assert np.allclose(EdgeValues.from_h(v.h).g, v.g)


def test_identity_point_gives_orthonormal_vectors():
    basis = moment_basis(3, 1)
    s = build_moment_structure(basis)
    y = np.zeros(s.num_vars)
    y[0] = 1
    assert np.allclose(s.assemble(y), np.eye(len(basis)))


def test_c_value_examples():
    assert c_value(unit(2, [(0, 1)]), 1) == pytest.approx(1, abs=TOL)
    assert c_value(star(3)) <= 1 + TOL
    assert c_value(complete(3)) <= TOL
    assert c_value_exact(unit(2, [(0, 1)])) == pytest.approx(1)
    assert c_value_exact(complete(3)) == pytest.approx(0)
    assert c_value_exact(unit(6, [(0, 1), (2, 3), (4, 5)])) == pytest.approx(3)
    assert c_value(WeightedGraph(3)) == 0.0


# ---- invariant checkers

def test_monogamy_checker():
    s3 = star(3)
    assert check_monogamy(edge_values(_solved(s3)), s3).ok
    bad = EdgeValues.from_h([0.6, 0.6])
    rep = check_monogamy(bad, path(3))
    assert not rep.ok and rep.violations[0][0] == 1
    k2 = unit(2, [(0, 1)])
    rep = check_monogamy(edge_values(_solved(k2)), k2)
    assert rep.ok and rep.worst_slack == pytest.approx(0, abs=1e-5)


def test_pair_bound_values():
    assert pair_bound(math.sqrt(3) / 2) == pytest.approx(0, abs=1e-12)
    assert pair_bound(1.0) == pytest.approx(-0.5)
    p3 = path(3)
    assert check_pair_bound(edge_values(_solved(p3)), p3).ok
    assert not check_pair_bound(EdgeValues.from_h([1.0, 0.2]), p3).ok


def test_solution_dump(tmp_path):
    sol = _solved(path(3))
    out = tmp_path / "sol.json"
    dump_solution(sol, out, include_matrix=True)
    doc = json.loads(out.read_text())
    assert doc["status"] == "optimal" and len(doc["edges"]) == 2
    assert np.asarray(doc["moment_matrix"]).shape == (len(sol.structure.basis),) * 2


# ---- solution invariants

@pytest.mark.parametrize("g", [path(4), cycle(4), cycle(5), star(4), complete(4),
                               unit(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)])])
def test_solution_invariants(g):
    sol = _solved(g)
    assert sol.optimal
    m = sol.moment_matrix
    assert np.linalg.eigvalsh(m)[0] >= -1e-6
    assert m[0, 0] == pytest.approx(1)
    assert sol.objective == pytest.approx(sol.objective_from_moments(), abs=1e-6)
    vals = edge_values(sol)
    assert np.all(vals.g >= -TOL) and np.all(vals.g <= 4 + TOL)
    gv = gram_vectors(sol)
    assert np.allclose(np.linalg.norm(gv.vectors, axis=1), 1)
    for (i, j, _), gij in zip(g.edges, vals.g):
        assert gv.inner(i, j) == pytest.approx((1 - gij) / 3, abs=1e-5)
    assert check_monogamy(vals, g).ok and check_pair_bound(vals, g).ok and check_triangles(vals, g).ok


def test_symmetric_reduction_agrees_with_full_matrix():
    for g in [cycle(5), unit(4, [(0, 1), (1, 2), (0, 2), (2, 3)])]:
        a = solve_sdp(g, 2, symmetric=True)
        b = solve_sdp(g, 2, symmetric=False)
        assert a.objective == pytest.approx(b.objective, abs=1e-5)
        assert len(a.info["blocks"]) == 4 and len(b.info["blocks"]) == 1


@settings(max_examples=25)
@given(graphs(min_n=2, max_n=5, min_edges=1))
def test_relaxation_bounds(g):
    c2 = c_value(g, 2)
    assert c2 <= c_value(g, 1) + TOL
    assert c2 >= c_value_exact(g) - TOL
    assert c2 <= vertex_cover_number(g) + TOL
    assert c2 <= g.n / 2 + TOL


@settings(max_examples=15)
@given(graphs(min_n=3, max_n=5, min_edges=2), st.data())
def test_partition_superadditivity(g, data):
    labels = data.draw(st.lists(st.integers(0, 1), min_size=g.m, max_size=g.m))
    parts = [[e for e, lab in zip(g.pairs, labels) if lab == side] for side in (0, 1)]
    total = sum(c_value(unit(g.n, p)) for p in parts if p)
    assert c_value(g) <= total + TOL


@pytest.mark.parametrize("s", [3, 4, 5])
def test_complete_graph_positive_parts(s):
    vals = edge_values(_solved(complete(s)))
    assert vals.h_plus.sum() <= s // 2 + TOL


@settings(max_examples=20)
@given(graphs(min_n=2, max_n=5, min_edges=1, weighted=True))
def test_scaling_weights_scales_objective(g):
    a = _solved(g).objective
    b = _solved(g.scaled(2.5)).objective
    assert b == pytest.approx(2.5 * a, rel=1e-5, abs=1e-5)


# ---- independent oracle: the same relaxation built from dense matrices and solved by Clarabel

def _oracle_objective(g, k):
    cp = pytest.importorskip("cvxpy")
    n = g.n
    words = ["I" * n]
    for size in range(1, k + 1):
        for sites in itertools.combinations(range(n), size):
            for letters in itertools.product("XYZ", repeat=size):
                w = ["I"] * n
                for s, c in zip(sites, letters):
                    w[s] = c
                words.append("".join(w))
    all_words = ["".join(p) for p in itertools.product("IXYZ", repeat=n)]
    mats = {w: kron_word(w) for w in all_words}
    y = cp.Variable(len(all_words))
    pos = {w: i for i, w in enumerate(all_words)}
    dim = 2 ** n
    rows = []
    for u in words:
        row = []
        for v in words:
            prod = mats[u] @ mats[v]
            for w, m in mats.items():
                coeff = np.trace(m @ prod) / dim
                if abs(coeff) > 0.5:
                    break
            row.append(coeff.real * y[pos[w]] if abs(coeff.imag) < 0.5 else 0 * y[0])
        rows.append(row)
    moment = cp.bmat(rows)
    cons = [0.5 * (moment + moment.T) >> 0, y[pos["I" * n]] == 1]
    obj = 0
    for i, j, w in g.edges:
        for p in "XYZ":
            letters = ["I"] * n
            letters[i] = letters[j] = p
            obj = obj + w * (1 / 3 - y[pos["".join(letters)]])
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver="CLARABEL")
    return prob.value


@pytest.mark.filterwarnings("ignore::UserWarning")
@pytest.mark.parametrize("g, k", [
    (path(3), 1), (complete(3), 2), (cycle(4), 2), (star(3), 2),
    (WeightedGraph(3, ((0, 1, 1.5), (1, 2, 0.4), (0, 2, 2.0))), 2),
    (WeightedGraph(4, ((0, 1, 1.0), (1, 2, 3.0), (2, 3, 0.5))), 1),
])
def test_objective_matches_independent_solver(g, k):
    assert _solved(g, k).objective == pytest.approx(_oracle_objective(g, k), abs=1e-5)
