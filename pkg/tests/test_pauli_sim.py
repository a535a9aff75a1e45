import functools
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_graphs, complete, cycle, graphs, path, star, unit
from qmc.graph_core import InstanceTooLarge, Matching, WeightedGraph, max_weight_matching
from qmc.pauli_sim import (DimensionError, PauliString, PhasedPauli, apply_local, apply_pauli,
                           apply_two_pauli_rotation, basis_state, dense_from_terms,
                           dense_matching_density, dense_product_density, expectation,
                           hamiltonian_terms, is_star, lambda_max, lambda_max_upper_from_delta,
                           lanczos_max, HamiltonianOperator, matching_state_energy,
                           product_state, product_state_energy)

# Explicit matrices, independent of the bitmask kernels.
I2 = np.eye(2)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0 + 0j, -1.0])
MATS = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


def kron_word(letters):
    return functools.reduce(np.kron, [MATS[c] for c in letters])


def dense_h(g: WeightedGraph) -> np.ndarray:
    """Sum of w (I - XX - YY - ZZ) built from Kronecker products."""
    dim = 2 ** g.n
    h = np.zeros((dim, dim), dtype=complex)
    for i, j, w in g.edges:
        term = np.eye(dim, dtype=complex)
        for p in "XYZ":
            letters = ["I"] * g.n
            letters[i] = letters[j] = p
            term = term - kron_word(letters)
        h += w * term
    return h


words = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n)).map(PauliString)


def same_length_words(count):
    return st.integers(1, 4).flatmap(
        lambda n: st.tuples(*[st.text("IXYZ", min_size=n, max_size=n).map(PauliString)] * count))


# ---- algebra

def test_product_examples():
    r = PhasedPauli(0, PauliString("XI")) * PhasedPauli(0, PauliString("YI"))
    assert (r.phase, r.word.letters) == (1, "ZI")
    r = PhasedPauli(0, PauliString("ZZ")) * PhasedPauli(0, PauliString("ZZ"))
    assert (r.phase, r.word.letters) == (0, "II")
    r = PhasedPauli(0, PauliString("XZ")) * PhasedPauli(0, PauliString("YZ"))
    assert (r.phase, r.word.letters) == (1, "ZI")
    assert np.allclose(kron_word("XZ") @ kron_word("YZ"), 1j * kron_word("ZI"))


def test_product_length_mismatch():
    with pytest.raises(DimensionError):
        PhasedPauli(0, PauliString("X")) * PhasedPauli(0, PauliString("XX"))
    with pytest.raises(ValueError):
        PauliString("XQ")


@given(same_length_words(2))
def test_product_matches_dense(pair):
    a, b = pair
    r = PhasedPauli(0, a) * PhasedPauli(0, b)
    assert np.allclose(kron_word(a.letters) @ kron_word(b.letters), r.scalar * kron_word(r.word.letters))


@given(same_length_words(3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
def test_product_associative(triple, p, q, r):
    a, b, c = (PhasedPauli(k, w) for k, w in zip((p, q, r), triple))
    left, right = (a * b) * c, a * (b * c)
    assert left == right
    assert left.phase in {0, 1, 2, 3}


# ---- Hamiltonian terms

def test_terms_k2():
    terms = hamiltonian_terms(unit(2, [(0, 1)]))
    assert [(c, w.letters) for c, w in terms] == [(1.0, "II"), (-1.0, "XX"), (-1.0, "YY"), (-1.0, "ZZ")]


def test_terms_empty_and_triangle():
    assert hamiltonian_terms(WeightedGraph(3)) == []
    terms = hamiltonian_terms(complete(3))
    ident = [c for c, w in terms if w.is_identity()]
    assert ident == [3.0] and len(terms) - 1 == 9


@given(graphs(max_n=5, weighted=True))
def test_terms_build_the_dense_hamiltonian(g):
    if g.m == 0:
        return
    assert np.allclose(dense_from_terms(hamiltonian_terms(g), g.n), dense_h(g))


# ---- statevectors

def test_apply_pauli_examples():
    zero, one = basis_state(1, [0]), basis_state(1, [1])
    assert np.allclose(apply_pauli(PauliString("X"), zero), one)
    assert np.allclose(apply_pauli(PauliString("Z"), one), -one)
    assert np.allclose(apply_pauli(PauliString("Y"), zero), 1j * one)
    with pytest.raises(DimensionError):
        apply_pauli(PauliString("XX"), zero)


@given(words, st.integers(0, 2 ** 32 - 1))
def test_apply_pauli_matches_dense_and_keeps_norm(p, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2 ** p.n) + 1j * rng.normal(size=2 ** p.n)
    psi /= np.linalg.norm(psi)
    out = apply_pauli(p, psi)
    assert np.allclose(out, kron_word(p.letters) @ psi)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)


def test_apply_local_matches_kron():
    rng = np.random.default_rng(1)
    psi = rng.normal(size=8) + 0j
    op = rng.normal(size=(2, 2))
    assert np.allclose(apply_local(psi, 1, op), np.kron(np.kron(I2, op), I2) @ psi)


def test_expectation_examples():
    k2 = hamiltonian_terms(unit(2, [(0, 1)]))
    singlet = (basis_state(2, [0, 1]) - basis_state(2, [1, 0])) / math.sqrt(2)
    assert expectation(singlet, k2) == pytest.approx(4)
    assert expectation(basis_state(2, [0, 0]), k2) == pytest.approx(0)
    assert expectation(basis_state(2, [0, 1]), k2) == pytest.approx(2)
    with pytest.raises(ValueError):
        expectation(2 * singlet, k2)


@given(graphs(max_n=5, weighted=True), st.integers(0, 2 ** 32 - 1))
def test_expectation_real_and_variational(g, seed):
    if g.m == 0:
        return
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2 ** g.n) + 1j * rng.normal(size=2 ** g.n)
    psi /= np.linalg.norm(psi)
    e = expectation(psi, hamiltonian_terms(g))
    assert e == pytest.approx(float(np.vdot(psi, dense_h(g) @ psi).real), abs=1e-9)
    assert e <= lambda_max(g) + 1e-9


def test_rotation_examples():
    psi = basis_state(2, [0, 1])
    yx = PauliString("YX")
    assert np.allclose(apply_two_pauli_rotation(psi, yx, 0.0), psi)
    assert np.allclose(apply_two_pauli_rotation(psi, yx, 2 * math.pi), -psi)
    out = apply_two_pauli_rotation(psi, yx, math.pi / 2)
    assert expectation(out, hamiltonian_terms(unit(2, [(0, 1)]))) == pytest.approx(4)


@given(st.floats(-7, 7), st.integers(0, 1000))
def test_rotation_matches_matrix_exponential(angle, seed):
    from scipy.linalg import expm
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    p = PauliString("XIZ")
    ref = expm(0.5j * angle * kron_word("XIZ")) @ psi
    assert np.allclose(apply_two_pauli_rotation(psi, p, angle), ref)


# ---- exact eigensolver

def test_lambda_max_anchors():
    assert lambda_max(unit(2, [(0, 1)])) == pytest.approx(4, abs=1e-9)
    assert lambda_max(complete(3)) == pytest.approx(6, abs=1e-9)
    c5 = lambda_max(cycle(5))
    assert c5 == pytest.approx(np.linalg.eigvalsh(dense_h(cycle(5)))[-1], abs=1e-9)
    assert c5 / 2 - 5 <= 2
    assert lambda_max(WeightedGraph(4)) == 0.0


def test_lambda_max_cap():
    with pytest.raises(InstanceTooLarge):
        lambda_max(cycle(15))


@pytest.mark.parametrize("g", [cycle(9), complete(9), star(9), path(10),
                               WeightedGraph(11, tuple((i, (i + 3) % 11, 1 + i / 5) for i in range(11)))])
def test_lanczos_matches_dense(g):
    ref = float(np.linalg.eigvalsh(dense_h(g))[-1]) if g.n <= 10 else None
    lanczos = lambda_max(g, dense_max_sites=0)
    dense = lambda_max(g, dense_max_sites=12)
    assert lanczos == pytest.approx(dense, rel=1e-9)
    if ref is not None:
        assert lanczos == pytest.approx(ref, rel=1e-9)


def test_lanczos_generic_operator():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(60, 60))
    a = a + a.T
    val, vec = lanczos_max(lambda v: a @ v, 60, np.abs(a).sum(axis=0).max())
    assert val == pytest.approx(np.linalg.eigvalsh(a)[-1], rel=1e-9)


def test_skip_bound_examples():
    assert lambda_max_upper_from_delta(6, [(0, 1)]) == 10
    assert lambda_max_upper_from_delta(6, [(0, 1), (0, 2), (0, 3)]) == 14
    assert lambda_max_upper_from_delta(6, [(0, 1), (2, 3)]) == 14
    assert lambda_max_upper_from_delta(6, []) == 6
    assert is_star([(1, 0), (0, 5)]) and not is_star([(0, 1), (2, 3)])


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_star_increment_is_tight(k):
    assert lambda_max(star(k)) == pytest.approx(lambda_max_upper_from_delta(0.0, star(k).pairs), abs=1e-9)


@given(graphs(max_n=6), st.data())
def test_skip_bound_is_sound(g, data):
    extra = [e for e in itertools.combinations(range(g.n), 2) if e not in set(g.pairs)]
    added = data.draw(st.lists(st.sampled_from(extra), unique=True, max_size=4)) if extra else []
    removed = data.draw(st.lists(st.sampled_from(g.pairs), unique=True, max_size=2)) if g.pairs else []
    new = unit(g.n, [e for e in g.pairs if e not in removed] + added)
    assert lambda_max(new) <= lambda_max_upper_from_delta(lambda_max(g), added) + 1e-9


# ---- analytic energies against dense density matrices

def test_product_energy_examples():
    k2 = unit(2, [(0, 1)])
    z = np.array([0, 0, 1.0])
    assert product_state_energy(k2, [z, -z]) == pytest.approx(2)
    assert product_state_energy(k2, [z, z]) == pytest.approx(0)
    with pytest.raises(ValueError):
        product_state_energy(k2, [z, 2 * z])


def test_matching_energy_examples():
    k2 = unit(2, [(0, 1)])
    assert matching_state_energy(k2, Matching((True,))) == 4
    assert matching_state_energy(path(3), Matching((True, False))) == 5
    h = dense_h(path(3))
    assert np.trace(dense_matching_density(path(3), Matching((True, False))) @ h).real == pytest.approx(5)
    g = WeightedGraph(3, ((0, 1, 2.0), (1, 2, 0.5)))
    assert matching_state_energy(g, Matching((False, False))) == 2.5


def _random_bloch(rng, n):
    u = rng.normal(size=(n, 3))
    return u / np.linalg.norm(u, axis=1)[:, None]


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_energies_equal_dense_traces_census(n):
    rng = np.random.default_rng(n)
    for g in all_graphs(n):
        if g.m == 0:
            continue
        h = dense_h(g)
        u = _random_bloch(rng, n)
        trace = np.trace(dense_product_density(u) @ h).real
        assert product_state_energy(g, u) == pytest.approx(trace, abs=1e-9)
        m = max_weight_matching(g)
        trace = np.trace(dense_matching_density(g, m) @ h).real
        assert matching_state_energy(g, m) == pytest.approx(trace, abs=1e-9)


def test_product_state_matches_bloch_density():
    rng = np.random.default_rng(5)
    u = _random_bloch(rng, 3)
    kets = []
    for v in u:
        theta, phi = math.acos(v[2]), math.atan2(v[1], v[0])
        kets.append(np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)]))
    psi = product_state(kets)
    assert np.allclose(np.outer(psi, psi.conj()), dense_product_density(u))


def test_hamiltonian_operator_matches_dense():
    g = WeightedGraph(4, ((0, 1, 1.0), (1, 3, 2.5), (0, 2, 0.3)))
    op = HamiltonianOperator(g)
    rng = np.random.default_rng(0)
    v = rng.normal(size=16)
    assert np.allclose(op.matvec(v), dense_h(g).real @ v)
