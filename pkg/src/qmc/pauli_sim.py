"""Pauli-word algebra, Hamiltonians, statevector kernels and the exact eigensolver.

Basis convention: site 0 is the most significant bit of a basis index, so a
dense operator for the word ``P_0 P_1 ... P_{n-1}`` equals ``kron(P_0, ..., P_{n-1})``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .graph_core import GraphError, InstanceTooLarge, Matching, WeightedGraph

LETTERS = "IXYZ"
DENSE_MAX_SITES = 8
LANCZOS_MAX_SITES = 14

# single-site product table: (a, b) -> (phase exponent of i, letter)
_PRODUCT = {}
for _a in LETTERS:
    _PRODUCT[("I", _a)] = (0, _a)
    _PRODUCT[(_a, "I")] = (0, _a)
    _PRODUCT[(_a, _a)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1, _c)
    _PRODUCT[(_b, _a)] = (3, _c)


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PauliString:
    """A Pauli word: one letter in ``IXYZ`` per site."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(c not in LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli word {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    @classmethod
    def from_sites(cls, n: int, assignment: dict[int, str]) -> "PauliString":
        chars = ["I"] * n
        for site, letter in assignment.items():
            chars[site] = letter
        return cls("".join(chars))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    @property
    def weight(self) -> int:
        return len(self.support)

    def is_identity(self) -> bool:
        return all(c == "I" for c in self.letters)

    def masks(self) -> tuple[int, int, int]:
        """(x mask, z mask, number of Y letters) with site i on bit n-1-i."""
        x = z = ny = 0
        n = self.n
        for i, c in enumerate(self.letters):
            bit = 1 << (n - 1 - i)
            if c in "XY":
                x |= bit
            if c in "ZY":
                z |= bit
            if c == "Y":
                ny += 1
        return x, z, ny

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True)
class PhasedPauli:
    phase: int
    word: PauliString

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 4)

    @property
    def scalar(self) -> complex:
        return 1j ** self.phase

    def __mul__(self, other: "PhasedPauli") -> "PhasedPauli":
        prod = pauli_product(self.word, other.word)
        return PhasedPauli(self.phase + other.phase + prod.phase, prod.word)


def pauli_product(a: PauliString, b: PauliString) -> PhasedPauli:
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")
    phase = 0
    out = []
    for ca, cb in zip(a.letters, b.letters):
        q, c = _PRODUCT[(ca, cb)]
        phase += q
        out.append(c)
    return PhasedPauli(phase, PauliString("".join(out)))


HamiltonianTerms = list[tuple[float, PauliString]]


def hamiltonian_terms(g: WeightedGraph) -> HamiltonianTerms:
    """Terms of sum_e w_e (I - XX - YY - ZZ); the identity coefficient comes first."""
    if g.m == 0:
        return []
    terms: HamiltonianTerms = [(g.total_weight, PauliString.identity(g.n))]
    for i, j, w in g.edges:
        for letter in "XYZ":
            terms.append((-w, PauliString.from_sites(g.n, {i: letter, j: letter})))
    return terms


# ----------------------------------------------------------- statevectors

def basis_state(n: int, bits: Sequence[int] | int) -> np.ndarray:
    if not isinstance(bits, (int, np.integer)):
        index = 0
        for b in bits:
            index = (index << 1) | int(b)
    else:
        index = int(bits)
    psi = np.zeros(1 << n, dtype=complex)
    psi[index] = 1.0
    return psi


def product_state(local: Sequence[np.ndarray]) -> np.ndarray:
    psi = np.ones(1, dtype=complex)
    for v in local:
        psi = np.kron(psi, np.asarray(v, dtype=complex))
    return psi


def _num_sites(psi: np.ndarray) -> int:
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise DimensionError(f"state length {dim} is not a power of two")
    return n


def _parity(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out


_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(n: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(n)
    if idx is None:
        idx = np.arange(1 << n, dtype=np.int64)
        _INDEX_CACHE[n] = idx
    return idx


def apply_pauli(p: PauliString, psi: np.ndarray) -> np.ndarray:
    """Return P psi via bit manipulation."""
    psi = np.asarray(psi)
    n = _num_sites(psi)
    if n != p.n:
        raise DimensionError(f"word on {p.n} sites applied to a {n}-site state")
    x, z, ny = p.masks()
    idx = _indices(n)
    signs = 1 - 2 * _parity(idx & z)
    out = np.empty_like(psi, dtype=complex)
    out[idx ^ x] = (1j ** ny) * signs * psi
    return out


def apply_local(psi: np.ndarray, site: int, op: np.ndarray) -> np.ndarray:
    """Apply a 2x2 operator on one site."""
    n = _num_sites(psi)
    t = np.asarray(psi, dtype=complex).reshape((2,) * n)
    t = np.tensordot(op, t, axes=([1], [site]))
    t = np.moveaxis(t, 0, site)
    return t.reshape(-1)


def is_normalized(psi: np.ndarray, tol: float = 1e-10) -> bool:
    return abs(np.linalg.norm(psi) - 1.0) <= tol


def expectation(psi: np.ndarray, terms: HamiltonianTerms, tol: float = 1e-10) -> float:
    if not is_normalized(psi, tol):
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(psi):.3e})")
    total = 0j
    for coeff, word in terms:
        if word.is_identity():
            total += coeff
        else:
            total += coeff * np.vdot(psi, apply_pauli(word, psi))
    if abs(total.imag) > 1e-9:
        raise ArithmeticError(f"expectation has imaginary part {total.imag:.3e}")
    return float(total.real)


def apply_two_pauli_rotation(psi: np.ndarray, p: PauliString, angle: float) -> np.ndarray:
    """exp(i angle/2 P) psi."""
    return np.cos(angle / 2) * psi + 1j * np.sin(angle / 2) * apply_pauli(p, psi)


def apply_pair_rotation(psi: np.ndarray, i: int, a: np.ndarray, j: int, b: np.ndarray,
                        angle: float) -> np.ndarray:
    """exp(i angle/2 A_i B_j) psi for single-site Hermitian involutions A, B."""
    rotated = apply_local(apply_local(psi, j, b), i, a)
    return np.cos(angle / 2) * psi + 1j * np.sin(angle / 2) * rotated


# ------------------------------------------------------------- eigensolver

def _swap_permutations(g: WeightedGraph) -> list[tuple[float, np.ndarray]]:
    n = g.n
    idx = _indices(n)
    perms = []
    for i, j, w in g.edges:
        bi, bj = n - 1 - i, n - 1 - j
        differ = ((idx >> bi) ^ (idx >> bj)) & 1
        flip = (1 << bi) | (1 << bj)
        perms.append((w, np.where(differ == 1, idx ^ flip, idx)))
    return perms


class HamiltonianOperator:
    """Matrix-free H_G = sum_e w_e (2I - 2 SWAP_e), real symmetric."""

    def __init__(self, g: WeightedGraph):
        if g.n > LANCZOS_MAX_SITES:
            raise InstanceTooLarge(f"n={g.n} exceeds the {LANCZOS_MAX_SITES}-site cap")
        self.graph = g
        self.dim = 1 << g.n
        self._perms = _swap_permutations(g)
        self._diag = 2.0 * g.total_weight

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self._diag * v
        for w, perm in self._perms:
            out -= 2.0 * w * v[perm]
        return out

    def norm_bound(self) -> float:
        return 4.0 * self.graph.total_weight


def dense_hamiltonian(g: WeightedGraph) -> np.ndarray:
    """Dense real matrix of H_G built from swap permutations."""
    if g.n > DENSE_MAX_SITES + 4:
        raise InstanceTooLarge(f"dense Hamiltonian refused at n={g.n}")
    dim = 1 << g.n
    h = np.zeros((dim, dim))
    idx = _indices(g.n)
    for w, perm in _swap_permutations(g):
        h[idx, idx] += 2 * w
        h[perm, idx] -= 2 * w
    return h


def lanczos_max(matvec, dim: int, norm_bound: float, max_krylov: int = 200,
                rtol: float = 1e-9, seed: int = 12345) -> tuple[float, np.ndarray]:
    """Largest eigenpair of a real symmetric operator.

    Lanczos with full reorthogonalization; stops when the Ritz residual drops
    below ``rtol * norm_bound`` and restarts once from the best Ritz vector
    if the Krylov space is exhausted first.
    """
    rng = np.random.default_rng(seed)
    start = rng.standard_normal(dim)
    threshold = rtol * max(norm_bound, 1e-300)
    kmax = min(max_krylov, dim)
    ritz, vec = -np.inf, start
    for _ in range(2):
        basis = np.empty((kmax, dim))
        v = start / np.linalg.norm(start)
        alphas: list[float] = []
        betas: list[float] = []
        for k in range(kmax):
            basis[k] = v
            w = matvec(v)
            alphas.append(float(v @ w))
            q = basis[: k + 1]
            w = w - (q @ w) @ q
            w = w - (q @ w) @ q
            b = float(np.linalg.norm(w))
            theta, s = scipy.linalg.eigh_tridiagonal(np.array(alphas), np.array(betas))
            residual = b * abs(s[-1, -1])
            if residual < threshold or b < 1e-13 * max(norm_bound, 1.0) or k == kmax - 1:
                ritz, vec = float(theta[-1]), s[:, -1] @ q
                break
            betas.append(b)
            v = w / b
        if residual < threshold or b < 1e-13 * max(norm_bound, 1.0):
            return ritz, vec
        start = vec
    return ritz, vec


def lambda_max(g: WeightedGraph, dense_max_sites: int = DENSE_MAX_SITES) -> float:
    """Largest eigenvalue of H_G (dense for small n, Lanczos up to n = 14)."""
    if g.n > LANCZOS_MAX_SITES:
        raise InstanceTooLarge(f"n={g.n} exceeds the {LANCZOS_MAX_SITES}-site cap")
    if g.m == 0:
        return 0.0
    if g.n <= min(dense_max_sites, DENSE_MAX_SITES + 4):
        return float(np.linalg.eigvalsh(dense_hamiltonian(g))[-1])
    op = HamiltonianOperator(g)
    value, _ = lanczos_max(op.matvec, op.dim, op.norm_bound())
    return value


def is_star(edges: Iterable[tuple[int, int]]) -> bool:
    edges = list(edges)
    if len(edges) <= 1:
        return True
    common = set(edges[0])
    for e in edges[1:]:
        common &= set(e)
    return bool(common)


def lambda_max_upper_from_delta(prev: float, added_edges, removed_edges_bound=None) -> float:
    """Upper bound on lambda_max after adding ``added_edges`` (unit weight).

    A star with k edges has lambda_max = 2(k + 1), tighter than 4k for k >= 2.
    Removing edges can only lower the value since every H_e is PSD."""
    added = [(min(e[0], e[1]), max(e[0], e[1])) for e in added_edges]
    if not added:
        return prev
    return prev + (2.0 * len(added) + 2.0 if is_star(added) else 4.0 * len(added))


# ------------------------------------------------------ analytic energies

def product_state_energy(g: WeightedGraph, bloch, tol: float = 1e-9) -> float:
    """Energy of the product state with the given Bloch vectors."""
    u = np.asarray(bloch, dtype=float)
    if u.shape != (g.n, 3):
        raise DimensionError(f"expected ({g.n}, 3) Bloch array, got {u.shape}")
    norms = np.linalg.norm(u, axis=1)
    if np.any(np.abs(norms - 1) > tol):
        raise ValueError("Bloch vectors must have unit length")
    return float(sum(w * (1 - u[i] @ u[j]) for i, j, w in g.edges))


def matching_state_energy(g: WeightedGraph, matching: Matching) -> float:
    """Energy of singlets on the matched edges, maximally mixed elsewhere."""
    if not matching.is_valid(g):
        raise GraphError("invalid matching")
    return float(sum((4 * w if s else w) for (_, _, w), s in zip(g.edges, matching.selected)))


# ------------------------------------------------------------ dense oracles

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli(p: PauliString) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in p.letters:
        out = np.kron(out, PAULI_MATRICES[c])
    return out


def dense_from_terms(terms: HamiltonianTerms, n: int) -> np.ndarray:
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for coeff, word in terms:
        h += coeff * dense_pauli(word)
    return h


def dense_product_density(bloch) -> np.ndarray:
    rho = np.ones((1, 1), dtype=complex)
    for u in np.asarray(bloch, dtype=float):
        local = 0.5 * (PAULI_MATRICES["I"] + u[0] * PAULI_MATRICES["X"]
                       + u[1] * PAULI_MATRICES["Y"] + u[2] * PAULI_MATRICES["Z"])
        rho = np.kron(rho, local)
    return rho


def dense_matching_density(g: WeightedGraph, matching: Matching) -> np.ndarray:
    """2^{-n} prod_{e in M} (I - XX - YY - ZZ)."""
    n = g.n
    rho = np.eye(1 << n, dtype=complex)
    for (i, j, _), s in zip(g.edges, matching.selected):
        if s:
            term = np.eye(1 << n, dtype=complex)
            for letter in "XYZ":
                term -= dense_pauli(PauliString.from_sites(n, {i: letter, j: letter}))
            rho = rho @ term
    return rho / (1 << n)
