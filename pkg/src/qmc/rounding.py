"""Rounding algorithms: the product-or-matching rounding, the triangle-free
entangling rounding and the bipartite rotation scheme, plus Monte Carlo
ratio statistics against the exact optimum."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .graph_core import (GraphError, Matching, WeightedGraph, bipartition,
                         is_triangle_free, max_weight_matching)
from .pauli_sim import (PAULI_MATRICES, PauliString, apply_local, apply_pair_rotation,
                        apply_pauli, basis_state, expectation, hamiltonian_terms,
                        lambda_max, matching_state_energy, product_state,
                        product_state_energy)
from .ratio_analysis import ThetaSpec, q, theta_membership_test
from .sdp_relax import EdgeValues, GramVectors, SdpSolution, edge_values, gram_vectors, solve_sdp

VANISHING = 1e-12


class RoundingError(ValueError):
    pass


# ------------------------------------------------------------------ rng

class RngStream:
    """Seeded uniform stream; normals come from Box-Muller on that stream."""

    def __init__(self, seed: int | np.random.SeedSequence = 0):
        self.seed_seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed_seq))

    def uniform(self, size=None):
        return self._gen.random(size)

    def normal(self, size) -> np.ndarray:
        size = tuple(np.atleast_1d(size))
        count = int(np.prod(size))
        half = (count + 1) // 2
        u1 = 1.0 - self._gen.random(half)  # (0, 1]
        u2 = self._gen.random(half)
        radius = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([radius * np.cos(2 * np.pi * u2), radius * np.sin(2 * np.pi * u2)])
        return z[:count].reshape(size)

    def spawn(self, count: int) -> list["RngStream"]:
        return [RngStream(s) for s in self.seed_seq.spawn(count)]


# -------------------------------------------------------------- qubits

@dataclass(frozen=True)
class LocalQubitState:
    xi: np.ndarray     # unit vector in C^2
    bloch: np.ndarray  # unit vector in R^3

    def projector(self) -> np.ndarray:
        return np.outer(self.xi, self.xi.conj())

    def bloch_projector(self) -> np.ndarray:
        u = self.bloch
        return 0.5 * (PAULI_MATRICES["I"] + u[0] * PAULI_MATRICES["X"]
                      + u[1] * PAULI_MATRICES["Y"] + u[2] * PAULI_MATRICES["Z"])

    @property
    def chi(self) -> float:
        """arg(conj(xi_1) xi_2) with arg(0) = 0."""
        z = np.conj(self.xi[0]) * self.xi[1]
        return float(np.angle(z)) if abs(z) > VANISHING else 0.0


def bloch_to_qubit(u) -> LocalQubitState:
    u = np.asarray(u, dtype=float)
    norm = np.linalg.norm(u)
    if abs(norm - 1) > 1e-9:
        raise RoundingError(f"Bloch vector has norm {norm}")
    u = u / norm
    polar = math.acos(max(-1.0, min(1.0, u[2])))
    azimuth = math.atan2(u[1], u[0]) if math.hypot(u[0], u[1]) > VANISHING else 0.0
    xi = np.array([math.cos(polar / 2), np.exp(1j * azimuth) * math.sin(polar / 2)])
    return LocalQubitState(xi, u)


# ------------------------------------------------------------ outcomes

@dataclass
class EdgeDiagnostic:
    edge: tuple[int, int]
    h: float
    h_plus: float
    theta: Optional[float] = None
    gamma_prime: Optional[float] = None
    matched: Optional[bool] = None
    flagged: bool = False
    energy: Optional[float] = None

    def to_json(self) -> dict:
        return {"edge": list(self.edge), "theta": self.theta, "gamma_prime": self.gamma_prime,
                "matched": self.matched, "h": self.h, "h_plus": self.h_plus,
                "flagged": self.flagged, "energy": self.energy}


@dataclass
class RoundedOutcome:
    winner: str                      # product | matching | entangled
    energy: float
    energies: dict
    edges: list = field(default_factory=list)
    bloch: Optional[np.ndarray] = None
    matching: Optional[Matching] = None
    state: Optional[np.ndarray] = None
    ratio: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"winner": self.winner, "energy": self.energy, "energies": self.energies,
                "ratio": self.ratio, "edges": [e.to_json() for e in self.edges],
                **({"extra": self.extra} if self.extra else {})}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, default=float)


def _edge_energy(psi: np.ndarray, n: int, i: int, j: int) -> float:
    total = 1.0
    for letter in "XYZ":
        word = PauliString.from_sites(n, {i: letter, j: letter})
        total -= float(np.vdot(psi, apply_pauli(word, psi)).real)
    return total


# ---------------------------------------------------- product rounding

def product_rounding(gram: GramVectors, rng: RngStream, max_retries: int = 8) -> np.ndarray:
    """u_i = R v_i / |R v_i| for a 3 x dim standard normal R."""
    vecs = np.asarray(gram.vectors, dtype=float)
    if np.any(np.abs(np.linalg.norm(vecs, axis=1) - 1) > 1e-6):
        raise RoundingError("Gram vectors must have unit norm")
    for _ in range(max_retries):
        r = rng.normal((3, vecs.shape[1]))
        proj = vecs @ r.T
        norms = np.linalg.norm(proj, axis=1)
        if np.all(norms > VANISHING):
            return proj / norms[:, None]
    raise RoundingError("Gaussian projection kept vanishing")


@dataclass
class Prepared:
    """SDP data reused across samples."""

    graph: WeightedGraph
    k: int
    solution: SdpSolution
    values: EdgeValues
    gram: GramVectors

    @classmethod
    def solve(cls, g: WeightedGraph, k: int = 2, tol: Optional[float] = None) -> "Prepared":
        sol = solve_sdp(g, k, tol)
        return cls(g, k, sol, edge_values(sol, g), gram_vectors(sol))


def _prepared(g, k, prepared):
    if prepared is not None:
        return prepared
    return Prepared.solve(g, k)


def product_matching_rounding(g: WeightedGraph, k: int = 2, rng: Optional[RngStream] = None,
               prepared: Optional[Prepared] = None) -> RoundedOutcome:
    """Best of a randomly rounded product state and a maximum-weight-matching state."""
    rng = rng or RngStream(0)
    prep = _prepared(g, k, prepared)
    u = product_rounding(prep.gram, rng)
    matching = max_weight_matching(g)
    e_prod = product_state_energy(g, u)
    e_match = matching_state_energy(g, matching)
    winner = "product" if e_prod >= e_match else "matching"
    edges = [EdgeDiagnostic((i, j), float(h), float(hp), matched=bool(s))
             for (i, j, _), h, hp, s in zip(g.edges, prep.values.h, prep.values.h_plus,
                                            matching.selected)]
    return RoundedOutcome(winner, max(e_prod, e_match), {"product": e_prod, "matching": e_match},
                          edges, bloch=u, matching=matching,
                          extra={"matching_weight": matching.weight(g), "k": prep.k})


# ------------------------------------------------- triangle-free rounding

def _clip_unit(x):
    return np.clip(x, 0.0, 1.0)


def _theta_angles(theta_fn, h_plus) -> np.ndarray:
    return np.arcsin(np.sqrt(_clip_unit(np.asarray(theta_fn(np.asarray(h_plus)), dtype=float))))


def flip_operator(state: LocalQubitState) -> np.ndarray:
    """The printed single-site operator [[0, 1], [exp(i(2 chi + pi)), 0]]."""
    return np.array([[0, 1], [np.exp(1j * (2 * state.chi + math.pi)), 0]])


def hermitian_flip(state: LocalQubitState, phase: float) -> np.ndarray:
    """Hermitian involution agreeing with exp(i phase) * flip_operator on xi.

    exp(i phase) P sends xi to a unit vector orthogonal to it; this operator
    does the same and sends that image back to xi, so it squares to the
    identity and the edge rotations stay unitary.
    """
    image = np.exp(1j * phase) * (flip_operator(state) @ state.xi)
    op = np.outer(image, state.xi.conj())
    return op + op.conj().T


def _pair_element(si: LocalQubitState, pi: np.ndarray, sj: LocalQubitState, pj: np.ndarray) -> complex:
    return complex(np.vdot(si.xi, pj @ sj.xi) * np.vdot(sj.xi, pi @ si.xi))


def _arg(z: complex) -> float:
    return float(np.angle(z)) if abs(z) > VANISHING else 0.0


def gamma_angle(si, pi, sj, pj, phi_i: float, phi_j: float) -> float:
    """pi - arg(<xi_i|e^{i phi_j} P_j|xi_j><xi_j|e^{i phi_i} P_i|xi_i>), in (-pi, pi]."""
    raw = (_arg(_pair_element(si, pi, sj, pj)) + phi_i + phi_j) % (2 * math.pi)
    return math.pi - raw


def solve_phi_for_right_angle(si: LocalQubitState, sj: LocalQubitState, pi: np.ndarray,
                              pj: np.ndarray, phi_i: float) -> tuple[float, bool]:
    """phi_j making gamma_ij = pi/2; returns (phi_j, flagged). A vanishing
    matrix element makes gamma independent of the choice; phi_j = 0 is flagged."""
    m = _pair_element(si, pi, sj, pj)
    if abs(m) <= VANISHING:
        return 0.0, True
    return (math.pi / 2 - _arg(m) - phi_i) % (2 * math.pi), False


def sgn(x: float) -> float:
    return 1.0 if x >= 0 else -1.0


def triangle_free_rounding(g: WeightedGraph, theta, k: int = 2, rng: Optional[RngStream] = None,
               prepared: Optional[Prepared] = None, check_theta: bool = True) -> RoundedOutcome:
    if not is_triangle_free(g):
        raise GraphError("graph contains a triangle")
    if check_theta and not theta_membership_test(theta):
        raise RoundingError(f"Theta {theta} fails the membership test")
    rng = rng or RngStream(0)
    prep = _prepared(g, k, prepared)
    vals = prep.values
    n = g.n
    u = product_rounding(prep.gram, rng)
    locals_ = [bloch_to_qubit(v) for v in u]
    flips = [flip_operator(s) for s in locals_]
    thetas = _theta_angles(theta, vals.h_plus)

    hp = vals.h_plus
    t_h = np.asarray(theta(hp), dtype=float)
    t_c = np.asarray(theta(1 - hp), dtype=float)
    w_tilde = g.weights * q(vals.h) * np.sqrt(np.clip(t_h * (1 - t_c), 0.0, None))
    tilde = WeightedGraph(n, tuple((i, j, float(w)) for (i, j, _), w in zip(g.edges, w_tilde)
                                   if w > 0))
    tilde_match = max_weight_matching(tilde) if tilde.m else Matching(())
    matched_pairs = {(i, j) for (i, j, _), s in zip(tilde.edges, tilde_match.selected) if s}

    phases = [None] * n
    flagged = set()
    for i, j in sorted(matched_pairs):
        phases[i] = 2 * math.pi * float(rng.uniform())
        phases[j], flag = solve_phi_for_right_angle(locals_[i], locals_[j], flips[i], flips[j], phases[i])
        if flag:
            flagged.add((i, j))
    for i in range(n):
        if phases[i] is None:
            phases[i] = 2 * math.pi * float(rng.uniform())

    psi = product_state([s.xi for s in locals_])
    gens = [hermitian_flip(s, ph) for s, ph in zip(locals_, phases)]
    edges = []
    for e, (i, j, _) in enumerate(g.edges):
        gamma = gamma_angle(locals_[i], flips[i], locals_[j], flips[j], phases[i], phases[j])
        psi = apply_pair_rotation(psi, i, gens[i], j, gens[j], sgn(gamma) * thetas[e])
        gamma_p = gamma + math.pi * (1 - sgn(gamma)) / 2
        matched = (i, j) in matched_pairs
        if matched and (i, j) not in flagged and abs(gamma_p - math.pi / 2) > 1e-9:
            raise ArithmeticError(f"matched edge {(i, j)} has gamma' = {gamma_p}")
        edges.append(EdgeDiagnostic((i, j), float(vals.h[e]), float(hp[e]), float(thetas[e]),
                                    gamma_p, matched, (i, j) in flagged))
    for d in edges:
        d.energy = _edge_energy(psi, n, *d.edge)

    e_ent = expectation(psi, hamiltonian_terms(g))
    matching = max_weight_matching(g)
    e_match = matching_state_energy(g, matching)
    winner = "entangled" if e_ent >= e_match else "matching"
    return RoundedOutcome(winner, max(e_ent, e_match), {"entangled": e_ent, "matching": e_match},
                          edges, bloch=u, matching=matching, state=psi,
                          extra={"k": prep.k, "theta": str(theta),
                                 "certified_mu": str(Fraction(14, 15) if prep.k >= 13 else Fraction(10, 11)),
                                 "phases": phases})


def conditional_edge_bound(outcome: RoundedOutcome, g: WeightedGraph) -> list[tuple[float, float]]:
    """(measured edge energy, predicted lower bound) per edge for the
    triangle-free rounding, conditioned on the realized Bloch vectors."""
    u = outcome.bloch
    theta_of = {d.edge: d.theta for d in outcome.edges}
    out = []
    for d in outcome.edges:
        i, j = d.edge
        a = np.prod([math.cos(theta_of[tuple(sorted((i, k)))]) for k in g.neighbors(i) if k != j])
        b = np.prod([math.cos(theta_of[tuple(sorted((j, k)))]) for k in g.neighbors(j) if k != i])
        e_ij = (1 - float(u[i] @ u[j])) / 2
        bound = e_ij * (1 + a * b + math.sin(d.gamma_prime) * math.sin(d.theta) * (a + b))
        out.append((d.energy, bound))
    return out


# ----------------------------------------------------- bipartite rounding

Y_OP = PAULI_MATRICES["Y"]
X_OP = PAULI_MATRICES["X"]


def bipartite_rounding(g: WeightedGraph, theta=ThetaSpec("linear", 0.367), h_max: float = 0.876,
               theta_star: float = 0.4, k: int = 2, prepared: Optional[Prepared] = None,
               values: Optional[EdgeValues] = None) -> RoundedOutcome:
    """Deterministic rotations exp(i/2 theta_e Y_i X_j) on a cut basis state."""
    parts = bipartition(g)
    if parts is None:
        raise GraphError("graph is not bipartite")
    if not math.sqrt(3) / 2 - 1e-12 <= h_max <= 1:
        raise RoundingError("h_max must lie in [sqrt(3)/2, 1]")
    if not 0 <= theta_star <= 1:
        raise RoundingError("theta_star must lie in [0, 1]")
    if values is None:
        values = _prepared(g, k, prepared).values
    side = parts.side
    psi = basis_state(g.n, [side[i] for i in range(g.n)])
    capped = math.asin(math.sqrt(theta_star))
    base = _theta_angles(theta, values.h_plus)
    edges = []
    for e, (a, b, _) in enumerate(g.edges):
        i, j = (a, b) if side[a] == 0 else (b, a)
        angle = float(base[e]) if values.h[e] <= h_max else capped
        psi = apply_pair_rotation(psi, i, Y_OP, j, X_OP, angle)
        edges.append(EdgeDiagnostic((a, b), float(values.h[e]), float(values.h_plus[e]), angle))
    for d in edges:
        d.energy = _edge_energy(psi, g.n, *d.edge)
    energy = expectation(psi, hamiltonian_terms(g))
    return RoundedOutcome("entangled", energy, {"entangled": energy}, edges, state=psi,
                          extra={"theta": str(theta), "h_max": h_max, "theta_star": theta_star})


# ------------------------------------------------------ Monte Carlo ratios

@dataclass(frozen=True)
class RatioStats:
    mean: float
    min: float
    max: float
    stderr: float
    samples: int
    lambda_max: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def run_one(alg: int, g: WeightedGraph, params: dict, rng: RngStream,
            prepared: Optional[Prepared]) -> RoundedOutcome:
    k = params.get("k", 2)
    if alg == 1:
        return product_matching_rounding(g, k, rng, prepared)
    if alg == 2:
        theta = params.get("theta", ThetaSpec("linear", 0.5))
        return triangle_free_rounding(g, theta, k, rng, prepared, check_theta=params.get("check_theta", True))
    if alg == 3:
        return bipartite_rounding(g, params.get("theta", ThetaSpec("linear", 0.367)),
                          params.get("h_max", 0.876), params.get("theta_star", 0.4), k, prepared)
    raise ValueError(f"unknown algorithm {alg}")


def _energies(args):
    alg, g, params, streams, prepared = args
    return [run_one(alg, g, params, s, prepared).energy for s in streams]


def empirical_ratio(g: WeightedGraph, alg: int, params: Optional[dict] = None,
                    samples: int = 100, rng: Optional[RngStream] = None, workers: int = 1,
                    prepared: Optional[Prepared] = None) -> RatioStats:
    """Ratio statistics of sampled energies against lambda_max.

    Every sample owns a spawned sub-stream, so results do not depend on
    ``workers``.
    """
    params = dict(params or {})
    rng = rng or RngStream(0)
    prepared = prepared or Prepared.solve(g, params.get("k", 2))
    if alg == 3:
        samples = 1
    streams = rng.spawn(samples)
    if workers <= 1:
        energies = _energies((alg, g, params, streams, prepared))
    else:
        chunks = [streams[c::workers] for c in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_energies, [(alg, g, params, c, prepared) for c in chunks]))
        energies = [None] * samples
        for c, part in enumerate(parts):
            energies[c::workers] = part
    lam = lambda_max(g)
    ratios = np.array(energies) / lam
    stderr = float(ratios.std(ddof=1) / math.sqrt(len(ratios))) if len(ratios) > 1 else 0.0
    return RatioStats(float(ratios.mean()), float(ratios.min()), float(ratios.max()),
                      stderr, len(ratios), lam)
