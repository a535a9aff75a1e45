"""Moment relaxation over Pauli words, its interior-point solver, and the
quantities extracted from a solution (edge values, Gram vectors, c(G, k))."""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .graph_core import InstanceTooLarge, WeightedGraph
from .pauli_sim import PauliString, lambda_max

DEFAULT_TOL = float(os.environ.get("QMC_TOL", "1e-7"))
PSD_CLIP = 1e-7

# letter codes in (x, z) bit form: I=0, X=1, Z=2, Y=3
_CODE = {"I": 0, "X": 1, "Z": 2, "Y": 3}
_LETTER = {v: k for k, v in _CODE.items()}
_SITE_PHASE = np.zeros((4, 4), dtype=np.int64)
for _a, _b, _q in (("X", "Y", 1), ("Y", "Z", 1), ("Z", "X", 1),
                   ("Y", "X", 3), ("Z", "Y", 3), ("X", "Z", 3)):
    _SITE_PHASE[_CODE[_a], _CODE[_b]] = _q


class SolverError(RuntimeError):
    pass


# ------------------------------------------------------------------ basis

@dataclass(frozen=True)
class MomentBasis:
    n: int
    k: int
    words: tuple[PauliString, ...]
    index: dict

    def __len__(self) -> int:
        return len(self.words)

    @property
    def codes(self) -> np.ndarray:
        """Per-site letter codes, shape (size, n)."""
        return np.array([[_CODE[c] for c in w.letters] for w in self.words], dtype=np.int64)


def moment_basis_size(n: int, k: int) -> int:
    return sum(3 ** i * math.comb(n, i) for i in range(min(k, n) + 1))


def moment_basis(n: int, k: int) -> MomentBasis:
    """Words of degree <= k ordered by support size, then sites, then X<Y<Z."""
    if k < 1:
        raise ValueError("relaxation level must be >= 1")
    words = []
    for size in range(min(k, n) + 1):
        for sites in itertools.combinations(range(n), size):
            for letters in itertools.product("XYZ", repeat=size):
                words.append(PauliString.from_sites(n, dict(zip(sites, letters))))
    return MomentBasis(n, k, tuple(words), {w: i for i, w in enumerate(words)})


def word_character(word: PauliString) -> int:
    """Sign pattern of the word under global X- and Z-conjugation, as a 2-bit label."""
    n_x = sum(c in "YZ" for c in word.letters) & 1
    n_z = sum(c in "XY" for c in word.letters) & 1
    return n_x | (n_z << 1)


@dataclass
class MomentStructure:
    """Cell map of the moment matrix.

    ``cell_var[u, v]`` is the variable index of the reduced word with
    u v = +-w, or -1 when the product carries an imaginary phase.
    Variable 0 is the identity word.
    """

    basis: MomentBasis
    var_words: tuple[PauliString, ...]
    cell_var: np.ndarray
    cell_sign: np.ndarray

    @property
    def num_vars(self) -> int:
        return len(self.var_words)

    @property
    def var_index(self) -> dict:
        return {w: i for i, w in enumerate(self.var_words)}

    def cell(self, u: PauliString, v: PauliString):
        a, b = self.basis.index[u], self.basis.index[v]
        var = int(self.cell_var[a, b])
        if var < 0:
            return None
        return int(self.cell_sign[a, b]), self.var_words[var]

    def assemble(self, y: np.ndarray) -> np.ndarray:
        """Moment matrix for a variable vector (y[0] must be 1)."""
        vals = np.where(self.cell_var >= 0, y[np.maximum(self.cell_var, 0)], 0.0)
        return vals * self.cell_sign


def _products(codes_a: np.ndarray, codes_b: np.ndarray):
    """Phase exponents and product codes for all pairs (broadcasting)."""
    phase = _SITE_PHASE[codes_a, codes_b].sum(axis=-1) % 4
    return phase, codes_a ^ codes_b


def build_moment_structure(basis: MomentBasis) -> MomentStructure:
    codes = basis.codes
    size, n = codes.shape
    phase, prod = _products(codes[:, None, :], codes[None, :, :])
    keys = (prod * (4 ** np.arange(n - 1, -1, -1))).sum(axis=-1)
    real = phase % 2 == 0
    uniq, inverse = np.unique(keys[real], return_inverse=True)
    # identity key is 0 and therefore variable 0
    cell_var = np.full((size, size), -1, dtype=np.int64)
    cell_var[real] = inverse
    cell_sign = np.zeros((size, size), dtype=np.int8)
    cell_sign[real] = np.where(phase[real] == 0, 1, -1)
    var_words = []
    for key in uniq:
        letters = []
        for _ in range(n):
            letters.append(_LETTER[int(key % 4)])
            key //= 4
        var_words.append(PauliString("".join(reversed(letters))))
    return MomentStructure(basis, tuple(var_words), cell_var, cell_sign)


# ----------------------------------------------------------------- solver

@dataclass
class _Block:
    rows: np.ndarray
    cols: np.ndarray
    var: np.ndarray   # compact variable index (0..m-1) of each off-diagonal cell
    sign: np.ndarray
    size: int
    agg: sp.csr_matrix  # (cells x m) signed incidence
    present: np.ndarray = None  # variables occurring in this block
    pad_c: np.ndarray = None    # (vars, p) cell rows of each F_j, zero-padded
    pad_d: np.ndarray = None
    pad_s: np.ndarray = None

    def __post_init__(self):
        order = np.argsort(self.var, kind="stable")
        var_sorted = self.var[order]
        self.present, starts, counts = np.unique(var_sorted, return_index=True,
                                                 return_counts=True)
        width = int(counts.max(initial=1))
        nv = len(self.present)
        self.pad_c = np.zeros((nv, width), dtype=np.int64)
        self.pad_d = np.zeros((nv, width), dtype=np.int64)
        self.pad_s = np.zeros((nv, width))
        slot = np.arange(len(order)) - np.repeat(starts, counts)
        owner = np.repeat(np.arange(nv), counts)
        self.pad_c[owner, slot] = self.rows[order]
        self.pad_d[owner, slot] = self.cols[order]
        self.pad_s[owner, slot] = self.sign[order]


class BlockSdp:
    """Dense primal-dual interior point method for

        maximize  c.y   subject to  I + sum_j y_j F_j  >= 0  (block diagonal)

    with HKM search directions and Mehrotra predictor-corrector steps.
    Each F_j is a signed 0/1 pattern given by the cells of the moment map.
    """

    def __init__(self, blocks: list[_Block], c: np.ndarray):
        self.blocks = blocks
        self.c = np.asarray(c, dtype=float)
        self.m = len(self.c)
        self.total = sum(b.size for b in blocks)

    # linear maps ----------------------------------------------------
    def _apply(self, y):
        """sum_j y_j F_j per block."""
        out = []
        for b in self.blocks:
            mat = np.zeros((b.size, b.size))
            mat[b.rows, b.cols] = b.sign * y[b.var]
            out.append(mat)
        return out

    def _adjoint(self, mats):
        """(<F_j, X>)_j."""
        res = np.zeros(self.m)
        for b, x in zip(self.blocks, mats):
            res += np.bincount(b.var, weights=b.sign * x[b.rows, b.cols], minlength=self.m)
        return res

    def _schur(self, xs, zinvs):
        """M_ij = sum over blocks of tr(F_i X F_j Z^-1).

        For each variable j the product T_j = X F_j Z^-1 is formed by a
        batched matmul over the (padded) cells of F_j; entry (i, j) then
        gathers T_j over the cells of F_i.
        """
        schur = np.zeros((self.m, self.m))
        for b, x, zi in zip(self.blocks, xs, zinvs):
            if len(b.rows) == 0:
                continue
            n = b.size
            step = max(1, int(2e7 // (n * n)))
            agg_t = b.agg.T.tocsr()
            for s in range(0, len(b.present), step):
                pc, pd, ps = b.pad_c[s:s + step], b.pad_d[s:s + step], b.pad_s[s:s + step]
                left = np.transpose(x[:, pc] * ps[None], (1, 0, 2))   # (j, n, p)
                right = zi[pd, :]                                     # (j, p, n)
                t = np.matmul(left, right).reshape(len(pc), n * n)
                gathered = np.take(t, b.cols * n + b.rows, axis=1)    # (j, cells)
                schur[:, b.present[s:s + step]] += (agg_t @ gathered.T)
        return 0.5 * (schur + schur.T)

    @staticmethod
    def _step(x, dx):
        """Largest step in (0, 1] keeping x + a dx PSD."""
        low = np.linalg.cholesky(x)
        linv = scipy.linalg.solve_triangular(low, np.eye(len(x)), lower=True)
        w = linv @ dx @ linv.T
        lam = np.linalg.eigvalsh(0.5 * (w + w.T))[0]
        return 1.0 if lam >= 0 else min(1.0, -1.0 / lam)

    def solve(self, tol: float = 1e-7, max_iter: int = 100):
        """Returns (y, X blocks, Z blocks, status, info).

        The dual iterate stays exactly feasible: Z = I + F(y) is PSD at
        every step, so any returned y is a valid moment vector.
        """
        sizes = [b.size for b in self.blocks]
        scale = max(10.0, math.sqrt(self.total), 2 * float(np.abs(self.c).max(initial=0)))
        xs = [scale * np.eye(s) for s in sizes]
        y = np.zeros(self.m)
        zs = [np.eye(s) for s in sizes]
        c_norm = 1 + np.linalg.norm(self.c)
        status = "max-iterations"
        info: dict = {}
        for it in range(max_iter + 1):
            rp = self.c + self._adjoint(xs)
            mu = sum(float(np.sum(x * z)) for x, z in zip(xs, zs)) / self.total
            pobj = sum(float(np.trace(x)) for x in xs)
            dobj = float(self.c @ y)
            gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
            pinf = float(np.linalg.norm(rp)) / c_norm
            info = dict(iterations=it, relative_gap=gap, primal_infeasibility=pinf,
                        primal_objective=pobj, dual_objective=dobj)
            if gap < tol and pinf < tol:
                status = "optimal"
                break
            if it == max_iter:
                break
            zinvs = [scipy.linalg.cho_solve(scipy.linalg.cho_factor(z), np.eye(len(z)))
                     for z in zs]
            schur = self._schur(xs, zinvs)
            try:
                factor = scipy.linalg.cho_factor(schur)
                solve_m = lambda r: scipy.linalg.cho_solve(factor, r)
            except np.linalg.LinAlgError:
                reg = schur + 1e-13 * np.trace(schur) / self.m * np.eye(self.m)
                solve_m = lambda r: np.linalg.lstsq(reg, r, rcond=None)[0]

            def direction(sigma, corr):
                base = []
                for x, zi, cr in zip(xs, zinvs, corr):
                    t = sigma * mu * zi - x
                    if cr is not None:
                        t = t - cr @ zi
                    base.append(t)
                dy = solve_m(rp + self._adjoint(base))
                dzs = self._apply(dy)
                dxs = []
                for t, x, zi, dz in zip(base, xs, zinvs, dzs):
                    dx = t - x @ dz @ zi
                    dxs.append(0.5 * (dx + dx.T))
                return dy, dxs, dzs

            dy, dxs, dzs = direction(0.0, [None] * len(xs))
            ap = min(self._step(x, d) for x, d in zip(xs, dxs))
            ad = min(self._step(z, d) for z, d in zip(zs, dzs))
            mu_aff = sum(float(np.sum((x + ap * dx) * (z + ad * dz)))
                         for x, dx, z, dz in zip(xs, dxs, zs, dzs)) / self.total
            sigma = min(1.0, max(mu_aff / mu, 0.0) ** 3)
            corr = [dx @ dz for dx, dz in zip(dxs, dzs)]
            dy, dxs, dzs = direction(sigma, corr)
            ap = min(self._step(x, d) for x, d in zip(xs, dxs))
            ad = min(self._step(z, d) for z, d in zip(zs, dzs))
            gamma = 0.9 + 0.09 * min(ap, ad)
            ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
            xs = [0.5 * ((x + ap * d) + (x + ap * d).T) for x, d in zip(xs, dxs)]
            y = y + ad * dy
            zs = [np.eye(s) + f for s, f in zip(sizes, self._apply(y))]
        return y, xs, zs, status, info


# ------------------------------------------------------------ front end

def edge_words(n: int, i: int, j: int) -> list[PauliString]:
    return [PauliString.from_sites(n, {i: c, j: c}) for c in "XYZ"]


def _blocks_for(structure: MomentStructure, symmetric: bool):
    words = structure.basis.words
    if symmetric:
        groups: dict[int, list[int]] = {}
        for a, w in enumerate(words):
            groups.setdefault(word_character(w), []).append(a)
        partitions = [np.array(v) for _, v in sorted(groups.items())]
    else:
        partitions = [np.arange(len(words))]
    raw = []
    used = set()
    for idx in partitions:
        sub_var = structure.cell_var[np.ix_(idx, idx)]
        sub_sign = structure.cell_sign[np.ix_(idx, idx)]
        rows, cols = np.nonzero((sub_var >= 0) & ~np.eye(len(idx), dtype=bool))
        var = sub_var[rows, cols]
        raw.append((idx, rows, cols, var, sub_sign[rows, cols].astype(float)))
        used.update(np.unique(var).tolist())
    used.discard(0)
    free = np.array(sorted(used), dtype=np.int64)
    compact = np.full(structure.num_vars, -1, dtype=np.int64)
    compact[free] = np.arange(len(free))
    blocks = []
    for idx, rows, cols, var, sign in raw:
        cvar = compact[var]
        agg = sp.csr_matrix((sign, (np.arange(len(rows)), cvar)), shape=(len(rows), len(free)))
        blocks.append(_Block(rows, cols, cvar, sign, len(idx), agg))
    return partitions, blocks, free, compact


@dataclass
class SdpSolution:
    graph: WeightedGraph
    k: int
    structure: MomentStructure
    y: np.ndarray           # one value per reduced word in structure.var_words
    moment_matrix: np.ndarray
    objective: float
    status: str
    info: dict = field(default_factory=dict)

    def moment(self, word: PauliString) -> float:
        idx = self.structure.var_index.get(word)
        return 0.0 if idx is None else float(self.y[idx])

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def objective_from_moments(self) -> float:
        n = self.graph.n
        return float(sum(w * (1 - sum(self.moment(p) for p in edge_words(n, i, j)))
                         for i, j, w in self.graph.edges))


def solve_sdp(g: WeightedGraph, k: int = 2, tol: Optional[float] = None,
              symmetric: bool = True, max_iter: int = 100) -> SdpSolution:
    """Maximize sum_e w_e (1 - L(XX) - L(YY) - L(ZZ)) over level-k moment functionals.

    With ``symmetric`` the moment matrix is restricted to functionals that
    are invariant under global X- and Z-conjugation. Averaging any optimum
    over that group keeps it feasible and optimal, and the matrix splits into
    four diagonal blocks.
    """
    tol = DEFAULT_TOL if tol is None else tol
    if g.n < 2:
        raise ValueError("need at least two vertices")
    size = moment_basis_size(g.n, k)
    if size > 1500:
        raise InstanceTooLarge(f"moment matrix of order {size} is beyond desk scale")
    structure = build_moment_structure(moment_basis(g.n, k))
    _, blocks, free, compact = _blocks_for(structure, symmetric)
    var_index = structure.var_index
    c = np.zeros(len(free))
    for i, j, w in g.edges:
        for word in edge_words(g.n, i, j):
            c[compact[var_index[word]]] -= w
    solver = BlockSdp(blocks, c)
    y_c, xs, zs, status, info = solver.solve(tol=tol, max_iter=max_iter)
    y = np.zeros(structure.num_vars)
    y[0] = 1.0
    y[free] = y_c
    moment_matrix = structure.assemble(y).astype(float)
    objective = g.total_weight + float(c @ y_c)
    info = dict(info, symmetric=symmetric, blocks=[b.size for b in blocks], variables=len(free))
    return SdpSolution(g, k, structure, y, moment_matrix, objective, status, info)


@dataclass(frozen=True)
class EdgeValues:
    g: np.ndarray
    h: np.ndarray
    h_plus: np.ndarray

    @classmethod
    def from_g(cls, g_vals) -> "EdgeValues":
        g_vals = np.asarray(g_vals, dtype=float)
        h = g_vals / 2 - 1
        return cls(g_vals, h, np.maximum(h, 0.0))

    @classmethod
    def from_h(cls, h_vals) -> "EdgeValues":
        h = np.asarray(h_vals, dtype=float)
        return cls(2 * (h + 1), h, np.maximum(h, 0.0))


def edge_values(sol: SdpSolution, g: Optional[WeightedGraph] = None) -> EdgeValues:
    g = sol.graph if g is None else g
    vals = [1 - sum(sol.moment(p) for p in edge_words(g.n, i, j)) for i, j, _ in g.edges]
    return EdgeValues.from_g(vals)


@dataclass(frozen=True)
class GramVectors:
    vectors: np.ndarray  # (n, 3 * rank)

    def __len__(self) -> int:
        return len(self.vectors)

    def inner(self, i: int, j: int) -> float:
        return float(self.vectors[i] @ self.vectors[j])


def gram_factor(matrix: np.ndarray, clip: float = PSD_CLIP) -> np.ndarray:
    """Rows r_u with r_u . r_v = matrix[u, v]."""
    vals, vecs = np.linalg.eigh(0.5 * (matrix + matrix.T))
    if vals[0] < -clip:
        raise SolverError(f"moment matrix has eigenvalue {vals[0]:.3e} below -{clip:g}")
    keep = vals > 0
    return vecs[:, keep] * np.sqrt(vals[keep])


def gram_vectors(sol: SdpSolution, clip: float = PSD_CLIP) -> GramVectors:
    """Unit vectors v_i = (v(x_i), v(y_i), v(z_i)) / sqrt(3)."""
    n = sol.graph.n
    factor = gram_factor(sol.moment_matrix, clip)
    index = sol.structure.basis.index
    rows = []
    for i in range(n):
        parts = [factor[index[PauliString.from_sites(n, {i: c})]] for c in "XYZ"]
        vec = np.concatenate(parts) / math.sqrt(3)
        rows.append(vec / np.linalg.norm(vec))
    return GramVectors(np.array(rows))


def c_value(g: WeightedGraph, k: int = 2, tol: Optional[float] = None) -> float:
    """Sum of h_e at the level-k optimum of the unit-weight graph."""
    unit = WeightedGraph.unweighted(g.n, g.pairs)
    if unit.m == 0:
        return 0.0
    sol = solve_sdp(unit, k, tol)
    if not sol.optimal:
        raise SolverError(f"solver stopped with status {sol.status}: {sol.info}")
    return sol.objective / 2 - unit.m


def c_value_exact(g: WeightedGraph) -> float:
    unit = WeightedGraph.unweighted(g.n, g.pairs)
    return lambda_max(unit) / 2 - unit.m


# ----------------------------------------------------------- invariants

@dataclass
class ViolationReport:
    violations: list = field(default_factory=list)
    worst_slack: float = math.inf

    @property
    def ok(self) -> bool:
        return not self.violations


def check_monogamy(vals: EdgeValues, g: WeightedGraph, tol: float = 1e-6) -> ViolationReport:
    """Around every vertex the positive parts h+ sum to at most 1."""
    report = ViolationReport()
    load = np.zeros(g.n)
    for (i, j, _), hp in zip(g.edges, vals.h_plus):
        load[i] += hp
        load[j] += hp
    for v in range(g.n):
        slack = 1 - load[v]
        report.worst_slack = min(report.worst_slack, slack)
        if slack < -tol:
            report.violations.append((v, float(load[v])))
    return report


def pair_bound(h: float) -> float:
    """Largest h on an edge adjacent to one carrying h."""
    h = min(1.0, max(-1.0, h))
    return 0.5 * (math.sqrt(3 * (1 - h * h)) - h)


def check_pair_bound(vals: EdgeValues, g: WeightedGraph, tol: float = 1e-6) -> ViolationReport:
    report = ViolationReport()
    incident: dict[int, list[int]] = {}
    for e, (i, j, _) in enumerate(g.edges):
        incident.setdefault(i, []).append(e)
        incident.setdefault(j, []).append(e)
    for edges in incident.values():
        for e in edges:
            for f in edges:
                if e == f:
                    continue
                slack = pair_bound(vals.h[e]) - vals.h[f]
                report.worst_slack = min(report.worst_slack, slack)
                if slack < -tol:
                    report.violations.append((e, f, float(vals.h[e]), float(vals.h[f])))
    return report


def check_triangles(vals: EdgeValues, g: WeightedGraph, tol: float = 1e-6) -> ViolationReport:
    """On every triangle the three h values sum to at most 0."""
    report = ViolationReport()
    eidx = g.edge_index
    for (i, j), e in eidx.items():
        for l in range(j + 1, g.n):
            f, h = eidx.get((i, l)), eidx.get((j, l))
            if f is None or h is None:
                continue
            total = vals.h[e] + vals.h[f] + vals.h[h]
            report.worst_slack = min(report.worst_slack, -total)
            if total > tol:
                report.violations.append(((i, j, l), float(total)))
    return report


def solution_report(sol: SdpSolution) -> dict:
    vals = edge_values(sol)
    return {
        "graph": sol.graph.to_json(),
        "k": sol.k,
        "status": sol.status,
        "objective": sol.objective,
        "info": sol.info,
        "basis": [str(w) for w in sol.structure.basis.words],
        "moments": {str(w): float(v) for w, v in zip(sol.structure.var_words, sol.y) if v != 0},
        "edges": [
            {"edge": [i, j], "g": float(a), "h": float(b), "h_plus": float(c)}
            for (i, j, _), a, b, c in zip(sol.graph.edges, vals.g, vals.h, vals.h_plus)
        ],
    }


def dump_solution(sol: SdpSolution, path, include_matrix: bool = False) -> None:
    doc = solution_report(sol)
    if include_matrix:
        doc["moment_matrix"] = sol.moment_matrix.tolist()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
