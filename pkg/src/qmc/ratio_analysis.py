"""Closed-form ratio machinery: q, alpha(mu), the Theta family, zeta, delta,
the bipartite ratio, and numeric certificates for the upper bounds."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

X_MIN = -1 + 1e-6
X_STEP = 1e-4

# Table of lower bounds on alpha(mu), truncated to three digits.
ALPHA_TABLE = (
    (Fraction(4, 5), 0.595, 0.672, 0.152),
    (Fraction(6, 7), 0.599, 0.697, 0.153),
    (Fraction(8, 9), 0.601, 0.709, 0.146),
    (Fraction(10, 11), 0.602, 0.716, 0.139),
    (Fraction(12, 13), 0.602, 0.721, 0.142),
    (Fraction(14, 15), 0.603, 0.724, 0.131),
    (Fraction(1), 0.606, 0.744, 0.115),
)

# Upper-bound constants used by the two Farkas/concavity certificates.
TRIANGLE_FREE_UB = 0.61392
BIPARTITE_UB = 0.8339


class DomainError(ValueError):
    pass


# ---------------------------------------------------------- hypergeometric

def _series(a, b, c, z, rtol=1e-16, max_terms=10000):
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(max_terms):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total = total + term
        if np.all(np.abs(term) <= rtol * np.abs(total)) and np.all(np.abs(term) < 1e-14):
            return total
    raise ArithmeticError("hypergeometric series did not converge")


def gauss_2f1(a: float, b: float, c: float, z):
    """Gauss hypergeometric function for real z in (-1, 1].

    Direct series for |z| <= 1/2. For z > 1/2 the 1-z connection formula is
    used (needs c-a-b non-integer), and at z = 1 Gauss's closed form.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= -1) or np.any(z_arr > 1):
        raise DomainError("argument outside (-1, 1]")
    s = c - a - b
    out = np.empty_like(z_arr)
    near = z_arr > 0.5
    if np.any(~near):
        out[~near] = _series(a, b, c, z_arr[~near])
    if np.any(near):
        if s <= 0:
            raise DomainError("series diverges at z = 1 unless c - a - b > 0")
        if float(s).is_integer():
            raise DomainError("connection formula needs non-integer c - a - b")
        g = math.gamma
        w = 1 - z_arr[near]
        first = g(c) * g(s) / (g(c - a) * g(c - b)) * _series(a, b, 1 - s, w)
        second = g(c) * g(-s) / (g(a) * g(b)) * _series(c - a, c - b, 1 + s, w)
        out[near] = first + np.power(w, s) * second
    return float(out) if np.ndim(z) == 0 else out


def gauss_2f1_rational(a: Fraction, b: Fraction, c: Fraction, z: Fraction, terms: int) -> Fraction:
    """Truncated series in exact rational arithmetic."""
    total = Fraction(0)
    term = Fraction(1)
    for k in range(terms):
        total += term
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * z
    return total


def q(x):
    """Expected cut value factor of hyperplane-style rounding of 3D projections."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < -1 - 1e-12) or np.any(x_arr > 1 + 1e-12):
        raise DomainError("q is defined on [-1, 1]")
    x_arr = np.clip(x_arr, -1.0, 1.0)
    arg = ((1 + 2 * x_arr) / 3) ** 2
    out = 1 + (8 + 16 * x_arr) / (9 * math.pi) * gauss_2f1(0.5, 0.5, 2.5, arg)
    return float(out) if np.ndim(x) == 0 else out


# ------------------------------------------------------------------ alpha

_GRID_CACHE: dict = {}


def _x_grid(step: float = X_STEP):
    key = step
    if key not in _GRID_CACHE:
        xs = np.unique(np.concatenate([np.arange(X_MIN, 1.0, step), [0.0, 1.0]]))
        _GRID_CACHE[key] = (xs, q(xs))
    return _GRID_CACHE[key]


def _alpha_obj(x, p, mu, qx=None):
    qx = q(x) if qx is None else qx
    xp = np.maximum(x, 0.0)
    return (p * qx + (1 - p) * (1 + 3 * mu * xp)) / (2 + 2 * x)


def _refined_min(fun, xs, vals, step):
    """Grid minimum refined by bounded Brent search around the best cell."""
    i = int(np.argmin(vals))
    lo, hi = max(xs[0], xs[i] - step), min(xs[-1], xs[i] + step)
    best_x, best_v = float(xs[i]), float(vals[i])
    if hi > lo:
        res = minimize_scalar(fun, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if res.fun < best_v:
            best_x, best_v = float(res.x), float(res.fun)
    return best_x, best_v


def alpha_inner(p: float, mu: float, step: float = X_STEP) -> tuple[float, float]:
    """(argmin, min) over x in (-1, 1] of the product-or-matching ratio expression."""
    xs, qx = _x_grid(step)
    vals = _alpha_obj(xs, p, mu, qx)
    return _refined_min(lambda x: float(_alpha_obj(x, p, mu)), xs, vals, step)


@dataclass
class RatioReport:
    mu: float
    value: float
    p_star: float
    x_star: float
    theta: Optional["ThetaSpec"] = None
    h_max: Optional[float] = None
    theta_star: Optional[float] = None
    extra: dict = field(default_factory=dict)


def _maximize_concave(fun, lo=0.0, hi=1.0, coarse: int = 201):
    ps = np.linspace(lo, hi, coarse)
    vals = np.array([fun(p) for p in ps])
    i = int(np.argmax(vals))
    a, b = ps[max(i - 1, 0)], ps[min(i + 1, coarse - 1)]
    res = minimize_scalar(lambda p: -fun(p), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-10})
    if -res.fun >= vals[i]:
        return float(res.x), float(-res.fun)
    return float(ps[i]), float(vals[i])


def alpha(mu: float, step: float = X_STEP, coarse: int = 201) -> RatioReport:
    """max over p of min over x of the product-or-matching ratio expression.

    The inner minimum is concave in p (a minimum of affine functions), so a
    coarse p grid followed by bounded Brent refinement finds the maximizer.
    ``x_star`` is the inner minimizer at p* rounded to three digits; at the
    exact p* two minimizers tie and the choice between them is arbitrary.
    """
    if not 0 <= mu <= 1:
        raise DomainError("mu must lie in [0, 1]")
    mu = float(mu)
    p_star, value = _maximize_concave(lambda p: alpha_inner(p, mu, step)[1], coarse=coarse)
    x_exact = alpha_inner(p_star, mu, step)[0]
    x_rounded = alpha_inner(round(p_star, 3), mu, step)[0]
    return RatioReport(mu, value, p_star, x_rounded,
                       extra={"x_at_exact_p": x_exact})


def alpha_table_report(step: float = X_STEP) -> list[tuple[RatioReport, float, float, float]]:
    """(report, printed floor, printed p*, printed x*) for each tabulated mu."""
    return [(alpha(float(mu), step), floor, p, x) for mu, floor, p, x in ALPHA_TABLE]


# ------------------------------------------------------------------ Theta

ThetaFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ThetaSpec:
    """One of the three rotation-angle families: R x, R x^2 or 1 - exp(-R x)."""

    family: str
    R: float
    strict: bool = True

    FAMILIES = ("linear", "quadratic", "exponential")

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if self.strict:
            if self.family in ("linear", "quadratic") and not 0 <= self.R <= 1:
                raise DomainError(f"{self.family} family needs R in [0, 1]")
            if self.family == "exponential" and self.R < 0:
                raise DomainError("exponential family needs R >= 0")

    @classmethod
    def parse(cls, text: str) -> "ThetaSpec":
        family, _, value = text.partition(":")
        return cls(family.strip(), float(value))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "linear":
            out = self.R * x
        elif self.family == "quadratic":
            out = self.R * x * x
        else:
            out = -np.expm1(-self.R * x)
        return float(out) if out.ndim == 0 else out

    def __str__(self) -> str:
        return f"{self.family}:{self.R:g}"


def theta_eval(theta: Union[ThetaSpec, ThetaFn], x):
    return theta(x)


def theta_membership_test(theta: Union[ThetaSpec, ThetaFn], resolution: int = 400,
                          tol: float = 1e-9) -> bool:
    """Grid check of Theta(0) = 0, Theta(1) <= 1, monotonicity and the
    product-minimum identity min_x (1-T(x))(1-T(c-x)) = 1 - T(c)."""
    grid = np.linspace(0.0, 1.0, resolution + 1)
    vals = np.asarray(theta(grid), dtype=float)
    if abs(vals[0]) > tol or vals[-1] > 1 + tol:
        return False
    if np.any(np.diff(vals) < -tol):
        return False
    for idx, c in enumerate(grid):
        xs = grid[: idx + 1]
        prod = (1 - vals[: idx + 1]) * (1 - np.asarray(theta(c - xs), dtype=float))
        if abs(prod.min() - (1 - vals[idx])) > tol:
            return False
    return True


# -------------------------------------------------------- triangle-free

def beta(theta, x, mu):
    x = np.asarray(x, dtype=float)
    xp = np.maximum(x, 0.0)
    t1 = np.asarray(theta(1 - xp), dtype=float)
    root = np.sqrt(np.clip(np.asarray(theta(xp), dtype=float) * (1 - t1), 0.0, None))
    out = q(x) * (1 - t1 / 2 + (2 / math.pi + mu * (math.pi - 2) / math.pi * xp) * root)
    return float(out) if out.ndim == 0 else out


def zeta(theta, x, mu, p, qx=None):
    x = np.asarray(x, dtype=float)
    if np.any(x <= -1) or np.any(x > 1):
        raise DomainError("zeta is defined on (-1, 1]")
    xp = np.maximum(x, 0.0)
    if qx is None:
        b = beta(theta, x, mu)
    else:
        t1 = np.asarray(theta(1 - xp), dtype=float)
        root = np.sqrt(np.clip(np.asarray(theta(xp), dtype=float) * (1 - t1), 0.0, None))
        b = qx * (1 - t1 / 2 + (2 / math.pi + mu * (math.pi - 2) / math.pi * xp) * root)
    out = (p * b + (1 - p) * (1 + 3 * mu * xp)) / (2 + 2 * x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ZetaMin:
    value: float        # refined minimum (an upper estimate of the true minimum)
    lower_bound: float  # grid minimum minus a local slope allowance
    argmin: float


def zeta_star_detail(theta, mu: float, p: float, step: float = X_STEP) -> ZetaMin:
    """min over (-1, 1] of zeta.

    Cells where the sampled values are monotone on both sides contribute
    their smaller end point. Cells touching a discrete local minimum also
    subtract the cell width times the smaller of the two neighbouring slopes
    (the larger one is unbounded at the square-root kink x = 0).
    """
    xs, qx = _x_grid(step)
    vals = zeta(theta, xs, mu, p, qx)
    x_best, v_best = _refined_min(lambda x: zeta(theta, x, mu, p), xs, vals, step)
    diffs = np.diff(vals)
    slopes = np.abs(diffs) / np.diff(xs)
    local = np.minimum(np.r_[slopes[:1], slopes[:-1]], np.r_[slopes[1:], slopes[-1:]])
    sign = np.sign(diffs)
    turn = (np.r_[sign[:1], sign[:-1]] != sign) | (np.r_[sign[1:], sign[-1:]] != sign)
    cell_lb = np.minimum(vals[:-1], vals[1:]) - np.where(turn, local * np.diff(xs), 0.0)
    return ZetaMin(v_best, float(min(cell_lb.min(), v_best)), x_best)


def zeta_star(theta, mu: float, p: float, step: float = X_STEP) -> float:
    return zeta_star_detail(theta, mu, p, step).value


def best_p_for_theta(theta, mu: float, step: float = X_STEP, coarse: int = 41):
    """(p*, max_p zeta*) ; zeta* is concave in p."""
    return _maximize_concave(lambda p: zeta_star(theta, mu, p, step), coarse=coarse)


@dataclass
class ThetaSearchResult:
    best: ThetaSpec
    p_star: float
    value: float
    per_family: dict


def search_theta(mu: float = 14 / 15, step: float = 5e-4,
                 families: Sequence[str] = ThetaSpec.FAMILIES,
                 r_bounds: Optional[dict] = None) -> ThetaSearchResult:
    """Maximize max_p zeta*_Theta(mu, p) over R within each family."""
    r_bounds = r_bounds or {"linear": (0.0, 1.0), "quadratic": (0.0, 1.0),
                            "exponential": (0.0, 10.0)}
    per_family = {}
    for family in families:
        lo, hi = r_bounds[family]

        def score(r, family=family):
            return best_p_for_theta(ThetaSpec(family, r), mu, step)[1]

        rs = np.linspace(lo, hi, 21)
        vals = [score(r) for r in rs]
        i = int(np.argmax(vals))
        a, b = rs[max(i - 1, 0)], rs[min(i + 1, len(rs) - 1)]
        res = minimize_scalar(lambda r: -score(r), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-5})
        r_best = float(res.x) if -res.fun >= vals[i] else float(rs[i])
        spec = ThetaSpec(family, r_best)
        p_best, _ = best_p_for_theta(spec, mu, step)
        # final value on the fine grid
        p_best, value = best_p_for_theta(spec, mu, X_STEP)
        per_family[family] = (spec, p_best, value)
    best_family = max(per_family, key=lambda f: per_family[f][2])
    spec, p_best, value = per_family[best_family]
    return ThetaSearchResult(spec, p_best, value, per_family)


# ---- certificate for the triangle-free upper bound

def _tf_constants(mu: float = 14 / 15):
    c1 = (4 + mu * (math.pi - 2)) / (2 * math.pi)
    c2 = 1 + 3 * mu / 2
    return c1, c2, q(0.0), q(0.5)


def tf_f(z, p, mu=14 / 15):
    c1, c2, _, q_half = _tf_constants(mu)
    return (p * q_half * (1 - z / 2 + c1 * math.sqrt(z * (1 - z))) + (1 - p) * c2) / 3


def tf_h(z, p, mu=14 / 15):
    q0 = _tf_constants(mu)[2]
    return 1 - math.sqrt((4 * z - 2) / (p * q0) + 2 / q0 - 1)


def tf_u(p, r=TRIANGLE_FREE_UB, mu=14 / 15):
    q0 = _tf_constants(mu)[2]
    return (2 - q0) / q0 + (4 * r - 2) / (p * q0)


def tf_g(p, r=TRIANGLE_FREE_UB, mu=14 / 15):
    return tf_f(tf_h(r, p, mu), p, mu)


def tf_g_prime(p, r=TRIANGLE_FREE_UB, mu=14 / 15):
    """Chain rule: g'(p) = D1 f(h(p), p) h'(p) + D2 f(h(p), p)."""
    c1, c2, q0, q_half = _tf_constants(mu)
    z = tf_h(r, p, mu)
    s = tf_u(p, r, mu)
    d1 = p * q_half / 6 * (c1 * (1 - 2 * z) / math.sqrt(z * (1 - z)) - 1)
    d2 = (q_half * (1 - z / 2 + c1 * math.sqrt(z * (1 - z))) - c2) / 3
    dh = (4 * r - 2) / (2 * p * p * q0 * math.sqrt(s))
    return d1 * dh + d2


@dataclass
class CertificateReport:
    name: str
    checks: list = field(default_factory=list)  # (label, ok, detail)

    def add(self, label: str, ok: bool, detail: str = "") -> None:
        self.checks.append((label, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def lines(self) -> list[str]:
        return [f"{'PASS' if ok else 'FAIL'}  {label}  {detail}" for label, ok, detail in self.checks]


def _near(value, target, tol=5e-4):
    return abs(value - target) <= tol


def triangle_free_certificates(r: float = TRIANGLE_FREE_UB, mu: float = 14 / 15,
                               p1: float = 0.897, p2: float = 0.898) -> CertificateReport:
    rep = CertificateReport("triangle-free upper bound")
    c1, _, q0, _ = _tf_constants(mu)
    ell = (2 * r - 1) / (q0 - 1)
    g_ell = tf_f(0.0, ell, mu)
    u1 = tf_u(1.0, r, mu)
    gp1, gp2 = tf_g_prime(p1, r, mu), tf_g_prime(p2, r, mu)
    mvt = gp1 * (p2 - p1) + tf_g(p1, r, mu)
    z_cap = 0.5 * (1 - 1 / math.sqrt(4 * c1 * c1 + 1))
    rep.add("ell ~ 0.7961", _near(ell, 0.7961), f"ell={ell:.5f}")
    rep.add("g(ell) ~ 0.587 and below r", _near(g_ell, 0.587) and g_ell < r, f"g(ell)={g_ell:.5f}")
    rep.add("u(1) ~ 0.909 in (0, 1)", _near(u1, 0.909) and 0 < u1 < 1, f"u(1)={u1:.5f}")
    rep.add("g'(p1) > 0", gp1 > 0, f"g'({p1})={gp1:.3e}")
    rep.add("g'(p2) < 0", gp2 < 0, f"g'({p2})={gp2:.3e}")
    rep.add("MVT bound ~ 0.61391 and below r", _near(mvt, 0.61391) and mvt < r, f"bound={mvt:.6f}")
    rep.add("h(r, 1) below the monotonicity cap", tf_h(r, 1.0, mu) <= z_cap,
            f"h={tf_h(r, 1.0, mu):.5f} cap={z_cap:.5f}")
    ps = np.linspace(ell + 1e-9, 1.0, 2001)
    gs = np.array([tf_g(p, r, mu) for p in ps])
    rep.add("grid max of g below r", gs.max() < r, f"max={gs.max():.6f} at p={ps[gs.argmax()]:.4f}")
    return rep


# ------------------------------------------------------------- bipartite

def delta(theta, x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= -1) or np.any(x > 1):
        raise DomainError("delta is defined on (-1, 1]")
    xp = np.maximum(x, 0.0)
    t1 = np.asarray(theta(1 - xp), dtype=float)
    root = np.sqrt(np.clip(np.asarray(theta(xp), dtype=float) * (1 - t1), 0.0, None))
    out = (2 - t1 + 2 * root) / (2 + 2 * x)
    return float(out) if out.ndim == 0 else out


def bipartite_components(R: float, h_max: float, theta_star: float) -> dict:
    theta = ThetaSpec("linear", R)
    return {
        "large_h": (2 - theta_star) / (2 + math.sqrt(3 * (1 - h_max ** 2)) - h_max),
        "delta_0": delta(theta, 0.0),
        "delta_h_max": delta(theta, h_max),
        "capped": (1 + math.sqrt(theta_star)) / 2,
    }


def bipartite_ratio(R: float, h_max: float, theta_star: float,
                    grid: int = 20001) -> RatioReport:
    """Guaranteed ratio of the bipartite algorithm with Theta(x) = R x.

    For R in [0, 1/2] the minimum of delta over [0, h_max] sits at an end
    point; a dense grid over the interval is kept as a cross-check.
    """
    if not 0 <= R <= 0.5:
        raise DomainError("R must lie in [0, 1/2]")
    if not math.sqrt(3) / 2 - 1e-12 <= h_max <= 1:
        raise DomainError("h_max must lie in [sqrt(3)/2, 1]")
    if not 0 <= theta_star <= 1:
        raise DomainError("theta_star must lie in [0, 1]")
    comps = bipartite_components(R, h_max, theta_star)
    value = min(comps.values())
    xs = np.linspace(0.0, h_max, grid)
    dense_min = float(delta(ThetaSpec("linear", R), xs).min())
    endpoint_min = min(comps["delta_0"], comps["delta_h_max"])
    return RatioReport(float("nan"), value, float("nan"), float("nan"),
                       theta=ThetaSpec("linear", R), h_max=h_max, theta_star=theta_star,
                       extra={"components": comps, "dense_delta_min": dense_min,
                              "endpoint_delta_min": endpoint_min})


FARKAS_M = np.array([[0.69, 1, 1, 0, 0], [1, -0.183, 0, -1, 0], [-0.9, 1, 0, 0, -1]])
FARKAS_B = np.array([0.3330, -0.0423, 0.3088])
FARKAS_Y = np.array([0.824, -1.447, -1.087])


def _bip_fs(r: float):
    c2 = (4 - math.sqrt(3)) * r - 2
    c3 = (2 + math.sqrt(3)) * r - 2
    f1 = lambda x: 0.69 * x + (2 * r + x - 2) / (x - 1)
    f2 = lambda x: max(c2 + x, 0.0) ** 2 / (4 * (1 - x)) - 0.183 * x
    f3 = lambda x: -0.9 * x + (c3 + x) ** 2 / (4 * (1 - x))
    return c2, c3, f1, f2, f3


def _extremum(fun, lo, hi, sign=1.0, n=20001):
    xs = np.linspace(lo, hi, n)
    vals = np.array([sign * fun(x) for x in xs])
    i = int(np.argmin(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    res = minimize_scalar(lambda x: sign * fun(x), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12})
    if res.fun <= vals[i]:
        return float(res.x), float(sign * res.fun)
    return float(xs[i]), float(sign * vals[i])


def bipartite_upper_bound_certificate(r: float = BIPARTITE_UB) -> CertificateReport:
    rep = CertificateReport("bipartite upper bound")
    c2, c3, f1, f2, f3 = _bip_fs(r)
    top = 2 * (1 - r)
    x1, v1 = _extremum(f1, 0.0, top, sign=-1.0)
    x2, v2 = _extremum(f2, 0.0, top)
    x3, v3 = _extremum(f3, 0.0, top)
    mty = FARKAS_M.T @ FARKAS_Y
    bty = float(FARKAS_B @ FARKAS_Y)
    rep.add("c2 ~ -0.109", _near(c2, -0.109), f"c2={c2:.5f}")
    rep.add("c3 ~ 1.112", _near(c3, 1.112), f"c3={c3:.5f}")
    rep.add("max f1 ~ 0.332 and below 0.3330", _near(v1, 0.332) and v1 < 0.3330,
            f"f1({x1:.4f})={v1:.5f}")
    rep.add("min f2 ~ -0.0422 and above -0.0423", _near(v2, -0.0422) and v2 > -0.0423,
            f"f2({x2:.4f})={v2:.5f}")
    rep.add("min f3 ~ 0.309 and above 0.3088", _near(v3, 0.309) and v3 > 0.3088,
            f"f3({x3:.4f})={v3:.5f}")
    rep.add("M^T y >= 0", bool(np.all(mty >= 0)), f"M^T y={np.round(mty, 6).tolist()}")
    rep.add("b^T y < 0", bty < 0, f"b^T y={bty:.6f}")
    r_from_c2 = (-0.109 + 2) / (4 - math.sqrt(3))
    r_from_c3 = (1.112 + 2) / (2 + math.sqrt(3))
    rep.add("r back-solved from c2 ~ 0.834", _near(r_from_c2, 0.834), f"r={r_from_c2:.5f}")
    rep.add("r back-solved from c3 ~ 0.834", _near(r_from_c3, 0.834), f"r={r_from_c3:.5f}")
    return rep


# ---------------------------------------------------------------- output

def write_zeta_curve(path, theta, mu: float, p: float, lo: float = -0.1, hi: float = 0.8,
                     points: int = 901) -> None:
    xs = np.linspace(lo, hi, points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "zeta"])
        for x, v in zip(xs, zeta(theta, xs, mu, p)):
            w.writerow([f"{x:.6f}", f"{v:.8f}"])


def write_alpha_table(path, rows=None) -> None:
    rows = alpha_table_report() if rows is None else rows
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mu", "alpha", "p_star", "x_star", "printed_floor", "printed_p", "printed_x"])
        for rep, floor, p, x in rows:
            w.writerow([f"{rep.mu:.10f}", f"{rep.value:.7f}", f"{rep.p_star:.5f}",
                        f"{rep.x_star:.5f}", floor, p, x])
